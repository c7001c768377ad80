import json

import pytest

from xbarmem.cli import main

SMALL = {
    "channel-map": ["--rows", "8", "--cols", "8", "--r-line", "40"],
    "capacity": ["--rows", "8", "--cols", "8", "--r-line", "10,50"],
    "threshold": ["--sizes", "16,32", "--r-line", "20"],
    "ldca": ["--n", "32", "--ts", "1,2,3", "--goal-t", "2", "--r-line", "10,100"],
    "code-sim": ["--n", "32", "--ts", "2", "--r-line", "200", "--ldca-ts", "1,2,3", "--goal-t", "2",
                 "--min-events", "5", "--max-frames", "200"],
}


def _run(cmd, out, *extra):
    return main([cmd, *SMALL[cmd], "--out", str(out), *extra])


@pytest.mark.parametrize("cmd", sorted(SMALL))
def test_byte_identical_reruns(tmp_path, cmd, capsys):
    assert _run(cmd, tmp_path / "a", "--seed", "11") == 0
    assert _run(cmd, tmp_path / "b", "--seed", "11") == 0
    a = sorted(p.name for p in (tmp_path / "a").iterdir())
    b = sorted(p.name for p in (tmp_path / "b").iterdir())
    assert a == b and "summary.json" in a
    for name in a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    capsys.readouterr()


def test_artifact_headers(tmp_path, capsys):
    assert _run("channel-map", tmp_path, "--seed", "3") == 0
    out = json.loads(capsys.readouterr().out)
    assert "cascaded_ber.pgm" in out["files"]
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["seed"] == 3 and len(doc["spec_sha256"]) == 64
    lines = (tmp_path / "cascaded_ber.csv").read_text().splitlines()
    assert lines[0] == "#8,8,cascaded_ber,3"
    assert lines[1] == f"# spec_sha256={doc['spec_sha256']}"
    pgm = (tmp_path / "cascaded_ber.pgm").read_bytes()
    assert pgm.startswith(b"P5\n# spec_sha256=")


def test_hash_tracks_inputs(tmp_path, capsys):
    _run("capacity", tmp_path / "a")
    _run("capacity", tmp_path / "b", "--seed", "1")
    main(["capacity", "--rows", "8", "--cols", "8", "--r-line", "10", "--out", str(tmp_path / "c")])
    h = [json.loads((tmp_path / d / "summary.json").read_text())["spec_sha256"] for d in "abc"]
    assert len(set(h)) == 3
    capsys.readouterr()


def test_refuses_overwrite(tmp_path, capsys):
    assert _run("capacity", tmp_path) == 0
    capsys.readouterr()
    assert _run("capacity", tmp_path) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "CliError" and "--force" in err["message"]
    assert _run("capacity", tmp_path, "--force") == 0


def test_error_json(tmp_path, capsys):
    rc = main(["ldca", "--n", "32", "--ts", "1,2", "--c-dec", "1", "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["command"] == "ldca" and "c-dec" in err["message"]
    rc = main(["capacity", "--seed", "-1", "--out", str(tmp_path)])
    assert rc == 1


def test_degenerate_inputs(tmp_path, capsys):
    assert main(["channel-map", "--rows", "1", "--cols", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(["ldca", "--n", "32", "--ts", "2", "--goal-t", "2", "--r-line", "50",
                 "--out", str(tmp_path / "b")]) == 0
    doc = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert doc["runs"][0]["counts"] == [32]
    capsys.readouterr()


def test_table2_preset(tmp_path, capsys):
    assert main(["capacity", "--preset", "table2", "--r-line", "10", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["monotone"] and len(doc["capacities"]) == 6
    capsys.readouterr()
