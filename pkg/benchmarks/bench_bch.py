"""Throughput of the compiled and pure-Python BCH error locators.

Usage: python benchmarks/bench_bch.py [--n 128] [--t 4] [--words 20000]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from xbarmem.bch import compiled_available, decode_batch, encode_batch, make_code


def make_batch(code, words, errors, seed):
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 2, size=(words, code.k), dtype=np.uint8)
    cw = encode_batch(code, data)
    rx = cw.copy()
    for w in range(words):
        rx[w, rng.choice(code.n, errors, replace=False)] ^= 1
    return cw, rx


def run(code, rx, kernel, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out, cnt = decode_batch(code, rx, kernel)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--t", type=int, default=4)
    ap.add_argument("--words", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    code = make_code(args.n, args.t)
    cw, rx = make_batch(code, args.words, args.t, args.seed)
    kernels = ["python"] + (["cython"] if compiled_available() else [])
    timings = {}
    for k in kernels:
        sec, out = run(code, rx, k, args.repeat)
        if not np.array_equal(out, cw):
            raise SystemExit(f"{k} kernel failed to correct the batch")
        timings[k] = sec
        print(f"{code.label():>16}  {k:>7}  {args.words / sec:12.0f} words/s  ({sec * 1e3:.1f} ms)")
    if len(timings) == 2:
        print(f"speedup: {timings['python'] / timings['cython']:.1f}x")
    else:
        print("compiled kernel not built; only the Python kernel was timed")


if __name__ == "__main__":
    main()
