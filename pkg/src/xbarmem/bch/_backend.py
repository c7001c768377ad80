"""Pick the error-location kernel at import time.

The compiled extension is used when it is importable; setting
``XBARMEM_PURE_PYTHON=1`` forces the pure-Python kernel.
"""
from __future__ import annotations

import os

from . import _kernel_py


def _load():
    if os.environ.get("XBARMEM_PURE_PYTHON", "") == "1":
        return "python", _kernel_py.locate_errors
    try:
        from . import _kernel_cy
    except ImportError:
        return "python", _kernel_py.locate_errors
    return "cython", _kernel_cy.locate_errors


BACKEND, locate_errors = _load()


def get_kernel(name: str | None = None):
    """Return ``(name, locate_errors)`` for ``"cython"``, ``"python"`` or the active default."""
    if name is None:
        return BACKEND, locate_errors
    if name == "python":
        return "python", _kernel_py.locate_errors
    if name == "cython":
        from . import _kernel_cy

        return "cython", _kernel_cy.locate_errors
    raise ValueError(f"unknown kernel {name!r}")


def compiled_available() -> bool:
    try:
        from . import _kernel_cy  # noqa: F401
    except ImportError:
        return False
    return True
