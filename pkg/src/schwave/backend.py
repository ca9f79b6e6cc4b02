"""Selects the stepping kernel: compiled Cython core or numpy fallback.

The compiled extension is optional; if it failed to build (or the
environment variable SCHWAVE_BACKEND=numpy forces the fallback) the pure
numpy implementation is used with identical semantics.
"""

from __future__ import annotations

import os

from . import _core_py

try:  # pragma: no cover - depends on the build environment
    from . import _core_cy
except ImportError:  # pragma: no cover
    _core_cy = None

_forced = os.environ.get("SCHWAVE_BACKEND", "").lower()
if _forced not in ("", "numpy", "cython"):
    raise RuntimeError(f"SCHWAVE_BACKEND must be 'numpy' or 'cython', got {_forced!r}")
if _forced == "cython" and _core_cy is None:
    raise RuntimeError("SCHWAVE_BACKEND=cython but the compiled core is unavailable")

if _core_cy is not None and _forced != "numpy":
    BACKEND = "cython"
    _default = _core_cy.leapfrog_window
else:
    BACKEND = "numpy"
    _default = _core_py.leapfrog_window

taylor_first_step = _core_py.taylor_first_step


def leapfrog_window(*args, forcing=None):
    """Dispatch one leapfrog step; forced runs always use the numpy kernel."""
    if forcing is not None:
        return _core_py.leapfrog_window(*args, forcing=forcing)
    return _default(*args)


def available_backends() -> dict:
    """Name -> kernel mapping for benchmarks and equivalence tests."""
    out = {"numpy": _core_py.leapfrog_window}
    if _core_cy is not None:
        out["cython"] = _core_cy.leapfrog_window
    return out
