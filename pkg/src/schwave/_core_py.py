"""Pure-numpy stepping kernels; fallback when the compiled core is absent.

The compiled twin (_core_cy) implements leapfrog_window with identical
semantics; both are exercised by the test suite and the benchmark.
"""

from __future__ import annotations

import numpy as np


def _abs_pow(a: np.ndarray, p: float) -> np.ndarray:
    b = np.abs(a)
    if p == 2.0:
        return b * b
    return b**p


def leapfrog_window(v_prev, v_curr, v_next, W, h, phi, p, dt, inv_ds2, lo, hi,
                    forcing=None):
    """Advance one leapfrog step on the index window [lo, hi].

    Scheme: v_next = 2 v - v_prev + dt^2 (D2 v - W v + h |vt*|^p [+ forcing]),
    with a backward-difference predictor for vt* followed by one corrector
    pass using the centered difference through the predicted level.  Writes
    v_next in place and returns

        (max |vt|, sum phi*vt, sum h*phi*|vt|^p)

    where vt = (v_next - v_prev) / 2dt is the centered derivative at the
    *current* level and the sums run over the window, unweighted by ds.
    """
    w = slice(lo, hi + 1)
    dt2 = dt * dt
    vp = v_prev[w]
    vc = v_curr[w]
    lap = (v_curr[lo - 1:hi] - 2.0 * vc + v_curr[lo + 1:hi + 2]) * inv_ds2
    lin = lap - W[w] * vc
    if forcing is not None:
        lin = lin + forcing[w]
    base = 2.0 * vc - vp
    pred = (vc - vp) / dt
    vn = base + dt2 * (lin + h[w] * _abs_pow(pred, p))
    vtc = (vn - vp) * (0.5 / dt)
    vn = base + dt2 * (lin + h[w] * _abs_pow(vtc, p))
    v_next[w] = vn
    vt = (vn - vp) * (0.5 / dt)
    avt = _abs_pow(vt, p)
    return (
        float(np.max(np.abs(vt))) if vt.size else 0.0,
        float(phi[w] @ vt),
        float((h[w] * phi[w]) @ avt),
    )


def taylor_first_step(v0, vt0, W, h, p, dt, inv_ds2, forcing=None):
    """Bootstrap level 1 from the Cauchy data via the PDE-completed Taylor step."""
    v1 = np.zeros_like(v0)
    lap = (v0[:-2] - 2.0 * v0[1:-1] + v0[2:]) * inv_ds2
    acc = lap - W[1:-1] * v0[1:-1] + h[1:-1] * _abs_pow(vt0[1:-1], p)
    if forcing is not None:
        acc = acc + forcing[1:-1]
    v1[1:-1] = v0[1:-1] + dt * vt0[1:-1] + 0.5 * dt * dt * acc
    return v1
