"""Schwarzschild radius <-> tortoise coordinate maps and cached grid tables.

The tortoise coordinate s = r + 2M ln(r - 2M) maps the exterior region
r > 2M onto the whole real line.  Near the horizon the gap x = r - 2M is
exponentially small in s, so every routine here treats x (not r) as the
primary unknown: computing x by subtracting two nearly equal doubles would
destroy all precision exactly where the potentials need it most.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "SpatialGrid",
    "tortoise_from_radius",
    "radius_from_tortoise",
    "horizon_gap_from_tortoise",
    "build_grid",
]

# Newton/bisection iteration cap for the coordinate inversion.
_MAX_ITER = 200


@dataclass(frozen=True)
class ModelParams:
    """Physical dial set: mass, nonlinearity exponent, data amplitude and radius.

    Exponents below 3/2 fall outside the regime where the blow-up machinery
    is claimed to work and must be requested explicitly via ``exploratory``.
    """

    M: float
    p: float
    epsilon: float
    R: float
    exploratory: bool = False

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"mass must be positive, got M={self.M}")
        if not self.epsilon > 0:
            raise ValueError(f"amplitude must be positive, got epsilon={self.epsilon}")
        if not self.R > 0:
            raise ValueError(f"data radius must be positive, got R={self.R}")
        if not 1.0 < self.p <= 2.0:
            raise ValueError(f"exponent must lie in (1, 2], got p={self.p}")
        if self.p < 1.5 and not self.exploratory:
            raise ValueError(
                f"p={self.p} < 3/2 is outside the supported regime; "
                "pass exploratory=True to study it anyway"
            )


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Uniform tortoise-coordinate grid with cached coordinate and potential tables.

    ``r_minus_2M`` is stored alongside ``r_of_s`` because h(s) and W(s) are
    products with the horizon gap; recomputing it as r - 2M loses all
    precision once the gap drops below machine epsilon relative to 2M.
    """

    M: float
    p: float
    s_min: float
    s_max: float
    n: int
    ds: float
    s: np.ndarray
    r_of_s: np.ndarray
    r_minus_2M: np.ndarray
    F_of_s: np.ndarray
    W_of_s: np.ndarray
    h_of_s: np.ndarray

    def __post_init__(self):
        for arr in (self.s, self.r_of_s, self.r_minus_2M, self.F_of_s,
                    self.W_of_s, self.h_of_s):
            arr.setflags(write=False)


def tortoise_from_radius(M: float, r=None, r_minus_2M=None):
    """Forward map s = r + 2M ln(r - 2M), valid for r > 2M.

    Pass ``r_minus_2M`` instead of (or along with) ``r`` when the horizon
    gap is known to full precision; near the horizon this is the only way
    to evaluate s accurately.
    """
    if M <= 0:
        raise ValueError(f"mass must be positive, got M={M}")
    if r is None and r_minus_2M is None:
        raise ValueError("need r or r_minus_2M")
    if r_minus_2M is None:
        x = np.asarray(r, dtype=float) - 2.0 * M
    else:
        x = np.asarray(r_minus_2M, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("radius must lie outside the horizon (r > 2M)")
    base = np.asarray(r, dtype=float) if r is not None else 2.0 * M + x
    out = base + 2.0 * M * np.log(x)
    return float(out) if out.ndim == 0 else out


def horizon_gap_from_tortoise(M: float, s, tol: float = 1e-12):
    """Invert the tortoise map for the horizon gap x = r(s) - 2M.

    Solves x + 2M ln x = s - 2M with a bracketed Newton iteration
    (bisection fallback), converging to |s(x) - s| <= tol * max(1, |s|).
    The result retains full relative precision however small the gap is.
    """
    if M <= 0:
        raise ValueError(f"mass must be positive, got M={M}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got tol={tol}")
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("tortoise coordinate must be finite")
    # Below this the gap underflows double precision entirely.
    if np.any((arr - 2.0 * M) / (2.0 * M) < -740.0):
        raise ValueError("s too negative: horizon gap not representable in doubles")
    x = _solve_gap(M, arr, tol)
    return float(x[0]) if np.isscalar(s) or np.ndim(s) == 0 else x.reshape(np.shape(s))


def radius_from_tortoise(M: float, s, tol: float = 1e-12):
    """Inverse map r(s) > 2M. See ``horizon_gap_from_tortoise`` for accuracy notes."""
    gap = horizon_gap_from_tortoise(M, s, tol)
    return 2.0 * M + gap


def _solve_gap(M: float, s: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized safeguarded Newton for x + 2M ln x = s - 2M."""
    target = s - 2.0 * M
    scale = tol * np.maximum(1.0, np.abs(s))

    # Seed: asymptotic mode deep inside, linear growth far out.
    exponent = np.clip(target / (2.0 * M), -709.0, 709.0)
    x = np.where(s < -18.0 * M, np.exp(exponent), np.maximum(s, M))

    def resid(x):
        return x + 2.0 * M * np.log(x) - target

    # Establish a sign-changing bracket by geometric expansion.
    lo = x.copy()
    hi = x.copy()
    g = resid(x)
    for _ in range(_MAX_ITER):
        need_lo = resid(lo) > 0.0
        need_hi = resid(hi) < 0.0
        if not (need_lo.any() or need_hi.any()):
            break
        lo = np.where(need_lo, lo * 0.25, lo)
        hi = np.where(need_hi, hi * 4.0, hi)
    else:  # pragma: no cover
        raise RuntimeError("failed to bracket the tortoise inversion")

    done = np.abs(g) <= scale
    for _ in range(_MAX_ITER):
        if done.all():
            break
        hi = np.where(~done & (g > 0.0), np.minimum(hi, x), hi)
        lo = np.where(~done & (g < 0.0), np.maximum(lo, x), lo)
        step = g / (1.0 + 2.0 * M / x)
        cand = x - step
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        x = np.where(done, x, cand)
        g = resid(x)
        done = done | (np.abs(g) <= scale)
    if not done.all():  # pragma: no cover
        raise RuntimeError("tortoise inversion did not converge within 200 iterations")
    return x


def build_grid(params: ModelParams, s_min: float, s_max: float, n: int) -> SpatialGrid:
    """Build a uniform grid on [s_min, s_max] with all coordinate/potential tables."""
    if not s_min < s_max:
        raise ValueError(f"need s_min < s_max, got [{s_min}, {s_max}]")
    if int(n) != n or n < 3:
        raise ValueError(f"need at least 3 grid nodes, got n={n}")
    n = int(n)
    M, p = params.M, params.p
    s = np.linspace(s_min, s_max, n)
    gap = np.asarray(horizon_gap_from_tortoise(M, s))
    r = 2.0 * M + gap
    F = gap / r
    W = 2.0 * M * gap / r**4
    h = gap / r**p
    grid = SpatialGrid(
        M=M, p=p, s_min=float(s_min), s_max=float(s_max), n=n,
        ds=(s_max - s_min) / (n - 1),
        s=s, r_of_s=r, r_minus_2M=gap, F_of_s=F, W_of_s=W, h_of_s=h,
    )
    _validate_grid(grid)
    return grid


def _validate_grid(grid: SpatialGrid) -> None:
    # Strict monotonicity is checked on the gap: deep inside the horizon
    # region adjacent r = 2M + x values can round to the same double even
    # though x itself is strictly increasing at full relative precision.
    if np.any(np.diff(grid.r_minus_2M) <= 0.0):
        raise RuntimeError("r(s) table is not strictly increasing")
    if np.any(np.diff(grid.r_of_s) < 0.0):
        raise RuntimeError("r(s) table decreased")
    if np.any(grid.r_minus_2M <= 0.0):
        raise RuntimeError("grid node fell inside the horizon")
    if np.any((grid.F_of_s <= 0.0) | (grid.F_of_s >= 1.0)):
        raise RuntimeError("lapse left the open interval (0, 1)")


def grid_bounds_for(params: ModelParams, t_max: float) -> tuple[float, float]:
    """Symmetric grid bounds for a run of horizon t_max.

    Unit propagation speed plus a 5M margin guarantees the boundary stays
    causally disconnected from the data support for all t <= t_max.
    """
    half = params.R + t_max + 5.0 * params.M
    return -half, half


def sized_grid(params: ModelParams, t_max: float, ds: float) -> SpatialGrid:
    """Grid sized by ``grid_bounds_for`` with spacing no coarser than ds."""
    if ds <= 0:
        raise ValueError(f"spacing must be positive, got ds={ds}")
    s_min, s_max = grid_bounds_for(params, t_max)
    n = int(math.ceil((s_max - s_min) / ds)) + 1
    return build_grid(params, s_min, s_max, n)
