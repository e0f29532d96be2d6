"""Grid certification of tail-ordering conditions.

All checks reduce to the monotonicity of a log-ratio on a finite grid:

* B(H, G):  ``(1 - eps) log S_H(x) - log S_G(x)`` nonincreasing,
* C(F, G):  ``log S_F(x) + eps log(-log S_F(x)) - log S_G(x)`` nonincreasing,
* domination:  ``log S_F1(x) <= delta log S_F0(x)`` pointwise.

A passing report means "holds on this grid", nothing stronger.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from tailsep.distributions import Distribution, from_spec

__all__ = [
    "Grid",
    "ConditionReport",
    "default_grid",
    "check_b_condition",
    "check_c_condition",
    "check_delta_domination",
    "estimate_epsilon_max",
    "epsilon_between",
    "MONOTONE_TOL",
    "EPS_MIN",
]

MONOTONE_TOL = 1e-10
EPS_MIN = 1e-4
MIN_POINTS = 256


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    x0: float
    x_hi: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if not (pts[0] > self.x0 and pts[-1] <= self.x_hi):
            raise ValueError("grid points must lie in (x0, x_hi]")
        object.__setattr__(self, "points", pts)


def _anchor(a: Distribution, b: Distribution) -> float:
    lo = max(a.support_min, b.support_min)
    if math.isfinite(lo):
        return lo
    # two full-support laws: start from the larger median
    return float(max(a.inverse_log_survival(-math.log(2.0)), b.inverse_log_survival(-math.log(2.0))))


def _default_x_hi(a: Distribution, b: Distribution) -> float:
    tail = math.log(1e-12)
    his = [float(d.inverse_log_survival(tail)) for d in (a, b)]
    finite = [h for h in his if math.isfinite(h)]
    return min(finite) if finite else 1e300


def default_grid(
    a: Distribution | str,
    b: Distribution | str,
    n_points: int = 512,
    x0: float | None = None,
    x_hi: float | None = None,
) -> Grid:
    """Log-spaced grid (in the offset from ``x0``) up to where either tail reaches 1e-12.

    Without ``x0`` the grid starts one step above the larger support
    threshold.
    """
    a, b = from_spec(a), from_spec(b)
    n_points = max(int(n_points), MIN_POINTS)
    base = _anchor(a, b) if x0 is None else float(x0)
    hi = _default_x_hi(a, b) if x_hi is None else float(x_hi)
    if not hi > base:
        raise ValueError(f"x_hi={hi!r} must exceed x0={base!r}")
    span = hi - base
    offsets = np.geomspace(span * 1e-6, span, n_points + (1 if x0 is None else 0))
    if x0 is None:
        base, offsets = base + offsets[0], offsets[1:] - offsets[0]
    pts = base + offsets
    pts[-1] = hi
    return Grid(pts, base, hi)


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    holds: bool
    epsilon: float = 0.0
    delta: float | None = None
    first_violation: float | None = None
    margin: float = 0.0

    def render(self) -> str:
        lines = [f"condition        {self.condition}", f"holds on grid    {'yes' if self.holds else 'no'}"]
        if self.delta is not None:
            lines.append(f"delta            {self.delta:g}")
        else:
            lines.append(f"epsilon          {self.epsilon:g}")
        if self.first_violation is not None:
            lines.append(f"first violation  x = {self.first_violation:.6g}")
        lines.append(f"margin           {self.margin:.6g}")
        return "\n".join(lines)

    def row(self) -> str:
        fv = "" if self.first_violation is None else f"{self.first_violation:.10g}"
        extra = self.epsilon if self.delta is None else self.delta
        return f"{self.condition},{int(self.holds)},{extra:.10g},{fv},{self.margin:.10g}"


def _grid_for(a, b, grid):
    if grid is None:
        return default_grid(a, b)
    lo = max(a.support_min, b.support_min)
    if grid.points[0] <= lo:
        raise ValueError(f"grid starts at {grid.points[0]!r}, not inside both supports (> {lo!r})")
    return grid


def _monotone_report(name: str, eps: float, x: np.ndarray, d: np.ndarray) -> ConditionReport:
    steps = d[:-1] - d[1:]
    scale = np.maximum(1.0, np.maximum(np.abs(d[:-1]), np.abs(d[1:])))
    bad = np.flatnonzero(steps < -MONOTONE_TOL * scale)
    margin = float(steps.min())
    if bad.size:
        return ConditionReport(name, False, eps, None, float(x[bad[0] + 1]), margin)
    return ConditionReport(name, True, eps, None, None, margin)


def check_b_condition(h, g, eps: float, grid: Grid | None = None) -> ConditionReport:
    """B(H, G): ``(1 - H)^(1 - eps) / (1 - G)`` nonincreasing on the grid."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    h, g = from_spec(h), from_spec(g)
    grid = _grid_for(h, g, grid)
    x = grid.points
    d = (1.0 - eps) * h.log_survival(x) - g.log_survival(x)
    return _monotone_report("B", eps, x, d)


def check_c_condition(f, g, eps: float, grid: Grid | None = None) -> ConditionReport:
    """C(F, G): ``(1 - F)(-log(1 - F))^eps / (1 - G)`` nonincreasing on the grid."""
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    f, g = from_spec(f), from_spec(g)
    grid = _grid_for(f, g, grid)
    x = grid.points
    lf = f.log_survival(x)
    if np.any(lf >= 0.0):
        bad = x[np.flatnonzero(lf >= 0.0)[0]]
        raise ValueError(f"log-survival of {f!r} is 0 at grid point {bad!r}")
    d = lf + eps * np.log(-lf) - g.log_survival(x)
    return _monotone_report("C", eps, x, d)


def check_delta_domination(f1, f0, delta: float, grid: Grid | None = None) -> ConditionReport:
    """``1 - F1(x) <= (1 - F0(x))^delta`` on the grid."""
    if not 0.0 < delta < 1.0:
        warnings.warn(f"delta={delta!r} lies outside (0, 1); checking anyway", stacklevel=2)
    f1, f0 = from_spec(f1), from_spec(f0)
    grid = _grid_for(f1, f0, grid)
    x = grid.points
    lhs = f1.log_survival(x)
    rhs = delta * f0.log_survival(x)
    gap = rhs - lhs
    tol = MONOTONE_TOL * np.maximum(1.0, np.abs(rhs))
    bad = np.flatnonzero(gap < -tol)
    fv = float(x[bad[0]]) if bad.size else None
    return ConditionReport("delta", not bad.size, 0.0, float(delta), fv, float(gap.min()))


def _bisect(holds: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    if not holds(lo):
        return 0.0
    if holds(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return lo


def estimate_epsilon_max(
    h,
    g,
    grid: Grid | None = None,
    condition: str = "b",
    eps_hi: float | None = None,
    tol: float = EPS_MIN,
) -> float:
    """Largest eps for which the condition holds on the grid (0 if none above 1e-4).

    The answer can only shrink as the grid is refined or extended, since a
    finer grid adds monotonicity constraints.
    """
    h, g = from_spec(h), from_spec(g)
    grid = _grid_for(h, g, grid)
    condition = condition.lower()
    if condition == "b":
        check, hi = check_b_condition, 1.0 - EPS_MIN
    elif condition == "c":
        check, hi = check_c_condition, 100.0
    else:
        raise ValueError(f"condition must be 'b' or 'c', got {condition!r}")
    if eps_hi is not None:
        hi = eps_hi
    return _bisect(lambda e: check(h, g, e, grid).holds, EPS_MIN, hi, tol)


def epsilon_between(f0, f1, grid: Grid | None = None, condition: str = "b") -> float:
    """The larger of the two ordered estimates, whichever direction holds."""
    return max(
        estimate_epsilon_max(f0, f1, grid, condition),
        estimate_epsilon_max(f1, f0, grid, condition),
    )
