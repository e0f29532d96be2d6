"""The Hill-type statistic and the tail discrimination tests built on it.

``R = log S0(X_(n-k)) - mean(log S0(X_(i)))`` over the top ``k`` order
statistics, where ``S0`` is the survival function of the separating law.
Under ``F = F0`` the quantity ``k * R`` is a sum of ``k`` independent
standard exponentials for every ``n > k``, so ``sqrt(k) (R - 1)`` is
asymptotically standard normal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from tailsep.distributions import Distribution, from_spec
from tailsep.normal import normal_cdf, normal_quantile, normal_sf

__all__ = [
    "SupportError",
    "SortedSample",
    "TailTestReport",
    "KINDS",
    "default_k",
    "r_statistic",
    "r_statistic_top",
    "r_statistic_top_log",
    "hill_estimator",
    "normal_quantile",
    "thresholds",
    "decide",
    "test_light_vs_heavy",
    "test_heavy_vs_light",
    "test_two_sided",
    "run_test",
]

Kind = Literal["light_vs_heavy", "heavy_vs_light", "two_sided"]
KINDS: tuple[str, ...] = ("light_vs_heavy", "heavy_vs_light", "two_sided")


class SupportError(ValueError):
    """``X_(n-k)`` does not lie strictly inside the separating law's support."""

    def __init__(self, value: float, support_min: float, f0_name: str = ""):
        self.value = value
        self.support_min = support_min
        super().__init__(
            f"X_(n-k) = {value!r} is not above the support threshold {support_min!r}"
            + (f" of {f0_name}" if f0_name else "")
            + "; choose a smaller k"
        )


@dataclass(frozen=True)
class SortedSample:
    """Order statistics ``X_(1) <= ... <= X_(n)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a sorted sample needs at least 2 values")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample contains non-finite values")
        if np.any(np.diff(v) < 0):
            raise ValueError("values are not sorted in nondecreasing order")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_unsorted(cls, x) -> "SortedSample":
        return cls(np.sort(np.asarray(x, dtype=float), kind="stable"))

    @property
    def n(self) -> int:
        return self.values.size

    def top(self, k: int) -> np.ndarray:
        """``X_(n-k), ..., X_(n)`` (``k + 1`` values)."""
        _check_k(k, self.n)
        return self.values[self.n - k - 1 :]


def _check_k(k: int, n: int) -> None:
    if int(k) != k or not 1 <= k <= n - 1:
        raise ValueError(f"k must be an integer with 1 <= k <= n - 1 (n={n}), got {k}")


def default_k(n: int) -> int:
    """``floor(5 ln n)``, capped to ``n - 1``."""
    return max(1, min(n - 1, int(math.floor(5.0 * math.log(n)))))


def r_statistic_top(top: np.ndarray, f0: Distribution) -> float:
    """The statistic from the ascending top ``k + 1`` order statistics.

    ``top[0]`` is ``X_(n-k)``. Summation is fsum-exact, so the result does
    not depend on platform or vector width.
    """
    top = np.asarray(top, dtype=float)
    k = top.size - 1
    if k < 1:
        raise ValueError("need at least two order statistics")
    if not top[0] > f0.support_min:
        raise SupportError(float(top[0]), f0.support_min, repr(f0))
    ls = f0.log_survival(top)
    r = math.fsum(ls[0] - ls[1:]) / k
    # ls is nonincreasing for sorted input, rounding cannot push r below 0
    return max(r, 0.0)


def r_statistic_top_log(log_top: np.ndarray, f0: Distribution) -> float:
    """As ``r_statistic_top`` for positive samples given on the log scale."""
    log_top = np.asarray(log_top, dtype=float)
    k = log_top.size - 1
    if k < 1:
        raise ValueError("need at least two order statistics")
    if f0.support_min > 0 and not log_top[0] > math.log(f0.support_min):
        raise SupportError(float(np.exp(log_top[0])), f0.support_min, repr(f0))
    ls = f0.log_survival_at_log(log_top)
    return max(math.fsum(ls[0] - ls[1:]) / k, 0.0)


def r_statistic(s: SortedSample, k: int, f0: Distribution | str) -> float:
    return r_statistic_top(s.top(k), from_spec(f0))


def hill_estimator(s: SortedSample, k: int) -> float:
    """Mean log-spacing of the top ``k`` values over ``X_(n-k)``."""
    top = s.top(k)
    if not top[0] > 0:
        raise ValueError(f"Hill estimator needs X_(n-k) > 0, got {top[0]!r}")
    logs = np.log(top)
    return max(math.fsum(logs[1:] - logs[0]) / k, 0.0)


def thresholds(kind: str, k: int, alpha: float) -> tuple[float, ...]:
    """Rejection thresholds on the ``R`` scale."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    root = math.sqrt(k)
    # u_alpha = -u_{1-alpha}; one quantile per kind keeps thresholds mirror-exact about 1
    if kind == "light_vs_heavy":
        return (1.0 + float(normal_quantile(1.0 - alpha)) / root,)
    if kind == "heavy_vs_light":
        return (1.0 - float(normal_quantile(1.0 - alpha)) / root,)
    if kind == "two_sided":
        half = float(normal_quantile(1.0 - alpha / 2.0)) / root
        return (1.0 - half, 1.0 + half)
    raise ValueError(f"unknown test kind {kind!r}; expected one of {KINDS}")


def decide(kind: str, r: float, th: tuple[float, ...]) -> bool:
    if kind == "light_vs_heavy":
        return r > th[0]
    if kind == "heavy_vs_light":
        return r < th[0]
    if kind == "two_sided":
        return not th[0] < r < th[1]
    raise ValueError(f"unknown test kind {kind!r}")


def _p_value(kind: str, z: float) -> float:
    if kind == "light_vs_heavy":
        return float(normal_sf(z))
    if kind == "heavy_vs_light":
        return float(normal_cdf(z))
    return min(1.0, 2.0 * float(min(normal_sf(z), normal_cdf(z))))


@dataclass(frozen=True)
class TailTestReport:
    r: float
    z: float
    k: int
    n: int
    alpha: float
    kind: str
    thresholds: tuple[float, ...] = field(default=())
    reject: bool = False
    p_value: float = 1.0

    @classmethod
    def from_r(cls, r: float, k: int, n: int, alpha: float, kind: str) -> "TailTestReport":
        th = thresholds(kind, k, alpha)
        z = math.sqrt(k) * (r - 1.0)
        return cls(r, z, k, n, alpha, kind, th, decide(kind, r, th), _p_value(kind, z))

    def render(self) -> str:
        th = ", ".join(f"{t:.7f}" for t in self.thresholds)
        lines = [
            f"test        {self.kind}",
            f"n, k        {self.n}, {self.k}",
            f"alpha       {self.alpha:g}",
            f"R           {self.r:.7f}",
            f"z           {self.z:.4f}",
            f"thresholds  {th}",
            f"p-value     {self.p_value:.4g}",
            f"decision    {'reject H0' if self.reject else 'do not reject H0'}",
        ]
        return "\n".join(lines)


def run_test(s: SortedSample, k: int, f0: Distribution | str, alpha: float, kind: str) -> TailTestReport:
    r = r_statistic(s, k, f0)
    return TailTestReport.from_r(r, k, s.n, alpha, kind)


def test_light_vs_heavy(s, k, f0, alpha=0.05) -> TailTestReport:
    """Reject the lighter-tail null when ``R > 1 + u_{1-alpha}/sqrt(k)``."""
    return run_test(s, k, f0, alpha, "light_vs_heavy")


def test_heavy_vs_light(s, k, f0, alpha=0.05) -> TailTestReport:
    """Reject the heavier-tail null when ``R < 1 + u_alpha/sqrt(k)``."""
    return run_test(s, k, f0, alpha, "heavy_vs_light")


def test_two_sided(s, k, f0, alpha=0.05) -> TailTestReport:
    return run_test(s, k, f0, alpha, "two_sided")


# keep pytest from collecting the public test_* functions when imported into test modules
for _fn in (test_light_vs_heavy, test_heavy_vs_light, test_two_sided):
    _fn.__test__ = False
