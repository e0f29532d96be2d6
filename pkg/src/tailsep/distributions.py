"""Tail models and separating functions.

Every law is defined by its log-survival function ``log(1 - F(x))`` and the
inverse of that map. The cdf, quantile and sampler are derived from these
two, so nothing in the tail is ever computed as ``log(1 - cdf)``.

Distributions are named with a small text grammar, ``name(p1,p2,...)``::

    >>> d = from_spec("logweibull(3,1)")
    >>> float(d.log_survival(math.e))
    -1.0
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.special import lambertw

from tailsep.normal import normal_cdf, normal_isf_log, normal_logsf, normal_quantile

__all__ = [
    "SpecError",
    "DistributionSpec",
    "Distribution",
    "RngStream",
    "parse_spec",
    "from_spec",
    "make",
    "catalog",
    "sample",
    "sample_top",
    "sample_top_log",
]


class SpecError(ValueError):
    """Raised for malformed or unknown distribution specs."""


@dataclass(frozen=True)
class DistributionSpec:
    name: str
    params: tuple[float, ...] = ()

    def render(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({','.join(_fmt(p) for p in self.params)})"

    def __str__(self) -> str:
        return self.render()


def _fmt(p: float) -> str:
    if float(p).is_integer() and abs(p) < 1e15:
        return str(int(p))
    return repr(float(p))


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Addressable uniform stream: ``(seed, stream)`` fixes every draw.

    Backed by the counter-based Philox generator keyed through a
    ``SeedSequence`` spawn key, so streams are independent of each other and
    of the order in which they are consumed.
    """

    seed: int
    stream: tuple[int, ...] | int = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        key = (self.stream,) if isinstance(self.stream, (int, np.integer)) else tuple(self.stream)
        object.__setattr__(self, "stream", tuple(int(k) for k in key))

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.seed, self.stream + tuple(index))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniforms on a 2**-52 grid strictly inside (0, 1); ``1 - u`` is exact."""
        bits = self.generator().integers(0, 2**52, size=n, dtype=np.uint64)
        return (bits.astype(float) + 0.5) * 2.0**-52


# ---------------------------------------------------------------------------
# Distribution base
# ---------------------------------------------------------------------------


class Distribution:
    """A continuous law with ``x*_F = +inf``, known through its log-survival.

    Subclasses implement ``_logsf`` (for ``x > support_min``) and
    ``_inv_logsf`` (for log-survival values ``< 0``).
    """

    name: ClassVar[str]
    param_names: ClassVar[tuple[str, ...]] = ()
    defaults: ClassVar[tuple[float, ...] | None] = None
    positive: ClassVar[tuple[str, ...]] = ()

    def __init__(self, *params: float):
        params = tuple(float(p) for p in params)
        if not params and self.param_names and self.defaults is not None:
            params = self.defaults
        if len(params) != len(self.param_names):
            raise SpecError(
                f"{self.name} takes {len(self.param_names)} parameter(s) "
                f"{self.param_names}, got {len(params)}"
            )
        for pname, value in zip(self.param_names, params):
            if not math.isfinite(value):
                raise SpecError(f"{self.name}: {pname} must be finite")
            if pname in self.positive and value <= 0:
                raise SpecError(f"{self.name}: {pname} must be > 0")
        self._params = params
        for pname, value in zip(self.param_names, params):
            object.__setattr__(self, pname, value)

    def __setattr__(self, key, value):
        if hasattr(self, "_params"):
            raise AttributeError("Distribution objects are immutable")
        object.__setattr__(self, key, value)

    @property
    def params(self) -> tuple[float, ...]:
        return self._params

    @property
    def spec(self) -> DistributionSpec:
        return DistributionSpec(self.name, self._params)

    @property
    def support_min(self) -> float:
        return -math.inf

    def __repr__(self) -> str:
        return self.spec.render()

    def __eq__(self, other):
        return isinstance(other, Distribution) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    # -- public surface -----------------------------------------------------

    def log_survival(self, x):
        """``log(1 - F(x))``; exactly 0 at or below ``support_min``."""
        x = np.asarray(x, dtype=float)
        inside = x > self.support_min
        if np.all(inside):
            out = np.asarray(self._logsf(x), dtype=float)
        else:
            out = np.zeros_like(x)
            if np.any(inside):
                out[inside] = self._logsf(x[inside])
        return out[()] if out.ndim == 0 else out

    def sf(self, x):
        return np.exp(self.log_survival(x))

    def cdf(self, x):
        return -np.expm1(self.log_survival(x))

    def inverse_log_survival(self, log_s):
        """Smallest ``x`` with ``log_survival(x) <= log_s``, for ``log_s < 0``."""
        log_s = np.asarray(log_s, dtype=float)
        out = np.asarray(self._inv_logsf(log_s), dtype=float)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(~((p > 0.0) & (p < 1.0))):
            raise ValueError("p must lie in the open interval (0, 1)")
        return self.inverse_log_survival(np.log1p(-p))

    def sample(self, stream: RngStream, n: int) -> np.ndarray:
        return sample(self, stream, n)

    # Log-scale variants: super-heavy laws (log-Pareto) overflow doubles in
    # their upper order statistics, but ``ln x`` stays representable.

    def log_inverse_log_survival(self, log_s):
        """``ln`` of ``inverse_log_survival``; only meaningful for positive values."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.inverse_log_survival(log_s))

    def log_survival_at_log(self, lx):
        """``log_survival(exp(lx))`` without forming ``exp(lx)`` where possible."""
        with np.errstate(over="ignore"):
            return self.log_survival(np.exp(np.asarray(lx, dtype=float)))

    # -- to implement -------------------------------------------------------

    def _logsf(self, x):
        raise NotImplementedError

    def _inv_logsf(self, log_s):
        raise NotImplementedError


_REGISTRY: dict[str, type[Distribution]] = {}
_ALIASES = {"exp": "exponential", "norm": "normal", "lognorm": "lognormal"}


def _register(cls):
    _REGISTRY[cls.name] = cls
    return cls


def _log_pos(x):
    return np.log(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@_register
class Exponential(Distribution):
    name = "exponential"
    param_names = ("rate",)
    defaults = (1.0,)
    positive = ("rate",)

    @property
    def support_min(self):
        return 0.0

    def _logsf(self, x):
        return -self.rate * x

    def _inv_logsf(self, log_s):
        return -log_s / self.rate


@_register
class Normal(Distribution):
    name = "normal"
    param_names = ("mu", "sigma")
    defaults = (0.0, 1.0)
    positive = ("sigma",)

    def cdf(self, x):
        return normal_cdf((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def quantile(self, p):
        return self.mu + self.sigma * normal_quantile(p)

    def _logsf(self, x):
        return normal_logsf((x - self.mu) / self.sigma)

    def _inv_logsf(self, log_s):
        return self.mu + self.sigma * normal_isf_log(log_s)


@_register
class LogNormal(Distribution):
    name = "lognormal"
    param_names = ("mu", "sigma")
    defaults = (0.0, 1.0)
    positive = ("sigma",)

    @property
    def support_min(self):
        return 0.0

    def _logsf(self, x):
        return normal_logsf((_log_pos(x) - self.mu) / self.sigma)

    def _inv_logsf(self, log_s):
        return np.exp(self.mu + self.sigma * normal_isf_log(log_s))

    def log_inverse_log_survival(self, log_s):
        return self.mu + self.sigma * normal_isf_log(log_s)

    def log_survival_at_log(self, lx):
        return normal_logsf((np.asarray(lx, dtype=float) - self.mu) / self.sigma)


@_register
class Weibull(Distribution):
    name = "weibull"
    param_names = ("shape", "scale")
    positive = ("shape", "scale")

    @property
    def support_min(self):
        return 0.0

    def _logsf(self, x):
        return -((x / self.scale) ** self.shape)

    def _inv_logsf(self, log_s):
        return self.scale * (-log_s) ** (1.0 / self.shape)


@_register
class LogWeibull(Distribution):
    """``log S(x) = -((ln x)/c)**theta`` on ``x > 1``."""

    name = "logweibull"
    param_names = ("shape", "scale")
    positive = ("shape", "scale")

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        return -((_log_pos(x) / self.scale) ** self.shape)

    def _inv_logsf(self, log_s):
        return np.exp(self.scale * (-log_s) ** (1.0 / self.shape))

    def log_inverse_log_survival(self, log_s):
        return self.scale * (-np.asarray(log_s, dtype=float)) ** (1.0 / self.shape)

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > 0.0, -(np.maximum(lx, 0.0) / self.scale) ** self.shape, 0.0)


@_register
class Pareto(Distribution):
    """``log S(x) = -alpha ln x`` on ``x > 1``."""

    name = "pareto"
    param_names = ("alpha",)
    positive = ("alpha",)

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        return -self.alpha * _log_pos(x)

    def _inv_logsf(self, log_s):
        return np.exp(-log_s / self.alpha)

    def log_inverse_log_survival(self, log_s):
        return -np.asarray(log_s, dtype=float) / self.alpha

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > 0.0, -self.alpha * lx, 0.0)


@_register
class ParetoGK(Distribution):
    """Pareto with extreme value index ``gamma`` and threshold ``kappa``."""

    name = "pareto_gk"
    param_names = ("gamma", "kappa")
    positive = ("gamma", "kappa")

    @property
    def support_min(self):
        return self.kappa

    def _logsf(self, x):
        return (math.log(self.kappa) - _log_pos(x)) / self.gamma

    def _inv_logsf(self, log_s):
        return self.kappa * np.exp(-self.gamma * log_s)

    def log_inverse_log_survival(self, log_s):
        return math.log(self.kappa) - self.gamma * np.asarray(log_s, dtype=float)

    def log_survival_at_log(self, lx):
        lk = math.log(self.kappa)
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > lk, (lk - lx) / self.gamma, 0.0)


@_register
class LogPareto(Distribution):
    """``S(x) = (ln x)**(-theta)`` on ``x > e``."""

    name = "logpareto"
    param_names = ("theta",)
    positive = ("theta",)

    @property
    def support_min(self):
        return math.e

    def _logsf(self, x):
        return -self.theta * np.log(_log_pos(x))

    def _inv_logsf(self, log_s):
        with np.errstate(over="ignore"):
            return np.exp(np.exp(-log_s / self.theta))

    def log_inverse_log_survival(self, log_s):
        return np.exp(-np.asarray(log_s, dtype=float) / self.theta)

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(lx > 1.0, -self.theta * np.log(lx), 0.0)


@_register
class LogGamma21(Distribution):
    """Density ``x**-2 ln x`` on ``x > 1``; survival ``(1 + ln x)/x``.

    Inversion works on ``t = ln x``: ``(1 + t) exp(-t) = s`` gives
    ``t = -1 - W_{-1}(-s/e)``. Near ``s = 1`` the W branch point is
    ill-conditioned, so a series in ``sqrt(-2 log s)`` seeds the iteration
    there instead. Newton steps on ``log1p(t) - t = log s`` finish both.
    """

    name = "loggamma21"

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        t = _log_pos(x)
        return np.log1p(t) - t

    def _inv_logsf(self, log_s):
        a = -np.asarray(log_s, dtype=float)
        w = np.sqrt(2.0 * a)
        # branch-point series for t - log1p(t) = a, Lambert W elsewhere
        near = a <= 0.01
        t = np.where(near, w + w * w / 3.0 + w**3 / 36.0, 0.0)
        if np.any(~near):
            arg = -np.exp(-a[~near] - 1.0)
            t[~near] = -1.0 - lambertw(arg, k=-1).real
        for _ in range(3):
            g = np.log1p(t) - t + a
            dg = -t / (1.0 + t)
            step = np.divide(g, dg, out=np.zeros_like(t), where=dg != 0.0)
            t = np.maximum(t - step, 0.0)
        return np.exp(t)

    def log_inverse_log_survival(self, log_s):
        return np.log(self.inverse_log_survival(log_s))

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        t = np.maximum(lx, 0.0)
        return np.where(lx > 0.0, np.log1p(t) - t, 0.0)


@_register
class Cauchy(Distribution):
    name = "cauchy"

    def cdf(self, x):
        return np.arctan2(1.0, -np.asarray(x, dtype=float)) / math.pi

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(~((p > 0.0) & (p < 1.0))):
            raise ValueError("p must lie in the open interval (0, 1)")
        # tan(pi (p - 1/2)) written as a cotangent of the smaller tail
        return np.where(p <= 0.5, -1.0 / np.tan(math.pi * p), 1.0 / np.tan(math.pi * (1.0 - p)))

    def _logsf(self, x):
        return np.log(np.arctan2(1.0, x) / math.pi)

    def _inv_logsf(self, log_s):
        s = np.exp(log_s)
        c = -np.expm1(log_s)
        # cot(pi s), taken from whichever of s, 1 - s is small
        return np.where(s <= 0.5, 1.0 / np.tan(math.pi * s), -1.0 / np.tan(math.pi * c))


@_register
class SepWLW(Distribution):
    """Separator between Weibull and log-Weibull tails, ``log S = -exp(sqrt(ln x))``.

    The law puts mass ``1 - 1/e`` at ``x = 1``; the inverse returns 1 there.
    """

    name = "sep_wlw"

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        return -np.exp(np.sqrt(_log_pos(x)))

    def _inv_logsf(self, log_s):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            root = np.log(np.maximum(-log_s, 1.0))
            return np.exp(root * root)

    def log_inverse_log_survival(self, log_s):
        root = np.log(np.maximum(-np.asarray(log_s, dtype=float), 1.0))
        return root * root

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > 0.0, -np.exp(np.sqrt(np.maximum(lx, 0.0))), 0.0)


@_register
class SepSqrtLog(Distribution):
    """Separator between logarithmic and heavy tails, ``log S = -sqrt(ln x)``."""

    name = "sep_sqrtlog"

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        return -np.sqrt(_log_pos(x))

    def _inv_logsf(self, log_s):
        with np.errstate(over="ignore"):
            return np.exp(log_s * log_s)

    def log_inverse_log_survival(self, log_s):
        log_s = np.asarray(log_s, dtype=float)
        return log_s * log_s

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > 0.0, -np.sqrt(np.maximum(lx, 0.0)), 0.0)


@_register
class SepParetoHalf(Distribution):
    """``log S = -ln x / (2 gamma0)`` on ``x > 1``."""

    name = "sep_pareto_half"
    param_names = ("gamma0",)
    positive = ("gamma0",)

    @property
    def support_min(self):
        return 1.0

    def _logsf(self, x):
        return -_log_pos(x) / (2.0 * self.gamma0)

    def _inv_logsf(self, log_s):
        return np.exp(-2.0 * self.gamma0 * log_s)

    def log_inverse_log_survival(self, log_s):
        return -2.0 * self.gamma0 * np.asarray(log_s, dtype=float)

    def log_survival_at_log(self, lx):
        lx = np.asarray(lx, dtype=float)
        return np.where(lx > 0.0, -lx / (2.0 * self.gamma0), 0.0)


# ---------------------------------------------------------------------------
# Spec parsing
# ---------------------------------------------------------------------------

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def catalog() -> list[str]:
    return sorted(_REGISTRY)


def parse_spec(text: str) -> DistributionSpec:
    """Parse ``name(p1,...)`` and validate it against the catalog."""
    m = _SPEC_RE.match(text)
    if m is None:
        raise SpecError(f"cannot parse distribution spec {text!r}")
    name = _ALIASES.get(m.group(1).lower(), m.group(1).lower())
    if name not in _REGISTRY:
        raise SpecError(f"unknown distribution {m.group(1)!r}; known: {', '.join(catalog())}")
    args = m.group(2)
    params: tuple[float, ...] = ()
    if args is not None and args.strip():
        try:
            params = tuple(float(a) for a in args.split(","))
        except ValueError:
            raise SpecError(f"non-numeric parameter in {text!r}") from None
    # constructing validates arity and ranges, and fills defaults
    return make(DistributionSpec(name, params)).spec


def make(spec: DistributionSpec) -> Distribution:
    try:
        cls = _REGISTRY[spec.name]
    except KeyError:
        raise SpecError(f"unknown distribution {spec.name!r}") from None
    return cls(*spec.params)


def from_spec(text: str | DistributionSpec | Distribution) -> Distribution:
    if isinstance(text, Distribution):
        return text
    if isinstance(text, DistributionSpec):
        return make(text)
    return make(parse_spec(text))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample(d: Distribution, stream: RngStream, n: int) -> np.ndarray:
    """``n`` i.i.d. draws by inverse transform of survival-scale uniforms."""
    if n < 1:
        raise ValueError("n must be >= 1")
    v = stream.uniforms(n)
    return d.inverse_log_survival(np.log(v))


def sample_top(d: Distribution, stream: RngStream, n: int, m: int) -> np.ndarray:
    """The largest ``m`` of ``sample(d, stream, n)``, ascending.

    Only the ``m`` smallest survival uniforms are transformed, which is what
    makes large Monte Carlo grids affordable.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    v = stream.uniforms(n)
    if m < n:
        v = np.partition(v, m - 1)[:m]
    v = np.sort(v)[::-1]
    return d.inverse_log_survival(np.log(v))


def sample_top_log(d: Distribution, stream: RngStream, n: int, m: int) -> np.ndarray:
    """``ln`` of ``sample_top``, computed without overflowing for super-heavy laws."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    v = stream.uniforms(n)
    if m < n:
        v = np.partition(v, m - 1)[:m]
    v = np.sort(v)[::-1]
    return d.log_inverse_log_survival(np.log(v))
