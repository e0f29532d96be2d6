"""Seeded Monte Carlo harness for rejection rates, trajectories and k-sweeps.

Replication ``r`` of experiment ``e`` always draws from the Philox stream
keyed ``(e, r)`` under the master seed, and per-replication outcomes are
gathered in replication order before integer counts are formed. Results are
therefore identical for any worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from tailsep.distributions import Distribution, RngStream, from_spec, sample, sample_top, sample_top_log
from tailsep.tailstat import (
    KINDS,
    SupportError,
    decide,
    default_k,
    r_statistic_top,
    r_statistic_top_log,
    thresholds,
)

__all__ = [
    "ConfigError",
    "SimulationError",
    "ExperimentConfig",
    "RejectionSummary",
    "TrajectoryPoint",
    "TrajectoryResult",
    "KSweepResult",
    "TableCell",
    "TableResult",
    "TABLES",
    "WORKERS_ENV",
    "resolve_workers",
    "replicate_r",
    "run_rejection_experiment",
    "run_trajectory",
    "sweep_k",
    "reproduce_table",
    "sample_conditional",
    "simulate_eta",
    "top_excesses_vs_conditional",
]

WORKERS_ENV = "TAILSEP_WORKERS"
CSV_HEADER = "cell,n,k,m,rate,se,support_errors"


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


class SimulationError(RuntimeError):
    pass


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {raw!r}") from None
    return max(1, int(workers))


# ---------------------------------------------------------------------------
# Replication engine
# ---------------------------------------------------------------------------


def _statistic_for(dist: Distribution, f0: Distribution, n: int, m: int, stream: RngStream):
    """Top ``m`` order statistics and the matching statistic function.

    Falls back to the log scale when the draws overflow (log-Pareto tails).
    """
    top = sample_top(dist, stream, n, m)
    if np.all(np.isfinite(top)):
        return top, lambda t: r_statistic_top(t, f0)
    return sample_top_log(dist, stream, n, m), lambda t: r_statistic_top_log(t, f0)


def _r_values(dist: Distribution, f0: Distribution, n: int, ks: Sequence[int], stream: RngStream) -> list[float]:
    top, stat = _statistic_for(dist, f0, n, max(ks) + 1, stream)
    out = []
    for k in ks:
        try:
            out.append(stat(top[top.size - k - 1 :]))
        except SupportError:
            out.append(math.nan)
    return out


def _chunk(args) -> list[list[float]]:
    dist, f0, n, ks, seed, prefix, lo, hi = args
    dist, f0 = from_spec(dist), from_spec(f0)
    return [_r_values(dist, f0, n, ks, RngStream(seed, prefix + (r,))) for r in range(lo, hi)]


def replicate_r(
    dist,
    f0,
    n: int,
    ks: Sequence[int],
    m: int,
    seed: int,
    prefix: tuple[int, ...] = (0,),
    workers: int | None = None,
) -> np.ndarray:
    """``(m, len(ks))`` array of statistic values, NaN marking support errors.

    All ``k`` share each replication's sample.
    """
    dist, f0 = repr(from_spec(dist)), repr(from_spec(f0))
    ks = [int(k) for k in ks]
    workers = resolve_workers(workers)
    if workers == 1 or m < 2:
        rows = _chunk((dist, f0, n, ks, seed, tuple(prefix), 0, m))
    else:
        size = -(-m // (4 * workers))
        jobs = [(dist, f0, n, ks, seed, tuple(prefix), lo, min(m, lo + size)) for lo in range(0, m, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_chunk, jobs) for row in part]
    return np.asarray(rows, dtype=float).reshape(m, len(ks))


# ---------------------------------------------------------------------------
# Rejection experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    dist: str
    f0: str
    n: int
    k: int
    m: int = 2000
    alpha: float = 0.05
    kind: str = "light_vs_heavy"
    seed: int = 0
    experiment: int = 0

    def __post_init__(self):
        for name in ("dist", "f0"):
            try:
                object.__setattr__(self, name, repr(from_spec(getattr(self, name))))
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from None
        for name in ("n", "k", "m", "seed", "experiment"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 2:
            raise ConfigError("n: must be >= 2")
        if not 1 <= self.k < self.n:
            raise ConfigError("k: k must be < n and >= 1")
        if self.m < 1:
            raise ConfigError("m: must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha: must lie in (0, 1)")
        if self.kind not in KINDS:
            raise ConfigError(f"kind: expected one of {', '.join(KINDS)}, got {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
        missing = {"dist", "f0", "n", "k"} - set(data)
        if missing:
            raise ConfigError(f"missing field(s): {', '.join(sorted(missing))}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class RejectionSummary:
    rejections: int
    m: int
    support_errors: int = 0

    @property
    def valid(self) -> int:
        return self.m - self.support_errors

    @property
    def rate(self) -> float:
        return self.rejections / self.valid if self.valid else math.nan

    @property
    def se(self) -> float:
        if not self.valid:
            return math.nan
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.valid)

    @classmethod
    def from_r(cls, r: np.ndarray, kind: str, k: int, alpha: float) -> "RejectionSummary":
        th = thresholds(kind, k, alpha)
        errors = int(np.isnan(r).sum())
        rejections = sum(1 for v in r if not math.isnan(v) and decide(kind, float(v), th))
        return cls(rejections, int(r.size), errors)

    def csv_row(self, cell: str, n: int, k: int) -> str:
        # labels such as "LW(3,1)" contain commas and get quoted
        buf = io.StringIO()
        fields = [cell, n, k, self.m, f"{self.rate:.6f}", f"{self.se:.6f}", self.support_errors]
        csv.writer(buf, lineterminator="").writerow(fields)
        return buf.getvalue()


def run_rejection_experiment(cfg: ExperimentConfig, workers: int | None = None) -> RejectionSummary:
    """``m`` replications of the configured test; support errors are counted, not fatal."""
    r = replicate_r(cfg.dist, cfg.f0, cfg.n, [cfg.k], cfg.m, cfg.seed, (cfg.experiment,), workers)[:, 0]
    summary = RejectionSummary.from_r(r, cfg.kind, cfg.k, cfg.alpha)
    if summary.valid == 0:
        raise SimulationError(
            f"all {cfg.m} replications put X_(n-k) at or below the support of {cfg.f0}"
        )
    return summary


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    k: int
    z: float
    error: str = ""


@dataclass(frozen=True)
class TrajectoryResult:
    points: tuple[TrajectoryPoint, ...]
    k_rule: str

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points])

    @property
    def n(self) -> np.ndarray:
        return np.array([p.n for p in self.points])

    def to_csv(self) -> str:
        lines = ["x,y"] + [f"{p.n},{p.z:.10g}" for p in self.points]
        return "\n".join(lines) + "\n"


def _k_for(k_rule: int | str, n: int) -> int:
    if k_rule == "5ln":
        return default_k(n)
    return int(k_rule)


def run_trajectory(
    dist,
    f0,
    n_values: Sequence[int],
    k_rule: int | str,
    seed: int,
    path: int = 0,
    nested: bool = False,
) -> TrajectoryResult:
    """``z = sqrt(k)(R - 1)`` along a grid of sample sizes.

    By default every ``n`` gets a fresh sample from stream ``(path, i)``. With
    ``nested=True`` one sample of size ``max(n)`` is drawn from stream
    ``(path,)`` and each point uses its first ``n`` values.
    """
    dist, f0 = from_spec(dist), from_spec(f0)
    n_values = [int(n) for n in n_values]
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly increasing")
    full = sample(dist, RngStream(seed, (path,)), n_values[-1]) if nested else None
    points = []
    for i, n in enumerate(n_values):
        k = _k_for(k_rule, n)
        if not 1 <= k < n:
            raise ValueError(f"k={k} invalid for n={n}")
        if nested:
            top = np.sort(full[:n])[n - k - 1 :]
            stat = lambda t: r_statistic_top(t, f0)  # noqa: E731
        else:
            top, stat = _statistic_for(dist, f0, n, k + 1, RngStream(seed, (path, i)))
        try:
            r = stat(top)
            points.append(TrajectoryPoint(n, k, math.sqrt(k) * (r - 1.0)))
        except SupportError as exc:
            points.append(TrajectoryPoint(n, k, math.nan, str(exc)))
    return TrajectoryResult(tuple(points), str(k_rule))


# ---------------------------------------------------------------------------
# k sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KSweepResult:
    n: int
    rows: tuple[tuple[int, RejectionSummary], ...]

    @property
    def ks(self) -> np.ndarray:
        return np.array([k for k, _ in self.rows])

    @property
    def rates(self) -> np.ndarray:
        return np.array([s.rate for _, s in self.rows])

    def rate_at(self, k: int) -> float:
        return dict(self.rows)[k].rate

    def to_csv(self, cell: str = "") -> str:
        lines = [CSV_HEADER] + [s.csv_row(cell, self.n, k) for k, s in self.rows]
        return "\n".join(lines) + "\n"

    def to_xy(self) -> str:
        return "x,y\n" + "".join(f"{k},{s.rate:.6f}\n" for k, s in self.rows)


def sweep_k(
    dist,
    f0,
    n: int,
    k_values: Sequence[int] = tuple(range(10, 501, 10)),
    alpha: float = 0.05,
    m: int = 2000,
    seed: int = 0,
    kind: str = "heavy_vs_light",
    workers: int | None = None,
) -> KSweepResult:
    k_values = [int(k) for k in k_values]
    if any(b <= a for a, b in zip(k_values, k_values[1:])):
        raise ValueError("k values must be strictly increasing")
    if k_values[-1] >= n:
        raise ValueError("max k must be < n")
    r = replicate_r(dist, f0, n, k_values, m, seed, (0,), workers)
    rows = tuple((k, RejectionSummary.from_r(r[:, j], kind, k, alpha)) for j, k in enumerate(k_values))
    return KSweepResult(n, rows)


# ---------------------------------------------------------------------------
# Table reproduction
# ---------------------------------------------------------------------------

TABLES = {
    "table1": {
        "f0": "sep_wlw",
        "kind": "light_vs_heavy",
        "rows": [
            ("LW(3,1)", "logweibull(3,1)"),
            ("LN(0,1)", "lognormal(0,1)"),
            ("Exp(1)", "exponential(1)"),
            ("Pareto(2)", "pareto(2)"),
            ("Cauchy", "cauchy"),
        ],
        "cols": [(100, 10), (100, 20), (200, 20), (200, 50), (500, 50), (500, 100)],
    },
    "table2": {
        "f0": "sep_sqrtlog",
        "kind": "heavy_vs_light",
        "rows": [
            ("log-Pareto(2)", "logpareto(2)"),
            ("log-Pareto(1)", "logpareto(1)"),
            ("log-Gamma", "loggamma21"),
            ("Cauchy", "cauchy"),
            ("Pareto(2)", "pareto(2)"),
            ("LN(0,1)", "lognormal(0,1)"),
        ],
        "cols": [(100, 10), (100, 20), (200, 20), (200, 50), (500, 50), (1000, 50), (5000, 50)],
    },
}


@dataclass(frozen=True)
class TableCell:
    label: str
    dist: str
    n: int
    k: int
    summary: RejectionSummary


@dataclass(frozen=True)
class TableResult:
    table: str
    cells: tuple[TableCell, ...] = field(default=())

    def cell(self, label: str, n: int, k: int) -> TableCell:
        for c in self.cells:
            if (c.label, c.n, c.k) == (label, n, k):
                return c
        raise KeyError((label, n, k))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for c in self.cells:
            buf.write(c.summary.csv_row(c.label, c.n, c.k) + "\n")
        return buf.getvalue()


def reproduce_table(
    table: str,
    m: int = 2000,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int | None = None,
    rows: Sequence[str] | None = None,
) -> TableResult:
    """Every (distribution, n, k) cell of a table, row-major.

    Cell ``c`` (row-major index over the full table) uses streams ``(c, r)``,
    so restricting ``rows`` does not change the cells that remain.
    """
    try:
        layout = TABLES[table]
    except KeyError:
        raise ConfigError(f"table: expected one of {', '.join(TABLES)}, got {table!r}") from None
    cells = []
    index = 0
    for label, dist in layout["rows"]:
        for n, k in layout["cols"]:
            if rows is None or label in rows:
                cfg = ExperimentConfig(dist, layout["f0"], n, k, m, alpha, layout["kind"], seed, index)
                cells.append(TableCell(label, cfg.dist, n, k, run_rejection_experiment(cfg, workers)))
            index += 1
    return TableResult(table, tuple(cells))


# ---------------------------------------------------------------------------
# Conditional tail laws
# ---------------------------------------------------------------------------


def sample_conditional(d, q: float, stream: RngStream, size: int) -> np.ndarray:
    """Draws from ``F_q(x) = P(X <= x | X > q)``."""
    d = from_spec(d)
    v = stream.uniforms(size)
    return d.inverse_log_survival(d.log_survival(q) + np.log(v))


def simulate_eta(f, g, q: float, stream: RngStream, size: int) -> np.ndarray:
    """``eta_q = log((1 - F(q)) / (1 - F(xi)))`` with ``xi`` drawn from ``G_q``."""
    f = from_spec(f)
    xi = sample_conditional(g, q, stream, size)
    return f.log_survival(q) - f.log_survival(xi)


def top_excesses_vs_conditional(dist, n: int, k: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Pooled top-``k`` values above ``X_(n-k)`` and matching i.i.d. draws from ``F_q``.

    Each replication conditions its reference draws on its own ``q = X_(n-k)``,
    so both pools follow the same mixture law when the conditional
    representation holds.
    """
    dist = from_spec(dist)
    tops, refs = [], []
    for r in range(m):
        top = sample_top(dist, RngStream(seed, (0, r)), n, k + 1)
        tops.append(top[1:])
        refs.append(sample_conditional(dist, float(top[0]), RngStream(seed, (1, r)), k))
    return np.concatenate(tops), np.concatenate(refs)
