"""Command-line front end.

Exit codes: 0 not rejected / condition holds, 1 rejected / violated,
2 usage or data error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from tailsep.conditions import (
    check_b_condition,
    check_c_condition,
    check_delta_domination,
    default_grid,
    estimate_epsilon_max,
)
from tailsep.distributions import from_spec
from tailsep.simulate import (
    CSV_HEADER,
    TABLES,
    ExperimentConfig,
    run_rejection_experiment,
    reproduce_table,
    sweep_k,
)
from tailsep.tailstat import KINDS, SortedSample, default_k, run_test

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def read_values(path: str) -> list[float]:
    """One decimal value per line; blank lines are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            v = float(s)
        except ValueError:
            raise UsageError(f"{path}, line {lineno}: not a number: {s!r}") from None
        if not math.isfinite(v):
            raise UsageError(f"{path}, line {lineno}: non-finite value {s!r}")
        values.append(v)
    if not values:
        raise UsageError(f"{path}: no data values")
    return values


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_test(args) -> int:
    values = read_values(args.data)
    n = len(values)
    if n < 2:
        raise UsageError(f"need at least 2 values, got {n}")
    k = args.k if args.k is not None else default_k(n)
    if not 1 <= k <= n - 1:
        raise UsageError(f"k must be < n and >= 1 (k={k}, n={n})")
    report = run_test(SortedSample.from_unsorted(values), k, from_spec(args.f0), args.alpha, args.kind)
    print(report.render())
    return EXIT_REJECT if report.reject else EXIT_OK


_INLINE = ("dist", "f0", "n", "k", "m", "alpha", "kind", "seed")


def cmd_simulate(args) -> int:
    inline = {name: getattr(args, name) for name in _INLINE if getattr(args, name) is not None}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        base = ExperimentConfig.from_json(text)
        cfg = ExperimentConfig.from_dict({**base.__dict__, **inline})
    else:
        inline.setdefault("seed", 0)
        cfg = ExperimentConfig.from_dict(inline)
    summary = run_rejection_experiment(cfg)
    _emit(f"{CSV_HEADER}\n{summary.csv_row(cfg.dist, cfg.n, cfg.k)}\n", args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    result = reproduce_table(args.id, m=args.m, seed=args.seed, alpha=args.alpha)
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    ks = range(args.k_min, args.k_max + 1, args.k_step)
    if not len(ks):
        raise UsageError("empty k range")
    result = sweep_k(args.dist, args.f0, args.n, ks, args.alpha, args.m, args.seed, args.kind)
    _emit(result.to_xy() if args.xy else result.to_csv(repr(from_spec(args.dist))), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    h, g = from_spec(args.h), from_spec(args.g)
    grid = default_grid(h, g, n_points=args.points, x0=args.x0)
    if args.cond == "delta":
        if args.eps is None:
            raise UsageError("--cond delta needs --eps (the delta exponent)")
        report = check_delta_domination(h, g, args.eps, grid)
    elif args.eps is None:
        eps = estimate_epsilon_max(h, g, grid, condition=args.cond)
        print(f"epsilon_max      {eps:.4f}")
        return EXIT_OK if eps > 0 else EXIT_REJECT
    elif args.cond == "b":
        report = check_b_condition(h, g, args.eps, grid)
    else:
        report = check_c_condition(h, g, args.eps, grid)
    print(report.render())
    return EXIT_OK if report.holds else EXIT_REJECT


def _alpha(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tailsep", description="Tail discrimination tests from top order statistics.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run a tail test on a data file")
    t.add_argument("data", help="text file, one value per line")
    t.add_argument("--f0", required=True, help="separating law, e.g. sep_wlw or exp(1)")
    kk = t.add_mutually_exclusive_group()
    kk.add_argument("--k", type=int, help="number of top order statistics")
    kk.add_argument("--k-rule", choices=["5ln"], default="5ln", help="k = floor(5 ln n) (default)")
    t.add_argument("--alpha", type=_alpha, default=0.05)
    t.add_argument("--kind", choices=KINDS, default="light_vs_heavy")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo rejection rate for one cell")
    s.add_argument("--config", help="JSON experiment config; inline flags override its fields")
    s.add_argument("--dist")
    s.add_argument("--f0")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--kind", choices=KINDS)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    tb = sub.add_parser("table", help="reproduce a full rejection-rate table")
    tb.add_argument("--id", required=True, choices=sorted(TABLES))
    tb.add_argument("--m", type=int, default=2000)
    tb.add_argument("--alpha", type=_alpha, default=0.05)
    tb.add_argument("--seed", type=int, default=0)
    tb.add_argument("--out")
    tb.set_defaults(func=cmd_table)

    sw = sub.add_parser("sweep", help="rejection rate as a function of k")
    sw.add_argument("--dist", required=True)
    sw.add_argument("--f0", required=True)
    sw.add_argument("--n", type=int, default=1000)
    sw.add_argument("--k-min", type=int, default=10)
    sw.add_argument("--k-max", type=int, default=500)
    sw.add_argument("--k-step", type=int, default=10)
    sw.add_argument("--m", type=int, default=2000)
    sw.add_argument("--alpha", type=_alpha, default=0.05)
    sw.add_argument("--kind", choices=KINDS, default="heavy_vs_light")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--xy", action="store_true", help="emit x,y pairs (k, rate) instead of summary rows")
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="grid check of a tail-ordering condition")
    c.add_argument("--h", required=True, help="lighter law (F for --cond c, F1 for --cond delta)")
    c.add_argument("--g", required=True, help="heavier law (F0 for --cond delta)")
    c.add_argument("--eps", type=float, help="epsilon (delta for --cond delta); omit to estimate epsilon_max")
    c.add_argument("--cond", choices=["b", "c", "delta"], default="b")
    c.add_argument("--x0", type=float, help="grid start (default: one step above the support threshold)")
    c.add_argument("--points", type=int, default=512)
    c.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # ConfigError, SpecError and SupportError are all ValueErrors
        print(f"tailsep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RuntimeError as exc:
        print(f"tailsep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
