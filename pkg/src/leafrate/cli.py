"""Command-line front end: ``leafrate counts|constants|rate|arnold``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from . import analytics, arnold
from .genfunc import CacheFormatError, CoefficientTable, leaf_polynomials
from .precision import ConvergenceError, DegeneratePointError, InsufficientOrderError, PrecisionContext
from .trees import ContractError

__all__ = ["RunConfig", "build_parser", "main", "load_or_build_table", "cmd_counts", "cmd_constants", "cmd_rate", "cmd_arnold"]

CACHE_ENV = "LEAFRATE_CACHE"

# table builds since import; lets tests see that a warm cache skips the work
recompute_count = 0


class CliError(Exception):
    """A failure reported on stderr with a nonzero exit status."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    n: int = 7
    digits: int = 30
    order: int | None = None
    cache: Path | None = None
    threads: int = 1
    format: str = "text"
    degrees: tuple[int, ...] = (4, 5, 6)
    lambdas: tuple[float, ...] = (0.5,)
    budget: int = arnold.DEFAULT_BUDGET
    lambda_text: tuple[str, ...] = field(default=("0.5",), compare=False)

    def __post_init__(self):
        if self.digits < 1:
            raise CliError("--digits must be >= 1")
        if self.n < 1:
            raise CliError("--n must be >= 1")
        if self.order is not None and self.order < 1:
            raise CliError("--order must be >= 1")
        if self.threads < 1:
            raise CliError("--threads must be >= 1")
        if self.budget < 1:
            raise CliError("--budget must be >= 1")

    def context(self) -> PrecisionContext:
        return PrecisionContext(digits=self.digits, order=self.order)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    for t in items:
        try:
            float(t)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return items


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=30, help="significant digits reported (default 30)")
    common.add_argument(
        "--order", type=int, default=None,
        help="starting series truncation order (default: from --digits; grown on demand up to 600)",
    )
    common.add_argument(
        "--cache", type=Path, default=os.environ.get(CACHE_ENV) or None,
        help=f"coefficient table cache file (default: ${CACHE_ENV} if set)",
    )
    common.add_argument("--threads", type=int, default=1, help="worker processes for enumeration (default 1)")
    common.add_argument("--format", choices=("text", "csv"), default="text", help="output format (default text)")

    parser = argparse.ArgumentParser(
        prog="leafrate",
        description="Leaf statistics of rooted unlabelled trees and their growth constants.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("counts", parents=[common], help="print a_{n,k} for n <= N")
    p.add_argument("-n", "--n", type=int, default=7, help="largest tree size N (default 7)")
    sub.add_parser("constants", parents=[common], help="print alpha, z0, x0, C1, m, sigma2, C2")
    p = sub.add_parser("rate", parents=[common], help="print the growth rate C(lambda)")
    p.add_argument(
        "--lambda", dest="lambdas", type=_str_list, default=("0.5",),
        help="comma-separated leaf fractions (default 0.5)",
    )
    p = sub.add_parser("arnold", parents=[common], help="print the degree-indexed tree counts as CSV")
    p.add_argument("--degrees", type=_int_list, default=(4, 5, 6), help="comma-separated curve degrees (default 4,5,6)")
    p.add_argument(
        "--budget", type=int, default=arnold.DEFAULT_BUDGET,
        help=f"most trees enumerated per A_d (default {arnold.DEFAULT_BUDGET})",
    )
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    lambdas = getattr(args, "lambdas", ("0.5",))
    return RunConfig(
        subcommand=args.subcommand,
        n=getattr(args, "n", 7),
        digits=args.digits,
        order=args.order,
        cache=args.cache,
        threads=args.threads,
        format=args.format,
        degrees=getattr(args, "degrees", (4, 5, 6)),
        lambdas=tuple(float(t) for t in lambdas),
        lambda_text=lambdas,
        budget=getattr(args, "budget", arnold.DEFAULT_BUDGET),
    )


def load_or_build_table(order: int, cache: Path | None) -> CoefficientTable:
    """Table of order ``>= order``, read from ``cache`` when it is long enough.

    A missing or short cache is (re)written after the build.
    """
    global recompute_count
    if cache is not None and cache.exists():
        table = CoefficientTable.load(cache)
        if table.order >= order:
            return table
    table = leaf_polynomials(order)
    recompute_count += 1
    if cache is not None:
        try:
            table.save(cache)
        except OSError as exc:
            raise CliError(f"cannot write cache {cache}: {exc.strerror or exc}") from exc
    return table


def cmd_counts(cfg: RunConfig, out) -> int:
    table = load_or_build_table(cfg.n, cfg.cache)
    if cfg.format == "csv":
        out.write("n,k,count\n")
    sep = "," if cfg.format == "csv" else " "
    for n in range(1, cfg.n + 1):
        for k, c in enumerate(table[n].coeffs):
            if c:
                out.write(f"{n}{sep}{k}{sep}{c}\n")
    return 0


def cmd_constants(cfg: RunConfig, out) -> int:
    ctx = cfg.context()
    values = analytics.all_constants(ctx)
    if cfg.format == "csv":
        out.write("name,value,error\n")
        for name, c in values.items():
            out.write(f"{name},{analytics.format_value(c.value, cfg.digits)},{mpmath.nstr(c.error, 3)}\n")
    else:
        out.write(analytics.format_constants(values, cfg.digits))
    return 0


def cmd_rate(cfg: RunConfig, out) -> int:
    ctx = cfg.context()
    if cfg.format == "csv":
        out.write("lambda,C,z_crit\n")
    for text, lam in zip(cfg.lambda_text, cfg.lambdas):
        res = analytics.rate_function(mpmath.mpf(text), ctx)
        value = analytics.format_value(res.value, cfg.digits)
        z = "" if res.z_crit is None else analytics.format_value(res.z_crit, cfg.digits)
        if cfg.format == "csv":
            out.write(f"{text},{value},{z}\n")
        else:
            out.write(f"C({text}) = {value}\n")
    return 0


def cmd_arnold(cfg: RunConfig, out) -> int:
    degrees = cfg.degrees
    if not degrees:
        raise CliError("--degrees is empty")
    for d in degrees:
        if d < 3:
            raise CliError(f"curve degree must be >= 3, got {d}")
    top = max(arnold.vertex_budget(d).N for d in degrees)
    table = load_or_build_table(top, cfg.cache)
    pool = ProcessPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    with pool if pool is not None else nullcontext():
        try:
            rows = arnold.rate_report(degrees, table, pool=pool, budget=cfg.budget)
        except arnold.EnumerationBudgetError as exc:
            out.write(arnold.report_csv(exc.rows))
            out.write(f"# incomplete: {exc}\n")
            return 3
    out.write(arnold.report_csv(rows))
    return 0


COMMANDS = {"counts": cmd_counts, "constants": cmd_constants, "rate": cmd_rate, "arnold": cmd_arnold}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        with mpmath.workdps(15):
            return COMMANDS[cfg.subcommand](cfg, out)
    except CacheFormatError as exc:
        print(f"leafrate: corrupt cache: {exc}", file=sys.stderr)
    except (CliError, ContractError) as exc:
        print(f"leafrate: {exc}", file=sys.stderr)
    except (ConvergenceError, DegeneratePointError, InsufficientOrderError, analytics.InconsistencyError) as exc:
        print(f"leafrate: numerical failure: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"leafrate: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
