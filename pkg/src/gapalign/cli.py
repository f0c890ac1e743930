"""Command line entry point: ``gapalign <subcommand> ...``.

Exit codes: 0 success, 2 usage or input error, 3 budget exceeded, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, scoring as sc
from .align import align_full, align_kgap
from .brownian import default_grid, lk_functional, sample_bm, tw_reference, tw_rescale
from .seeding import derive_seed, make_rng
from .stats import loglog_fit
from .walks import build_walks, empirical_increment_cov

EXIT_USAGE, EXIT_BUDGET, EXIT_NUMERIC = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return f"{float(v) + 0.0:.15g}"


def _letters(text: str | None, path: str | None, real: bool = False) -> np.ndarray:
    if path:
        text = Path(path).read_text()
    if text is None:
        raise UsageError("missing input string")
    text = text.strip()
    if real or "," in text:
        try:
            return np.array([float(v) for v in text.replace("\n", ",").split(",") if v.strip()])
        except ValueError:
            raise UsageError(f"cannot parse letters {text[:20]!r}") from None
    try:
        return np.array([sc.LETTER_CODES[ch] for ch in text if not ch.isspace()], dtype=float)
    except KeyError as exc:
        raise UsageError(f"unknown letter {exc.args[0]!r}; use a/b or comma-separated numbers") from None


def _scoring(args):
    if args.matrix:
        return sc.read_matrix(args.matrix)
    if args.scoring in sc.NAMED:
        return sc.NAMED[args.scoring]
    if args.scoring == "product":
        return sc.PRODUCT
    raise UsageError(f"unknown scoring {args.scoring!r}")


def cmd_decompose(args) -> str:
    S = sc.read_matrix(args.matrix) if args.matrix else sc.NAMED.get(args.scoring)
    if S is None:
        raise UsageError(f"unknown scoring {args.scoring!r}")
    c = sc.decompose(S)
    return " ".join(f"a{i}={_fmt(v)}" for i, v in enumerate(c.as_tuple())) + "\n"


def cmd_align(args) -> str:
    S = _scoring(args)
    real = isinstance(S, sc.ProductScoring)
    x = _letters(args.x, args.x_file, real)
    y = _letters(args.y, args.y_file, real)
    if args.k is None:
        if real:
            raise UsageError("unconstrained alignment needs a scoring matrix")
        res = align_full(x, y, S, witness=args.witness)
        lines = [f"score={_fmt(res.score)}"]
        if args.witness:
            lines.append("pairs=" + ",".join(f"{i}:{j}" for i, j in res.pairs))
    else:
        res = align_kgap(x, y, S, args.k, witness=True)
        lines = [f"score={_fmt(res.score)}"]
        if args.witness:
            lines.append("gaps=" + ",".join(str(c) for c in res.gaps))
    return "\n".join(lines) + "\n"


def cmd_walks(args) -> str:
    S = _scoring(args)
    if args.x is not None or args.x_file:
        real = isinstance(S, sc.ProductScoring)
        x = _letters(args.x, args.x_file, real)
        y = _letters(args.y, args.y_file, real)
        x_ext = _letters(args.x_ext, None, real) if args.x_ext else np.zeros(0)
    else:
        if args.n is None or args.seed is None:
            raise UsageError("give --x/--y, or --n with --seed to sample letters")
        rng = make_rng(derive_seed(args.seed, 0, 0))
        x_ext = np.where(rng.random(args.k) < 0.5, 1.0, -1.0)
        x = np.where(rng.random(args.n) < 0.5, 1.0, -1.0)
        y = rng.standard_normal(args.n) if args.normal_y else np.where(rng.random(args.n) < 0.5, 1.0, -1.0)
        if args.normal_y:
            S = sc.PRODUCT
    w = build_walks(x, y, S, args.k, x_ext)
    rows = ["i,j,value"]
    if args.block_len:
        cov = empirical_increment_cov(w, args.block_start, args.block_len)
        for i in range(cov.shape[0]):
            for j in range(cov.shape[1]):
                rows.append(f"{i + 1},{j + 1},{_fmt(cov[i, j])}")
    else:
        for j in range(w.n):
            for i in range(w.k + 1):
                rows.append(f"{i + 1},{j + 1},{_fmt(w.increments[j, i])}")
    return "\n".join(rows) + "\n"


def cmd_brownian(args) -> str:
    if args.tw_table:
        ref = tw_reference()
        return "x,F\n" + "".join(f"{_fmt(x)},{_fmt(F)}\n" for x, F in zip(ref.x, ref.F))
    if args.seed is None:
        raise UsageError("--seed is required")
    if args.k < 0 or args.trials < 1:
        raise UsageError("need --k >= 0 and --trials >= 1")
    T = args.grid or default_grid(args.k, args.grid_factor)
    rows = ["trial,lk,rescaled"]
    for t in range(args.trials):
        lk = lk_functional(sample_bm(args.k, T, make_rng(derive_seed(args.seed, (1 << 64) - 1, t))))
        resc = float(tw_rescale(lk, args.k)) if args.k >= 1 else math.nan
        rows.append(f"{t},{_fmt(lk)},{_fmt(resc)}")
    return "\n".join(rows) + "\n"


def _overrides(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _config(args, keys, **fixed):
    over = _overrides(args, keys)
    over.update(fixed)
    if args.seed is None:
        raise UsageError("--seed is required")
    over["seed"] = args.seed
    if args.config:
        path = Path(args.config)
        if path.exists():
            return harness.load_config(path, over)
        return harness.recipe_config(args.config, over)
    return harness.parse_config("", over)


_EXPERIMENT_KEYS = ("letter_model", "p_a", "letters", "scoring", "gap_mode", "k", "alpha", "rho", "n_grid", "trials", "budget", "grid_factor")


def cmd_simulate(args) -> str:
    if args.recipe:
        if args.seed is None:
            raise UsageError("--seed is required")
        names = harness.RECIPES.get(args.recipe)
        if names is None:
            raise UsageError(f"unknown recipe {args.recipe!r}; choose from {sorted(harness.RECIPES)}")
        if not args.out:
            raise UsageError("--recipe writes one CSV per series and needs --out DIR")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        over = _overrides(args, _EXPERIMENT_KEYS)
        over["seed"] = args.seed
        for name in names:
            report = harness.run_experiment(harness.recipe_config(name, over), workers=args.workers)
            (out / f"{name}.csv").write_text(report.to_csv())
            (out / f"{name}_stddev.csv").write_text(report.stddev_csv())
        return ""
    cfg = _config(args, _EXPERIMENT_KEYS)
    report = harness.run_experiment(cfg, workers=args.workers)
    return report.to_csv()


def cmd_diagnose(args) -> str:
    keys = ("alpha", "n_grid", "trials", "mesh_beta", "event_constant", "gap_mode", "k")
    cfg = _config(args, keys, letter_model="normal_y", scoring="product")
    return harness.diagnostics_csv(harness.diagnostics_for(cfg))


def cmd_exponent(args) -> str:
    src = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
    reader = csv.DictReader(src.splitlines())
    if reader.fieldnames is None or not {"n", "stddev"} <= set(reader.fieldnames):
        raise UsageError("exponent input needs an n,stddev header")
    ns, sds = [], []
    for row in reader:
        ns.append(float(row["n"]))
        sds.append(float(row["stddev"]))
    if not all(math.isfinite(v) for v in ns + sds):
        raise FloatingPointError("non-finite n or stddev in exponent input")
    fit = loglog_fit(ns, sds)
    return f"slope={_fmt(fit.slope)} intercept={_fmt(fit.intercept)} r2={_fmt(fit.r2)} points={fit.point_count} slope_stderr={_fmt(fit.slope_stderr)}\n"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gapalign", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def scoring_flags(q):
        q.add_argument("--matrix", help="scoring matrix file (saa=, sab=, sbb=, sag=, sbg= lines)")
        q.add_argument("--scoring", default="S2", help="named scoring: S0..S4, lcs, min_a, product")

    q = sub.add_parser("decompose", help="basis coefficients a0..a4 of a scoring matrix")
    scoring_flags(q)
    q.set_defaults(func=cmd_decompose)

    q = sub.add_parser("align", help="optimal alignment score")
    scoring_flags(q)
    q.add_argument("--x")
    q.add_argument("--y")
    q.add_argument("--x-file")
    q.add_argument("--y-file")
    q.add_argument("--k", type=int, help="exactly k gaps, all in X (|X| = |Y| - k)")
    q.add_argument("--witness", action="store_true", help="print the optimal gap positions or pairs")
    q.set_defaults(func=cmd_align)

    q = sub.add_parser("walks", help="walk increments or block covariances as i,j,value CSV")
    scoring_flags(q)
    q.add_argument("--x", help="X_1..X_n")
    q.add_argument("--y")
    q.add_argument("--x-file")
    q.add_argument("--y-file")
    q.add_argument("--x-ext", help="X_0, X_-1, .., X_(1-k)")
    q.add_argument("--k", type=int, default=0)
    q.add_argument("--n", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--normal-y", action="store_true", help="sample Y standard normal (product scoring)")
    q.add_argument("--block-start", type=int, default=0)
    q.add_argument("--block-len", type=int, default=0)
    q.set_defaults(func=cmd_walks)

    q = sub.add_parser("brownian", help="switch-time functional of discretized Brownian motion")
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--grid", type=int, help="grid steps T (default: grid policy)")
    q.add_argument("--grid-factor", type=int, default=64)
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--seed", type=int)
    q.add_argument("--tw-table", action="store_true", help="export the Tracy-Widom reference as x,F CSV")
    q.set_defaults(func=cmd_brownian)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "Monte Carlo experiment report CSV"),
        ("diagnose", cmd_diagnose, "pass rates of the walk/Brownian coupling events"),
    ):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("--config", help="key=value config file or bundled recipe name")
        q.add_argument("--seed", type=int)
        q.add_argument("--n-grid", dest="n_grid")
        q.add_argument("--trials")
        q.add_argument("--gap-mode", dest="gap_mode")
        q.add_argument("--k")
        q.add_argument("--alpha")
        q.add_argument("--workers", type=int, default=1)
        if name == "simulate":
            q.add_argument("--recipe", help="run every series of a bundled figure recipe (fig1, fig2, fig3)")
            q.add_argument("--letter-model", dest="letter_model")
            q.add_argument("--p-a", dest="p_a")
            q.add_argument("--letters")
            q.add_argument("--scoring")
            q.add_argument("--rho")
            q.add_argument("--budget")
            q.add_argument("--grid-factor", dest="grid_factor")
        else:
            q.add_argument("--beta", dest="mesh_beta")
            q.add_argument("--event-constant", dest="event_constant")
        q.add_argument("--out")
        q.set_defaults(func=func)

    q = sub.add_parser("exponent", help="log-log fit of stddev against n")
    q.add_argument("--in", dest="input", required=True, help="CSV with n,stddev header ('-' for stdin)")
    q.set_defaults(func=cmd_exponent)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = args.func(args)
        if text:
            _emit(text, getattr(args, "out", None))
        return 0
    except UsageError as exc:
        print(f"gapalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except harness.BudgetExceeded as exc:
        print(f"gapalign: budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gapalign: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"gapalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
