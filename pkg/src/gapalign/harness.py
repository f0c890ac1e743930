"""Seeded Monte Carlo experiments over grids of sequence lengths.

A run is described by an :class:`ExperimentConfig` (plain ``key=value`` text).
For each ``n`` of the grid, ``trials`` independent string pairs are drawn, each
from its own random stream (see :mod:`gapalign.seeding`, cell index = position
of ``n`` in the grid), scored, and summarized.  Results are keyed by trial
index, so the report does not depend on how the work was split up.
"""

from __future__ import annotations

import hashlib
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import scoring as sc
from .align import align_full, kgap_scores
from .brownian import default_grid, delta_n, lk_samples, theorem1_statistic, tw_ks, tw_rescale
from .seeding import derive_seed, trial_rng
from .stats import ExponentFit, SummaryStats, ks_fitted_normal, ks_two_sample, loglog_fit, summarize
from .walks import build_walks, couple_to_isotropic, cov_deviation_ratio

# Monte Carlo 99.9th percentile of max_blocks ||Cov - jI|| / (k sqrt j) over 10^4
# instances of 100 blocks, k = 1, j = 100, seed 0; see tests/test_walks.py
DEFAULT_EVENT_CONSTANT = 4.2002

MAX_BATCH_CELLS = 20_000_000

REPORT_HEADER = "n,k,trials,mean,stddev,var,mean_rescaled,ks_tw,ks_normal"


class ConfigError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    letter_model: str = "binary"  # binary | normal_y
    p_a: float = 0.5
    letters: str = "pm1"  # pm1 (a=+1, b=-1) | 01 (a=1, b=0; product scoring only)
    scoring: str = "product"  # product | S0..S4 | lcs | min_a | path to a matrix file
    gap_mode: str = "fixed"  # none | fixed | power | linear
    k: int = 0
    alpha: float = 0.1
    rho: float = 0.1
    n_grid: tuple[int, ...] = (100,)
    trials: int = 100
    seed: int = 0
    grid_factor: int = 64
    budget: float = 2e10
    event_constant: float = DEFAULT_EVENT_CONSTANT
    mesh_beta: float = 0.5

    def __post_init__(self):
        validate(self)

    def gaps_for(self, n: int) -> int:
        if self.gap_mode == "none":
            return 0
        if self.gap_mode == "fixed":
            k = self.k
        elif self.gap_mode == "power":
            k = int(math.floor(n**self.alpha + 1e-12))
        else:
            k = int(math.floor(self.rho * n + 1e-12))
        if k > n:
            raise ConfigError(f"k={k} exceeds n={n}")
        return k

    def scoring_rule(self):
        if self.scoring == "product":
            return sc.PRODUCT
        if self.scoring in sc.NAMED:
            return sc.NAMED[self.scoring]
        return sc.read_matrix(self.scoring)

    def mean_step(self) -> float:
        rule = self.scoring_rule()
        if self.letters == "01":
            return self.p_a**2
        return sc.mean_pair_score(rule, self.p_a, self.letter_model)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(i) for i in v)
            out.append(f"{f.name}={v}")
        return "\n".join(out) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def validate(cfg: ExperimentConfig) -> None:
    if cfg.letter_model not in ("binary", "normal_y"):
        raise ConfigError(f"letter_model must be binary or normal_y, got {cfg.letter_model!r}")
    if cfg.letters not in ("pm1", "01"):
        raise ConfigError(f"letters must be pm1 or 01, got {cfg.letters!r}")
    if cfg.gap_mode not in ("none", "fixed", "power", "linear"):
        raise ConfigError(f"gap_mode must be none, fixed, power or linear, got {cfg.gap_mode!r}")
    if not 0.0 < cfg.p_a < 1.0:
        raise ConfigError("p_a must lie in (0, 1)")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    if cfg.gap_mode == "fixed" and cfg.k < 0:
        raise ConfigError("k must be nonnegative")
    if cfg.gap_mode == "power" and not 0.0 < cfg.alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if cfg.gap_mode == "linear" and not 0.0 < cfg.rho < 1.0:
        raise ConfigError("rho must lie in (0, 1)")
    if not cfg.n_grid or any(n < 1 for n in cfg.n_grid):
        raise ConfigError("n_grid must be a nonempty list of positive integers")
    if any(b <= a for a, b in zip(cfg.n_grid, cfg.n_grid[1:])):
        raise ConfigError("n_grid must be strictly increasing")
    if not 0.0 < cfg.mesh_beta < 1.0:
        raise ConfigError("mesh_beta must lie in (0, 1)")
    if cfg.grid_factor < 1:
        raise ConfigError("grid_factor must be at least 1")
    if cfg.letter_model == "normal_y" and cfg.scoring != "product":
        raise ConfigError("normal_y letters need scoring=product")
    if cfg.letters == "01" and cfg.scoring != "product":
        raise ConfigError("letters=01 needs scoring=product")
    if cfg.gap_mode == "none" and cfg.scoring == "product" and cfg.letter_model == "normal_y":
        raise ConfigError("unconstrained alignment needs binary letters")


def _parse_grid(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text.startswith("logspace(") and text.endswith(")"):
        lo, hi, count = (float(v) for v in text[len("logspace(") : -1].split(","))
        grid = np.unique(np.round(np.logspace(math.log10(lo), math.log10(hi), int(count))).astype(int))
        return tuple(int(v) for v in grid)
    return tuple(int(v) for v in text.split(",") if v.strip())


_CASTS = {
    "k": int,
    "trials": int,
    "seed": int,
    "grid_factor": int,
    "p_a": float,
    "alpha": float,
    "rho": float,
    "budget": float,
    "event_constant": float,
    "mesh_beta": float,
    "n_grid": _parse_grid,
}


def parse_config(text: str, overrides: dict | None = None, base: Path | None = None) -> ExperimentConfig:
    """Parse ``key=value`` lines (``#`` starts a comment); unknown keys are errors."""
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = val
    for key, val in (overrides or {}).items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r}")
        if val is not None:
            values[key] = val
    parsed = {}
    for key, val in values.items():
        cast = _CASTS.get(key, str)
        try:
            parsed[key] = cast(val) if isinstance(val, str) else val
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r} ({exc})") from None
    scoring = parsed.get("scoring")
    if base is not None and scoring and scoring != "product" and scoring not in sc.NAMED:
        path = Path(scoring)
        if not path.is_absolute():
            parsed["scoring"] = str((base / path).resolve())
    return ExperimentConfig(**parsed)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), overrides, base=path.parent)


RECIPES = {
    "fig1": ("fig1_k20", "fig1_k100", "fig1_k200"),
    "fig2": ("fig2_a10", "fig2_a05", "fig2_a01"),
    "fig3": ("fig3_r10", "fig3_r05", "fig3_r01"),
}


def recipe_text(name: str) -> str:
    return resources.files("gapalign.recipes").joinpath(f"{name}.cfg").read_text()


def recipe_config(name: str, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = recipe_text(name)
    except FileNotFoundError:
        raise ConfigError(f"no bundled recipe {name!r}") from None
    return parse_config(text, overrides)


# -- sampling and scoring ----------------------------------------------------


def sample_letters(rng, size: int, cfg: ExperimentConfig) -> np.ndarray:
    is_a = rng.random(size) < cfg.p_a
    if cfg.letters == "01":
        return is_a.astype(float)
    return np.where(is_a, 1.0, -1.0)


def sample_instance(cfg: ExperimentConfig, n: int, k: int, rng):
    """X (length n - k) then Y (length n) from one stream."""
    x = sample_letters(rng, n - k, cfg)
    if cfg.letter_model == "normal_y":
        y = rng.standard_normal(n)
    else:
        y = sample_letters(rng, n, cfg)
    return x, y


def cell_ops(cfg: ExperimentConfig) -> float:
    total = 0.0
    for n in cfg.n_grid:
        k = cfg.gaps_for(n)
        per = float(n) * n if cfg.gap_mode == "none" else float(n) * (k + 1)
        total += cfg.trials * per
    return total


def check_budget(cfg: ExperimentConfig) -> None:
    ops = cell_ops(cfg)
    if ops > cfg.budget:
        raise BudgetExceeded(f"experiment needs {ops:.3g} DP cell updates, budget is {cfg.budget:.3g}")


def score_trials(cfg: ExperimentConfig, cell: int, n: int, start: int, stop: int) -> np.ndarray:
    """Scores of trials ``start..stop-1`` of grid cell ``cell``."""
    k = cfg.gaps_for(n)
    rule = cfg.scoring_rule()
    pairs = [sample_instance(cfg, n, k, trial_rng(cfg.seed, cell, t)) for t in range(start, stop)]
    if cfg.gap_mode == "none":
        return np.array([align_full(x, y, rule).score for x, y in pairs])
    X = np.array([p[0] for p in pairs]).reshape(len(pairs), n - k)
    Y = np.array([p[1] for p in pairs]).reshape(len(pairs), n)
    return kgap_scores(X, Y, rule, k)


def _chunks(cfg: ExperimentConfig, n: int, workers: int):
    size = max(1, MAX_BATCH_CELLS // max(n, 1))
    if workers > 1:
        size = max(1, min(size, math.ceil(cfg.trials / workers)))
    return [(s, min(s + size, cfg.trials)) for s in range(0, cfg.trials, size)]


def _score_task(args):
    cfg, cell, n, start, stop = args
    return start, score_trials(cfg, cell, n, start, stop)


def collect_scores(cfg: ExperimentConfig, workers: int = 1) -> dict[int, np.ndarray]:
    """All trial scores per n, ordered by trial index."""
    check_budget(cfg)
    tasks = [(cfg, cell, n, a, b) for cell, n in enumerate(cfg.n_grid) for a, b in _chunks(cfg, n, workers)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score_task, tasks))
    else:
        results = [_score_task(t) for t in tasks]
    out = {n: np.empty(cfg.trials) for n in cfg.n_grid}
    for (task, (start, scores)) in zip(tasks, results):
        n = task[2]
        out[n][start : start + len(scores)] = scores
    return out


@dataclass(frozen=True)
class ReportRow:
    n: int
    k: int
    trials: int
    raw: SummaryStats
    rescaled: SummaryStats | None
    ks_tw: float
    ks_normal: float


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple[ReportRow, ...]
    fit: ExponentFit | None
    scores: dict = field(repr=False, compare=False, default_factory=dict)
    rescaled: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        return self.config.digest()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(REPORT_HEADER + "\n")
        for r in self.rows:
            mr = r.rescaled.mean if r.rescaled is not None else math.nan
            cells = [r.n, r.k, r.trials, r.raw.mean, r.raw.stddev, r.raw.variance, mr, r.ks_tw, r.ks_normal]
            buf.write(",".join(_fmt(c) for c in cells) + "\n")
        return buf.getvalue()

    def stddev_csv(self) -> str:
        return "n,stddev\n" + "".join(f"{r.n},{_fmt(r.raw.stddev)}\n" for r in self.rows)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isnan(v):
        return "nan"
    return f"{float(v) + 0.0:.12g}"


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    scores = collect_scores(cfg, workers)
    mean_step = cfg.mean_step()
    rows = []
    rescaled_all = {}
    for n in cfg.n_grid:
        k = cfg.gaps_for(n)
        s = scores[n]
        raw = summarize(s)
        if k >= 1:
            resc = theorem1_statistic(s, n, k, mean_step)
            rescaled_all[n] = resc
            rs = summarize(resc)
            ks_tw = tw_ks(resc)
        else:
            rs, ks_tw = None, math.nan
        rows.append(ReportRow(n, k, cfg.trials, raw, rs, ks_tw, ks_fitted_normal(s)))
    fit = None
    sds = [r.raw.stddev for r in rows]
    if len(rows) >= 2 and all(v > 0 for v in sds):
        fit = loglog_fit([r.n for r in rows], sds)
    return ExperimentReport(cfg, tuple(rows), fit, scores, rescaled_all)


def brownian_oracle(k: int, trials: int, seed: int, grid_factor: int = 64, T: int | None = None) -> np.ndarray:
    """Rescaled lk_functional samples at ``k`` (cell index -1 keeps streams apart from experiments)."""
    T = default_grid(k, grid_factor) if T is None else T
    seeds = [derive_seed(seed, (1 << 64) - 1, t) for t in range(trials)]
    return tw_rescale(lk_samples(k, T, seeds), k)


def brownian_crosscheck(report: ExperimentReport, n: int, trials: int | None = None) -> float:
    """KS distance between the rescaled walk statistic at ``n`` and the Brownian functional at the same k."""
    k = report.config.gaps_for(n)
    walk = report.rescaled[n]
    oracle = brownian_oracle(k, trials or len(walk), report.config.seed, report.config.grid_factor)
    return ks_two_sample(walk, oracle)


# -- event diagnostics ------------------------------------------------------


@dataclass(frozen=True)
class EventRates:
    n: int
    k: int
    j: int
    trials: int
    A: float
    D: float
    F: float
    G: float
    delta_n: float
    max_deviation_bound: float


def event_trial(n: int, k: int, j: int, C: float, rng):
    """One instance: normal Y, +-1 X, product scoring.  Returns (A, D, F, G, worst coupling bound)."""
    x = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    x_ext = np.where(rng.random(k) < 0.5, 1.0, -1.0)
    y = rng.standard_normal(n)
    walks = build_walks(x, y, sc.PRODUCT, k, x_ext)
    R = walks.positions()
    blocks = n // j
    ln = math.log(n)
    exc_bound = ln * math.sqrt(j)
    d_bound = ln * math.sqrt(k) * math.sqrt(n) / j**0.25

    ok_a = ok_f = ok_g = True
    worst_bound = 0.0
    Cpos = np.zeros(k + 1)
    max_diff = 0.0
    steps = np.arange(1, j + 1)[:, None] / j
    for b in range(blocks):
        lo, hi = b * j, (b + 1) * j
        w = walks.windows(lo, j)
        sigma = w.T @ w
        if cov_deviation_ratio(sigma, j, k) > C:
            ok_a = False
        v = R[hi] - R[lo]
        N, bound = couple_to_isotropic(v[None, :], sigma, j)
        worst_bound = max(worst_bound, bound)
        N = N[0]
        # Brownian bridge from 0 to N over j unit steps
        free = np.cumsum(rng.standard_normal((j, k + 1)), axis=0)
        path = free - steps * free[-1] + steps * N
        if np.abs(path).max() > exc_bound:
            ok_f = False
        if np.abs(R[lo + 1 : hi + 1] - R[lo]).max() > exc_bound:
            ok_g = False
        Cpos = Cpos + N
        max_diff = max(max_diff, float(np.abs(Cpos - R[hi]).max()))
    ok_d = max_diff <= d_bound + 1e-9
    return ok_a, ok_d, ok_f, ok_g, worst_bound


def run_event_diagnostics(n: int, k: int, beta: float, trials: int, seed: int, C: float = DEFAULT_EVENT_CONSTANT, cell: int = 0) -> EventRates:
    if not 0.0 < beta < 1.0:
        raise ConfigError("mesh exponent beta must lie in (0, 1)")
    j = int(math.floor(n**beta + 1e-12))
    if j < k or j < 1:
        raise ConfigError(f"mesh j={j} is smaller than k={k}")
    hits = np.zeros(4)
    worst = 0.0
    for t in range(trials):
        *flags, bound = event_trial(n, k, j, C, trial_rng(seed, cell, t))
        hits += np.array(flags, dtype=float)
        worst = max(worst, bound)
    a, d, f, g = hits / trials
    return EventRates(n, k, j, trials, a, d, f, g, delta_n(n, k, j), worst)


def diagnostics_for(cfg: ExperimentConfig) -> list[EventRates]:
    if cfg.letter_model != "normal_y":
        raise ConfigError("event diagnostics need letter_model=normal_y")
    return [
        run_event_diagnostics(n, cfg.gaps_for(n), cfg.mesh_beta, cfg.trials, cfg.seed, cfg.event_constant, cell)
        for cell, n in enumerate(cfg.n_grid)
    ]


DIAG_HEADER = "n,k,j,trials,pass_A,pass_D,pass_F,pass_G,delta_n,max_deviation_bound"


def diagnostics_csv(rates) -> str:
    lines = [DIAG_HEADER]
    for r in rates:
        lines.append(",".join(_fmt(v) for v in (r.n, r.k, r.j, r.trials, r.A, r.D, r.F, r.G, r.delta_n, r.max_deviation_bound)))
    return "\n".join(lines) + "\n"


def with_scoring(cfg: ExperimentConfig, scoring: str) -> ExperimentConfig:
    return replace(cfg, scoring=scoring)
