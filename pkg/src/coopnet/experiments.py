"""Measurement protocols and their aggregation over independent realizations.

Protocols mirror the standard experiment set for this model:

* grow (no mutation)      -- cooperation sweep over r while the network
  grows from a cooperative core by adding defectors.
* static with mutation    -- fixed-size fully cooperative start, mutants
  appear between generations; cooperation averaged after a transient.
* grow with mutation      -- both processes at once.
* fixation                -- probability that a cooperative seed of N_i
  nodes reaches the target size still majority-cooperative.
* time series             -- single-realization per-generation trace.
* degree profile          -- time-averaged defector fraction per degree.
* learning comparison     -- degree profiles under the democratic
  weighted rule vs the learning-activity rule at matched parameters.

Realization i of grid point g always consumes the substream
``(seed, g, i)``, so aggregated results are independent of worker count
and any single realization can be rerun in isolation.  Cooperation is
always measured right after the synchronous update, before that
window's mutation and growth.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, IO, Iterable, Sequence

import numpy as np

from .engine import (
    DynamicsConfig,
    PopulationState,
    build_initial_cooperators,
    mutate,
    step_generation,
)
from .game import GameParams, Strategy
from .graph import GrowthModel, GrowthSpec
from .streams import substream
from .update import (
    DemocraticWeighted,
    LearningActivity,
    UpdateRule,
    synchronous_generation,
)

RULE_NAMES = ("democratic", "learning")

# A realization counts as extinct / not fixated when it finishes below
# majority cooperation.
MAJORITY = 0.5


class NoTransitionError(RuntimeError):
    """The sweep never crossed the cooperation threshold."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared parameter set for every protocol runner.

    ``initial_size`` is N_i for growing protocols and the fixed system
    size for static ones.  ``seed_sizes`` is the N_i grid of the
    fixation protocol, ``trials`` its per-point realization count M.
    """

    model: str = "ma"
    links_per_node: int = 4
    rule: str = "democratic"
    beta: float = 1.0
    alpha: float = math.inf
    abundance_exponent: float = 2.0
    r_grid: tuple[float, ...] = (2.0,)
    growth_fraction: float = 0.001
    mutation_prob: float = 0.01
    initial_size: int = 1000
    max_size: int = 4000
    transient: int = 2000
    measure: int = 500
    generations: int = 1000
    realizations: int = 10
    trials: int = 50
    seed_sizes: tuple[int, ...] = (8, 50, 200, 800)
    seed: int = 0
    threads: int = 1
    window_fraction: float = 0.9


def growth_spec(cfg: ExperimentConfig) -> GrowthSpec:
    return GrowthSpec(GrowthModel(cfg.model), cfg.links_per_node)


def update_rule(cfg: ExperimentConfig) -> UpdateRule:
    if cfg.rule == "democratic":
        return DemocraticWeighted(beta=cfg.beta, alpha=cfg.alpha)
    if cfg.rule == "learning":
        return LearningActivity(exponent=cfg.abundance_exponent, alpha=cfg.alpha)
    raise ValueError(f"unknown rule {cfg.rule!r}")


def _map_jobs(fn: Callable, jobs: Sequence, threads: int) -> list:
    # executor.map preserves job order, so the reduction below never
    # depends on completion order.
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


# -- r sweeps ----------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    r: float
    mean_c: float
    std_c: float
    realizations: int
    extinct_frac: float


@dataclass
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("r,mean_c,std_c,realizations,extinct_frac\n")
        for row in self.rows:
            fh.write(
                f"{row.r!r},{row.mean_c!r},{row.std_c!r},"
                f"{row.realizations},{row.extinct_frac!r}\n"
            )


def _sweep_realization(job) -> tuple[float, float]:
    """One realization: returns (window-mean cooperation, final fraction)."""
    cfg, r, grid_i, real_i = job
    rng = substream(cfg.seed, grid_i, real_i)
    spec = growth_spec(cfg)
    rule = update_rule(cfg)
    params = GameParams.from_ratio(r)
    dyn = DynamicsConfig(
        growth_fraction=cfg.growth_fraction,
        mutation_prob=cfg.mutation_prob,
        max_size=cfg.max_size,
        seed=cfg.seed,
    )
    state = build_initial_cooperators(spec, cfg.initial_size, rng)
    window: list[float] = []
    if cfg.growth_fraction > 0.0:
        cut = cfg.window_fraction * cfg.max_size
        while state.network.node_count < cfg.max_size:
            playing = state.network.node_count
            step_generation(state, dyn, params, rule, spec, rng)
            if playing > cut:
                window.append(state.coop_after_update)
    else:
        for _ in range(cfg.transient):
            step_generation(state, dyn, params, rule, spec, rng)
        for _ in range(cfg.measure):
            step_generation(state, dyn, params, rule, spec, rng)
            window.append(state.coop_after_update)
    mean_c = float(np.mean(window)) if window else state.cooperation_fraction()
    return mean_c, state.cooperation_fraction()


def sweep_point(cfg: ExperimentConfig, r: float, grid_index: int) -> SweepRow:
    """Aggregate the realizations of a single grid point.

    ``grid_index`` must be the point's index in the run's full r grid:
    it keys the realization substreams, so a point recomputed alone
    matches the same point inside a whole-grid run.
    """
    if cfg.realizations < 1:
        raise ValueError("realizations must be >= 1")
    jobs = [(cfg, r, grid_index, ri) for ri in range(cfg.realizations)]
    results = _map_jobs(_sweep_realization, jobs, cfg.threads)
    means = np.array([m for m, _ in results])
    finals = np.array([f for _, f in results])
    return SweepRow(
        r=r,
        mean_c=float(means.mean()),
        std_c=float(means.std(ddof=1)) if len(means) > 1 else 0.0,
        realizations=cfg.realizations,
        extinct_frac=float((finals < MAJORITY).mean()),
    )


def _run_sweep(cfg: ExperimentConfig) -> SweepTable:
    table = SweepTable()
    for gi, r in enumerate(cfg.r_grid):
        table.rows.append(sweep_point(cfg, r, gi))
    return table


def run_grow_no_mutation(cfg: ExperimentConfig) -> SweepTable:
    """Cooperation vs r while growing by defector insertion, no mutants.

    Per realization, cooperation is averaged over the generations played
    above window_fraction * max_size (over the measurement window when
    growth_fraction is 0 and the protocol degenerates to a static run).
    """
    return _run_sweep(replace(cfg, mutation_prob=0.0))


def run_static_mutation(cfg: ExperimentConfig) -> SweepTable:
    """Cooperation vs r at fixed size ``initial_size`` with mutants only;
    averaged over ``measure`` generations after ``transient`` ones."""
    return _run_sweep(replace(cfg, growth_fraction=0.0))


def run_grow_with_mutation(cfg: ExperimentConfig) -> SweepTable:
    """Growth and mutation applied together; aggregation as in the pure
    growth sweep.  With mutation_prob=0 or growth_fraction=0 this runs
    exactly the corresponding simpler protocol."""
    return _run_sweep(cfg)


@dataclass(frozen=True)
class RcEstimate:
    grid_r: float
    interpolated_r: float
    threshold: float


def estimate_rc(table: SweepTable, threshold: float = 0.5) -> RcEstimate:
    """Smallest grid r whose mean cooperation reaches ``threshold``, plus
    the linearly interpolated crossing point."""
    rows = sorted(table.rows, key=lambda row: row.r)
    for i, row in enumerate(rows):
        if row.mean_c >= threshold:
            if i == 0:
                return RcEstimate(row.r, row.r, threshold)
            prev = rows[i - 1]
            interp = prev.r + (threshold - prev.mean_c) * (row.r - prev.r) / (
                row.mean_c - prev.mean_c
            )
            return RcEstimate(row.r, interp, threshold)
    raise NoTransitionError(
        f"no transition in grid: mean_c never reached {threshold}"
    )


# -- fixation ----------------------------------------------------------


@dataclass(frozen=True)
class FixationRow:
    seed_size: int
    fixation_prob: float
    trials: int
    successes: int


@dataclass
class FixationTable:
    rows: list[FixationRow] = field(default_factory=list)

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("N_i,P_f,M,M_c\n")
        for row in self.rows:
            fh.write(
                f"{row.seed_size},{row.fixation_prob!r},{row.trials},{row.successes}\n"
            )


def _fixation_trial(job) -> bool:
    cfg, seed_size, grid_i, trial_i = job
    rng = substream(cfg.seed, grid_i, trial_i)
    spec = growth_spec(cfg)
    rule = update_rule(cfg)
    dyn = DynamicsConfig(
        growth_fraction=cfg.growth_fraction,
        mutation_prob=cfg.mutation_prob,
        max_size=cfg.max_size,
        seed=cfg.seed,
    )
    params = GameParams.from_ratio(cfg.r_grid[0])
    state = build_initial_cooperators(spec, seed_size, rng)
    while state.network.node_count < cfg.max_size:
        step_generation(state, dyn, params, rule, spec, rng)
    return state.cooperation_fraction() > MAJORITY


def fixation_point(
    cfg: ExperimentConfig, seed_size: int, grid_index: int
) -> FixationRow:
    """Fixation probability for one seed size; ``grid_index`` keys the
    trial substreams as in :func:`sweep_point`."""
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    if not cfg.growth_fraction > 0.0:
        raise ValueError("fixation requires growth_fraction > 0")
    if len(cfg.r_grid) != 1:
        raise ValueError("fixation runs at a single r")
    jobs = [(cfg, seed_size, grid_index, ti) for ti in range(cfg.trials)]
    wins = sum(_map_jobs(_fixation_trial, jobs, cfg.threads))
    return FixationRow(
        seed_size=seed_size,
        fixation_prob=wins / cfg.trials,
        trials=cfg.trials,
        successes=wins,
    )


def run_fixation(cfg: ExperimentConfig) -> FixationTable:
    """Fraction of ``trials`` runs from each seed size that reach
    ``max_size`` still majority-cooperative, growing with mutation."""
    table = FixationTable()
    for gi, seed_size in enumerate(cfg.seed_sizes):
        table.rows.append(fixation_point(cfg, seed_size, gi))
    return table


# -- time series -------------------------------------------------------


@dataclass(frozen=True)
class TracePoint:
    generation: int
    size: int
    frac_coop: float


@dataclass
class TimeSeries:
    points: list[TracePoint] = field(default_factory=list)

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("generation,N,frac_coop\n")
        for p in self.points:
            fh.write(f"{p.generation},{p.size},{p.frac_coop!r}\n")


def run_time_series(cfg: ExperimentConfig) -> TimeSeries:
    """Single-realization trace: one point per generation, recording the
    size the round was played at and the post-update cooperation."""
    if cfg.generations < 1:
        raise ValueError("generations must be >= 1")
    rng = substream(cfg.seed, 0, 0)
    spec = growth_spec(cfg)
    rule = update_rule(cfg)
    params = GameParams.from_ratio(cfg.r_grid[0])
    dyn = DynamicsConfig(
        growth_fraction=cfg.growth_fraction,
        mutation_prob=cfg.mutation_prob,
        max_size=cfg.max_size,
        seed=cfg.seed,
    )
    state = build_initial_cooperators(spec, cfg.initial_size, rng)
    series = TimeSeries()
    for _ in range(cfg.generations):
        playing = state.network.node_count
        step_generation(state, dyn, params, rule, spec, rng)
        series.points.append(
            TracePoint(state.generation, playing, state.coop_after_update)
        )
    return series


# -- degree profile ----------------------------------------------------

EXACT_DEGREE_LIMIT = 50
LOG_BIN_FACTOR = 1.5


@dataclass(frozen=True)
class ProfileBin:
    k_lo: int
    k_hi: int
    frac_defect: float
    samples: int


@dataclass
class DegreeProfile:
    bins: list[ProfileBin]
    top_decile_defector_fraction: float
    defectors_by_degree: np.ndarray
    samples_by_degree: np.ndarray

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("k_bin_lo,k_bin_hi,frac_defect,sample_count\n")
        for b in self.bins:
            fh.write(f"{b.k_lo},{b.k_hi},{b.frac_defect!r},{b.samples}\n")


def _degree_bins(max_degree: int) -> list[tuple[int, int]]:
    # Exact bins up to EXACT_DEGREE_LIMIT, multiplicative bins beyond
    # (the tail is read on a log scale).
    bins = [(k, k) for k in range(1, min(max_degree, EXACT_DEGREE_LIMIT) + 1)]
    lo = EXACT_DEGREE_LIMIT + 1
    while lo <= max_degree:
        hi = max(int(lo * LOG_BIN_FACTOR), lo + 1)
        bins.append((lo, min(hi, max_degree)))
        lo = hi + 1
    return bins


def _profile_realization(job):
    cfg, rule_name, real_i = job
    rng = substream(cfg.seed, RULE_NAMES.index(rule_name), real_i)
    cfg = replace(cfg, rule=rule_name, growth_fraction=0.0)
    spec = growth_spec(cfg)
    rule = update_rule(cfg)
    params = GameParams.from_ratio(cfg.r_grid[0])
    dyn = DynamicsConfig(mutation_prob=cfg.mutation_prob, seed=cfg.seed)
    state = build_initial_cooperators(spec, cfg.initial_size, rng)
    degrees = state.network.degrees().copy()
    top_mask = degrees >= np.quantile(degrees, 0.9)
    kmax = int(degrees.max())
    for _ in range(cfg.transient):
        step_generation(state, dyn, params, rule, spec, rng)
    defect = np.zeros(kmax + 1)
    top_defect = 0
    strategies = state.strategies
    # Same update/mutate order as step_generation, sampling the
    # strategies at the post-update measurement point.
    for _ in range(cfg.measure):
        updated = synchronous_generation(
            state.network, strategies, params, rule, rng
        )
        is_defect = updated == Strategy.DEFECTOR
        defect += np.bincount(
            degrees, weights=is_defect.astype(np.float64), minlength=kmax + 1
        )
        top_defect += int(is_defect[top_mask].sum())
        strategies = (
            mutate(updated, cfg.mutation_prob, rng)
            if cfg.mutation_prob > 0.0
            else updated
        )
    samples = np.bincount(degrees, minlength=kmax + 1) * cfg.measure
    return defect, samples, top_defect, int(top_mask.sum()) * cfg.measure


def _aggregate_profile(parts) -> DegreeProfile:
    kmax = max(len(defect) for defect, _, _, _ in parts) - 1
    defect = np.zeros(kmax + 1)
    samples = np.zeros(kmax + 1, dtype=np.int64)
    top_d = top_n = 0
    for d, s, td, tn in parts:
        defect[: len(d)] += d
        samples[: len(s)] += s
        top_d += td
        top_n += tn
    bins = []
    for lo, hi in _degree_bins(kmax):
        n_samples = int(samples[lo : hi + 1].sum())
        if n_samples == 0:
            continue
        frac = float(defect[lo : hi + 1].sum() / n_samples)
        bins.append(ProfileBin(lo, hi, frac, n_samples))
    return DegreeProfile(
        bins=bins,
        top_decile_defector_fraction=top_d / top_n,
        defectors_by_degree=defect,
        samples_by_degree=samples,
    )


def run_degree_profile(cfg: ExperimentConfig) -> DegreeProfile:
    """Defector fraction per degree, time-averaged over the measurement
    window and ensemble-averaged over ``realizations`` static networks."""
    if cfg.measure < 1:
        raise ValueError("measure must be >= 1")
    jobs = [(cfg, cfg.rule, ri) for ri in range(cfg.realizations)]
    return _aggregate_profile(_map_jobs(_profile_realization, jobs, cfg.threads))


@dataclass
class LearningComparison:
    democratic: DegreeProfile
    learning: DegreeProfile


def run_learning_comparison(cfg: ExperimentConfig) -> LearningComparison:
    """Matched degree profiles under both update rules."""
    jobs = [
        (cfg, rule_name, ri)
        for rule_name in RULE_NAMES
        for ri in range(cfg.realizations)
    ]
    parts = _map_jobs(_profile_realization, jobs, cfg.threads)
    return LearningComparison(
        democratic=_aggregate_profile(parts[: cfg.realizations]),
        learning=_aggregate_profile(parts[cfg.realizations :]),
    )
