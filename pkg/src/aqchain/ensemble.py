"""Seeded Gaussian disorder ensembles and their aggregate statistics.

Every instance is reproducible in isolation: instance i of a run draws its
parameters from a generator seeded by (master_seed, i), so results do not
depend on ensemble size, execution order, or worker count. Aggregation is
a sequential reduce over records sorted by index.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import multiprocessing as mp

import numpy as np

from .conditions import ConditionReport, evaluate_conditions
from .csvio import fmt, write_csv
from .model import ChainParams, Schedule, ideal_chain, problem_diagonal
from .propagation import _final_reference, auto_propagate, propagate
from .spectrum import default_levels, gap_trace, minimum_gap

SIGMA_CAP = 0.5
VALID_TARGETS = ("lambda", "h", "j")

# Accuracy contract for per-instance propagation: the ideal instance's
# auto-converged step count at this tolerance is reused for every instance.
# Ensemble statistics resolve differences of order std/sqrt(size) >> 1e-4.
ENSEMBLE_TOL = 1e-4


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian disorder: targeted parameters, relative spread, seeding."""

    sigma_rel: float
    targets: tuple[str, ...]
    master_seed: int
    ensemble_size: int

    def __post_init__(self):
        if not (0.0 <= self.sigma_rel <= SIGMA_CAP):
            raise ValueError(f"sigma_rel must lie in [0, {SIGMA_CAP}], got {self.sigma_rel}")
        targets = tuple(self.targets)
        if not targets or any(t not in VALID_TARGETS for t in targets):
            raise ValueError(f"targets must be a nonempty subset of {VALID_TARGETS}, got {targets}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets in {targets}")
        object.__setattr__(self, "targets", targets)
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        object.__setattr__(self, "master_seed", int(self.master_seed))


@dataclass
class InstanceRecord:
    index: int
    seed: int
    params: ChainParams
    p_s: float
    delta_min: float
    s_star: float
    gs_match: bool
    conditions: ConditionReport | None = None


@dataclass
class EnsembleSummary:
    """Aggregates over the valid records of one ensemble.

    mean_ps_matched averages only instances whose final ground state equals
    the ideal one (None when no instance matches); failures lists indices
    whose evaluation raised, excluded from every aggregate.
    """

    spec: DisorderSpec
    n_qubits: int
    size: int
    mean_ps: float
    std_ps: float
    mean_dmin: float
    std_dmin: float
    gs_match_fraction: float
    mean_ps_matched: float | None
    failures: tuple[int, ...] = ()


def instance_seed(master_seed: int, index: int) -> int:
    """The derived 64-bit seed recorded for instance `index`."""
    seq = np.random.SeedSequence((int(master_seed), int(index)))
    return int(seq.generate_state(1, np.uint64)[0])


def sample_instance(ideal: ChainParams, spec: DisorderSpec, index: int) -> ChainParams:
    """Draw one disordered instance around the ideal parameters.

    Each targeted parameter x is drawn from Normal(x, (sigma_rel * |x|)^2)
    independently; untargeted parameters stay at their ideal values. Draws
    are consumed in the fixed order lambda, h, j so the result depends only
    on (master_seed, index).
    """
    seq = np.random.SeedSequence((spec.master_seed, int(index)))
    rng = np.random.Generator(np.random.PCG64(seq))
    lam, h, j = ideal.lam, ideal.h, ideal.j
    if "lambda" in spec.targets:
        lam = lam + spec.sigma_rel * np.abs(lam) * rng.standard_normal(len(lam))
    if "h" in spec.targets:
        h = h + spec.sigma_rel * np.abs(h) * rng.standard_normal(len(h))
    if "j" in spec.targets:
        j = j + spec.sigma_rel * np.abs(j) * rng.standard_normal(len(j))
    return ChainParams(n_qubits=ideal.n_qubits, lam=lam, h=h, j=j)


def _diag_argmin(params: ChainParams) -> tuple[int, bool]:
    diag = problem_diagonal(params)
    order = np.argsort(diag, kind="stable")
    lowest = int(order[0])
    tie = len(diag) > 1 and (diag[order[1]] - diag[lowest]) < 1e-12 * max(1.0, abs(diag[lowest]))
    return lowest, tie


def ground_state_matches(instance: ChainParams, ideal: ChainParams) -> bool:
    """Whether the instance's classical ground bitstring equals the ideal one.

    A degenerate instance minimum counts as a non-match and raises a
    warning, since the final ground state is then not unique.
    """
    if instance.n_qubits != ideal.n_qubits:
        raise ValueError("chains differ in size")
    inst_low, inst_tie = _diag_argmin(instance)
    ideal_low, _ = _diag_argmin(ideal)
    if inst_tie:
        warnings.warn(f"instance ground bitstring is degenerate (index {inst_low})")
        return False
    return inst_low == ideal_low


def _evaluate_instance(task) -> tuple[int, InstanceRecord | None, str | None]:
    (
        ideal,
        spec,
        sched,
        index,
        steps,
        trace_grid,
        k,
        with_conditions,
        pairs,
        reference,
    ) = task
    try:
        params = sample_instance(ideal, spec, index)
        match = ground_state_matches(params, ideal)
        trace = gap_trace(params, sched, trace_grid, k=k, keep_states=with_conditions)
        delta_min, s_star = minimum_gap(trace)
        result = propagate(params, sched, steps, final_reference=reference)
        report = None
        if with_conditions:
            report = evaluate_conditions(params, sched, trace, pairs)
        record = InstanceRecord(
            index=index,
            seed=instance_seed(spec.master_seed, index),
            params=params,
            p_s=result.success_probability,
            delta_min=delta_min,
            s_star=s_star,
            gs_match=match,
            conditions=report,
        )
        return index, record, None
    except Exception as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def run_ensemble(
    ideal: ChainParams,
    spec: DisorderSpec,
    sched: Schedule,
    with_conditions: bool = False,
    steps: int | None = None,
    trace_grid: int | None = None,
    k: int | None = None,
    pairs=None,
    workers: int = 1,
    ensemble_tol: float = ENSEMBLE_TOL,
) -> tuple[EnsembleSummary, list[InstanceRecord]]:
    """Evaluate a full disorder ensemble under a calibrated schedule.

    Each instance is propagated from its own initial ground state and scored
    against the ideal instance's final ground state. The step count defaults
    to the ideal instance's auto-converged count at ensemble_tol and is then
    held fixed for every instance, so the run is deterministic under any
    worker count. Per-instance failures are recorded by index and excluded
    from the aggregates rather than silently dropped.

    Returns the summary and the records sorted by instance index.
    """
    if k is None:
        k = default_levels(ideal.n_qubits)
    if trace_grid is None:
        trace_grid = 1001 if with_conditions else 201
    reference = _final_reference(ideal, sched)
    if steps is None:
        steps = auto_propagate(ideal, sched, tol=ensemble_tol, final_reference=reference).steps_used

    tasks = [
        (ideal, spec, sched, index, steps, trace_grid, k, with_conditions, pairs, reference)
        for index in range(spec.ensemble_size)
    ]
    if workers > 1:
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            outcomes = list(pool.map(_evaluate_instance, tasks, chunksize=1))
    else:
        outcomes = [_evaluate_instance(task) for task in tasks]

    outcomes.sort(key=lambda item: item[0])
    records = [rec for _, rec, err in outcomes if err is None]
    failures = tuple(idx for idx, _, err in outcomes if err is not None)
    for idx, _, err in outcomes:
        if err is not None:
            warnings.warn(f"instance {idx} failed: {err}")
    if not records:
        raise RuntimeError("every instance in the ensemble failed")

    ps = np.array([r.p_s for r in records])
    dmin = np.array([r.delta_min for r in records])
    matched = np.array([r.gs_match for r in records], dtype=bool)
    ddof = 1 if len(records) > 1 else 0
    summary = EnsembleSummary(
        spec=spec,
        n_qubits=ideal.n_qubits,
        size=len(records),
        mean_ps=float(np.mean(ps)),
        std_ps=float(np.std(ps, ddof=ddof)),
        mean_dmin=float(np.mean(dmin)),
        std_dmin=float(np.std(dmin, ddof=ddof)),
        gs_match_fraction=float(np.mean(matched)),
        mean_ps_matched=float(np.mean(ps[matched])) if np.any(matched) else None,
        failures=failures,
    )
    return summary, records


def ideal_instance_record(
    ideal: ChainParams,
    sched: Schedule,
    steps: int | None = None,
    trace_grid: int = 1001,
    k: int | None = None,
    pairs=None,
    ensemble_tol: float = ENSEMBLE_TOL,
) -> InstanceRecord:
    """The disorder-free reference row (index -1) for scatter tables."""
    if k is None:
        k = default_levels(ideal.n_qubits)
    trace = gap_trace(ideal, sched, trace_grid, k=k, keep_states=True)
    delta_min, s_star = minimum_gap(trace)
    if steps is None:
        result = auto_propagate(ideal, sched, tol=ensemble_tol)
    else:
        result = propagate(ideal, sched, steps)
    report = evaluate_conditions(ideal, sched, trace, pairs)
    return InstanceRecord(
        index=-1,
        seed=0,
        params=ideal,
        p_s=result.success_probability,
        delta_min=delta_min,
        s_star=s_star,
        gs_match=True,
        conditions=report,
    )


@dataclass(frozen=True)
class Histogram:
    bin_left: np.ndarray
    bin_right: np.ndarray
    counts: np.ndarray
    ideal_dmin: float
    mean_dmin: float


def dmin_histogram(records, bins: int = 40, ideal_dmin: float | None = None) -> Histogram:
    """Uniform-bin histogram of the minimum gaps with marker values.

    Bins span [min, max] of the observed values; a degenerate range (all
    values identical) collapses to a single occupied bin. The ideal-instance
    gap and the ensemble mean ride along as marker positions.
    """
    values = np.array([r.delta_min for r in records])
    if len(values) == 0:
        raise ValueError("no records to histogram")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    mean = float(np.mean(values))
    if ideal_dmin is None:
        ideal_dmin = float("nan")
    low, high = float(np.min(values)), float(np.max(values))
    if low == high:
        return Histogram(
            bin_left=np.array([low]),
            bin_right=np.array([high]),
            counts=np.array([len(values)]),
            ideal_dmin=float(ideal_dmin),
            mean_dmin=mean,
        )
    counts, edges = np.histogram(values, bins=bins, range=(low, high))
    return Histogram(
        bin_left=edges[:-1],
        bin_right=edges[1:],
        counts=counts,
        ideal_dmin=float(ideal_dmin),
        mean_dmin=mean,
    )


def symmetric_gap_shift(
    ideal: ChainParams,
    direction: np.ndarray,
    amplitudes,
    sched: Schedule | None = None,
    grid_points: int = 401,
) -> np.ndarray:
    """Quadratic response of the minimum gap to an h-direction perturbation.

    For each amplitude a the longitudinal fields are displaced to
    h * (1 +/- a * direction) and the two refined minimum gaps averaged;
    the returned shifts are that average minus the unperturbed gap. The
    symmetric average cancels the linear response exactly, leaving the
    second-order term, which is the effect the disorder ensembles feel in
    the mean (linear terms average out over zero-mean draws).
    """
    if sched is None:
        sched = Schedule(t_f=1.0)
    direction = np.asarray(direction, dtype=float)
    if direction.shape != ideal.h.shape:
        raise ValueError("direction must match the h vector shape")

    def refined(params: ChainParams) -> float:
        trace = gap_trace(params, sched, grid_points, keep_states=False)
        return minimum_gap(trace)[0]

    base = refined(ideal)
    shifts = []
    for a in np.asarray(amplitudes, dtype=float):
        up = ChainParams(ideal.n_qubits, ideal.lam, ideal.h * (1 + a * direction), ideal.j)
        down = ChainParams(ideal.n_qubits, ideal.lam, ideal.h * (1 - a * direction), ideal.j)
        shifts.append(0.5 * (refined(up) + refined(down)) - base)
    return np.asarray(shifts)


def bootstrap_mean_std(values, n_boot: int = 2000, seed: int = 0) -> float:
    """Bootstrap standard deviation of the sample mean (seeded, deterministic)."""
    values = np.asarray(values, dtype=float)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    idx = rng.integers(0, len(values), size=(n_boot, len(values)))
    return float(np.std(values[idx].mean(axis=1), ddof=1))


INSTANCES_HEADER = ["index", "seed", "ps", "dmin", "s_star", "gs_match", "c1", "c2", "c3", "c4"]
SUMMARY_HEADER = [
    "param_kind",
    "sigma_rel",
    "N",
    "size",
    "mean_ps",
    "std_ps",
    "mean_dmin",
    "std_dmin",
    "gs_match_fraction",
]
HIST_HEADER = ["bin_left", "bin_right", "count"]


def write_instances(records, path) -> None:
    rows = []
    for r in records:
        cond = r.conditions
        rows.append(
            [
                r.index,
                r.seed,
                r.p_s,
                r.delta_min,
                r.s_star,
                r.gs_match,
                cond.c1 if cond else "",
                cond.c2 if cond else "",
                cond.c3 if cond else "",
                cond.c4 if cond else "",
            ]
        )
    write_csv(path, INSTANCES_HEADER, rows)


def summary_row(summary: EnsembleSummary) -> list:
    return [
        "+".join(summary.spec.targets),
        summary.spec.sigma_rel,
        summary.n_qubits,
        summary.size,
        summary.mean_ps,
        summary.std_ps,
        summary.mean_dmin,
        summary.std_dmin,
        summary.gs_match_fraction,
    ]


def write_summaries(summaries, path) -> None:
    write_csv(path, SUMMARY_HEADER, [summary_row(s) for s in summaries])


def write_histogram(hist: Histogram, path) -> None:
    rows = list(zip(hist.bin_left, hist.bin_right, hist.counts))
    footer = [f"ideal_dmin,{fmt(hist.ideal_dmin)}", f"mean_dmin,{fmt(hist.mean_dmin)}"]
    write_csv(path, HIST_HEADER, rows, footer=footer)
