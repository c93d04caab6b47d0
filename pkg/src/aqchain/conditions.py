"""Four scalar adiabaticity figures of merit evaluated on a spectrum trace.

All four are built from the instantaneous eigensystem of the sweep. With
Hdot_mn = <E_m| dH/dt |E_n> and Delta_nm = E_n - E_m (rad/ns):

    c1 : max over the grid and pair set of |Hdot_nm| / Delta_nm^2
    c2 : max over pairs of the integral of |d/dt (Hdot_nm / Delta_nm^2)| dt
    c3 : like c1 but with one gap factor shifted by the geometric potential
         delta_nm = i (<E_n|dE_n/dt> - <E_m|dE_m/dt>)
    c4 : max(||H'||^3 / Delta_min^4, ||H'|| ||H''|| / Delta_min^3) with the
         spectral norms maximized over the sweep (units of ns)

The envelope structure makes dH/ds a scalar profile times the fixed matrix
H_P - H_I, so the element tracks reduce to one matrix-vector product per
grid point and level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import pi

import numpy as np

from .csvio import write_csv
from .model import (
    ChainParams,
    Schedule,
    build_initial_hamiltonian,
    build_problem_hamiltonian,
)
from .spectrum import DEGENERACY_RTOL, SpectrumTrace, smooth_gauge

# |Delta_mn + delta_nm| below this (rad/ns) marks a singular point of c3.
SINGULAR_ATOL = 1e-10


@dataclass(frozen=True)
class ConditionReport:
    """The four figures of merit for one instance, with maxima located.

    max_abs_delta records the largest |delta_nm| seen over the grid and
    pair set; for the real Hamiltonians of this model it is identically
    zero. Degenerate pairs are skipped and listed; singular_points counts
    grid points where c3's shifted gap fell below SINGULAR_ATOL.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c1_pair: tuple[int, int]
    c1_s: float
    c3_pair: tuple[int, int]
    c3_s: float
    pairs: tuple[tuple[int, int], ...]
    grid_points: int
    max_abs_delta: float
    skipped_pairs: tuple[tuple[int, int], ...]
    singular_points: int


def ground_pairs(k: int) -> tuple[tuple[int, int], ...]:
    """Default pair set: the ground state against each tracked excited level."""
    return tuple((0, n) for n in range(1, k))


def all_pairs(k: int) -> tuple[tuple[int, int], ...]:
    return tuple((m, n) for m in range(k) for n in range(m + 1, k))


def realign_states(states: np.ndarray) -> np.ndarray:
    """Apply the smooth gauge sequentially from the first grid point.

    Condition values must not depend on the sign/phase conventions of the
    eigensolver, so every entry point re-aligns the stored states before
    differentiating them.
    """
    out = np.array(states, copy=True)
    for g in range(1, out.shape[0]):
        out[g] = smooth_gauge(out[g - 1], out[g])
    return out


class _Context:
    """Shared per-trace quantities for the condition evaluations."""

    def __init__(self, params: ChainParams, sched: Schedule, trace: SpectrumTrace, pairs):
        if trace.states is None:
            raise ValueError("trace must be built with keep_states=True")
        self.params = params
        self.sched = sched
        self.trace = trace
        if pairs is None:
            pairs = ground_pairs(trace.k)
        for m, n in pairs:
            if not (0 <= m < trace.k and 0 <= n < trace.k) or m == n:
                raise ValueError(f"pair ({m}, {n}) is not a pair of tracked levels")
        self.pairs = tuple((int(m), int(n)) for m, n in pairs)
        self.states = realign_states(trace.states)
        self.energies = trace.energies
        self.s_grid = trace.s_grid
        self.difference = build_problem_hamiltonian(params) - build_initial_hamiltonian(params)
        # dH/dt = profile(s) * (H_P - H_I); profile in rad/ns per ns
        self.profile = sched.epsilon0 * pi * np.sin(pi * self.s_grid) / sched.t_f
        self.degeneracy_atol = DEGENERACY_RTOL * sched.epsilon0
        self._applied: dict[int, np.ndarray] = {}
        self._diag_derivative: np.ndarray | None = None

    def applied(self, level: int) -> np.ndarray:
        """(H_P - H_I) |E_level> at every grid point, shape (grid, dim)."""
        if level not in self._applied:
            self._applied[level] = self.states[:, :, level] @ self.difference
        return self._applied[level]

    def element_track(self, m: int, n: int) -> np.ndarray:
        """<E_m| (H_P - H_I) |E_n> over the grid."""
        return np.sum(self.states[:, :, m].conj() * self.applied(n), axis=1)

    def gap_track(self, m: int, n: int) -> np.ndarray:
        """Delta_nm(s) = E_n - E_m over the grid."""
        return self.energies[:, n] - self.energies[:, m]

    def degenerate(self, m: int, n: int) -> bool:
        return bool(np.any(np.abs(self.gap_track(m, n)) < self.degeneracy_atol))

    def diag_derivative(self) -> np.ndarray:
        """<E_j | dE_j/ds> for every tracked level, shape (grid, k)."""
        if self._diag_derivative is None:
            dstates = np.gradient(self.states, self.s_grid, axis=0)
            self._diag_derivative = np.sum(self.states.conj() * dstates, axis=1)
        return self._diag_derivative

    def delta_track(self, m: int, n: int) -> np.ndarray:
        """Geometric potential delta_nm(s) in 1/ns, real part only.

        <E_j|dE_j/ds> is purely imaginary for normalized states, so the
        real part of i times the difference is the whole value; the
        numerically contaminated real part of the raw derivative (zero by
        normalization) is dropped rather than folded in.
        """
        d = self.diag_derivative()
        return np.real(1j * (d[:, n] - d[:, m])) / self.sched.t_f

    def usable_pairs(self, warn_label: str):
        usable, skipped = [], []
        for m, n in self.pairs:
            if self.degenerate(m, n):
                skipped.append((m, n))
            else:
                usable.append((m, n))
        if skipped:
            warnings.warn(f"{warn_label}: skipping degenerate pairs {skipped}")
        return usable, tuple(skipped)


def hdot_matrix_element(s: float, trace: SpectrumTrace, m: int, n: int, sched: Schedule | None = None) -> complex:
    """<E_m| dH/dt |E_n> at a grid point of the trace, in rad/ns per ns.

    s must coincide with a point of the trace grid; the element is taken in
    the trace's stored (gauge-aligned) eigenbasis.
    """
    if trace.states is None:
        raise ValueError("trace must be built with keep_states=True")
    if not (0 <= m < trace.k and 0 <= n < trace.k):
        raise ValueError(f"levels ({m}, {n}) are not tracked (k={trace.k})")
    sched = trace.sched if sched is None else sched
    idx = int(np.argmin(np.abs(trace.s_grid - s)))
    if abs(trace.s_grid[idx] - s) > 1e-12:
        raise ValueError(f"s={s} is not on the trace grid")
    params = trace.params
    difference = build_problem_hamiltonian(params) - build_initial_hamiltonian(params)
    vec_m = trace.states[idx, :, m]
    vec_n = trace.states[idx, :, n]
    profile = sched.epsilon0 * pi * np.sin(pi * trace.s_grid[idx]) / sched.t_f
    return complex(profile * np.vdot(vec_m, difference @ vec_n))


def _c1_detail(ctx: _Context):
    best, best_pair, best_s = 0.0, ctx.pairs[0], 0.0
    usable, skipped = ctx.usable_pairs("c1")
    for m, n in usable:
        track = np.abs(ctx.profile * ctx.element_track(m, n)) / ctx.gap_track(m, n) ** 2
        g = int(np.argmax(track))
        if track[g] > best:
            best, best_pair, best_s = float(track[g]), (m, n), float(ctx.s_grid[g])
    return best, best_pair, best_s, skipped


def _c2_value(ctx: _Context):
    best = 0.0
    usable, skipped = ctx.usable_pairs("c2")
    for m, n in usable:
        integrand = ctx.profile * ctx.element_track(m, n) / ctx.gap_track(m, n) ** 2
        slope = np.gradient(integrand, ctx.s_grid)
        # d/dt integrated over t equals d/ds integrated over s
        best = max(best, float(np.trapezoid(np.abs(slope), ctx.s_grid)))
    return best, skipped


def _c3_detail(ctx: _Context):
    best, best_pair, best_s = 0.0, ctx.pairs[0], 0.0
    max_delta = 0.0
    singular = 0
    usable, skipped = ctx.usable_pairs("c3")
    for m, n in usable:
        delta = ctx.delta_track(m, n)
        max_delta = max(max_delta, float(np.max(np.abs(delta))))
        gap_mn = -ctx.gap_track(m, n)  # Delta_mn = E_m - E_n
        shifted = gap_mn + delta
        bad = np.abs(shifted) < SINGULAR_ATOL
        if np.any(bad):
            singular += int(np.count_nonzero(bad))
            warnings.warn(f"c3: {int(np.count_nonzero(bad))} singular grid points on pair ({m}, {n})")
        track = np.abs(ctx.profile * ctx.element_track(m, n)) / np.abs(gap_mn * shifted)
        track[bad] = 0.0
        g = int(np.argmax(track))
        if track[g] > best:
            best, best_pair, best_s = float(track[g]), (m, n), float(ctx.s_grid[g])
    return best, best_pair, best_s, max_delta, singular, skipped


def _c4_value(params: ChainParams, sched: Schedule, trace: SpectrumTrace) -> float:
    difference = build_problem_hamiltonian(params) - build_initial_hamiltonian(params)
    spectral = float(np.max(np.abs(np.linalg.eigvalsh(difference))))
    # ||H'(s)|| and ||H''(s)|| are scalar profiles times ||H_P - H_I||
    first = sched.epsilon0 * pi * float(np.max(np.abs(np.sin(pi * trace.s_grid)))) * spectral
    second = sched.epsilon0 * pi**2 * float(np.max(np.abs(np.cos(pi * trace.s_grid)))) * spectral
    d_min = trace.delta_min
    if not d_min > 0.0:
        raise ValueError("trace has no positive minimum gap")
    return max(first**3 / d_min**4, first * second / d_min**3)


def condition_c1(params: ChainParams, sched: Schedule, trace: SpectrumTrace, pairs=None) -> float:
    """Largest |Hdot_nm| / Delta_nm^2 over the grid and pair set."""
    value, _, _, _ = _c1_detail(_Context(params, sched, trace, pairs))
    return value


def condition_c2(params: ChainParams, sched: Schedule, trace: SpectrumTrace, pairs=None) -> float:
    """Total variation in time of Hdot_nm / Delta_nm^2, maximized over pairs.

    The derivative is taken by centered finite differences on the grid
    (one-sided at the endpoints) and integrated with the trapezoid rule.
    """
    value, _ = _c2_value(_Context(params, sched, trace, pairs))
    return value


def condition_c3(params: ChainParams, sched: Schedule, trace: SpectrumTrace, pairs=None) -> float:
    """Like c1 with one gap factor shifted by the geometric potential."""
    value, _, _, _, _, _ = _c3_detail(_Context(params, sched, trace, pairs))
    return value


def condition_c4(params: ChainParams, sched: Schedule, trace: SpectrumTrace) -> float:
    """Norm-based kernel max(||H'||^3/Dmin^4, ||H'|| ||H''||/Dmin^3), in ns.

    The prefactor converting this kernel into an actual duration bound for
    a chosen error budget lives in tf_bound.
    """
    return _c4_value(params, sched, trace)


def tf_bound(c4: float, error_budget: float) -> float:
    """Duration bound t_f >= 1e5 / error_budget^2 * c4, in ns."""
    if not error_budget > 0.0:
        raise ValueError("error budget must be positive")
    return 1e5 / error_budget**2 * c4


def geometric_potential(trace: SpectrumTrace, m: int, n: int, t_f: float | None = None) -> np.ndarray:
    """delta_nm(s) over the trace grid, in 1/ns, for the states as stored.

    No gauge realignment is applied here: the value is gauge dependent and
    tests supply traces in deliberately chosen gauges. Eigenvector
    derivatives are centered finite differences (one-sided at endpoints);
    only the real part of i*(d_n - d_m) is returned since the remainder is
    a pure normalization artifact.
    """
    if trace.states is None:
        raise ValueError("trace must carry states")
    if t_f is None:
        t_f = trace.sched.t_f
    dstates = np.gradient(trace.states, trace.s_grid, axis=0)
    d = np.sum(trace.states.conj() * dstates, axis=1)
    return np.real(1j * (d[:, n] - d[:, m])) / t_f


def evaluate_conditions(
    params: ChainParams,
    sched: Schedule,
    trace: SpectrumTrace,
    pairs=None,
) -> ConditionReport:
    """All four figures of merit for one instance on a shared trace."""
    ctx = _Context(params, sched, trace, pairs)
    c1, c1_pair, c1_s, skipped1 = _c1_detail(ctx)
    c2, _ = _c2_value(ctx)
    c3, c3_pair, c3_s, max_delta, singular, _ = _c3_detail(ctx)
    c4 = _c4_value(params, sched, trace)
    return ConditionReport(
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        c1_pair=c1_pair,
        c1_s=c1_s,
        c3_pair=c3_pair,
        c3_s=c3_s,
        pairs=ctx.pairs,
        grid_points=len(trace.s_grid),
        max_abs_delta=max_delta,
        skipped_pairs=skipped1,
        singular_points=singular,
    )


SCATTER_HEADER = ["index", "c1", "c2", "c3", "c4", "c1_rel", "c2_rel", "c3_rel", "c4_rel", "ps"]


def scatter_rows(ideal_record, records) -> list[list]:
    """Rows of the conditions-vs-success table, ideal instance first.

    Each record must carry .index, .p_s and a ConditionReport under
    .conditions; the ideal row is written with index -1 and normalizes the
    relative columns.
    """
    if ideal_record.conditions is None:
        raise ValueError("ideal record carries no conditions")
    ref = ideal_record.conditions
    rows = []
    for rec in [ideal_record, *records]:
        rep = rec.conditions
        if rep is None:
            raise ValueError(f"record {rec.index} carries no conditions")
        rows.append(
            [
                int(rec.index),
                rep.c1,
                rep.c2,
                rep.c3,
                rep.c4,
                rep.c1 / ref.c1,
                rep.c2 / ref.c2,
                rep.c3 / ref.c3,
                rep.c4 / ref.c4,
                rec.p_s,
            ]
        )
    return rows


def write_scatter(ideal_record, records, path) -> None:
    write_csv(path, SCATTER_HEADER, scatter_rows(ideal_record, records))
