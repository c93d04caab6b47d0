"""Instantaneous spectra along the sweep: gap tracing and minimum-gap search.

Eigenvectors along the s-grid are aligned to a smooth gauge (phase chosen so
each vector overlaps its predecessor with a real non-negative coefficient),
which keeps finite-difference derivatives of eigenvectors meaningful.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .model import (
    ChainParams,
    Schedule,
    build_initial_hamiltonian,
    build_problem_hamiltonian,
    hamiltonian_at,
)

# Eigenvalues closer than this multiple of epsilon0 are treated as degenerate.
DEGENERACY_RTOL = 1e-10

# Golden-section refinement tolerance on s.
REFINE_S_TOL = 1e-8

_INV_PHI = (sqrt(5.0) - 1.0) / 2.0


def _hermiticity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def eigh_lowest(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest k eigenpairs of a Hermitian matrix, ascending.

    Parameters
    ----------
    matrix : (dim, dim) array
        Hermitian (entrywise check); real symmetric input stays real.
    k : int
        Number of eigenpairs, 1 <= k <= dim.

    Returns
    -------
    values : (k,) array
        Ascending eigenvalues.
    vectors : (dim, k) array
        Matching orthonormal eigenvectors in the columns.
    """
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise ValueError(f"matrix must be square, got shape {matrix.shape}")
    if not (1 <= k <= dim):
        raise ValueError(f"k must lie in [1, {dim}], got {k}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if _hermiticity_defect(matrix) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian")
    if np.iscomplexobj(matrix):
        values, vectors = np.linalg.eigh(matrix)
    else:
        values, vectors = np.linalg.eigh(matrix.astype(float, copy=False))
    return values[:k], vectors[:, :k]


def smooth_gauge(prev_vectors: np.ndarray, curr_vectors: np.ndarray) -> np.ndarray:
    """Rephase eigenvector columns to overlap the previous set non-negatively.

    Each current column is multiplied by a unit phase so that
    <prev | curr> becomes real and >= 0; for real vectors this is a sign
    choice. An overlap magnitude below 0.5 indicates the levels were not
    tracked reliably between the two points and raises a warning.
    """
    prev_vectors = np.asarray(prev_vectors)
    curr_vectors = np.asarray(curr_vectors)
    if prev_vectors.shape != curr_vectors.shape:
        raise ValueError("vector sets must share a shape")
    overlaps = np.sum(prev_vectors.conj() * curr_vectors, axis=0)
    mags = np.abs(overlaps)
    if np.any(mags < 0.5):
        bad = np.nonzero(mags < 0.5)[0]
        warnings.warn(
            f"eigenvector tracking overlap below 0.5 for levels {bad.tolist()}",
            stacklevel=2,
        )
    if np.iscomplexobj(curr_vectors):
        phases = np.where(mags > 0.0, overlaps / np.where(mags > 0.0, mags, 1.0), 1.0)
        return curr_vectors * phases.conj()
    signs = np.where(overlaps < 0.0, -1.0, 1.0)
    return curr_vectors * signs


@dataclass
class SpectrumTrace:
    """Lowest-k spectrum along a uniform s-grid.

    energies has shape (grid, k); states, when kept, has shape
    (grid, dim, k) with gauge-aligned eigenvector columns. delta_min and
    s_star start as the coarse grid minimum of the gap and are replaced by
    the refined values once minimum_gap has run.
    """

    s_grid: np.ndarray
    energies: np.ndarray
    gap: np.ndarray
    delta_min: float
    s_star: float
    k: int
    params: ChainParams
    sched: Schedule
    states: np.ndarray | None = None
    refined: bool = field(default=False)


def default_levels(n_qubits: int) -> int:
    return min(2**n_qubits, 6)


def gap_trace(
    params: ChainParams,
    sched: Schedule,
    grid_points: int = 1001,
    k: int | None = None,
    keep_states: bool = True,
) -> SpectrumTrace:
    """Diagonalize H(s) on a uniform s-grid and trace the spectral gap.

    Parameters
    ----------
    params, sched : chain and sweep definition.
    grid_points : int
        Number of uniform s points including both endpoints, >= 11.
    k : int, optional
        Levels to keep; defaults to min(2**N, 6).
    keep_states : bool
        When False only eigenvalues are computed, which is roughly twice as
        fast and leaves states as None.

    The gap is E_1 - E_0; a gap below the degeneracy threshold anywhere on
    the grid is rejected, since level tracking and the conditions built on
    top of the trace assume a non-degenerate ground state.
    """
    if grid_points < 11:
        raise ValueError(f"grid_points must be >= 11, got {grid_points}")
    if k is None:
        k = default_levels(params.n_qubits)
    dim = params.dim
    if not (2 <= k <= dim):
        raise ValueError(f"k must lie in [2, {dim}], got {k}")

    h_i = build_initial_hamiltonian(params)
    h_p = build_problem_hamiltonian(params)
    s_grid = np.linspace(0.0, 1.0, grid_points)

    energies = np.empty((grid_points, k))
    states = np.empty((grid_points, dim, k)) if keep_states else None
    prev = None
    for g, s in enumerate(s_grid):
        matrix = hamiltonian_at(s, params, sched, h_i=h_i, h_p=h_p)
        if keep_states:
            values, vectors = np.linalg.eigh(matrix)
            vectors = vectors[:, :k]
            if prev is not None:
                vectors = smooth_gauge(prev, vectors)
            states[g] = vectors
            prev = vectors
        else:
            values = np.linalg.eigvalsh(matrix)
        energies[g] = values[:k]

    gap = energies[:, 1] - energies[:, 0]
    if np.min(gap) < DEGENERACY_RTOL * sched.epsilon0:
        raise ValueError("ground state is degenerate somewhere on the grid")
    g_min = int(np.argmin(gap))
    return SpectrumTrace(
        s_grid=s_grid,
        energies=energies,
        gap=gap,
        delta_min=float(gap[g_min]),
        s_star=float(s_grid[g_min]),
        k=k,
        params=params,
        sched=sched,
        states=states,
    )


def _gap_at(s: float, params: ChainParams, sched: Schedule, h_i, h_p) -> float:
    values = np.linalg.eigvalsh(hamiltonian_at(s, params, sched, h_i=h_i, h_p=h_p))
    return float(values[1] - values[0])


def _golden_minimize(f, a: float, b: float, s_tol: float) -> tuple[float, float]:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > s_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def minimum_gap(
    trace: SpectrumTrace,
    params: ChainParams | None = None,
    sched: Schedule | None = None,
) -> tuple[float, float]:
    """Refine the coarse minimum of the gap by golden-section search.

    The bracket is the pair of grid cells around the coarse argmin; the
    search narrows s to within REFINE_S_TOL. The refined (delta_min, s_star)
    replace the coarse values on the trace and are returned. The reported
    minimum never exceeds the coarse one; if the local search fails, the
    coarse value is kept and a warning raised.
    """
    params = trace.params if params is None else params
    sched = trace.sched if sched is None else sched
    h_i = build_initial_hamiltonian(params)
    h_p = build_problem_hamiltonian(params)

    g_min = int(np.argmin(trace.gap))
    lo = trace.s_grid[max(g_min - 1, 0)]
    hi = trace.s_grid[min(g_min + 1, len(trace.s_grid) - 1)]
    coarse_d = float(trace.gap[g_min])
    coarse_s = float(trace.s_grid[g_min])

    try:
        s_ref, d_ref = _golden_minimize(
            lambda s: _gap_at(s, params, sched, h_i, h_p), float(lo), float(hi), REFINE_S_TOL
        )
    except Exception as exc:  # pragma: no cover - numerical failure path
        warnings.warn(f"gap refinement failed ({exc}); keeping the coarse minimum")
        trace.refined = True
        return coarse_d, coarse_s

    if d_ref <= coarse_d:
        trace.delta_min, trace.s_star = float(d_ref), float(s_ref)
    else:
        trace.delta_min, trace.s_star = coarse_d, coarse_s
    trace.refined = True
    return trace.delta_min, trace.s_star


def trace_header(k: int) -> list[str]:
    return ["s"] + [f"E{m}" for m in range(k)] + ["gap"]


def trace_rows(trace: SpectrumTrace):
    """Rows for the gap-trace CSV: s, the k energies, and the gap."""
    for g in range(len(trace.s_grid)):
        yield [trace.s_grid[g], *trace.energies[g], trace.gap[g]]
