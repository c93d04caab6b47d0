"""Unitary evolution under the sweep Hamiltonian and success probability.

The propagator uses the piecewise-constant midpoint rule: over step k the
state is advanced by U_k = exp(-i H(s_k + ds/2) t_f ds), evaluated exactly
through the eigendecomposition of the midpoint Hamiltonian. Each U_k is
unitary by construction, so the state norm is preserved to rounding error
and accuracy is controlled purely by the step count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import (
    ChainParams,
    Schedule,
    build_initial_hamiltonian,
    build_problem_hamiltonian,
    hamiltonian_at,
    problem_diagonal,
)
from .spectrum import DEGENERACY_RTOL

AUTO_START_STEPS = 256
AUTO_MAX_STEPS = 2**20


@dataclass
class EvolutionResult:
    """Outcome of one propagation.

    populations, when sampling was requested, has shape (P, k) holding
    |<E_m(s)|psi(s)>|^2 at the sampled s values (rows may sum to less than
    one since only k levels are projected out).
    """

    final_state: np.ndarray
    success_probability: float
    steps_used: int
    converged: bool
    sample_s: np.ndarray | None = None
    populations: np.ndarray | None = None


def _apply_real(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # real matrix times complex vector without promoting the matrix
    return matrix @ vec.real + 1j * (matrix @ vec.imag)


def _final_reference(params: ChainParams, sched: Schedule) -> np.ndarray:
    """Ground state of H(1) as a basis vector.

    H(1) = 2 epsilon0 H_P is diagonal, so its ground state is the basis
    state minimizing the Ising diagonal. A tie within the degeneracy
    threshold is flagged; the lowest index wins.
    """
    diag = problem_diagonal(params)
    order = np.argsort(diag, kind="stable")
    lowest = int(order[0])
    if len(diag) > 1 and (diag[order[1]] - diag[lowest]) < DEGENERACY_RTOL * sched.epsilon0:
        warnings.warn("final ground state is degenerate; using the lowest basis index")
    ref = np.zeros(len(diag), dtype=complex)
    ref[lowest] = 1.0
    return ref


def success_probability(final_state: np.ndarray, reference: np.ndarray) -> float:
    """Squared overlap |<reference|final_state>|^2."""
    final_state = np.asarray(final_state)
    reference = np.asarray(reference)
    if final_state.shape != reference.shape:
        raise ValueError(
            f"dimension mismatch: {final_state.shape} vs {reference.shape}"
        )
    amp = np.vdot(reference, final_state)
    return float(np.abs(amp) ** 2)


def propagate(
    params: ChainParams,
    sched: Schedule,
    steps: int,
    final_reference: np.ndarray | None = None,
    sample_points=None,
    k: int = 6,
) -> EvolutionResult:
    """Evolve the instantaneous ground state of H(0) across the sweep.

    Parameters
    ----------
    params, sched : chain and sweep definition.
    steps : int
        Number of midpoint steps M >= 10; accuracy improves as 1/M^2.
    final_reference : (dim,) array, optional
        State against which the success probability is scored. Defaults to
        the ground state of this instance's own H(1); ensemble runs pass the
        ideal instance's final ground state instead.
    sample_points : sequence of s values in [0, 1], optional
        Where to record instantaneous-eigenbasis populations; each point is
        snapped to the nearest step boundary.
    k : int
        Number of levels projected out at each sample point.

    Returns
    -------
    EvolutionResult
    """
    steps = int(steps)
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    h_i = build_initial_hamiltonian(params)
    h_p = build_problem_hamiltonian(params)

    values, vectors = np.linalg.eigh(hamiltonian_at(0.0, params, sched, h_i=h_i, h_p=h_p))
    if (values[1] - values[0]) < DEGENERACY_RTOL * sched.epsilon0:
        raise ValueError("initial ground state is degenerate")
    psi = vectors[:, 0].astype(complex)

    sample_at: dict[int, list[int]] = {}
    sample_s = None
    populations = None
    if sample_points is not None:
        pts = np.atleast_1d(np.asarray(sample_points, dtype=float))
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ValueError("sample points must lie in [0, 1]")
        k = int(k)
        if not (1 <= k <= params.dim):
            raise ValueError(f"k must lie in [1, {params.dim}], got {k}")
        boundaries = np.rint(pts * steps).astype(int)
        sample_s = boundaries / steps
        populations = np.empty((len(pts), k))
        for slot, b in enumerate(boundaries):
            sample_at.setdefault(int(b), []).append(slot)

    def record(boundary: int) -> None:
        slots = sample_at.get(boundary)
        if not slots:
            return
        s_b = boundary / steps
        _, vecs = np.linalg.eigh(hamiltonian_at(s_b, params, sched, h_i=h_i, h_p=h_p))
        probs = np.abs(vecs[:, :k].conj().T @ psi) ** 2
        for slot in slots:
            populations[slot] = probs

    ds = 1.0 / steps
    dt = sched.t_f * ds
    for step in range(steps):
        record(step)
        s_mid = (step + 0.5) * ds
        w, v = np.linalg.eigh(hamiltonian_at(s_mid, params, sched, h_i=h_i, h_p=h_p))
        amp = _apply_real(v.T, psi)
        amp *= np.exp(-1j * w * dt)
        psi = _apply_real(v, amp)
    record(steps)

    if final_reference is None:
        final_reference = _final_reference(params, sched)
    p_s = success_probability(psi, final_reference)
    return EvolutionResult(
        final_state=psi,
        success_probability=p_s,
        steps_used=steps,
        converged=True,
        sample_s=sample_s,
        populations=populations,
    )


def auto_propagate(
    params: ChainParams,
    sched: Schedule,
    tol: float = 1e-8,
    final_reference: np.ndarray | None = None,
    start_steps: int = AUTO_START_STEPS,
    max_steps: int = AUTO_MAX_STEPS,
) -> EvolutionResult:
    """Double the step count until the success probability settles.

    Starting from start_steps, the steps are doubled until the change in
    success probability between consecutive counts stays below tol twice in
    a row. Failing to settle by max_steps returns the best value with
    converged=False and a warning.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if final_reference is None:
        final_reference = _final_reference(params, sched)

    steps = int(start_steps)
    result = propagate(params, sched, steps, final_reference=final_reference)
    hits = 0
    while steps < max_steps:
        steps *= 2
        nxt = propagate(params, sched, steps, final_reference=final_reference)
        hits = hits + 1 if abs(nxt.success_probability - result.success_probability) < tol else 0
        result = nxt
        if hits >= 2:
            return result
    warnings.warn(
        f"success probability did not settle to {tol} within {max_steps} steps"
    )
    result.converged = False
    return result


def eigenbasis_populations(
    params: ChainParams,
    sched: Schedule,
    sample_points,
    k: int = 6,
    steps: int = 4096,
) -> tuple[np.ndarray, np.ndarray]:
    """Populations |a_m(s)|^2 of the lowest k instantaneous levels.

    Convenience wrapper over propagate with sampling enabled; returns the
    snapped sample positions and the (P, k) population array.
    """
    result = propagate(params, sched, steps, sample_points=sample_points, k=k)
    return result.sample_s, result.populations
