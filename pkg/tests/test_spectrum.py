import numpy as np
import pytest
from hypothesis import given, strategies as st

from aqchain import ChainParams, Schedule, eigh_lowest, gap_trace, ideal_chain, minimum_gap, smooth_gauge
from aqchain.spectrum import default_levels, trace_header, trace_rows

from oracles import jacobi_eigh, kron_hamiltonian


def test_eigh_lowest_matches_jacobi_oracle():
    rng = np.random.default_rng(11)
    for dim in (2, 5, 9):
        base = rng.standard_normal((dim, dim))
        matrix = base + base.T
        values, vectors = eigh_lowest(matrix, dim)
        ref_values, _ = jacobi_eigh(matrix)
        np.testing.assert_allclose(values, ref_values, atol=1e-10)
        residual = matrix @ vectors - vectors * values
        assert np.abs(residual).max() < 1e-10
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(dim), atol=1e-12)


def test_eigh_lowest_truncates_and_sorts():
    matrix = np.diag([3.0, -1.0, 2.0])
    values, vectors = eigh_lowest(matrix, 2)
    np.testing.assert_allclose(values, [-1.0, 2.0])
    assert vectors.shape == (3, 2)


def test_eigh_lowest_rejects_bad_input():
    with pytest.raises(ValueError):
        eigh_lowest(np.ones((2, 3)), 1)
    with pytest.raises(ValueError):
        eigh_lowest(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)
    with pytest.raises(ValueError):
        eigh_lowest(np.eye(3), 4)


def test_smooth_gauge_undoes_sign_flips():
    rng = np.random.default_rng(4)
    base = np.linalg.qr(rng.standard_normal((6, 6)))[0][:, :3]
    flipped = base * np.array([1.0, -1.0, -1.0])
    fixed = smooth_gauge(base, flipped.copy())
    np.testing.assert_allclose(fixed, base, atol=1e-12)


def test_smooth_gauge_aligns_complex_phases():
    rng = np.random.default_rng(5)
    base = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0][:, :2]
    rotated = base * np.exp(1j * np.array([0.7, -2.1]))
    fixed = smooth_gauge(base, rotated.copy())
    overlaps = np.sum(np.conj(base) * fixed, axis=0)
    np.testing.assert_allclose(overlaps.imag, 0.0, atol=1e-12)
    assert np.all(overlaps.real > 0.99)


def test_smooth_gauge_warns_on_poor_overlap():
    prev = np.eye(3)[:, :2]
    curr = np.eye(3)[:, [2, 1]].astype(float)
    with pytest.warns(UserWarning, match="overlap"):
        smooth_gauge(prev, curr.copy())


def test_default_levels_caps_at_dimension():
    assert default_levels(1) == 2
    assert default_levels(2) == 4
    assert default_levels(3) == 6
    assert default_levels(5) == 6


def test_gap_trace_shapes_and_ordering():
    p = ideal_chain(3)
    sched = Schedule(t_f=20.0)
    trace = gap_trace(p, sched, 101)
    assert trace.k == 6
    assert trace.energies.shape == (101, 6)
    assert trace.states.shape == (101, 8, 6)
    assert np.all(np.diff(trace.energies, axis=1) >= -1e-12)
    np.testing.assert_allclose(trace.gap, trace.energies[:, 1] - trace.energies[:, 0])
    assert np.all(trace.gap > 0)
    assert trace.s_grid[0] == 0.0 and trace.s_grid[-1] == 1.0
    # eigenvector tracking keeps successive overlaps positive
    overlaps = np.sum(trace.states[:-1, :, 0] * trace.states[1:, :, 0], axis=1)
    assert np.all(overlaps > 0.9)


def test_gap_trace_states_optional_and_grid_validated():
    p = ideal_chain(2)
    sched = Schedule(t_f=20.0)
    trace = gap_trace(p, sched, 51, keep_states=False)
    assert trace.states is None
    with pytest.raises(ValueError):
        gap_trace(p, sched, 5)
    with pytest.raises(ValueError):
        gap_trace(p, sched, 51, k=1)


def test_gap_trace_rejects_degenerate_ground_state():
    # zero longitudinal field leaves the final ground state two-fold degenerate
    p = ChainParams(n_qubits=2, lam=np.ones(2), h=np.zeros(2), j=np.array([2.5]))
    with pytest.raises(ValueError, match="degenerate"):
        gap_trace(p, Schedule(t_f=20.0), 51, keep_states=False)


@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_minimum_gap_refines_below_coarse_grid(seed):
    rng = np.random.default_rng(seed)
    p = ChainParams(
        n_qubits=2,
        lam=rng.uniform(0.5, 1.5, 2),
        h=rng.uniform(3.0, 7.0, 2),
        j=rng.uniform(1.0, 4.0, 1),
    )
    sched = Schedule(t_f=20.0)
    trace = gap_trace(p, sched, 101, keep_states=False)
    coarse = trace.gap.min()
    delta_min, s_star = minimum_gap(trace)
    assert trace.refined
    assert delta_min <= coarse + 1e-15
    assert 0.0 <= s_star <= 1.0
    # a very dense scan cannot find anything materially below the refined value
    dense = gap_trace(p, sched, 20001, keep_states=False)
    assert delta_min <= dense.gap.min() + 1e-9


def test_minimum_gap_known_value():
    trace = gap_trace(ideal_chain(2), Schedule(t_f=21.4375), 201, keep_states=False)
    delta_min, s_star = minimum_gap(trace)
    assert delta_min == pytest.approx(3.827941568724574, rel=1e-9)
    assert s_star == pytest.approx(0.09542, abs=2e-4)


def test_trace_rows_and_header_align():
    trace = gap_trace(ideal_chain(2), Schedule(t_f=20.0), 51, keep_states=False)
    header = trace_header(trace.k)
    assert header == ["s", "E0", "E1", "E2", "E3", "gap"]
    rows = list(trace_rows(trace))
    assert len(rows) == 51
    assert len(rows[0]) == len(header)
    assert rows[0][0] == 0.0
    assert rows[0][-1] == pytest.approx(trace.gap[0])
