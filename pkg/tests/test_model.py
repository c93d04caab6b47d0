import numpy as np
import pytest
from hypothesis import given, strategies as st

from aqchain import (
    EPSILON0,
    ChainParams,
    Schedule,
    build_initial_hamiltonian,
    build_problem_hamiltonian,
    envelopes,
    hamiltonian_at,
    hamiltonian_s_derivatives,
    ideal_chain,
    problem_diagonal,
)

from oracles import kron_hamiltonian, kron_initial, kron_problem


def random_chain(rng, n):
    return ChainParams(
        n_qubits=n,
        lam=rng.uniform(0.2, 2.0, n),
        h=rng.uniform(-6.0, 6.0, n),
        j=rng.uniform(-4.0, 4.0, max(n - 1, 0)),
    )


chain_strategy = st.integers(min_value=1, max_value=4).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(min_value=0, max_value=2**31 - 1))
)


def test_ideal_chain_values():
    p = ideal_chain(4)
    assert p.n_qubits == 4
    assert np.all(p.lam == 1.0) and len(p.lam) == 4
    assert np.all(p.h == 5.0) and len(p.h) == 4
    assert np.all(p.j == 2.5) and len(p.j) == 3
    assert p.dim == 16


def test_chain_params_validation():
    with pytest.raises(ValueError):
        ChainParams(n_qubits=0, lam=np.ones(0), h=np.ones(0), j=np.ones(0))
    with pytest.raises(ValueError):
        ChainParams(n_qubits=15, lam=np.ones(15), h=np.ones(15), j=np.ones(14))
    with pytest.raises(ValueError):
        ChainParams(n_qubits=3, lam=np.ones(2), h=np.ones(3), j=np.ones(2))
    with pytest.raises(ValueError):
        ChainParams(n_qubits=3, lam=np.ones(3), h=np.ones(3), j=np.ones(3))
    with pytest.raises(ValueError):
        ChainParams(n_qubits=2, lam=np.array([1.0, np.nan]), h=np.ones(2), j=np.ones(1))


def test_chain_params_arrays_read_only():
    p = ideal_chain(2)
    with pytest.raises(ValueError):
        p.h[0] = 9.0


def test_schedule_validation():
    sched = Schedule(t_f=20.0)
    assert sched.alpha == pytest.approx(np.pi / 20.0)
    assert sched.epsilon0 == EPSILON0
    with pytest.raises(ValueError):
        Schedule(t_f=0.0)
    with pytest.raises(ValueError):
        Schedule(t_f=10.0, epsilon0=-1.0)


def test_envelopes_boundaries_and_sum():
    sched = Schedule(t_f=5.0)
    omega0, gamma0 = envelopes(0.0, sched)
    omega1, gamma1 = envelopes(1.0, sched)
    assert omega0 == pytest.approx(2.0 * EPSILON0) and gamma0 == 0.0
    assert omega1 == 0.0 and gamma1 == pytest.approx(2.0 * EPSILON0)
    for s in np.linspace(0.0, 1.0, 17):
        omega, gamma = envelopes(s, sched)
        assert omega + gamma == pytest.approx(2.0 * EPSILON0, rel=1e-14)
        assert omega >= 0.0 and gamma >= 0.0
    with pytest.raises(ValueError):
        envelopes(-0.01, sched)
    with pytest.raises(ValueError):
        envelopes(1.01, sched)


def test_basis_convention_qubit0_msb():
    # index bits map to spins with qubit 0 as the most significant bit,
    # bit value 0 meaning spin +1
    p = ChainParams(n_qubits=2, lam=np.ones(2), h=np.array([1.0, 3.0]), j=np.array([0.5]))
    diag = problem_diagonal(p)
    # |00> -> (+,+): -1 - 3 - 0.5 ; |01> -> (+,-): -1 + 3 + 0.5
    # |10> -> (-,+): +1 - 3 + 0.5 ; |11> -> (-,-): +1 + 3 - 0.5
    assert diag == pytest.approx([-4.5, 2.5, -1.5, 3.5])


@given(chain_strategy)
def test_problem_diagonal_matches_kron(args):
    n, seed = args
    p = random_chain(np.random.default_rng(seed), n)
    expected = np.diag(kron_problem(p.h, p.j))
    np.testing.assert_allclose(problem_diagonal(p), expected, atol=1e-12)
    np.testing.assert_allclose(build_problem_hamiltonian(p), kron_problem(p.h, p.j), atol=1e-12)


@given(chain_strategy)
def test_initial_hamiltonian_matches_kron(args):
    n, seed = args
    p = random_chain(np.random.default_rng(seed), n)
    np.testing.assert_allclose(build_initial_hamiltonian(p), kron_initial(p.lam), atol=1e-12)


@given(chain_strategy, st.floats(min_value=0.0, max_value=1.0))
def test_hamiltonian_at_matches_kron(args, s):
    n, seed = args
    p = random_chain(np.random.default_rng(seed), n)
    sched = Schedule(t_f=10.0)
    got = hamiltonian_at(s, p, sched)
    want = kron_hamiltonian(s, p.lam, p.h, p.j, epsilon0=EPSILON0)
    np.testing.assert_allclose(got, want, atol=1e-12 * max(1.0, np.abs(want).max()))
    assert np.allclose(got, got.T)


def test_hamiltonian_reuses_prebuilt_pieces():
    p = ideal_chain(3)
    sched = Schedule(t_f=10.0)
    h_i = build_initial_hamiltonian(p)
    h_p = build_problem_hamiltonian(p)
    a = hamiltonian_at(0.37, p, sched)
    b = hamiltonian_at(0.37, p, sched, h_i=h_i, h_p=h_p)
    np.testing.assert_array_equal(a, b)


def test_s_derivatives_match_finite_differences():
    rng = np.random.default_rng(8)
    p = random_chain(rng, 3)
    sched = Schedule(t_f=12.0)
    eps = 1e-6
    for s in (0.1, 0.5, 0.83):
        d1, d2 = hamiltonian_s_derivatives(s, p, sched)
        fd1 = (hamiltonian_at(s + eps, p, sched) - hamiltonian_at(s - eps, p, sched)) / (2 * eps)
        scale = max(np.abs(fd1).max(), 1.0)
        np.testing.assert_allclose(d1, fd1, atol=5e-9 * scale)
        dp1, _ = hamiltonian_s_derivatives(s + eps, p, sched)
        dm1, _ = hamiltonian_s_derivatives(s - eps, p, sched)
        np.testing.assert_allclose(d2, (dp1 - dm1) / (2 * eps), atol=5e-9 * scale)


def test_derivative_magnitude_at_midpoint():
    # the sweep rate peaks at s = 1/2 where sin(pi s) = 1
    p = ideal_chain(2)
    sched = Schedule(t_f=10.0)
    d1_mid, d2_mid = hamiltonian_s_derivatives(0.5, p, sched)
    diff = build_problem_hamiltonian(p) - build_initial_hamiltonian(p)
    np.testing.assert_allclose(d1_mid, EPSILON0 * np.pi * diff, atol=1e-12)
    np.testing.assert_allclose(d2_mid, np.zeros_like(d2_mid), atol=1e-9)
