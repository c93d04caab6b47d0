"""Independent reference implementations used as test oracles.

Everything here is written from the definitions, sharing no code with the
package: Hamiltonians from explicit Pauli Kronecker products, a cyclic
Jacobi eigensolver, and a classical RK4 integrator for the sweep.
"""

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
ID2 = np.eye(2)

ORACLE_EPSILON0 = 2.0 * np.pi * 0.3183


def op_on(n, site, op):
    """op acting on one site of an n-site chain, site 0 outermost (MSB)."""
    out = np.array([[1.0]])
    for i in range(n):
        out = np.kron(out, op if i == site else ID2)
    return out


def op_on_pair(n, site, op_a, op_b):
    """op_a on `site` and op_b on `site + 1`."""
    out = np.array([[1.0]])
    for i in range(n):
        if i == site:
            factor = op_a
        elif i == site + 1:
            factor = op_b
        else:
            factor = ID2
        out = np.kron(out, factor)
    return out


def kron_initial(lam):
    n = len(lam)
    return sum(-0.5 * lam[i] * op_on(n, i, SX) for i in range(n))


def kron_problem(h, j):
    n = len(h)
    out = sum(-h[i] * op_on(n, i, SZ) for i in range(n))
    for i in range(n - 1):
        out = out - j[i] * op_on_pair(n, i, SZ, SZ)
    return out


def kron_hamiltonian(s, lam, h, j, epsilon0=ORACLE_EPSILON0):
    omega = epsilon0 * (1.0 + np.cos(np.pi * s))
    gamma = epsilon0 * (1.0 - np.cos(np.pi * s))
    return omega * kron_initial(lam) + gamma * kron_problem(h, j)


def jacobi_eigh(matrix, sweeps=60):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns eigenvalues ascending and the matching eigenvector columns.
    """
    a = np.array(matrix, dtype=float)
    if not np.allclose(a, a.T, atol=1e-13 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigh needs a real symmetric matrix")
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    order = np.argsort(np.diag(a), kind="stable")
    return np.diag(a)[order], v[:, order]


def plus_state(n):
    """Ground state of the initial Hamiltonian for positive couplings."""
    dim = 2**n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def rk4_evolve(lam, h, j, t_f, steps, epsilon0=ORACLE_EPSILON0, psi0=None):
    """Classical RK4 solution of i dpsi/dt = H(t) psi over the full sweep."""
    h_i = kron_initial(lam)
    h_p = kron_problem(h, j)
    half = np.linspace(0.0, 1.0, 2 * steps + 1)
    omega = epsilon0 * (1.0 + np.cos(np.pi * half))
    gamma = epsilon0 * (1.0 - np.cos(np.pi * half))
    psi = plus_state(len(lam)) if psi0 is None else np.array(psi0, dtype=complex)
    ds = 1.0 / steps
    coef = -1j * t_f
    for i in range(steps):
        h0 = omega[2 * i] * h_i + gamma[2 * i] * h_p
        hm = omega[2 * i + 1] * h_i + gamma[2 * i + 1] * h_p
        h1 = omega[2 * i + 2] * h_i + gamma[2 * i + 2] * h_p
        k1 = coef * (h0 @ psi)
        k2 = coef * (hm @ (psi + 0.5 * ds * k1))
        k3 = coef * (hm @ (psi + 0.5 * ds * k2))
        k4 = coef * (h1 @ (psi + ds * k3))
        psi = psi + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def rk4_success_probability(lam, h, j, t_f, steps, epsilon0=ORACLE_EPSILON0):
    psi = rk4_evolve(lam, h, j, t_f, steps, epsilon0=epsilon0)
    target = int(np.argmin(np.diag(kron_problem(h, j))))
    return float(np.abs(psi[target]) ** 2)


def two_level_fields(s, lam, h, epsilon0=ORACLE_EPSILON0):
    """Effective (x, z) fields of the single-qubit sweep Hamiltonian."""
    a = epsilon0 * (1.0 + np.cos(np.pi * s)) * 0.5 * lam
    b = epsilon0 * (1.0 - np.cos(np.pi * s)) * h
    return a, b


def two_level_gap(s, lam, h, epsilon0=ORACLE_EPSILON0):
    a, b = two_level_fields(s, lam, h, epsilon0)
    return 2.0 * np.hypot(a, b)


def two_level_coupling(s, lam, h, t_f, epsilon0=ORACLE_EPSILON0):
    """|<E1| dH/dt |E0>| for H = -(a(s) sx + b(s) sz), closed form.

    For a two-level family the off-diagonal element in the instantaneous
    eigenbasis is (a' b - b' a) / sqrt(a^2 + b^2), with s-derivatives
    divided by t_f to convert to time.
    """
    a, b = two_level_fields(s, lam, h, epsilon0)
    da = -epsilon0 * np.pi * np.sin(np.pi * s) * 0.5 * lam
    db = epsilon0 * np.pi * np.sin(np.pi * s) * h
    return np.abs(da * b - db * a) / np.hypot(a, b) / t_f


def two_level_c1(lam, h, t_f, epsilon0=ORACLE_EPSILON0, samples=20001):
    s = np.linspace(0.0, 1.0, samples)
    coupling = two_level_coupling(s, lam, h, t_f, epsilon0)
    gap = two_level_gap(s, lam, h, epsilon0)
    return float(np.max(coupling / gap**2))
