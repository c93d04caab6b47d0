"""Chain parameters, schedule envelopes, and Hamiltonian construction.

The chain Hamiltonian interpolates between a transverse-field term H_I and a
classical Ising term H_P under cosine envelopes,

    H(s) = Omega(s) * H_I + Gamma(s) * H_P,
    Omega(s) = epsilon0 * (1 + cos(pi * s)),
    Gamma(s) = epsilon0 * (1 - cos(pi * s)),

with s = t / t_f in [0, 1].  H_I and H_P are dimensionless; the envelopes
carry rad/ns.  Basis convention: qubit 0 is the most significant bit of the
basis index and bit value 0 means spin +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sin

import numpy as np

# Envelope amplitude, rad/ns. 2*pi times the drive frequency in GHz.
EPSILON0 = 2.0 * pi * 0.3183

# Uniform parameter values of the ideal (disorder-free) chain.
IDEAL_LAMBDA = 1.0
IDEAL_H = 5.0
IDEAL_J = 2.5

# Dense matrices only; refuse dimensions beyond 2**14.
MAX_QUBITS = 14


def _as_float_array(values, length: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).copy()
    if arr.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(eq=False)
class ChainParams:
    """Per-site parameters of an open chain of n_qubits spins.

    Attributes
    ----------
    n_qubits : int
        Number of spins N, 1 <= N <= MAX_QUBITS.
    lam : array of shape (N,)
        Transverse-field coefficients (dimensionless).
    h : array of shape (N,)
        Longitudinal-field coefficients (dimensionless).
    j : array of shape (N-1,)
        Nearest-neighbour couplings (dimensionless).
    """

    n_qubits: int
    lam: np.ndarray
    h: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1:
            raise ValueError(f"n_qubits must be >= 1, got {n}")
        if n > MAX_QUBITS:
            raise ValueError(f"n_qubits = {n} exceeds the dense-matrix cap {MAX_QUBITS}")
        self.n_qubits = n
        self.lam = _as_float_array(self.lam, n, "lam")
        self.h = _as_float_array(self.h, n, "h")
        self.j = _as_float_array(self.j, n - 1, "j")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def ideal_chain(n_qubits: int) -> ChainParams:
    """The uniform chain with lam=1, h=5, J=2.5 on every site/bond."""
    return ChainParams(
        n_qubits=n_qubits,
        lam=np.full(n_qubits, IDEAL_LAMBDA),
        h=np.full(n_qubits, IDEAL_H),
        j=np.full(max(n_qubits - 1, 0), IDEAL_J),
    )


@dataclass(frozen=True)
class Schedule:
    """Cosine sweep of duration t_f (ns) and amplitude epsilon0 (rad/ns).

    The sweep rate alpha = pi / t_f makes the envelopes complete exactly half
    a cosine period over the run.
    """

    t_f: float
    epsilon0: float = EPSILON0

    def __post_init__(self):
        if not (self.t_f > 0.0 and np.isfinite(self.t_f)):
            raise ValueError(f"t_f must be positive and finite, got {self.t_f}")
        if not (self.epsilon0 > 0.0 and np.isfinite(self.epsilon0)):
            raise ValueError(f"epsilon0 must be positive and finite, got {self.epsilon0}")

    @property
    def alpha(self) -> float:
        return pi / self.t_f


def _check_s(s: float) -> float:
    s = float(s)
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return s


def envelopes(s: float, sched: Schedule) -> tuple[float, float]:
    """Envelope weights (Omega, Gamma) at dimensionless time s.

    Omega + Gamma = 2 * epsilon0 identically; Omega starts at 2 * epsilon0
    and ends at zero, Gamma the reverse.
    """
    s = _check_s(s)
    c = cos(pi * s)
    return sched.epsilon0 * (1.0 + c), sched.epsilon0 * (1.0 - c)


def spin_table(n_qubits: int) -> np.ndarray:
    """Spin values s_i = +/-1 for every basis index, shape (2**N, N).

    Row b column i holds the spin of qubit i in basis state |b>, with qubit 0
    stored in the most significant bit and bit 0 mapping to spin +1.
    """
    dim = 2**n_qubits
    shifts = np.arange(n_qubits - 1, -1, -1)
    bits = (np.arange(dim)[:, None] >> shifts[None, :]) & 1
    return 1 - 2 * bits


def problem_diagonal(params: ChainParams) -> np.ndarray:
    """Diagonal of the dimensionless Ising term, shape (2**N,).

    Entry for bitstring b is -sum_i h_i s_i - sum_i J_i s_i s_{i+1} with the
    spins read off the bits of b.
    """
    s = spin_table(params.n_qubits)
    diag = -(s @ params.h)
    if params.n_qubits > 1:
        diag = diag - (s[:, :-1] * s[:, 1:]) @ params.j
    return diag


def build_problem_hamiltonian(params: ChainParams) -> np.ndarray:
    """Dense dimensionless H_P, diagonal in the computational basis."""
    return np.diag(problem_diagonal(params))


def build_initial_hamiltonian(params: ChainParams) -> np.ndarray:
    """Dense dimensionless H_I = -sum_i (lam_i / 2) sigma_x^(i).

    Real symmetric with zero diagonal: sigma_x^(i) connects each basis state
    to the state with qubit i's bit flipped.
    """
    n = params.n_qubits
    dim = 2**n
    out = np.zeros((dim, dim))
    idx = np.arange(dim)
    for i in range(n):
        flipped = idx ^ (1 << (n - 1 - i))
        out[idx, flipped] += -0.5 * params.lam[i]
    return out


def hamiltonian_at(
    s: float,
    params: ChainParams,
    sched: Schedule,
    h_i: np.ndarray | None = None,
    h_p: np.ndarray | None = None,
) -> np.ndarray:
    """H(s) = Omega(s) H_I + Gamma(s) H_P in rad/ns.

    The dimensionless operator matrices are rebuilt unless passed in; callers
    looping over s should build them once and reuse.
    """
    omega, gamma = envelopes(s, sched)
    if h_i is None:
        h_i = build_initial_hamiltonian(params)
    if h_p is None:
        h_p = build_problem_hamiltonian(params)
    return omega * h_i + gamma * h_p


def hamiltonian_s_derivatives(
    s: float,
    params: ChainParams,
    sched: Schedule,
    difference: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic dH/ds and d2H/ds2 at dimensionless time s, in rad/ns.

    Both envelopes differentiate onto the same fixed matrix H_P - H_I:

        H'(s)  = epsilon0 * pi    * sin(pi s) * (H_P - H_I)
        H''(s) = epsilon0 * pi**2 * cos(pi s) * (H_P - H_I)

    No finite differencing is involved.
    """
    s = _check_s(s)
    if difference is None:
        difference = build_problem_hamiltonian(params) - build_initial_hamiltonian(params)
    first = sched.epsilon0 * pi * sin(pi * s) * difference
    second = sched.epsilon0 * pi**2 * cos(pi * s) * difference
    return first, second
