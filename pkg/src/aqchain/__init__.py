"""Adiabatic sweep simulator for disordered transverse-field Ising chains.

Units: hbar = 1, time in nanoseconds, energies and angular frequencies in
rad/ns. Computational basis: qubit 0 is the most significant bit and
sigma_z|0> = +|0>.
"""

import os as _os

# Pin linear algebra to one thread (unless the user chose otherwise) before
# numpy loads its BLAS. Threaded reductions reorder floating-point sums, and
# output bytes must not depend on core count or worker count.
for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")
del _os, _var

from .model import (
    EPSILON0,
    IDEAL_H,
    IDEAL_J,
    IDEAL_LAMBDA,
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
from .spectrum import SpectrumTrace, eigh_lowest, gap_trace, minimum_gap, smooth_gauge
from .propagation import (
    EvolutionResult,
    auto_propagate,
    eigenbasis_populations,
    propagate,
    success_probability,
)
from .calibration import CalibrationRecord, calibrate_tf, calibration_table
from .ensemble import (
    DisorderSpec,
    EnsembleSummary,
    InstanceRecord,
    dmin_histogram,
    ground_state_matches,
    run_ensemble,
    sample_instance,
    symmetric_gap_shift,
)
from .conditions import (
    ConditionReport,
    condition_c1,
    condition_c2,
    condition_c3,
    condition_c4,
    evaluate_conditions,
    geometric_potential,
    hdot_matrix_element,
    scatter_rows,
)

__version__ = "0.1.0"

__all__ = [
    "EPSILON0",
    "IDEAL_LAMBDA",
    "IDEAL_H",
    "IDEAL_J",
    "ChainParams",
    "Schedule",
    "ideal_chain",
    "build_initial_hamiltonian",
    "build_problem_hamiltonian",
    "problem_diagonal",
    "envelopes",
    "hamiltonian_at",
    "hamiltonian_s_derivatives",
    "SpectrumTrace",
    "eigh_lowest",
    "smooth_gauge",
    "gap_trace",
    "minimum_gap",
    "EvolutionResult",
    "propagate",
    "auto_propagate",
    "success_probability",
    "eigenbasis_populations",
    "CalibrationRecord",
    "calibrate_tf",
    "calibration_table",
    "DisorderSpec",
    "InstanceRecord",
    "EnsembleSummary",
    "sample_instance",
    "ground_state_matches",
    "run_ensemble",
    "dmin_histogram",
    "symmetric_gap_shift",
    "ConditionReport",
    "hdot_matrix_element",
    "condition_c1",
    "condition_c2",
    "condition_c3",
    "condition_c4",
    "evaluate_conditions",
    "geometric_potential",
    "scatter_rows",
    "__version__",
]
