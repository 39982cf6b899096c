"""Swap-test cosine-similarity positioning on a statevector simulator.

The package pairs a gate-level quantum route with its exact analytic law
and the classical cosine baseline, plus a synthetic RSS testbed and an
experiment harness for paired comparisons.
"""

from .encoding import (
    AmplitudeVector,
    AngleSchedule,
    NormalizationConfig,
    PreparedOracle,
    amplitude_vector,
    angles_from_amplitudes,
    prepare_fingerprint,
    prepare_psi,
    rss_to_amplitudes,
)
from .errors import (
    CapacityError,
    DatasetFormatError,
    IndexNeverObservedError,
    InternalInvariantError,
    NoSignalError,
    QslocError,
    ValidationError,
)
from .locate import (
    AnalyticDistribution,
    FingerprintDb,
    FingerprintRecord,
    LocationEstimate,
    analytic_distribution,
    analytic_locate,
    build_positioning_circuit,
    classical_locate,
    counts_to_similarity,
    quantum_locate,
    swap_test_identities,
)
from .sampling import ShotCounts, sample_counts
from .sim import (
    CNOT,
    CRy,
    CSWAP,
    Circuit,
    GateOp,
    H,
    NoiseModel,
    Ry,
    StateVector,
    X,
    apply_gate,
    marginal_distribution,
    new_zero_state,
    run_circuit,
)
from .testbed import Dataset, PathLossParams, generate_synthetic, load_dataset, save_dataset

__version__ = "0.1.0"

__all__ = [
    "AmplitudeVector",
    "AngleSchedule",
    "AnalyticDistribution",
    "CapacityError",
    "Circuit",
    "CNOT",
    "CRy",
    "CSWAP",
    "Dataset",
    "DatasetFormatError",
    "FingerprintDb",
    "FingerprintRecord",
    "GateOp",
    "H",
    "IndexNeverObservedError",
    "InternalInvariantError",
    "LocationEstimate",
    "NoSignalError",
    "NoiseModel",
    "NormalizationConfig",
    "PathLossParams",
    "PreparedOracle",
    "QslocError",
    "Ry",
    "ShotCounts",
    "StateVector",
    "ValidationError",
    "X",
    "amplitude_vector",
    "analytic_distribution",
    "analytic_locate",
    "angles_from_amplitudes",
    "apply_gate",
    "build_positioning_circuit",
    "classical_locate",
    "counts_to_similarity",
    "generate_synthetic",
    "load_dataset",
    "marginal_distribution",
    "new_zero_state",
    "prepare_fingerprint",
    "prepare_psi",
    "quantum_locate",
    "rss_to_amplitudes",
    "run_circuit",
    "sample_counts",
    "save_dataset",
    "swap_test_identities",
]
