"""Statistics of quantum-gate fidelity over Haar-uniform input states.

Closed-form mean, variance and (for qubits) the full fidelity distribution
of unitary, general linear, subspace-restricted and Kraus-form operations,
with a Monte-Carlo oracle and a derivative-free gate tuner.
"""

__version__ = "0.1.0"

from .linalg import (
    DEFAULT_TOL,
    NotNormalError,
    QubitSpectrum,
    StructureFlags,
    adjoint,
    as_matrix,
    classify,
    eig2_normal,
    multiply,
    projector,
    restrict,
    trace,
)
from .moments import (
    DecompositionReport,
    GateSpec,
    KrausMap,
    MomentReport,
    NoAcceptanceError,
    avg_fidelity,
    avg_fidelity_qubit_spectrum,
    conditional_fidelity,
    depolarizing_kraus,
    fourth_moment_general,
    fourth_moment_hermitian,
    gate_moments,
    kraus_avg_fidelity,
    sa_decomposition_check,
    subspace_avg_fidelity,
    variance,
)
from .optimize import (
    FAMILIES,
    GateFamily,
    Objective,
    OptimizationResult,
    OptimizeConfig,
    build_family,
    evaluate_objective,
    optimize,
)
from .qubit_dist import (
    DegenerateSpectrumError,
    FidelityDistribution,
    HistogramComparison,
    Piece,
    classify_case,
    compare_histogram,
    normal_pdf,
    quadrature_moments,
    total_variation_distance,
    unitary_pdf,
)
from .sampling import (
    Histogram,
    McEstimate,
    mc_histogram,
    mc_moment,
    monomial_integral,
    monomial_integral_exact,
    sample_state,
    sample_states,
)

__all__ = [
    "DEFAULT_TOL",
    "DecompositionReport",
    "DegenerateSpectrumError",
    "FAMILIES",
    "FidelityDistribution",
    "GateFamily",
    "GateSpec",
    "Histogram",
    "HistogramComparison",
    "KrausMap",
    "McEstimate",
    "MomentReport",
    "NoAcceptanceError",
    "NotNormalError",
    "Objective",
    "OptimizationResult",
    "OptimizeConfig",
    "Piece",
    "QubitSpectrum",
    "StructureFlags",
    "adjoint",
    "as_matrix",
    "avg_fidelity",
    "avg_fidelity_qubit_spectrum",
    "build_family",
    "classify",
    "classify_case",
    "compare_histogram",
    "conditional_fidelity",
    "depolarizing_kraus",
    "eig2_normal",
    "evaluate_objective",
    "fourth_moment_general",
    "fourth_moment_hermitian",
    "gate_moments",
    "kraus_avg_fidelity",
    "mc_histogram",
    "mc_moment",
    "monomial_integral",
    "monomial_integral_exact",
    "multiply",
    "normal_pdf",
    "optimize",
    "projector",
    "quadrature_moments",
    "restrict",
    "sa_decomposition_check",
    "sample_state",
    "sample_states",
    "subspace_avg_fidelity",
    "total_variation_distance",
    "trace",
    "unitary_pdf",
    "variance",
]
