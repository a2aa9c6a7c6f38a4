"""Space-time isogeometric Petrov-Galerkin method for the linear Schrodinger
equation, with the matrix-based stability toolchain (nearly-Toeplitz symbols,
unit-zero classification, conditioning sweeps), a Schur-based Kronecker
solver, the wave-equation algebraic bridge, and oscillator benchmarks."""

from .bspline import (
    BasisEval,
    KnotVector,
    QuadratureRule,
    eval_all,
    gauss_legendre_rule,
    open_uniform_knots,
)
from .conditioning import (
    ConditioningReport,
    PencilSpectrum,
    condition_number,
    conditioning_sweep,
    gevp_spectrum,
)
from .experiments import (
    ConservationReport,
    ErrorReport,
    ExperimentConfig,
    error_norms,
    exact_state,
    functionals_trace,
    hermite,
    run_experiment,
)
from .spacetime import (
    DiscreteField,
    SchurFactors,
    SpaceTimeSystem,
    assemble_spacetime,
    bartels_stewart_solve,
    direct_solve,
    evaluate_field,
    schur_decompose,
)
from .spatial import SpatialSpace, SpatialSystem, assemble_spatial, l2_project, spatial_space
from .symbols import (
    NearlyToeplitz,
    RootType,
    SymbolPolynomial,
    classify_roots,
    eval_Bp_Cp,
    extract_nearly_toeplitz,
    is_reciprocal,
    locate_unit_zeros,
    symbol_polynomial,
    uhat,
)
from .temporal import (
    ScalarSolution,
    ScaledSystem,
    SingularSystemError,
    TemporalMatrices,
    assemble_temporal,
    exact_ivp_solution,
    scalar_rhs,
    scaled_system,
    solve_scalar_ivp,
)
from .wave import (
    BlockSystem,
    SchurComplementReport,
    assemble_block_system,
    schur_complement_report,
    verify_equivalence,
    wave_conditioning_sweep,
)

__version__ = "0.1.0"
