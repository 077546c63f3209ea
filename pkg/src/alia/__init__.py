"""Adaptive linearized ADMM solvers, baselines, and verification tools."""

from .baselines import (
    CondatVuOptions,
    FlipOptions,
    condat_vu_solve,
    fixed_step_reference,
    flip_admm_solve,
    three_term_form,
)
from .blocks import (
    Box,
    Hyperplane,
    L1,
    L1NonNeg,
    LinearSmooth,
    LinfBall,
    NonNeg,
    ProxBlock,
    QuadraticProx,
    QuadraticSmooth,
    ScaledSumSmooth,
    SeparableSum,
    SmoothBlock,
    WeightedNuclear,
    ZeroProx,
    ZeroSmooth,
    jacobi_svd,
    prox_conjugate,
    smooth_lipschitz,
)
from .cubic import real_cubic_roots, smallest_positive_root
from .diagnostics import (
    LyapunovWitness,
    ResidualReport,
    descent_slacks,
    finite_diff_check,
    kkt_residuals,
    lagrangian_gap,
    lyapunov_value,
    prox_gradient_solve,
    reference_solve,
    should_stop,
    stepsize_floor,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    NumericsError,
    ParseError,
)
from .instrument import OpCounts, instrument, instrument_three_term
from .linops import (
    BlockDiagOp,
    DenseOp,
    IdentityOp,
    LinOp,
    RowVectorOp,
    ScaledOp,
    VStackOp,
    ZeroOp,
    operator_norm,
)
from .problems import (
    BlockSpec,
    Dataset,
    build_consensus,
    build_dual_lad,
    build_dual_lasso,
    build_dual_svm,
    build_random_saddle,
    consensus_objective,
    consensus_sparse_copy,
    format_libsvm,
    load_problem_file,
    parse_libsvm,
    problem_from_json,
    synth_dataset,
    synth_unmixing,
)
from .solver import (
    GOLDEN_RATIO,
    IterationRecord,
    ProblemInstance,
    SolveResult,
    SolverOptions,
    SolverState,
    StepDecision,
    advance,
    initial_state,
    select_step_fixed,
    select_step_s1,
    select_step_s2,
    solve,
    theory_epsilon,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
