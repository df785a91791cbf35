"""Online adaptive estimation of unknown nonlinearities in a kernel space.

A linear plant is driven through a scalar channel by an unknown function
of a path coordinate.  The function is estimated online as a kernel
expansion whose coefficients follow a Lyapunov-based gradient law coupled
to the plant/observer state error.  The package provides the kernels
(Gaussian and compactly supported multiscale splines), the expansion
algebra, the coupled integrator, excitation diagnostics, and a CLI for
the quarter-car road-profile experiments.
"""

from ._backend import BACKEND
from .dynamics import (
    EstimatorRun,
    EstimatorState,
    LearningLaw,
    LtiPlant,
    LyapunovReport,
    lyapunov_trace_check,
    pe_lower_bound,
    pe_matrix,
    simulate,
    step_rk4,
)
from .errors import (
    ConfigError,
    DuplicateCenters,
    IllConditioned,
    KernelMismatch,
    NonFiniteDerivative,
    NotApplicable,
    NotHurwitz,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    RkhsAdaptError,
    TooFewPoints,
    UnstableIntegration,
    WindowOutOfRange,
)
from .harness import (
    CondnumArtifacts,
    ExperimentConfig,
    PeReport,
    SimulationArtifacts,
    SweepArtifacts,
    SweepRecord,
    SweepResult,
    load_config,
    normalize_config_text,
    parse_config,
    parse_n_list,
    preset_names,
    preset_text,
    read_pe_report,
    read_table,
    run_condnum,
    run_pe,
    run_simulate,
    run_sweep,
    serialize_config,
    span_interpolant,
    uniform_centers,
)
from .kernels import (
    BSplineScaling,
    Domain1D,
    GaussianKernel,
    MultiscaleKernel,
    check_distinct_centers,
    cross_grammian,
    embedding_constant,
    grammian,
    kernel_eval,
    kernel_section,
    level_contributions,
    level_weights,
)
from .linops import (
    assert_hurwitz,
    condition_number_2,
    hurwitz_margin,
    solve_lyapunov,
    solve_spd,
)
from .rkhs import (
    RkhsExpansion,
    eval_vector,
    evaluate,
    inner_product,
    norm,
    project,
)
from .vehicle import (
    QuarterCarParams,
    RoadProfile,
    build_plant,
    ingest_profile_csv,
    road_eval,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BSplineScaling",
    "CondnumArtifacts",
    "ConfigError",
    "Domain1D",
    "DuplicateCenters",
    "EstimatorRun",
    "EstimatorState",
    "ExperimentConfig",
    "GaussianKernel",
    "IllConditioned",
    "KernelMismatch",
    "LearningLaw",
    "LtiPlant",
    "LyapunovReport",
    "MultiscaleKernel",
    "NonFiniteDerivative",
    "NotApplicable",
    "NotHurwitz",
    "NotPositiveDefinite",
    "NotSymmetric",
    "ParseError",
    "PeReport",
    "QuarterCarParams",
    "RkhsAdaptError",
    "RkhsExpansion",
    "RoadProfile",
    "SimulationArtifacts",
    "SweepArtifacts",
    "SweepRecord",
    "SweepResult",
    "TooFewPoints",
    "UnstableIntegration",
    "WindowOutOfRange",
    "assert_hurwitz",
    "build_plant",
    "check_distinct_centers",
    "condition_number_2",
    "cross_grammian",
    "embedding_constant",
    "eval_vector",
    "evaluate",
    "grammian",
    "hurwitz_margin",
    "ingest_profile_csv",
    "inner_product",
    "kernel_eval",
    "kernel_section",
    "level_contributions",
    "level_weights",
    "load_config",
    "lyapunov_trace_check",
    "norm",
    "normalize_config_text",
    "parse_config",
    "parse_n_list",
    "pe_lower_bound",
    "pe_matrix",
    "preset_names",
    "preset_text",
    "project",
    "read_pe_report",
    "read_table",
    "road_eval",
    "run_condnum",
    "run_pe",
    "run_simulate",
    "run_sweep",
    "serialize_config",
    "simulate",
    "solve_lyapunov",
    "solve_spd",
    "span_interpolant",
    "step_rk4",
    "uniform_centers",
    "__version__",
]
