"""
specwave - Spectral experiments for damped wave equations.

Builds discrete self-adjoint operators (Dirichlet Laplacian, fractional
powers, user matrices, Sierpinski prefractals), evaluates the damped-wave
spectral multipliers, propagates linear and nonlinear flows mode by mode,
and checks the resulting decay rates against their predicted exponents.
"""

__version__ = "0.1.0"

# Re-export public API from submodules
from .analysis import (
    DOCUMENTED_OPERATORS,
    INEQUALITIES,
    CriticalityRecord,
    DocumentedOperator,
    ExponentPrediction,
    InequalityReport,
    InequalityResult,
    KernelBoundsReport,
    check_inequalities,
    criticality,
    documented_alpha,
    fit_decay,
    fujita_exponent,
    interpolation_ratio,
    kernel_table,
    predict_exponent,
    scan_kernel_bounds,
    weighted_X_norm,
    weighted_Y_norm,
)
from .backends import (
    BACKEND_KINDS,
    BackendSpec,
    GridFunction,
    SpectralCoeffs,
    SpectrumBackend,
    build_backend,
    build_dirichlet_1d,
    build_fractional,
    build_matrix_backend,
    build_sierpinski,
    forward,
    homogeneous_norm,
    inverse,
    lq_norm,
    measure_alpha,
    sierpinski_graph,
    sobolev_norm,
)
from .cli import create_parser, main
from .config import (
    ExperimentConfig,
    RunConfig,
    apply_overrides,
    load_config_file,
    parse_config,
    resolve_threads,
)
from .errors import (
    ConfigError,
    ConstructionError,
    DataError,
    DomainError,
    OutputError,
    ParameterError,
    ShapeError,
    SpecwaveError,
)
from .evolution import (
    BlowupRecord,
    CauchyData,
    EvolutionTrace,
    Nonlinearity,
    NonlinearForm,
    TraceOptions,
    diffusion_difference,
    duhamel_residual,
    heat_solve,
    linear_solve,
    lyapunov_energy,
    nonlinear_evolve,
)
from .experiments import (
    Criterion,
    ExperimentReport,
    SweepPoint,
    critical_sweep,
    initial_size,
    make_initial_data,
    smalldata_global,
    verify_diffusion,
    verify_matsumura,
)
from .export import (
    export_json,
    export_phase_csv,
    export_scan_csv,
    export_snapshots_csv,
    export_trace_csv,
    write_output,
)
from .fitting import DecayFit, fit_power_law
from .kernels import (
    DEFAULT_KERNEL,
    MultiplierKernel,
    StepMultipliers,
    eval_D,
    eval_diff_symbol,
    eval_dt2D,
    eval_dtD,
    eval_heat,
    eval_step_integral,
)
from .logging import get_logger, setup_logging
from .service import ExperimentService, RunResult
from .types import (
    BlowupPayload,
    CriterionPayload,
    CriticalityPayload,
    FitPayload,
    InequalityPayload,
    KernelBoundsPayload,
    ReportPayload,
    SweepRowPayload,
)
from .utils import japanese_bracket

__all__ = [
    # Version
    "__version__",
    # Backends
    "BACKEND_KINDS",
    "BackendSpec",
    "GridFunction",
    "SpectralCoeffs",
    "SpectrumBackend",
    "build_backend",
    "build_dirichlet_1d",
    "build_fractional",
    "build_matrix_backend",
    "build_sierpinski",
    "forward",
    "homogeneous_norm",
    "inverse",
    "lq_norm",
    "measure_alpha",
    "sierpinski_graph",
    "sobolev_norm",
    # Kernels
    "DEFAULT_KERNEL",
    "MultiplierKernel",
    "StepMultipliers",
    "eval_D",
    "eval_diff_symbol",
    "eval_dt2D",
    "eval_dtD",
    "eval_heat",
    "eval_step_integral",
    # Evolution
    "BlowupRecord",
    "CauchyData",
    "EvolutionTrace",
    "Nonlinearity",
    "NonlinearForm",
    "TraceOptions",
    "diffusion_difference",
    "duhamel_residual",
    "heat_solve",
    "linear_solve",
    "lyapunov_energy",
    "nonlinear_evolve",
    # Fitting and analysis
    "DecayFit",
    "fit_power_law",
    "DOCUMENTED_OPERATORS",
    "INEQUALITIES",
    "CriticalityRecord",
    "DocumentedOperator",
    "ExponentPrediction",
    "InequalityReport",
    "InequalityResult",
    "KernelBoundsReport",
    "check_inequalities",
    "criticality",
    "documented_alpha",
    "fit_decay",
    "fujita_exponent",
    "interpolation_ratio",
    "kernel_table",
    "predict_exponent",
    "scan_kernel_bounds",
    "weighted_X_norm",
    "weighted_Y_norm",
    # Experiments
    "Criterion",
    "ExperimentReport",
    "SweepPoint",
    "critical_sweep",
    "initial_size",
    "make_initial_data",
    "smalldata_global",
    "verify_diffusion",
    "verify_matsumura",
    # Config
    "ExperimentConfig",
    "RunConfig",
    "apply_overrides",
    "load_config_file",
    "parse_config",
    "resolve_threads",
    # Export
    "export_json",
    "export_phase_csv",
    "export_scan_csv",
    "export_snapshots_csv",
    "export_trace_csv",
    "write_output",
    # Service
    "ExperimentService",
    "RunResult",
    # CLI
    "create_parser",
    "main",
    # Errors
    "ConfigError",
    "ConstructionError",
    "DataError",
    "DomainError",
    "OutputError",
    "ParameterError",
    "ShapeError",
    "SpecwaveError",
    # Logging
    "get_logger",
    "setup_logging",
    # Types
    "BlowupPayload",
    "CriterionPayload",
    "CriticalityPayload",
    "FitPayload",
    "InequalityPayload",
    "KernelBoundsPayload",
    "ReportPayload",
    "SweepRowPayload",
    # Utils
    "japanese_bracket",
]
