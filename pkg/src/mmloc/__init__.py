"""Source localization from range and range-difference measurements.

Two iterative solvers built on the majorize-minimize principle, plus the
surrounding toolkit: a measurement simulator, a hyperbola-based grid
initializer, a Cramer-Rao bound calculator, a cross-correlation TDOA
front-end, and a Monte-Carlo benchmark harness.
"""

from .crlb import CrlbReport, fisher, range_variance, rd_covariance
from .errors import (
    DegenerateMeasurementError,
    LocalizationError,
    RayMeasurementError,
    SensorSingularityError,
    SingularSystemError,
)
from .harness import (
    ExperimentConfig,
    RmseRow,
    read_rmse_csv,
    run_rmse_sweep,
    run_trace,
    write_metadata,
    write_rmse_csv,
)
from .initializer import InitConfig, hyperbola_points, init_point
from .objective import f_rdls, f_rdls_many, f_rls, f_rls_many, grad_fd
from .scenario import (
    NoiseModel,
    RangeDiffSet,
    Scenario,
    SensorArray,
    circular_array,
    linear_array,
    load_scenario,
    noisy_rangediffs,
    noisy_ranges,
    random_array,
    rangediffs_from_ranges,
    range_noise_std,
    read_rangediffs_csv,
    read_ranges_csv,
    rhombus_array,
    save_scenario,
    snr_to_sigma2,
    true_ranges,
    unordered_pairs,
    write_rangediffs_csv,
    write_ranges_csv,
)
from .sfp import sfp_solve, sfp_step, sfp_surrogate
from .solvit import (
    CONVERGED,
    MAX_ITER,
    SINGULAR_SYSTEM,
    BoundQuantities,
    SolveTrace,
    SolverConfig,
    bound_quantities,
    solvit_solve,
    solvit_step,
    surrogate_g,
    write_trace_csv,
)
from .tdoa import (
    SignalRecord,
    bandpass,
    delays_to_rangediffs,
    estimate_rangediffs,
    read_signals_csv,
    read_signals_raw,
    tone_burst_signals,
    write_signals_csv,
    write_signals_raw,
    xcorr_delay,
)

__version__ = "0.1.0"

__all__ = [
    "BoundQuantities",
    "CONVERGED",
    "CrlbReport",
    "DegenerateMeasurementError",
    "ExperimentConfig",
    "InitConfig",
    "LocalizationError",
    "MAX_ITER",
    "NoiseModel",
    "RangeDiffSet",
    "RayMeasurementError",
    "RmseRow",
    "Scenario",
    "SensorArray",
    "SensorSingularityError",
    "SignalRecord",
    "SINGULAR_SYSTEM",
    "SingularSystemError",
    "SolveTrace",
    "SolverConfig",
    "bandpass",
    "bound_quantities",
    "circular_array",
    "delays_to_rangediffs",
    "estimate_rangediffs",
    "f_rdls",
    "f_rdls_many",
    "f_rls",
    "f_rls_many",
    "fisher",
    "grad_fd",
    "hyperbola_points",
    "init_point",
    "linear_array",
    "load_scenario",
    "noisy_rangediffs",
    "noisy_ranges",
    "random_array",
    "range_noise_std",
    "range_variance",
    "rangediffs_from_ranges",
    "rd_covariance",
    "read_rangediffs_csv",
    "read_ranges_csv",
    "read_rmse_csv",
    "read_signals_csv",
    "read_signals_raw",
    "rhombus_array",
    "run_rmse_sweep",
    "run_trace",
    "save_scenario",
    "sfp_solve",
    "sfp_step",
    "sfp_surrogate",
    "snr_to_sigma2",
    "solvit_solve",
    "solvit_step",
    "surrogate_g",
    "tone_burst_signals",
    "true_ranges",
    "unordered_pairs",
    "write_metadata",
    "write_rangediffs_csv",
    "write_ranges_csv",
    "write_rmse_csv",
    "write_signals_csv",
    "write_signals_raw",
    "write_trace_csv",
    "xcorr_delay",
]
