"""Robust-convergence indicators, simulation and gain tuning for MIMO-PI loops."""
from .errors import (
    ConfigError,
    DefinitenessError,
    DimensionError,
    DomainError,
    NumericError,
    ParameterError,
    RobustPIError,
    StabilityError,
)
from .indicators import (
    GainPair,
    IndicatorReport,
    LinearizationPoint,
    assemble_AK0,
    assemble_D1_D2,
    attractor_radius,
    compute_indicators,
    solve_evp,
)
from .plants import PlantModel, SinusoidDisturbance, aircraft_error_plant, aircraft_plant, duffing
from .closedloop import SimConfig, SimulationTrace, simulate
from .metrics import MetricsReport, metrics_report
from .attractor import duffing_check, lyapunov_certificate, verify_trajectory
from .tuner import AIRCRAFT_K_STAR, GAConfig, TuningProblem, TuningResult, ga_optimize

__version__ = "0.1.0"
