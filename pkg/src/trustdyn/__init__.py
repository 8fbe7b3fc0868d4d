"""Simulation, Kalman estimation and identification of a driver's trust in an automated driving system."""

from .errors import (
    DegenerateDesignError,
    InvalidArgumentError,
    NonConvergenceError,
    NumericalDegeneracyError,
    NumericalError,
    TrustDynError,
    ValidationError,
)
from .kernels import BACKEND
from .model import (
    TABLE1,
    Event,
    ModelParameters,
    ParameterSEM,
    Step,
    TrialLog,
    clamp_report,
    emit_observation,
    get_preset,
    simulate_trial,
    step_state,
)
from .estimator import (
    FilterConfig,
    FilterState,
    filter_step,
    filter_trajectory,
    predict,
    steady_state_variance,
    update,
)
from .ensemble import EnsembleResult, compute_bands, run_ensemble
from .sysid import FitResult, fit_all, fit_dynamics, fit_observation

__version__ = "0.1.0"
