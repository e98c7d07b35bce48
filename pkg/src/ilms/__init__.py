"""Incremental LMS over a ring network: simulation and mean-square theory."""

from .errors import (
    ConvergenceError, DivergenceError, FactorizationError, ILMSError,
    InstabilityError, SingularMatrixError, ValidationError,
)
from .network import (
    NetworkConfig, NodeProfile, RandomStream, build_network, generate_observation,
    generate_regressor, network_from_dict,
)
from .simulator import FilterState, SimResult, ilms_sweep, monte_carlo
from .theory import (
    LearningCurve, SpectralData, TheoryChain, build_F, build_chain,
    first_sweep_values, mean_stability_bound, plateau, spectral_radius,
    state_space_curve, steady_state, transient_curve,
)
from .experiments import ExperimentSpec, run_experiment, table1_suite

__version__ = "0.1.0"
