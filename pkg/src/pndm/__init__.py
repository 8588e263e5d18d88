"""Pseudo numerical methods for diffusion-model ODEs.

DDIM, S-PNDM and F-PNDM samplers built on a nonlinear transfer part, the
classical Euler/RK4/AB4 integrators they are compared against, analytic
noise predictors, and tools for measuring convergence order.
"""

__version__ = "0.1.0"

from .analysis import Problem, estimate_order, global_error, probe, reference_solution, toy_problem
from .errors import (
    ArgumentError,
    BoundaryError,
    ConfigError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    PndmError,
    SingularTimeError,
    WarmupError,
)
from .predictor import (
    AnalyticToy,
    ConstantPredictor,
    ExactOracle,
    eval_analytic_toy,
    eval_exact_oracle,
    forward_diffuse,
)
from .schedule import Cosine, Exponential, LinearBeta, Schedule, TimeGrid, ToyLinear, make_schedule, make_time_grid
from .solvers import SamplerSpec, Trajectory, initial_state, ode_rhs, run, sample
from .transfer import ddim_step, phi
