"""Classical and pseudo numerical samplers for the diffusion ODE.

All step routines take a signed ``delta = t_target - t_current``; sampling
runs with ``delta < 0``. Classical steps integrate :func:`ode_rhs` with the
linear transfer ``x + delta * f``; pseudo steps feed a blended noise estimate
to :func:`~pndm.transfer.phi`.

Gradient-part blends are written as a correction to the newest value, e.g.
``e0 + (-59 (e1 - e0) + 37 (e2 - e0) - 9 (e3 - e0)) / 24``, which equals the
textbook ``(55 e0 - 59 e1 + 37 e2 - 9 e3) / 24`` but returns ``e0`` bitwise
when all inputs agree.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, NumericalError, SingularTimeError, WarmupError, ArgumentError
from .predictor import as_state
from .schedule import Schedule, TimeGrid, make_time_grid
from .transfer import ddim_step, phi

METHODS = ("DDIM", "FON-EULER", "FON-RK4", "FON-AB4", "S-PNDM", "F-PNDM")
PSEUDO_METHODS = ("DDIM", "S-PNDM", "F-PNDM")
MIN_STEPS = {"DDIM": 1, "FON-EULER": 1, "FON-RK4": 1, "FON-AB4": 4, "S-PNDM": 2, "F-PNDM": 4}
_MULTISTEP = ("FON-AB4", "S-PNDM", "F-PNDM")

DEFAULT_FON_T_MIN = 1e-3


def ode_rhs(x, t: float, predictor, schedule: Schedule) -> np.ndarray:
    """``dx/dt = ab'(t) * (x / (2 ab) - eps / (2 ab sqrt(1 - ab)))``.

    This is the small-step limit of the transfer part, so that integrating it
    and chaining ``phi`` approximate the same curve.
    """
    ab = schedule.alpha_bar(t)
    one_minus = schedule.one_minus_alpha_bar(t)
    if ab <= 0.0 or one_minus <= 0.0:
        raise SingularTimeError(f"ODE right-hand side is singular at t={t!r} (alpha_bar={ab!r})")
    d_ab = schedule.alpha_bar_derivative(t)
    eps = predictor(x, t)
    return d_ab * (x / (2.0 * ab) - eps / (2.0 * ab * math.sqrt(one_minus)))


# -- blends --------------------------------------------------------------


def _ab4_blend(f0, f1, f2, f3):
    return f0 + (-59.0 * (f1 - f0) + 37.0 * (f2 - f0) - 9.0 * (f3 - f0)) / 24.0


def _rk4_blend(k1, k2, k3, k4):
    return k1 + (2.0 * (k2 - k1) + 2.0 * (k3 - k1) + (k4 - k1)) / 6.0


def _check_history(history, n: int, what: str) -> list[np.ndarray]:
    if history is None or len(history) < n:
        got = 0 if history is None else len(history)
        raise WarmupError(f"{what} needs {n} prior values, got {got}")
    return [np.asarray(h, dtype=np.float64) for h in list(history)[:n]]


# -- classical steps -------------------------------------------------------


def euler_step(x, t, delta, predictor, schedule):
    """Forward Euler. Returns ``(x_next, f_t)``."""
    f = ode_rhs(x, t, predictor, schedule)
    return x + delta * f, f


def rk4_step(x, t, delta, predictor, schedule):
    """Classical RK4. Returns ``(x_next, k1)`` so multistep warmups can reuse ``k1``."""
    half = t + delta / 2.0
    k1 = ode_rhs(x, t, predictor, schedule)
    k2 = ode_rhs(x + delta / 2.0 * k1, half, predictor, schedule)
    k3 = ode_rhs(x + delta / 2.0 * k2, half, predictor, schedule)
    k4 = ode_rhs(x + delta * k3, t + delta, predictor, schedule)
    return x + delta * _rk4_blend(k1, k2, k3, k4), k1


def ab4_step(x, t, delta, predictor, schedule, history):
    """Four-step Adams-Bashforth.

    ``history`` holds the three previous right-hand sides, most recent first.
    Returns ``(x_next, f_t)``.
    """
    f1, f2, f3 = _check_history(history, 3, "AB4")
    f0 = ode_rhs(x, t, predictor, schedule)
    return x + delta * _ab4_blend(f0, f1, f2, f3), f0


# -- pseudo steps ------------------------------------------------------------


def plms_step(x, t, delta, eps_history, predictor, schedule):
    """Pseudo linear multistep: AB4 blend of noise estimates, then ``phi``.

    ``eps_history`` holds the three previous noise estimates, most recent
    first. Returns ``(x_next, e_t)``.
    """
    e1, e2, e3 = _check_history(eps_history, 3, "PLMS")
    e0 = predictor(x, t)
    return phi(x, _ab4_blend(e0, e1, e2, e3), t, t + delta, schedule), e0


def prk_step(x, t, delta, predictor, schedule):
    """Pseudo Runge-Kutta: four staged noise estimates, RK4 weights, then ``phi``.

    Returns ``(x_next, e1)`` where ``e1`` is the estimate at the start point.
    """
    half = t + delta / 2.0
    end = t + delta
    e1 = predictor(x, t)
    x1 = phi(x, e1, t, half, schedule)
    e2 = predictor(x1, half)
    x2 = phi(x, e2, t, half, schedule)
    e3 = predictor(x2, half)
    x3 = phi(x, e3, t, end, schedule)
    e4 = predictor(x3, end)
    return phi(x, _rk4_blend(e1, e2, e3, e4), t, end, schedule), e1


def pie_step(x, t, delta, predictor, schedule):
    """Pseudo improved Euler. Returns ``(x_next, e1)``."""
    end = t + delta
    e1 = predictor(x, t)
    x1 = phi(x, e1, t, end, schedule)
    e2 = predictor(x1, end)
    return phi(x, e1 + (e2 - e1) / 2.0, t, end, schedule), e1


def plms2_step(x, t, delta, eps_prev, predictor, schedule):
    """Pseudo two-step linear multistep, blend ``(3 e_t - e_prev) / 2``. Returns ``(x_next, e_t)``."""
    if eps_prev is None:
        raise WarmupError("PLMS2 needs one prior noise estimate")
    eps_prev = np.asarray(eps_prev, dtype=np.float64)
    e0 = predictor(x, t)
    return phi(x, e0 + (e0 - eps_prev) / 2.0, t, t + delta, schedule), e0


# -- full samplers -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    """Everything that determines a deterministic sampling run."""

    method: str
    grid: TimeGrid
    schedule: Schedule
    predictor: object
    seed: int = 0
    fon_t_min: float = DEFAULT_FON_T_MIN

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {list(METHODS)}")
        if not isinstance(self.grid, TimeGrid):
            raise ConfigError("grid must be a TimeGrid")
        if self.steps < MIN_STEPS[self.method]:
            raise ConfigError(
                f"{self.method} needs at least {MIN_STEPS[self.method]} steps, got {self.steps}"
            )
        if self.method in _MULTISTEP and not self.grid.is_uniform():
            raise ConfigError(f"{self.method} is a multistep method and needs a uniform grid")

    @classmethod
    def uniform(cls, method, steps, t_start, t_end, schedule, predictor, **kw) -> "SamplerSpec":
        if steps < MIN_STEPS.get(method, 1):
            raise ConfigError(f"{method} needs at least {MIN_STEPS.get(method, 1)} steps, got {steps}")
        return cls(method, make_time_grid(schedule, steps, t_start, t_end), schedule, predictor, **kw)

    @property
    def steps(self) -> int:
        return self.grid.steps

    @property
    def is_pseudo(self) -> bool:
        return self.method in PSEUDO_METHODS

    def effective_grid(self) -> TimeGrid:
        """The grid actually integrated; classical methods stop at ``fon_t_min``."""
        if self.is_pseudo or self.grid[-1] >= self.fon_t_min:
            return self.grid
        warnings.warn(
            f"{self.method}: right-hand side is unbounded near t=0; "
            f"clamping final time {self.grid[-1]!r} to {self.fon_t_min!r}",
            RuntimeWarning,
            stacklevel=3,
        )
        return make_time_grid(self.schedule, self.steps, self.grid[0], self.fon_t_min)


@dataclass
class Trajectory:
    """States visited by a sampler and every predictor evaluation it made."""

    method: str
    states: list[tuple[float, np.ndarray]] = field(default_factory=list)
    eps_log: list[tuple[float, np.ndarray]] = field(default_factory=list)
    eval_counts: list[int] = field(default_factory=list)

    @property
    def predictor_eval_count(self) -> int:
        return len(self.eps_log)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.states])

    @property
    def xs(self) -> np.ndarray:
        return np.stack([x for _, x in self.states])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1][1]

    def __len__(self) -> int:
        return len(self.states)


class _Recorder:
    """Wraps a predictor and logs every evaluation."""

    def __init__(self, predictor, log: list):
        self.predictor = predictor
        self.log = log

    def __call__(self, x, t):
        eps = np.asarray(self.predictor(x, t), dtype=np.float64)
        if eps.shape != np.shape(x):
            raise ArgumentError(f"predictor returned shape {eps.shape} for input {np.shape(x)}")
        self.log.append((float(t), eps.copy()))
        return eps


def initial_state(dim: int, seed: int, init: str = "normal") -> np.ndarray:
    """Seeded starting point: standard normal, or U(0, 1) as in the toy problem."""
    rng = np.random.default_rng(seed)
    if init == "normal":
        return rng.standard_normal(dim)
    if init == "uniform":
        return rng.uniform(0.0, 1.0, dim)
    raise ConfigError(f"unknown init {init!r}; expected 'normal' or 'uniform'")


def sample(spec: SamplerSpec, x_init) -> Trajectory:
    """Run ``spec`` from ``x_init`` and record the trajectory.

    F-PNDM warms up with three PRK steps, S-PNDM with one PIE step and
    FON-AB4 with three RK4 steps; the multistep phase then reuses the start
    estimates those warmup steps return.
    """
    grid = spec.effective_grid()
    schedule = spec.schedule
    traj = Trajectory(spec.method)
    pred = _Recorder(spec.predictor, traj.eps_log)
    x = as_state(x_init, "x_init")
    traj.states.append((grid[0], x.copy()))
    traj.eval_counts.append(0)

    history: deque = deque(maxlen=3)
    method = spec.method
    for k in range(grid.steps):
        t = grid[k]
        delta = grid[k + 1] - t
        if method == "DDIM":
            x = ddim_step(x, t, t + delta, pred, schedule)
        elif method == "F-PNDM":
            if k < 3:
                x, e = prk_step(x, t, delta, pred, schedule)
            else:
                x, e = plms_step(x, t, delta, history, pred, schedule)
            history.appendleft(e)
        elif method == "S-PNDM":
            if k < 1:
                x, e = pie_step(x, t, delta, pred, schedule)
            else:
                x, e = plms2_step(x, t, delta, history[0], pred, schedule)
            history.appendleft(e)
        elif method == "FON-EULER":
            x, _ = euler_step(x, t, delta, pred, schedule)
        elif method == "FON-RK4":
            x, _ = rk4_step(x, t, delta, pred, schedule)
        elif method == "FON-AB4":
            if k < 3:
                x, f = rk4_step(x, t, delta, pred, schedule)
            else:
                x, f = ab4_step(x, t, delta, pred, schedule, history)
            history.appendleft(f)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"{method}: non-finite state after step {k + 1} (t={t + delta!r})")
        traj.states.append((t + delta, x.copy()))
        traj.eval_counts.append(len(traj.eps_log))
    return traj


def run(method: str, steps: int, t_start: float, t_end: float, schedule, predictor, x_init, **kw) -> Trajectory:
    return sample(SamplerSpec.uniform(method, steps, t_start, t_end, schedule, predictor, **kw), x_init)


def expected_eval_count(method: str, steps: int) -> int:
    return {
        "DDIM": steps,
        "FON-EULER": steps,
        "FON-RK4": 4 * steps,
        "FON-AB4": steps + 9,
        "S-PNDM": steps + 1,
        "F-PNDM": steps + 9,
    }[method]


def steps_for_budget(method: str, budget: int) -> int:
    """Largest step count whose evaluation count does not exceed ``budget``."""
    s = max(MIN_STEPS[method], 1)
    while expected_eval_count(method, s + 1) <= budget:
        s += 1
    return s


__all__: Sequence[str] = [
    "METHODS", "PSEUDO_METHODS", "MIN_STEPS", "SamplerSpec", "Trajectory",
    "ode_rhs", "euler_step", "rk4_step", "ab4_step", "plms_step", "prk_step",
    "pie_step", "plms2_step", "sample", "run", "initial_state",
    "expected_eval_count", "steps_for_budget",
]
