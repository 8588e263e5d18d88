"""Variance schedules alpha_bar(t) on normalized time t in [0, 1], and time grids.

Time runs from 0 (data) to 1 (noise). Discrete schedules map step index
``i`` to ``t = i / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ArgumentError, BoundaryError, ConfigError, DomainError

FD_STEP = 1e-5
_KNOT_TOL = 1e-9


class Schedule:
    """Base class for variance schedules.

    Subclasses implement :meth:`alpha_bar`; the derivative falls back to a
    central finite difference with step :data:`FD_STEP`.
    """

    kind: ClassVar[str] = ""
    t_min: ClassVar[float] = 0.0
    t_max: ClassVar[float] = 1.0

    def _check(self, t: float) -> float:
        t = float(t)
        if not self.t_min <= t <= self.t_max:
            raise DomainError(f"t={t!r} outside [{self.t_min}, {self.t_max}] for {self.kind} schedule")
        return t

    def alpha_bar(self, t: float) -> float:
        raise NotImplementedError

    def one_minus_alpha_bar(self, t: float) -> float:
        """``1 - alpha_bar(t)``; overridden where a cancellation-free form exists."""
        return 1.0 - self.alpha_bar(t)

    def alpha_bar_derivative(self, t: float, h: float = FD_STEP) -> float:
        t = self._check(t)
        if t - h < self.t_min or t + h > self.t_max:
            raise BoundaryError(
                f"central difference at t={t!r} with h={h} leaves [{self.t_min}, {self.t_max}]"
            )
        return (self.alpha_bar(t + h) - self.alpha_bar(t - h)) / (2.0 * h)

    @property
    def params(self) -> dict[str, float]:
        return {}


@dataclass(frozen=True)
class LinearBeta(Schedule):
    """Discrete DDPM schedule with ``beta_i`` linear in ``i`` (i = 1..N).

    ``alpha_bar`` at integer steps is the exact running product of
    ``1 - beta_i``; between knots it is a cubic spline through ``log alpha_bar``.
    """

    beta_start: float = 1e-4
    beta_end: float = 0.02
    n_train: int = 1000
    kind: ClassVar[str] = "linear-beta"

    _table: np.ndarray = field(init=False, repr=False, compare=False)
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_train < 2:
            raise ConfigError("linear-beta needs n_train >= 2")
        if not (0.0 < self.beta_start <= self.beta_end < 1.0):
            raise ConfigError("linear-beta needs 0 < beta_start <= beta_end < 1")
        betas = np.linspace(self.beta_start, self.beta_end, self.n_train)
        table = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
        table.setflags(write=False)
        knots = np.arange(self.n_train + 1) / self.n_train
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_spline", CubicSpline(knots, np.log(table)))

    @property
    def betas(self) -> np.ndarray:
        return np.linspace(self.beta_start, self.beta_end, self.n_train)

    def alpha_bar_at_step(self, i: int) -> float:
        if not 0 <= i <= self.n_train:
            raise DomainError(f"step {i} outside [0, {self.n_train}]")
        return float(self._table[i])

    def alpha_bar(self, t: float) -> float:
        t = self._check(t)
        k = t * self.n_train
        i = round(k)
        if abs(k - i) < _KNOT_TOL:
            return float(self._table[i])
        return math.exp(float(self._spline(t)))

    @property
    def params(self) -> dict[str, float]:
        return {"beta_start": self.beta_start, "beta_end": self.beta_end, "n_train": self.n_train}


@dataclass(frozen=True)
class Cosine(Schedule):
    """Cosine schedule ``cos^2(((t+s)/(1+s)) pi/2)`` normalized so that alpha_bar(0) = 1."""

    s: float = 0.008
    n_train: int = 1000
    kind: ClassVar[str] = "cosine"

    def __post_init__(self):
        if self.s < 0:
            raise ConfigError("cosine offset s must be >= 0")

    def _f(self, t: float) -> float:
        return math.cos((t + self.s) / (1.0 + self.s) * math.pi / 2.0) ** 2

    def alpha_bar(self, t: float) -> float:
        t = self._check(t)
        return self._f(t) / self._f(0.0)

    @property
    def params(self) -> dict[str, float]:
        return {"s": self.s, "n_train": self.n_train}


@dataclass(frozen=True)
class ToyLinear(Schedule):
    """``alpha_bar(t) = 1 - t``."""

    n_train: int = 1000
    kind: ClassVar[str] = "toy-linear"

    def alpha_bar(self, t: float) -> float:
        return 1.0 - self._check(t)

    def one_minus_alpha_bar(self, t: float) -> float:
        return self._check(t)

    def alpha_bar_derivative(self, t: float, h: float = FD_STEP) -> float:
        self._check(t)
        return -1.0

    @property
    def params(self) -> dict[str, float]:
        return {"n_train": self.n_train}


@dataclass(frozen=True)
class Exponential(Schedule):
    """``alpha_bar(t) = exp(a t^2 + b t)``.

    Requires ``b <= 0`` and ``2a + b <= 0`` (not both zero) so the schedule is
    strictly decreasing on [0, 1].
    """

    a: float = 0.0
    b: float = -1.0
    n_train: int = 1000
    kind: ClassVar[str] = "exponential"

    def __post_init__(self):
        if self.b > 0 or 2 * self.a + self.b > 0 or (self.a == 0 and self.b == 0):
            raise ConfigError(f"exponential(a={self.a}, b={self.b}) is not strictly decreasing on [0, 1]")

    def _exponent(self, t: float) -> float:
        return self.a * t * t + self.b * t

    def alpha_bar(self, t: float) -> float:
        return math.exp(self._exponent(self._check(t)))

    def one_minus_alpha_bar(self, t: float) -> float:
        return -math.expm1(self._exponent(self._check(t)))

    def alpha_bar_derivative(self, t: float, h: float = FD_STEP) -> float:
        t = self._check(t)
        return (2.0 * self.a * t + self.b) * math.exp(self._exponent(t))

    @property
    def params(self) -> dict[str, float]:
        return {"a": self.a, "b": self.b, "n_train": self.n_train}


SCHEDULES: dict[str, type[Schedule]] = {
    cls.kind: cls for cls in (LinearBeta, Cosine, ToyLinear, Exponential)
}


def make_schedule(kind: str, **params) -> Schedule:
    try:
        cls = SCHEDULES[kind]
    except KeyError:
        raise ConfigError(f"unknown schedule kind {kind!r}; expected one of {sorted(SCHEDULES)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} schedule: {exc}") from None


@dataclass(frozen=True)
class TimeGrid:
    """Strictly decreasing sampling times ``t_0 > t_1 > ... > t_S >= 0``."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "values", v)
        if len(v) < 2:
            raise ArgumentError("a time grid needs at least two times")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ArgumentError("time grid must be strictly decreasing")
        if v[-1] < 0:
            raise ArgumentError("time grid must end at t >= 0")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def steps(self) -> int:
        return len(self.values) - 1

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        gaps = np.diff(self.values)
        return bool(np.allclose(gaps, gaps[0], rtol=rtol, atol=0.0))


def make_time_grid(schedule: Schedule | None, steps: int, t_start: float, t_end: float) -> TimeGrid:
    """Uniform grid of ``steps + 1`` times from ``t_start`` down to ``t_end``.

    When a schedule is given, both endpoints are checked against its domain.
    """
    if int(steps) != steps or steps < 1:
        raise ArgumentError(f"step count must be a positive integer, got {steps!r}")
    if not t_start > t_end >= 0:
        raise ArgumentError(f"need t_start > t_end >= 0, got [{t_start}, {t_end}]")
    if schedule is not None:
        schedule._check(t_start)
        schedule._check(t_end)
    values = np.linspace(t_start, t_end, int(steps) + 1)
    return TimeGrid(tuple(values.tolist()))
