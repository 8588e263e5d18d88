"""Noise predictors eps(x, t) and the forward diffusion process.

No networks here: predictors are closed-form stand-ins so every sampler
property can be checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import ArgumentError, SingularTimeError
from .schedule import Schedule


class NoisePredictor(Protocol):
    kind: str

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray: ...


def as_state(x, name: str = "x") -> np.ndarray:
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ArgumentError(f"{name} must be a non-empty 1-d vector, got shape {arr.shape}")
    return arr


def _frozen(x, name: str) -> np.ndarray:
    arr = as_state(x, name)
    arr.setflags(write=False)
    return arr


def forward_diffuse(x0, eps, schedule: Schedule, t: float) -> np.ndarray:
    """Point on the forward process: ``sqrt(ab) x0 + sqrt(1 - ab) eps``."""
    x0 = as_state(x0, "x0")
    eps = as_state(eps, "eps")
    if x0.shape != eps.shape:
        raise ArgumentError(f"dimension mismatch: x0 {x0.shape} vs eps {eps.shape}")
    ab = schedule.alpha_bar(t)
    return math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps


def eval_analytic_toy(x, t: float | None = None) -> np.ndarray:
    """``(sin x[0], cos x[1])``; ignores ``t``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (2,):
        raise ArgumentError(f"analytic toy predictor needs a 2-vector, got shape {x.shape}")
    return np.array([math.sin(x[0]), math.cos(x[1])])


def eval_exact_oracle(x, t: float, x0, schedule: Schedule) -> np.ndarray:
    """Invert the forward process for the noise, given the clean point ``x0``."""
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if x.shape != x0.shape:
        raise ArgumentError(f"dimension mismatch: x {x.shape} vs x0 {x0.shape}")
    ab = schedule.alpha_bar(t)
    if ab >= 1.0:
        raise SingularTimeError(f"noise is undefined where alpha_bar = 1 (t={t!r})")
    return (x - math.sqrt(ab) * x0) / math.sqrt(1.0 - ab)


@dataclass(frozen=True)
class AnalyticToy:
    kind = "analytic-toy"
    dim = 2

    def __call__(self, x, t):
        return eval_analytic_toy(x, t)


@dataclass(frozen=True, eq=False)
class ExactOracle:
    """Returns the exact noise that carries ``x0`` to ``x`` at time ``t``."""

    x0: np.ndarray
    schedule: Schedule
    kind = "exact-oracle"

    def __post_init__(self):
        object.__setattr__(self, "x0", _frozen(self.x0, "x0"))

    @property
    def dim(self) -> int:
        return self.x0.size

    def __call__(self, x, t):
        return eval_exact_oracle(x, t, self.x0, self.schedule)


@dataclass(frozen=True, eq=False)
class ConstantPredictor:
    eps0: np.ndarray
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "eps0", _frozen(self.eps0, "eps0"))

    @property
    def dim(self) -> int:
        return self.eps0.size

    def __call__(self, x, t):
        x = np.asarray(x)
        if x.shape != self.eps0.shape:
            raise ArgumentError(f"dimension mismatch: x {x.shape} vs eps0 {self.eps0.shape}")
        return self.eps0.copy()
