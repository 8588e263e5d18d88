"""The nonlinear transfer part and the single DDIM step built from it."""

from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError, SingularTimeError
from .schedule import Schedule


def transfer_coefficients(t: float, t_next: float, schedule: Schedule) -> tuple[float, float]:
    """Return ``(cx, ce)`` such that ``phi(x, eps) = cx * x - ce * eps``."""
    a = schedule.alpha_bar(t)
    a_next = schedule.alpha_bar(t_next)
    if a <= 0.0:
        raise SingularTimeError(f"transfer undefined where alpha_bar = 0 (t={t!r})")
    if a_next == a:
        return math.sqrt(a_next) / math.sqrt(a), 0.0
    if a >= 1.0:
        raise SingularTimeError(f"eps coefficient is 0/0 at alpha_bar(t) = 1 (t={t!r})")
    cx = math.sqrt(a_next) / math.sqrt(a)
    denom = math.sqrt(a) * (math.sqrt((1.0 - a_next) * a) + math.sqrt((1.0 - a) * a_next))
    return cx, (a_next - a) / denom


def phi(x, eps, t: float, t_next: float, schedule: Schedule) -> np.ndarray:
    """Move ``x`` from ``t`` to ``t_next`` along the forward-process curve fixed by ``eps``.

    If ``x = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps`` then the result is the same
    expression at ``t_next``, for either direction of travel.
    """
    x = np.asarray(x, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x.shape != eps.shape:
        raise ArgumentError(f"dimension mismatch: x {x.shape} vs eps {eps.shape}")
    cx, ce = transfer_coefficients(t, t_next, schedule)
    if ce == 0.0:
        return cx * x
    return cx * x - ce * eps


def ddim_step(x, t: float, t_next: float, predictor, schedule: Schedule) -> np.ndarray:
    return phi(x, predictor(x, t), t, t_next, schedule)
