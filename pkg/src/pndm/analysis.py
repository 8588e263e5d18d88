"""Convergence order, singularity growth and trajectory statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, InsufficientDataError, SingularTimeError
from .predictor import AnalyticToy, as_state, forward_diffuse
from .schedule import Schedule, ToyLinear
from .solvers import PSEUDO_METHODS, Trajectory, initial_state, run

FP_FLOOR = 1e-13
REF_FACTOR = 100

# Accepted fitted-slope windows on the smooth interior toy problem.
SLOPE_WINDOWS = {
    "DDIM": (0.8, 1.3),
    "FON-EULER": (0.8, 1.3),
    "S-PNDM": (1.7, 2.6),
    "F-PNDM": (1.7, 2.6),
    "FON-RK4": (3.5, math.inf),
    "FON-AB4": (3.0, math.inf),
}


@dataclass(frozen=True, eq=False)
class Problem:
    """A fixed initial-value problem: schedule, predictor, start point and time range."""

    schedule: Schedule
    predictor: object
    x_init: np.ndarray
    t_start: float
    t_end: float

    def __post_init__(self):
        object.__setattr__(self, "x_init", as_state(self.x_init, "x_init"))
        if not self.t_start > self.t_end >= 0:
            raise ArgumentError(f"need t_start > t_end >= 0, got [{self.t_start}, {self.t_end}]")

    @property
    def span(self) -> float:
        return self.t_start - self.t_end

    def solve(self, method: str, steps: int, **kw) -> Trajectory:
        return run(method, steps, self.t_start, self.t_end, self.schedule, self.predictor, self.x_init, **kw)


def toy_problem(seed: int = 0, t_start: float = 0.9, t_end: float = 0.1) -> Problem:
    """Two-dimensional toy: ``alpha_bar = 1 - t``, eps = (sin x0, cos x1), x ~ U(0, 1)^2."""
    return Problem(ToyLinear(), AnalyticToy(), initial_state(2, seed, "uniform"), t_start, t_end)


def reference_solution(problem: Problem, steps: int, method: str | None = None) -> Trajectory:
    """High-resolution reference run.

    Defaults to RK4 on the ODE for interior problems and to F-PNDM when the
    range touches ``t = 0``, where classical methods are not valid.
    """
    if method is None:
        method = "FON-RK4" if problem.t_end >= 1e-2 else "F-PNDM"
    return problem.solve(method, steps)


def _check_same_problem(problem: Problem, reference: Trajectory) -> None:
    t0, x0 = reference.states[0]
    t1 = reference.states[-1][0]
    if t0 != problem.t_start or not math.isclose(t1, problem.t_end, rel_tol=1e-12, abs_tol=1e-15):
        raise ArgumentError(
            f"reference covers [{t0}, {t1}] but problem is [{problem.t_start}, {problem.t_end}]"
        )
    if x0.shape != problem.x_init.shape or not np.array_equal(x0, problem.x_init):
        raise ArgumentError("reference starts from a different initial state")


def global_error(method: str, steps: int, problem: Problem, reference: Trajectory) -> float:
    """Euclidean distance between the final states of a run and of ``reference``."""
    _check_same_problem(problem, reference)
    return float(np.linalg.norm(problem.solve(method, steps).final - reference.final))


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Ordinary least-squares slope of ``log10 y`` against ``log10 x``."""
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.log10(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class OrderReport:
    method: str
    deltas: list[float]
    errors: list[float]
    slope: float
    excluded: int = 0
    reference: str = ""

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.deltas, self.errors))

    def ratio_factors(self) -> list[tuple[float, float]]:
        """``(observed, predicted)`` error ratios for consecutive step refinements.

        The prediction is ``(delta_i / delta_{i+1}) ** slope``; for halving that is ``2**k``.
        """
        out = []
        for (d1, e1), (d2, e2) in zip(self.points, self.points[1:]):
            out.append((e1 / e2, (d1 / d2) ** self.slope))
        return out

    def ratios_consistent(self, factor: float = 2.0) -> bool:
        return all(pred / factor <= obs <= pred * factor for obs, pred in self.ratio_factors())

    def in_window(self) -> bool:
        lo, hi = SLOPE_WINDOWS.get(self.method, (-math.inf, math.inf))
        return lo <= self.slope <= hi


def _steps_for_delta(problem: Problem, delta: float) -> int:
    s = problem.span / delta
    n = round(s)
    if n < 1 or abs(s - n) > 1e-6 * max(1.0, s):
        raise ArgumentError(f"delta={delta} does not divide the interval of length {problem.span}")
    return n


def estimate_order(
    method: str,
    deltas: Sequence[float],
    problem: Problem | None = None,
    reference: Trajectory | None = None,
    ref_factor: int = REF_FACTOR,
) -> OrderReport:
    """Fit the global-error convergence order of ``method``.

    The reference defaults to RK4 at ``ref_factor`` times the finest tested
    resolution. Errors below :data:`FP_FLOOR` are dropped before fitting.
    """
    problem = problem or toy_problem()
    steps = [_steps_for_delta(problem, d) for d in deltas]
    if reference is None:
        reference = reference_solution(problem, ref_factor * max(steps), "FON-RK4")
        ref_desc = f"FON-RK4 S={ref_factor * max(steps)}"
    else:
        ref_desc = f"{reference.method} S={len(reference) - 1}"
    kept_d, kept_e, excluded = [], [], 0
    for d, s in zip(deltas, steps):
        err = global_error(method, s, problem, reference)
        if err < FP_FLOOR:
            excluded += 1
            continue
        kept_d.append(float(d))
        kept_e.append(err)
    if len(kept_d) < 4:
        raise InsufficientDataError(f"{method}: only {len(kept_d)} points above the {FP_FLOOR:g} floor")
    return OrderReport(method, kept_d, kept_e, fit_loglog_slope(kept_d, kept_e), excluded, ref_desc)


# -- singularity ---------------------------------------------------------------


def eps_coefficient(schedule: Schedule, t: float) -> float:
    """Magnitude of the noise coefficient in the ODE, ``|ab'| / (2 ab sqrt(1 - ab))``."""
    one_minus = schedule.one_minus_alpha_bar(t)
    if t == 0 or one_minus <= 0.0:
        raise SingularTimeError(f"noise coefficient is undefined at t={t!r}")
    ab = schedule.alpha_bar(t)
    return abs(schedule.alpha_bar_derivative(t)) / (2.0 * ab * math.sqrt(one_minus))


def singularity_probe(schedule: Schedule, t_list: Sequence[float]) -> list[tuple[float, float]]:
    return [(float(t), eps_coefficient(schedule, t)) for t in t_list]


def probe_grid(t_min: float = 1e-6, t_max: float = 1e-2, points: int = 25) -> np.ndarray:
    """Log-spaced times from ``t_max`` down to ``t_min``."""
    if points < 2 or not 0 < t_min < t_max:
        raise ArgumentError("probe grid needs points >= 2 and 0 < t_min < t_max")
    return np.logspace(math.log10(t_max), math.log10(t_min), points)


@dataclass
class ProbeResult:
    points: list[tuple[float, float]]
    slope: float

    @property
    def bounded(self) -> bool:
        # no power-law growth as t -> 0
        return all(math.isfinite(m) for _, m in self.points) and self.slope > -0.1


def probe(schedule: Schedule, t_list: Sequence[float] | None = None) -> ProbeResult:
    pts = singularity_probe(schedule, probe_grid() if t_list is None else t_list)
    return ProbeResult(pts, fit_loglog_slope([t for t, _ in pts], [m for _, m in pts]))


# -- trajectory statistics -----------------------------------------------------


@dataclass
class NormBand:
    t: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray


@dataclass
class TrajStats:
    band: NormBand
    norms: np.ndarray
    pixels: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))


def uniform_data(dim: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    return lambda rng, n: rng.uniform(0.0, 1.0, (n, dim))


def normal_data(dim: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    return lambda rng, n: rng.standard_normal((n, dim))


def point_data(x0) -> Callable[[np.random.Generator, int], np.ndarray]:
    x0 = as_state(x0, "x0")
    return lambda rng, n: np.tile(x0, (n, 1))


def norm_band(
    schedule: Schedule,
    x0_sampler: Callable[[np.random.Generator, int], np.ndarray],
    t_grid: Sequence[float],
    n_samples: int = 1000,
    seed: int = 0,
) -> NormBand:
    """Per-time 5/50/95% quantiles of ``||forward_diffuse(x0, eps, t)||``.

    One batch of ``(x0, eps)`` pairs is drawn and reused at every ``t``.
    """
    if n_samples < 100:
        raise ArgumentError(f"norm_band needs n_samples >= 100, got {n_samples}")
    rng = np.random.default_rng(seed)
    x0 = np.asarray(x0_sampler(rng, n_samples), dtype=np.float64)
    if x0.ndim != 2 or x0.shape[0] != n_samples:
        raise ArgumentError(f"x0_sampler returned shape {x0.shape}, expected ({n_samples}, dim)")
    eps = rng.standard_normal(x0.shape)
    ts = np.asarray(t_grid, dtype=float)
    q = np.empty((ts.size, 3))
    for k, t in enumerate(ts):
        ab = schedule.alpha_bar(t)
        xt = math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps
        q[k] = np.quantile(np.linalg.norm(xt, axis=1), [0.05, 0.5, 0.95])
    return NormBand(ts, q[:, 0], q[:, 1], q[:, 2])


def pixel_pair_curve(traj: Trajectory, i: int, j: int) -> np.ndarray:
    """``(x_t[i], x_t[j])`` for every recorded state, in sampling order."""
    xs = traj.xs
    dim = xs.shape[1]
    for idx in (i, j):
        if not 0 <= idx < dim:
            raise ArgumentError(f"index {idx} out of range for dimension {dim}")
    return xs[:, [i, j]].copy()


def trajectory_stats(
    traj: Trajectory,
    schedule: Schedule,
    x0_sampler,
    n_samples: int = 1000,
    i: int = 0,
    j: int = 1,
    seed: int = 0,
) -> TrajStats:
    band = norm_band(schedule, x0_sampler, traj.times, n_samples, seed)
    norms = np.linalg.norm(traj.xs, axis=1)
    return TrajStats(band, norms, pixel_pair_curve(traj, i, j))


def manifold_deviation(traj: Trajectory, x0, eps, schedule: Schedule) -> float:
    """Largest relative distance from the forward-process curve through ``(x0, eps)``."""
    worst = 0.0
    for t, x in traj.states:
        target = forward_diffuse(x0, eps, schedule, t)
        worst = max(worst, float(np.linalg.norm(x - target) / max(np.linalg.norm(x), 1e-300)))
    return worst


__all__ = [
    "Problem", "toy_problem", "reference_solution", "global_error", "estimate_order",
    "OrderReport", "fit_loglog_slope", "eps_coefficient", "singularity_probe", "probe",
    "probe_grid", "ProbeResult", "norm_band", "NormBand", "TrajStats", "pixel_pair_curve",
    "trajectory_stats", "manifold_deviation", "PSEUDO_METHODS", "SLOPE_WINDOWS",
]
