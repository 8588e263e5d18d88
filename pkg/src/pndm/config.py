"""Line-oriented ``key=value`` run configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import ArgumentError, ConfigError
from .predictor import AnalyticToy, ConstantPredictor, ExactOracle, forward_diffuse
from .schedule import Schedule, make_schedule
from .solvers import DEFAULT_FON_T_MIN, METHODS, SamplerSpec, initial_state

SEED_ENV = "PNDM_SEED"


def _floats(s: str) -> tuple[float, ...]:
    parts = [p.strip() for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(p) for p in s.split(",") if p.strip())


def _words(s: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in s.split(",") if p.strip())


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {list(options)}")
        return s
    return parse


# key -> (parser, default); a default of None means "unset"
KEYS: dict[str, tuple[Callable[[str], Any], Any]] = {
    "schedule.kind": (_choice("linear-beta", "cosine", "toy-linear", "exponential"), "toy-linear"),
    "schedule.params.beta_start": (float, None),
    "schedule.params.beta_end": (float, None),
    "schedule.params.n_train": (int, None),
    "schedule.params.s": (float, None),
    "schedule.params.a": (float, None),
    "schedule.params.b": (float, None),
    "predictor.kind": (_choice("analytic-toy", "exact-oracle", "constant"), "analytic-toy"),
    "predictor.x0": (_floats, None),
    "predictor.eps0": (_floats, None),
    "sampler.method": (_choice(*METHODS), None),
    "sampler.steps": (int, None),
    "sampler.seed": (int, 0),
    "sampler.init": (_choice("normal", "uniform"), "uniform"),
    "sampler.x_init": (_floats, None),
    "sampler.fon_t_min": (float, DEFAULT_FON_T_MIN),
    "grid.t_start": (float, 0.9),
    "grid.t_end": (float, 0.1),
    "output.dir": (str, "out"),
    "converge.methods": (_words, ("DDIM", "S-PNDM", "F-PNDM", "FON-RK4")),
    "converge.steps": (_ints, (20, 40, 80, 160, 320)),
    "converge.ref_factor": (int, 100),
    "probe.t_min": (float, 1e-6),
    "probe.t_max": (float, 1e-2),
    "probe.points": (int, 25),
    "stats.n_samples": (int, 1000),
    "stats.i": (int, 0),
    "stats.j": (int, 1),
    "stats.data": (_choice("uniform", "normal", "oracle"), "uniform"),
}

_SCHEDULE_PARAMS = {
    "linear-beta": ("beta_start", "beta_end", "n_train"),
    "cosine": ("s", "n_train"),
    "toy-linear": ("n_train",),
    "exponential": ("a", "b", "n_train"),
}


@dataclass
class RunConfig:
    """Parsed configuration. ``raw`` keeps the text of every explicitly set key, in file order."""

    values: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        if key in self.values:
            return self.values[key]
        return KEYS[key][1]

    def set(self, key: str, text: str) -> None:
        if key not in KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        parser = KEYS[key][0]
        try:
            self.values[key] = parser(text)
        except ValueError as exc:
            raise ConfigError(f"{key}={text!r}: {exc}") from None
        self.raw[key] = text

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if self[k] is None]
        if missing:
            raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    def echo(self) -> list[str]:
        """Every key with its effective value, for self-describing outputs."""
        lines = []
        for key, (_, default) in KEYS.items():
            if key == "sampler.seed":
                lines.append(f"{key}={self.seed}")
            elif key in self.raw:
                lines.append(f"{key}={self.raw[key]}")
            elif default is not None:
                lines.append(f"{key}={_fmt(default)}")
        return lines

    # -- builders -----------------------------------------------------------

    def schedule(self) -> Schedule:
        kind = self["schedule.kind"]
        allowed = _SCHEDULE_PARAMS[kind]
        params = {}
        for key in KEYS:
            if key.startswith("schedule.params.") and key in self.values:
                name = key.rsplit(".", 1)[1]
                if name not in allowed:
                    raise ConfigError(f"{key} does not apply to a {kind} schedule")
                params[name] = self.values[key]
        return make_schedule(kind, **params)

    def predictor(self, schedule: Schedule):
        kind = self["predictor.kind"]
        if kind == "analytic-toy":
            return AnalyticToy()
        if kind == "exact-oracle":
            self.require("predictor.x0")
            return ExactOracle(np.array(self["predictor.x0"]), schedule)
        self.require("predictor.eps0")
        return ConstantPredictor(np.array(self["predictor.eps0"]))

    @property
    def seed(self) -> int:
        env = os.environ.get(SEED_ENV)
        if env is not None and env.strip():
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
        return self["sampler.seed"]

    def sampler_spec(self) -> SamplerSpec:
        self.require("sampler.method", "sampler.steps")
        schedule = self.schedule()
        predictor = self.predictor(schedule)
        try:
            return SamplerSpec.uniform(
                self["sampler.method"], self["sampler.steps"], self["grid.t_start"], self["grid.t_end"],
                schedule, predictor, seed=self.seed, fon_t_min=self["sampler.fon_t_min"],
            )
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from None

    def x_init(self, schedule: Schedule, predictor, t_start: float) -> np.ndarray:
        """Starting state: explicit, on the oracle's curve, or drawn from the seed."""
        if self["sampler.x_init"] is not None:
            x = np.array(self["sampler.x_init"])
            if x.size != predictor.dim:
                raise ConfigError(f"sampler.x_init has {x.size} entries, predictor needs {predictor.dim}")
            return x
        if isinstance(predictor, ExactOracle):
            eps = np.random.default_rng(self.seed).standard_normal(predictor.dim)
            return forward_diffuse(predictor.x0, eps, schedule, t_start)
        return initial_state(predictor.dim, self.seed, self["sampler.init"])


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in cfg.raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            cfg.set(key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return cfg


def load_config(path: str | os.PathLike | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
