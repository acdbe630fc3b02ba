"""Experiment configuration: JSON schema, validation, round-trip.

One config file fully determines a run: scenario request, simulation
parameters, output directory, and which artifacts to emit.  Every parameter
domain is validated before anything runs, and error messages name the
offending field by its path in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cell import LacParams
from .engine import SimConfig
from .policies import LearnParams, PenaltyParams
from .scenarios import KINDS, ScenarioSpec, generate

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioRequest:
    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EmitFlags:
    trace: bool = True
    results: bool = True  # accepted for symmetry; results are always written
    plot: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioRequest
    sim: SimConfig
    output: str = "out"
    emit: EmitFlags = field(default_factory=EmitFlags)

    def build_scenario(self) -> ScenarioSpec:
        try:
            return generate(
                self.scenario.kind,
                self.scenario.params,
                r=self.sim.lac.r,
                seed=self.scenario.seed,
            )
        except TypeError as e:
            raise ConfigError(f"scenario.params: {e}") from e

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": {
                "kind": self.scenario.kind,
                "seed": self.scenario.seed,
                "params": dict(self.scenario.params),
            },
            "sim": {
                "policy": self.sim.policy,
                "lac": {
                    "r": self.sim.lac.r,
                    "v_max": self.sim.lac.v_max,
                    "delta": self.sim.lac.delta,
                    "tau": self.sim.lac.tau,
                    "lam": self.sim.lac.lam,
                    "n_actions": self.sim.lac.n_actions,
                },
                "penalty": {
                    "zeta": self.sim.penalty.zeta,
                    "angle_mode": self.sim.penalty.angle_mode,
                },
                "learn": {
                    "gamma": self.sim.learn.gamma,
                    "eta": self.sim.learn.eta,
                    "beta": self.sim.learn.beta,
                    "window_t": self.sim.learn.window_t,
                },
                "arrival_tol": self.sim.arrival_tol,
                "max_steps": self.sim.max_steps,
                "seed": self.sim.seed,
            },
            "output": self.output,
            "emit": {
                "trace": self.emit.trace,
                "results": self.emit.results,
                "plot": self.emit.plot,
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


def _get(d: dict, path: str, default):
    cur = d
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return default
        cur = cur[part]
    return cur


def _num(d: dict, path: str, default: float) -> float:
    v = _get(d, path, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    return float(v)


def _int(d: dict, path: str, default: int) -> int:
    v = _get(d, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    return v


def _str(d: dict, path: str, default: str) -> str:
    v = _get(d, path, default)
    if not isinstance(v, str):
        raise ConfigError(f"{path}: expected a string, got {v!r}")
    return v


def _bool(d: dict, path: str, default: bool) -> bool:
    v = _get(d, path, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}: expected a boolean, got {v!r}")
    return v


def from_dict(data: dict) -> ExperimentConfig:
    """Build and validate a config; raises ConfigError naming the field."""
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    version = _int(data, "schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: unsupported {version}, expected {SCHEMA_VERSION}"
        )

    kind = _str(data, "scenario.kind", "")
    if kind not in KINDS:
        raise ConfigError(
            f"scenario.kind: must be one of {', '.join(KINDS)}, got {kind!r}"
        )
    params = _get(data, "scenario.params", {})
    if not isinstance(params, dict):
        raise ConfigError("scenario.params: expected an object")

    defaults = SimConfig()
    lac = LacParams(
        r=_num(data, "sim.lac.r", defaults.lac.r),
        v_max=_num(data, "sim.lac.v_max", defaults.lac.v_max),
        delta=_num(data, "sim.lac.delta", defaults.lac.delta),
        tau=_num(data, "sim.lac.tau", defaults.lac.tau),
        lam=_num(data, "sim.lac.lam", defaults.lac.lam),
        n_actions=_int(data, "sim.lac.n_actions", defaults.lac.n_actions),
    )
    penalty = PenaltyParams(
        zeta=_num(data, "sim.penalty.zeta", defaults.penalty.zeta),
        angle_mode=_str(data, "sim.penalty.angle_mode", defaults.penalty.angle_mode),
    )
    learn = LearnParams(
        gamma=_num(data, "sim.learn.gamma", defaults.learn.gamma),
        eta=_num(data, "sim.learn.eta", defaults.learn.eta),
        beta=_num(data, "sim.learn.beta", defaults.learn.beta),
        window_t=_int(data, "sim.learn.window_t", defaults.learn.window_t),
    )
    sim = SimConfig(
        lac=lac,
        penalty=penalty,
        learn=learn,
        policy=_str(data, "sim.policy", defaults.policy),
        arrival_tol=_num(data, "sim.arrival_tol", defaults.arrival_tol),
        max_steps=_int(data, "sim.max_steps", defaults.max_steps),
        seed=_int(data, "sim.seed", defaults.seed),
    )
    _validate_sim(sim)

    cfg = ExperimentConfig(
        scenario=ScenarioRequest(
            kind=kind, seed=_int(data, "scenario.seed", 0), params=params
        ),
        sim=sim,
        output=_str(data, "output", "out"),
        emit=EmitFlags(
            trace=_bool(data, "emit.trace", True),
            results=_bool(data, "emit.results", True),
            plot=_bool(data, "emit.plot", False),
        ),
    )
    return cfg


def _validate_sim(sim: SimConfig) -> None:
    sections = (
        (sim.lac.validate, "sim.lac"),
        (sim.penalty.validate, "sim.penalty"),
        (lambda: sim.learn.validate(sim.lac.n_actions), "sim.learn"),
    )
    for check, prefix in sections:
        try:
            check()
        except ValueError as e:
            raise ConfigError(f"{prefix}.{e}") from e
    try:
        sim.validate()
    except ValueError as e:
        raise ConfigError(f"sim.{e}") from e


def load(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from e
    return from_dict(data)
