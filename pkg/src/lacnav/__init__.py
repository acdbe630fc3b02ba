"""Deterministic multi-agent navigation simulator built on local action
cells, with a penalized-length policy, a windowed-bandit learner, and a
buffered-Voronoi baseline."""

from .cell import (
    ActionCell,
    AgentSnapshot,
    LacParams,
    SafeHalfPlane,
    build_cell,
    neighbor_cutoff,
)
from .engine import AgentState, SimConfig, SimTrace, run, step
from .geom import Vec2
from .metrics import RunResult, run_result
from .policies import (
    LearnerState,
    LearnParams,
    PenaltyParams,
    bvc_select,
    learn_step,
    select_vel,
)
from .scenarios import ScenarioSpec, custom_spec, gen_circle, gen_crowd, gen_reflection

__all__ = [
    "ActionCell",
    "AgentSnapshot",
    "AgentState",
    "LacParams",
    "LearnParams",
    "LearnerState",
    "PenaltyParams",
    "RunResult",
    "SafeHalfPlane",
    "ScenarioSpec",
    "SimConfig",
    "SimTrace",
    "Vec2",
    "build_cell",
    "bvc_select",
    "custom_spec",
    "gen_circle",
    "gen_crowd",
    "gen_reflection",
    "learn_step",
    "neighbor_cutoff",
    "run",
    "run_result",
    "select_vel",
    "step",
]

__version__ = "0.1.0"
