"""Synchronous simulation loop: snapshot, decide, commit, check.

Every agent decides against the same frozen snapshot of the previous state,
so decision order (and thread count) cannot change the outcome.  Commits are
applied single-threaded in ascending agent id.  Arrived agents stay in the
world as stationary obstacles.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .cell import (
    OVERLAP_SLACK,
    AgentSnapshot,
    LacParams,
    build_cell,
    neighbor_cutoff,
)
from .geom import Vec2
from .policies import (
    LearnerState,
    LearnParams,
    PenaltyParams,
    bvc_select,
    learn_step,
    select_action,
)
from .scenarios import ScenarioSpec

POLICIES = ("lac_nav", "lac_learn", "bvc")


class StepSafetyError(RuntimeError):
    """Post-step separation check failed; this is an implementation bug."""

    def __init__(self, step: int, id_a: int, id_b: int, dist: float, limit: float):
        super().__init__(
            f"step {step}: agents {id_a} and {id_b} at distance {dist:.9g} "
            f"violate the separation limit {limit:.9g}"
        )
        self.step = step
        self.ids = (id_a, id_b)


@dataclass(frozen=True)
class SimConfig:
    lac: LacParams = field(default_factory=LacParams)
    penalty: PenaltyParams = field(default_factory=PenaltyParams)
    learn: LearnParams = field(default_factory=LearnParams)
    policy: str = "lac_nav"
    arrival_tol: float = 1e-6
    max_steps: int = 60000
    seed: int = 0

    def validate(self) -> None:
        self.lac.validate()
        self.penalty.validate()
        self.learn.validate(self.lac.n_actions)
        if self.policy not in POLICIES:
            raise ValueError(
                f"policy: must be one of {', '.join(POLICIES)}, got {self.policy!r}"
            )
        if not (self.arrival_tol > 0):
            raise ValueError(f"arrival_tol: must be > 0, got {self.arrival_tol}")
        if self.max_steps <= 0:
            raise ValueError(f"max_steps: must be > 0, got {self.max_steps}")
        if self.seed < 0:
            raise ValueError(f"seed: must be >= 0, got {self.seed}")


@dataclass
class AgentState:
    id: int
    position: Vec2
    velocity: Vec2
    target: Vec2
    start: Vec2
    arrived: bool = False
    arrival_step: int | None = None
    trajectory_length: float = 0.0
    learner: LearnerState | None = None


class AgentSummary(NamedTuple):
    id: int
    start: Vec2
    target: Vec2
    arrival_step: int | None
    trajectory_length: float


# One row per agent: (id, x, y, vx, vy, action index).  Action -1 marks
# "not applicable": step 0, arrived agents, and the bvc policy.
Row = tuple[int, float, float, float, float, int]


@dataclass(frozen=True)
class StepRecord:
    step: int
    rows: tuple[Row, ...]


@dataclass
class SimTrace:
    delta: float
    r: float
    v_max: float
    arrival_tol: float
    seed: int
    policy: str
    scenario_kind: str
    agents: list[AgentSummary]
    records: list[StepRecord]
    termination: str  # "completed" | "step_cap"
    n_steps: int


def make_world(scenario: ScenarioSpec, config: SimConfig) -> list[AgentState]:
    """Instantiate agent states (and learners under lac_learn)."""
    world = []
    for i, (start, target) in enumerate(zip(scenario.starts, scenario.targets)):
        learner = None
        if config.policy == "lac_learn":
            rng = np.random.default_rng([config.seed, i])
            learner = LearnerState.fresh(config.lac.n_actions, config.learn.window_t, rng)
        world.append(
            AgentState(
                id=i,
                position=start,
                velocity=Vec2(0.0, 0.0),
                target=target,
                start=start,
                learner=learner,
            )
        )
    return world


def neighbor_query(
    snapshot: Sequence[AgentSnapshot], agent_id: int, cutoff: float
) -> list[AgentSnapshot]:
    """Agents other than the querier within `cutoff` (closed ball), by id.

    Arrived agents are included; they constrain their neighbors like any
    stationary disk.
    """
    pts = np.array([(s.position.x, s.position.y) for s in snapshot])
    tree = cKDTree(pts)
    me = next(s for s in snapshot if s.id == agent_id)
    idx = tree.query_ball_point([me.position.x, me.position.y], cutoff)
    return [snapshot[j] for j in sorted(idx) if snapshot[j].id != agent_id]


def _decide(
    agent: AgentState,
    neighbors: list[AgentSnapshot],
    config: SimConfig,
) -> tuple[Vec2, int]:
    """Pure per-agent decision against the frozen snapshot.

    Under lac_learn the agent's own learner is advanced; no other agent's
    state is touched, so decisions may run concurrently.
    """
    if config.policy == "bvc":
        me = AgentSnapshot(agent.id, agent.position, agent.velocity, config.lac.r)
        return bvc_select(me, agent.target, neighbors, config.lac), -1
    me = AgentSnapshot(agent.id, agent.position, agent.velocity, config.lac.r)
    cell = build_cell(me, agent.target, neighbors, config.lac)
    if config.policy == "lac_nav":
        k = select_action(cell, config.penalty)
        return cell.actions[k], k
    vel, _ = learn_step(agent.learner, cell, config.learn, config.penalty)
    return vel, agent.learner.last_action


def _check_separation(positions: np.ndarray, limit: float, step: int) -> None:
    if len(positions) < 2:
        return
    d = pdist(positions)
    imin = int(np.argmin(d))
    if d[imin] >= limit:
        return
    # Recover the pair behind the condensed index.
    n = len(positions)
    i = 0
    offset = imin
    row_len = n - 1
    while offset >= row_len:
        offset -= row_len
        i += 1
        row_len -= 1
    j = i + 1 + offset
    raise StepSafetyError(step, i, j, float(d[imin]), limit)


def step(
    world: list[AgentState],
    config: SimConfig,
    step_index: int,
    pool: ThreadPoolExecutor | None = None,
) -> StepRecord:
    """Advance the world by one update interval; returns the step's record."""
    order = sorted(range(len(world)), key=lambda i: world[i].id)
    snapshot = [
        AgentSnapshot(world[i].id, world[i].position, world[i].velocity, config.lac.r)
        for i in order
    ]
    positions = np.array([(s.position.x, s.position.y) for s in snapshot])
    cutoff = neighbor_cutoff(config.lac)
    tree = cKDTree(positions)
    near = tree.query_ball_point(positions, cutoff)

    def decide(slot: int) -> tuple[Vec2, int]:
        agent = world[order[slot]]
        if agent.arrived:
            return Vec2(0.0, 0.0), -1
        neighbors = [snapshot[j] for j in sorted(near[slot]) if j != slot]
        return _decide(agent, neighbors, config)

    if pool is None:
        decisions = [decide(s) for s in range(len(order))]
    else:
        decisions = list(pool.map(decide, range(len(order))))

    delta = config.lac.delta
    rows = []
    for slot, (vel, action) in enumerate(decisions):
        agent = world[order[slot]]
        if not agent.arrived:
            agent.velocity = vel
            agent.position = Vec2(
                agent.position.x + delta * vel.x, agent.position.y + delta * vel.y
            )
            agent.trajectory_length += delta * math.hypot(vel.x, vel.y)
            dx = agent.target.x - agent.position.x
            dy = agent.target.y - agent.position.y
            if math.hypot(dx, dy) <= config.arrival_tol:
                agent.arrived = True
                agent.arrival_step = step_index
                agent.velocity = Vec2(0.0, 0.0)
        rows.append(
            (
                agent.id,
                agent.position.x,
                agent.position.y,
                agent.velocity.x,
                agent.velocity.y,
                action,
            )
        )
        positions[slot, 0] = agent.position.x
        positions[slot, 1] = agent.position.y

    _check_separation(positions, 2.0 * config.lac.r - OVERLAP_SLACK, step_index)
    return StepRecord(step_index, tuple(rows))


def _initial_record(world: list[AgentState]) -> StepRecord:
    rows = tuple(
        (a.id, a.position.x, a.position.y, 0.0, 0.0, -1)
        for a in sorted(world, key=lambda a: a.id)
    )
    return StepRecord(0, rows)


def run(
    config: SimConfig,
    scenario: ScenarioSpec,
    workers: int = 1,
) -> SimTrace:
    """Run until every agent arrives or the step cap is hit."""
    config.validate()
    if abs(scenario.r - config.lac.r) > 1e-12:
        raise ValueError(
            f"scenario radius {scenario.r} does not match sim radius {config.lac.r}"
        )
    world = make_world(scenario, config)

    # Agents spawned on their target count as arrived at step 0.
    for a in world:
        if (a.target - a.position).norm() <= config.arrival_tol:
            a.arrived = True
            a.arrival_step = 0

    positions = np.array([(a.position.x, a.position.y) for a in world])
    _check_separation(positions, 2.0 * config.lac.r - OVERLAP_SLACK, 0)

    records = [_initial_record(world)]
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    termination = "completed" if all(a.arrived for a in world) else "step_cap"
    n_steps = 0
    try:
        if termination != "completed":
            for s in range(1, config.max_steps + 1):
                records.append(step(world, config, s, pool))
                n_steps = s
                if all(a.arrived for a in world):
                    termination = "completed"
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    agents = [
        AgentSummary(a.id, a.start, a.target, a.arrival_step, a.trajectory_length)
        for a in sorted(world, key=lambda a: a.id)
    ]
    return SimTrace(
        delta=config.lac.delta,
        r=config.lac.r,
        v_max=config.lac.v_max,
        arrival_tol=config.arrival_tol,
        seed=config.seed,
        policy=config.policy,
        scenario_kind=scenario.kind,
        agents=agents,
        records=records,
        termination=termination,
        n_steps=n_steps,
    )
