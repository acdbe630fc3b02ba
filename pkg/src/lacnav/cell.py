"""Action-cell construction from a neighborhood snapshot.

For one agent, each neighbor contributes a half-plane constraint in velocity
space.  The constraint bound is tightened by a risk factor that looks ahead
over a horizon `tau` at the neighbor's current velocity.  The agent's action
cell is a fan of `n_actions` candidate velocities, evenly spaced around the
goal direction, each clipped to the longest prefix that satisfies every
constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .geom import TWO_PI, Vec2, normalize_angle, rho

# Numerical slack on the hard minimum-separation invariant (world units).
# Pairs may drift this far below 2*r through float roundoff without being
# treated as a broken simulation.
OVERLAP_SLACK = 1e-6


class OverlapError(RuntimeError):
    """Two agent disks overlap; the simulation invariant is already broken."""

    def __init__(self, id_a: int, id_b: int, dist: float, min_dist: float):
        super().__init__(
            f"agents {id_a} and {id_b} overlap: center distance {dist:.9g} "
            f"< required {min_dist:.9g}"
        )
        self.ids = (id_a, id_b)
        self.dist = dist


@dataclass(frozen=True)
class LacParams:
    """Geometry and timing parameters of the cell construction."""

    r: float = 10.0          # agent radius, uniform across the swarm
    v_max: float = 50.0      # speed cap, units/s
    delta: float = 0.01      # update interval, seconds
    tau: float = 0.05        # risk look-ahead horizon, seconds
    lam: float = 0.5         # relax factor in [0, 1]; 0 disables look-ahead
    n_actions: int = 8

    def validate(self) -> None:
        if not (self.r > 0):
            raise ValueError(f"r: must be > 0, got {self.r}")
        if not (self.v_max > 0):
            raise ValueError(f"v_max: must be > 0, got {self.v_max}")
        if not (self.delta > 0):
            raise ValueError(f"delta: must be > 0, got {self.delta}")
        if not (self.tau > 0):
            raise ValueError(f"tau: must be > 0, got {self.tau}")
        # The neighbor-cutoff argument needs constraints from agents at
        # distance >= cutoff to be non-binding, which holds iff tau >= delta.
        if self.tau < self.delta:
            raise ValueError(
                f"tau: must be >= delta ({self.delta}), got {self.tau}"
            )
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lam: must be in [0, 1], got {self.lam}")
        if self.n_actions < 4:
            raise ValueError(f"n_actions: must be >= 4, got {self.n_actions}")


class AgentSnapshot(NamedTuple):
    """Frozen view of one agent at the start of a step."""

    id: int
    position: Vec2
    velocity: Vec2
    radius: float


@dataclass(frozen=True)
class SafeHalfPlane:
    """Velocity constraint v . normal <= bound contributed by one neighbor."""

    normal: Vec2   # unit vector toward the neighbor
    bound: float   # >= 0
    source: int    # neighbor agent id


@dataclass(frozen=True)
class ActionCell:
    """Fan of candidate velocities around the goal direction.

    Slot k points at angle goal_dir + k * 2*pi/n; its velocity is that ray
    clipped against every safe half-plane, so the whole cell lies inside the
    agent's safe velocity domain.
    """

    actions: tuple[Vec2, ...]
    goal_dir: float    # radians, [0, 2*pi)
    max_speed: float   # min(v_max, goal_distance / delta)

    @property
    def n(self) -> int:
        return len(self.actions)

    def angle_of(self, k: int) -> float:
        return normalize_angle(self.goal_dir + k * (TWO_PI / len(self.actions)))

    def lengths(self) -> list[float]:
        return [v.norm() for v in self.actions]


def bvc_bound(
    p_i: Vec2,
    p_j: Vec2,
    params: LacParams,
    ids: tuple[int, int] = (-1, -1),
) -> tuple[Vec2, float]:
    """Unit normal toward the neighbor and the raw velocity bound.

    The bound is the speed toward the neighbor that would consume exactly
    half the free gap in one update: (dist - 2r) / (2 * delta).
    """
    dx = p_j.x - p_i.x
    dy = p_j.y - p_i.y
    dist = math.hypot(dx, dy)
    min_dist = 2.0 * params.r
    if dist < min_dist - OVERLAP_SLACK:
        raise OverlapError(ids[0], ids[1], dist, min_dist)
    u = Vec2(dx / dist, dy / dist)
    c = max(0.0, (dist - min_dist) / (2.0 * params.delta))
    return u, c


def risk_scale(
    c_ij: float,
    u_ij: Vec2,
    v_j: Vec2,
    p_dist: float,
    params: LacParams,
) -> float:
    """Risk factor in [0, 1]; 1 means no approach risk within the horizon.

    The closing-speed budget is the raw bound minus the neighbor's velocity
    component along the line of centers.  If the neighbor retreats fast
    enough the budget is zero and there is no risk.
    """
    v_ij = c_ij - v_j.dot(u_ij)
    if v_ij <= 0.0:
        return 1.0
    gap = max(0.0, p_dist - 2.0 * params.r)
    return min(1.0, gap / (v_ij * params.tau))


def safe_half_plane(
    me: AgentSnapshot, other: AgentSnapshot, params: LacParams
) -> SafeHalfPlane:
    """Constraint from one neighbor, tightened by its risk factor.

    Scaling the half-plane {v . u <= c} toward the origin by factor
    s = 1 - lam + theta * lam yields {v . u <= s * c}.
    """
    u, c = bvc_bound(me.position, other.position, params, ids=(me.id, other.id))
    p_dist = 2.0 * params.delta * c + 2.0 * params.r
    theta = risk_scale(c, u, other.velocity, p_dist, params)
    bound = (1.0 - params.lam + theta * params.lam) * c
    return SafeHalfPlane(u, bound, other.id)


def clip_scale(v: Vec2, planes: Sequence[SafeHalfPlane]) -> float:
    """Largest s in [0, 1] with s*v inside every half-plane.

    A ray with v . normal <= bound is never shortened by that plane, so a
    non-binding constraint leaves the scale bit-exact.
    """
    scale = 1.0
    for hp in planes:
        dot = v.x * hp.normal.x + v.y * hp.normal.y
        if dot > hp.bound:
            s = hp.bound / dot
            if s < scale:
                scale = s
    return scale


def build_cell(
    me: AgentSnapshot,
    target: Vec2,
    neighbors: Sequence[AgentSnapshot],
    params: LacParams,
) -> ActionCell:
    """Build the agent's action cell against the given neighbors.

    The caller must not invoke this for an agent standing on its target, and
    neighbors must not include the agent itself.
    """
    gx = target.x - me.position.x
    gy = target.y - me.position.y
    gdist = math.hypot(gx, gy)
    if gdist == 0.0:
        raise ValueError(f"agent {me.id} is at its target; no goal direction")
    cap = min(params.v_max, gdist / params.delta)
    goal_dir = rho(Vec2(gx, gy))

    planes = [safe_half_plane(me, nb, params) for nb in neighbors]

    n = params.n_actions
    ux0 = gx / gdist
    uy0 = gy / gdist
    actions = []
    for k in range(n):
        phi = k * (TWO_PI / n)
        c = math.cos(phi)
        s = math.sin(phi)
        vx = cap * (c * ux0 - s * uy0)
        vy = cap * (s * ux0 + c * uy0)
        scale = clip_scale(Vec2(vx, vy), planes)
        actions.append(Vec2(vx * scale, vy * scale))
    return ActionCell(tuple(actions), goal_dir, cap)


def neighbor_cutoff(params: LacParams) -> float:
    """Interaction radius beyond which constraints cannot bind."""
    return 2.0 * params.v_max * params.tau + 2.0 * params.r
