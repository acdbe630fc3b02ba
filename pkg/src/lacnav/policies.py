"""Velocity selection: penalized-length rule, windowed-bandit learner, and
the buffered-Voronoi baseline.

All three policies commit velocities that lie inside the agent's safe
velocity domain, so any mix of them preserves the no-collision invariant.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cell import ActionCell, AgentSnapshot, LacParams, bvc_bound
from .geom import TWO_PI, Vec2


class InfeasibleCellError(RuntimeError):
    """No feasible point found in a buffered Voronoi cell.

    Cannot happen for non-overlapping disks (the agent's own position is
    always feasible); raised only to surface a numerical breakdown.
    """


@dataclass(frozen=True)
class PenaltyParams:
    """Exponential penalty on the angle between an action and the goal."""

    zeta: float = 0.95
    # "symmetric" measures the unsigned angle in [0, pi]; "literal" uses the
    # raw counterclockwise offset in [0, 2*pi), which penalizes one turning
    # direction more than the other.
    angle_mode: str = "symmetric"

    def validate(self) -> None:
        if not (0.0 < self.zeta <= 1.0):
            raise ValueError(f"zeta: must be in (0, 1], got {self.zeta}")
        if self.angle_mode not in ("symmetric", "literal"):
            raise ValueError(
                f"angle_mode: must be 'symmetric' or 'literal', "
                f"got {self.angle_mode!r}"
            )


@dataclass(frozen=True)
class LearnParams:
    gamma: float = 0.75    # exploit mix: (1-gamma)*reward + gamma*weight
    eta: float = 0.9       # win threshold on the goal action's weight
    beta: float = 0.1      # exploration-rate increment on a loss
    window_t: int = 8      # sliding-window length for wUCB

    def validate(self, n_actions: int) -> None:
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"gamma: must be in [0, 1], got {self.gamma}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta: must be in [0, 1], got {self.eta}")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta: must be in (0, 1], got {self.beta}")
        if self.window_t < n_actions:
            raise ValueError(
                f"window_t: must be >= n_actions ({n_actions}), "
                f"got {self.window_t}"
            )


@dataclass
class LearnerState:
    """Per-agent bandit memory; owned and mutated by exactly one agent."""

    n_actions: int
    rng: np.random.Generator
    last_action: int | None = None
    epsilon: float = 0.0
    window: deque = field(default_factory=deque)  # (action, reward) pairs
    reward_table: list[float] = field(default_factory=list)

    @classmethod
    def fresh(
        cls, n_actions: int, window_t: int, rng: np.random.Generator
    ) -> "LearnerState":
        return cls(
            n_actions=n_actions,
            rng=rng,
            window=deque(maxlen=window_t),
            reward_table=[0.0] * n_actions,
        )


def _argmax_first(values: Sequence[float]) -> int:
    """Index of the maximum; ties broken by the smallest index."""
    best = 0
    best_v = values[0]
    for i in range(1, len(values)):
        if values[i] > best_v:
            best = i
            best_v = values[i]
    return best


def action_weights(cell: ActionCell, params: PenaltyParams) -> list[float]:
    """Penalized length of every action: zeta^(4*angle/pi) * |v|.

    The angle is taken from the slot index, so zero-length actions keep the
    direction they stand for.
    """
    n = cell.n
    slot = TWO_PI / n
    literal = params.angle_mode == "literal"
    weights = []
    for k, v in enumerate(cell.actions):
        off = k * slot
        a = off if literal else min(off, TWO_PI - off)
        weights.append(params.zeta ** (4.0 * a / math.pi) * math.hypot(v.x, v.y))
    return weights


def select_action(cell: ActionCell, params: PenaltyParams) -> int:
    return _argmax_first(action_weights(cell, params))


def select_vel(cell: ActionCell, params: PenaltyParams) -> Vec2:
    """Action of the largest penalized length; index ties pick the smaller."""
    return cell.actions[select_action(cell, params)]


def reward_of_cell(weights: Sequence[float]) -> float:
    """Reward of the move that produced this cell: total penalized length."""
    return sum(weights)


def wucb_scores(state: LearnerState) -> list[float]:
    """Windowed upper confidence bound per action.

    Counts and means come from the sliding window only.  Actions absent from
    the window score +inf so that exploration visits them first.
    """
    counts = [0] * state.n_actions
    sums = [0.0] * state.n_actions
    for a, rw in state.window:
        counts[a] += 1
        sums[a] += rw
    nu = len(state.window)
    scores = []
    for k in range(state.n_actions):
        if counts[k] == 0:
            scores.append(math.inf)
        else:
            scores.append(
                sums[k] / counts[k] + math.sqrt(2.0 * math.log(nu) / counts[k])
            )
    return scores


def select_act(
    state: LearnerState,
    weights: Sequence[float],
    cell: ActionCell,
    params: LearnParams,
) -> int:
    """Win-stay / lose-shift selection with adaptive epsilon-greedy fallback.

    Winning means the goal action was just performed and remains nearly
    unconstrained; then it is kept and the exploration rate resets.  A loss
    on the goal action bumps the exploration rate.  Otherwise exploit the
    reward/weight mix, or explore the wUCB-maximizing action with
    probability epsilon.
    """
    if state.last_action == 0:
        if weights[0] >= params.eta * cell.max_speed:
            state.epsilon = 0.0
            return 0
        state.epsilon = min(1.0, state.epsilon + params.beta)
    s = float(state.rng.random())
    if s < 1.0 - state.epsilon:
        g = params.gamma
        mixed = [
            (1.0 - g) * state.reward_table[k] + g * weights[k]
            for k in range(state.n_actions)
        ]
        return _argmax_first(mixed)
    return _argmax_first(wucb_scores(state))


def learn_step(
    state: LearnerState,
    cell: ActionCell,
    params: LearnParams,
    penalty: PenaltyParams,
) -> tuple[Vec2, LearnerState]:
    """One learning cycle: credit the last action, then pick the next one.

    On the very first step there is no last action to credit.  The window
    evicts its oldest entry beyond capacity.
    """
    weights = action_weights(cell, penalty)
    if state.last_action is not None:
        rw = reward_of_cell(weights)
        state.reward_table[state.last_action] = rw
        state.window.append((state.last_action, rw))
    a = select_act(state, weights, cell, params)
    state.last_action = a
    return cell.actions[a], state


# Feasibility slack for the position-space cell, world units.  Keeps the
# closest-point search from rejecting boundary optima over float noise while
# staying far below the engine's separation slack.
_BVC_EPS = 1e-9


def bvc_goal_point(
    me: AgentSnapshot,
    target: Vec2,
    neighbors: Sequence[AgentSnapshot],
    params: LacParams,
) -> Vec2:
    """Point of the agent's buffered Voronoi cell closest to the target.

    The cell is an intersection of half-planes in position space, offset r
    inward from each neighbor bisector.  The minimizer of a convex distance
    over such a cell is the target itself, a projection of the target onto
    one constraint line, or an intersection of two lines; enumerate all of
    them and keep the feasible one nearest the target.  The agent's own
    position is always feasible and serves as the fallback.
    """
    px, py = me.position
    if not neighbors:
        return target

    normals: list[tuple[float, float]] = []
    bounds: list[float] = []
    for nb in neighbors:
        u, _ = bvc_bound(me.position, nb.position, params, ids=(me.id, nb.id))
        mid_u = 0.5 * ((px + nb.position.x) * u.x + (py + nb.position.y) * u.y)
        normals.append((u.x, u.y))
        bounds.append(mid_u - params.r)

    def feasible(x: float, y: float) -> bool:
        for (ux, uy), m in zip(normals, bounds):
            if x * ux + y * uy > m + _BVC_EPS:
                return False
        return True

    tx, ty = target
    candidates = [(tx, ty), (px, py)]
    for (ux, uy), m in zip(normals, bounds):
        d = m - (tx * ux + ty * uy)
        candidates.append((tx + d * ux, ty + d * uy))
    k = len(normals)
    for i in range(k):
        uxi, uyi = normals[i]
        for j in range(i + 1, k):
            uxj, uyj = normals[j]
            det = uxi * uyj - uyi * uxj
            if abs(det) < 1e-12:
                continue
            candidates.append(
                (
                    (bounds[i] * uyj - bounds[j] * uyi) / det,
                    (uxi * bounds[j] - uxj * bounds[i]) / det,
                )
            )
    best = None
    best_d2 = math.inf
    for x, y in candidates:
        if not feasible(x, y):
            continue
        d2 = (x - tx) * (x - tx) + (y - ty) * (y - ty)
        if d2 < best_d2:
            best = (x, y)
            best_d2 = d2
    if best is None:
        raise InfeasibleCellError(
            f"agent {me.id}: no feasible point in its buffered Voronoi cell"
        )
    return Vec2(best[0], best[1])


def bvc_select(
    me: AgentSnapshot,
    target: Vec2,
    neighbors: Sequence[AgentSnapshot],
    params: LacParams,
) -> Vec2:
    """Baseline: head for the closest cell point at up to v_max.

    The cell is convex and contains the agent's position, so the capped
    straight move toward the goal point stays inside it.
    """
    g = bvc_goal_point(me, target, neighbors, params)
    vx = (g.x - me.position.x) / params.delta
    vy = (g.y - me.position.y) / params.delta
    speed = math.hypot(vx, vy)
    if speed > params.v_max:
        f = params.v_max / speed
        vx *= f
        vy *= f
    return Vec2(vx, vy)
