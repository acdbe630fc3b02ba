"""Aggregate run measures: completion time, detour ratios, 90% arrival time.

Detour ratios compare each agent's actual path (or travel time) to the
straight line from start to target at maximum speed.  Agents that never
arrived are excluded from the means and counted separately; agents whose
start coincides with their target have no defined ratio and are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import SimTrace


@dataclass(frozen=True)
class AgentResult:
    id: int
    arrival_time_s: float | None
    path_length: float
    straight_distance: float


@dataclass(frozen=True)
class RunResult:
    completion_time_s: float | None
    addr: float | None
    adtr: float | None
    ctime_p90_s: float | None
    unfinished: int
    per_agent: list[AgentResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "completion_time_s": self.completion_time_s,
            "addr": self.addr,
            "adtr": self.adtr,
            "ctime_p90_s": self.ctime_p90_s,
            "unfinished": self.unfinished,
            "per_agent": [
                {
                    "id": a.id,
                    "arrival_time_s": a.arrival_time_s,
                    "path_length": a.path_length,
                    "straight_distance": a.straight_distance,
                }
                for a in self.per_agent
            ],
        }


def completion_time(trace: SimTrace) -> float | None:
    """Arrival time of the last agent, or None if anyone never arrived."""
    worst = 0.0
    for a in trace.agents:
        if a.arrival_step is None:
            return None
        worst = max(worst, a.arrival_step * trace.delta)
    return worst


def completion_time_p90(trace: SimTrace) -> float | None:
    """Arrival time of the ceil(0.9 n)-th arriving agent, or None."""
    k = math.ceil(0.9 * len(trace.agents))
    times = sorted(
        a.arrival_step * trace.delta
        for a in trace.agents
        if a.arrival_step is not None
    )
    if len(times) < k:
        return None
    return times[k - 1]


def _eligible(trace: SimTrace):
    for a in trace.agents:
        straight = (a.target - a.start).norm()
        if a.arrival_step is not None and straight > 0.0:
            yield a, straight


def avg_detour_distance_ratio(trace: SimTrace) -> float | None:
    """Mean of path length over straight distance, arrived agents only."""
    ratios = [a.trajectory_length / d for a, d in _eligible(trace)]
    if not ratios:
        return None
    return sum(ratios) / len(ratios)


def avg_detour_time_ratio(trace: SimTrace) -> float | None:
    """Mean of travel time over straight-line time at max speed."""
    ratios = [
        (a.arrival_step * trace.delta) / (d / trace.v_max)
        for a, d in _eligible(trace)
    ]
    if not ratios:
        return None
    return sum(ratios) / len(ratios)


def run_result(trace: SimTrace) -> RunResult:
    per_agent = [
        AgentResult(
            id=a.id,
            arrival_time_s=(
                None if a.arrival_step is None else a.arrival_step * trace.delta
            ),
            path_length=a.trajectory_length,
            straight_distance=(a.target - a.start).norm(),
        )
        for a in trace.agents
    ]
    return RunResult(
        completion_time_s=completion_time(trace),
        addr=avg_detour_distance_ratio(trace),
        adtr=avg_detour_time_ratio(trace),
        ctime_p90_s=completion_time_p90(trace),
        unfinished=sum(1 for a in trace.agents if a.arrival_step is None),
        per_agent=per_agent,
    )
