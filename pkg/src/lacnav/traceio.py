"""Trace file format and the offline safety verifier.

A trace is line-oriented text with three sections:

    lacnav-trace <schema> <delta> <r> <n_agents> <seed> <policy> <kind> <arrival_tol>
    A <id> <start_x> <start_y> <target_x> <target_y>     (one per agent)
    <step> <id> <x> <y> <vx> <vy> <action>               (one per agent per step)

Step 0 rows carry the initial positions with zero velocity and action -1.
For step s >= 1, (x, y) is the position after the step and (vx, vy) the
velocity performed during it.  All reals are rendered with exactly 9
significant digits so identical runs produce identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .engine import SimTrace
from .geom import Vec2

FORMAT_NAME = "lacnav-trace"
SCHEMA_VERSION = 1

# Parsed values differ from the exact run values by the 9-significant-digit
# rounding; these slacks cover it for coordinates up to ~1e4 world units.
COORD_SLACK = 5e-5
DISPLACEMENT_SLACK = 2e-5


class TraceParseError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    step: int
    agent_ids: tuple[int, ...]
    kind: str
    detail: str


@dataclass
class ParsedTrace:
    delta: float
    r: float
    n_agents: int
    seed: int
    policy: str
    scenario_kind: str
    arrival_tol: float
    starts: dict[int, Vec2] = field(default_factory=dict)
    targets: dict[int, Vec2] = field(default_factory=dict)
    # steps[i] is the i-th recorded step: (step, {id: (x, y, vx, vy, action)})
    steps: list[tuple[int, dict[int, tuple[float, float, float, float, int]]]] = field(
        default_factory=list
    )


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def write_trace(trace: SimTrace, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="\n") as f:
        f.write(
            f"{FORMAT_NAME} {SCHEMA_VERSION} {fmt(trace.delta)} {fmt(trace.r)} "
            f"{len(trace.agents)} {trace.seed} {trace.policy} "
            f"{trace.scenario_kind} {fmt(trace.arrival_tol)}\n"
        )
        for a in trace.agents:
            f.write(
                f"A {a.id} {fmt(a.start.x)} {fmt(a.start.y)} "
                f"{fmt(a.target.x)} {fmt(a.target.y)}\n"
            )
        for rec in trace.records:
            for aid, x, y, vx, vy, action in rec.rows:
                f.write(
                    f"{rec.step} {aid} {fmt(x)} {fmt(y)} {fmt(vx)} {fmt(vy)} "
                    f"{action}\n"
                )


def read_trace(path: str | Path) -> ParsedTrace:
    path = Path(path)
    try:
        lines = path.read_text(encoding="ascii").splitlines()
    except (OSError, UnicodeError) as e:
        raise TraceParseError(f"cannot read {path}: {e}") from e
    if not lines:
        raise TraceParseError("empty file")

    head = lines[0].split()
    if len(head) != 9 or head[0] != FORMAT_NAME:
        raise TraceParseError(f"bad header line: {lines[0]!r}")
    if int(head[1]) != SCHEMA_VERSION:
        raise TraceParseError(f"unsupported schema version {head[1]}")
    try:
        parsed = ParsedTrace(
            delta=float(head[2]),
            r=float(head[3]),
            n_agents=int(head[4]),
            seed=int(head[5]),
            policy=head[6],
            scenario_kind=head[7],
            arrival_tol=float(head[8]),
        )
    except ValueError as e:
        raise TraceParseError(f"bad header value: {e}") from e

    body_at = 1
    for line in lines[1:]:
        if not line.startswith("A "):
            break
        parts = line.split()
        if len(parts) != 6:
            raise TraceParseError(f"bad agent line: {line!r}")
        try:
            aid = int(parts[1])
            parsed.starts[aid] = Vec2(float(parts[2]), float(parts[3]))
            parsed.targets[aid] = Vec2(float(parts[4]), float(parts[5]))
        except ValueError as e:
            raise TraceParseError(f"bad agent line {line!r}: {e}") from e
        body_at += 1
    if len(parsed.starts) != parsed.n_agents:
        raise TraceParseError(
            f"header promises {parsed.n_agents} agents, found {len(parsed.starts)}"
        )

    current_step: int | None = None
    current_rows: dict[int, tuple[float, float, float, float, int]] = {}
    for line in lines[body_at:]:
        parts = line.split()
        if len(parts) != 7:
            raise TraceParseError(f"bad step row: {line!r}")
        try:
            s = int(parts[0])
            aid = int(parts[1])
            row = (
                float(parts[2]),
                float(parts[3]),
                float(parts[4]),
                float(parts[5]),
                int(parts[6]),
            )
        except ValueError as e:
            raise TraceParseError(f"bad step row {line!r}: {e}") from e
        if aid not in parsed.starts:
            raise TraceParseError(f"row for unknown agent {aid}")
        if s != current_step:
            if current_step is not None:
                _close_step(parsed, current_step, current_rows)
            current_step = s
            current_rows = {}
        if aid in current_rows:
            raise TraceParseError(f"duplicate row for agent {aid} at step {s}")
        current_rows[aid] = row
    if current_step is not None:
        _close_step(parsed, current_step, current_rows)

    for i, (s, _) in enumerate(parsed.steps):
        if s != i:
            raise TraceParseError(f"non-contiguous steps: expected {i}, got {s}")
    return parsed


def _close_step(parsed: ParsedTrace, step: int, rows: dict) -> None:
    if len(rows) != parsed.n_agents:
        raise TraceParseError(
            f"step {step} truncated: {len(rows)}/{parsed.n_agents} agent rows"
        )
    parsed.steps.append((step, rows))


def verify_trace(parsed: ParsedTrace) -> Violation | None:
    """Re-check the safety and kinematics invariants; None means clean.

    Thresholds include the documented storage rounding slack on top of the
    engine's own 1e-6 separation slack.
    """
    min_sep = 2.0 * parsed.r - 1e-6 - COORD_SLACK
    arrived_at: dict[int, tuple[float, float]] = {}
    prev: dict[int, tuple[float, float]] = {}

    for step, rows in parsed.steps:
        ids = sorted(rows)
        for i_pos, i in enumerate(ids):
            xi, yi = rows[i][0], rows[i][1]
            for j in ids[i_pos + 1 :]:
                xj, yj = rows[j][0], rows[j][1]
                d = math.hypot(xj - xi, yj - yi)
                if d < min_sep:
                    return Violation(
                        step,
                        (i, j),
                        "overlap",
                        f"distance {d:.9g} < {min_sep:.9g}",
                    )
        for i in ids:
            x, y, vx, vy, _ = rows[i]
            if step > 0:
                px, py = prev[i]
                ex = x - (px + parsed.delta * vx)
                ey = y - (py + parsed.delta * vy)
                if abs(ex) > DISPLACEMENT_SLACK or abs(ey) > DISPLACEMENT_SLACK:
                    return Violation(
                        step,
                        (i,),
                        "displacement",
                        f"position is off delta*velocity by ({ex:.3g}, {ey:.3g})",
                    )
            if i in arrived_at:
                ax, ay = arrived_at[i]
                if x != ax or y != ay or vx != 0.0 or vy != 0.0:
                    return Violation(
                        step, (i,), "absorbing", "agent moved after arrival"
                    )
            else:
                t = parsed.targets[i]
                if math.hypot(x - t.x, y - t.y) <= parsed.arrival_tol + COORD_SLACK:
                    arrived_at[i] = (x, y)
            prev[i] = (x, y)
    return None
