"""Seeded generators for the benchmark layouts.

Three built-in layouts: two mirrored groups swapping sides (reflection),
concentric rings moving to antipodal points (circle), and uniformly random
starts/targets in a square (crowd).  Custom start/target lists are accepted
as well.  Every generated layout keeps starts pairwise separated by
2r + clearance, and likewise targets, since arrived agents persist as
obstacles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geom import TWO_PI, Vec2

# Extra spawn margin on top of the hard 2r separation, as a fraction of r.
CLEARANCE_FACTOR = 0.1

KINDS = ("reflection", "circle", "crowd", "custom")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    seed: int
    r: float
    starts: tuple[Vec2, ...]
    targets: tuple[Vec2, ...]
    params: dict = field(default_factory=dict)

    @property
    def agent_count(self) -> int:
        return len(self.starts)


def _min_pairwise(points: Sequence[Vec2]) -> float:
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = (points[i] - points[j]).norm()
            if d < best:
                best = d
    return best


def _validate_spec(spec: ScenarioSpec, min_sep: float) -> ScenarioSpec:
    if len(spec.starts) != len(spec.targets):
        raise ScenarioError("starts and targets must have equal length")
    if len(spec.starts) >= 2:
        d = _min_pairwise(spec.starts)
        if d < min_sep:
            raise ScenarioError(
                f"infeasible packing: closest starts {d:.6g} apart, "
                f"need {min_sep:.6g}"
            )
        d = _min_pairwise(spec.targets)
        if d < min_sep:
            raise ScenarioError(
                f"infeasible packing: closest targets {d:.6g} apart, "
                f"need {min_sep:.6g}"
            )
    return spec


def gen_reflection(
    n_per_side: int = 50,
    rows: int = 10,
    spacing: float = 30.0,
    gap: float = 200.0,
    r: float = 10.0,
    stagger: float = 0.5,
    seed: int = 0,
) -> ScenarioSpec:
    """Two mirrored grids facing each other across a central gap.

    Each agent's target is its start reflected across the vertical
    centerline.  The right grid is shifted vertically by `stagger` rows so
    that no pair meets exactly head-on.
    """
    if n_per_side < 1:
        raise ScenarioError("n_per_side: must be >= 1")
    if rows < 1:
        raise ScenarioError("rows: must be >= 1")
    clearance = CLEARANCE_FACTOR * r
    if spacing < 2.0 * r + clearance:
        raise ScenarioError(
            f"spacing: must be >= 2r + clearance = {2.0 * r + clearance:.6g}, "
            f"got {spacing}"
        )
    if gap <= 0:
        raise ScenarioError("gap: must be > 0")

    rows_eff = min(rows, n_per_side)
    starts: list[Vec2] = []
    targets: list[Vec2] = []
    for side, offset in ((-1.0, 0.0), (1.0, stagger * spacing)):
        for i in range(n_per_side):
            row = i % rows_eff
            col = i // rows_eff
            x = side * (gap / 2.0 + spacing / 2.0 + col * spacing)
            y = (row - (rows_eff - 1) / 2.0) * spacing + offset
            starts.append(Vec2(x, y))
            targets.append(Vec2(-x, y))

    spec = ScenarioSpec(
        kind="reflection",
        seed=seed,
        r=r,
        starts=tuple(starts),
        targets=tuple(targets),
        params={
            "n_per_side": n_per_side,
            "rows": rows,
            "spacing": spacing,
            "gap": gap,
            "stagger": stagger,
        },
    )
    return _validate_spec(spec, 2.0 * r + clearance)


def gen_circle(
    n_agents: int = 120,
    n_rings: int = 5,
    base_radius: float = 100.0,
    ring_gap: float = 25.0,
    r: float = 10.0,
    seed: int = 0,
    angle_jitter: float = 0.05,
) -> ScenarioSpec:
    """Concentric rings of agents, each targeting its antipodal point.

    Agents are spread evenly around each ring, with a small seeded angular
    jitter (a fraction of the slot angle) that breaks the exact rotational
    symmetry; a perfectly symmetric ring can freeze greedy policies.
    Targets are exactly -start, so the point reflection of the start set is
    the target set.
    """
    if n_agents < 1:
        raise ScenarioError("n_agents: must be >= 1")
    if n_rings < 1 or n_rings > n_agents:
        raise ScenarioError("n_rings: must be in [1, n_agents]")
    clearance = CLEARANCE_FACTOR * r
    min_sep = 2.0 * r + clearance
    if ring_gap < min_sep and n_rings > 1:
        raise ScenarioError(
            f"ring_gap: must be >= 2r + clearance = {min_sep:.6g}, got {ring_gap}"
        )
    if not (0.0 <= angle_jitter < 0.5):
        raise ScenarioError("angle_jitter: must be in [0, 0.5)")

    base = n_agents // n_rings
    extra = n_agents % n_rings
    # Outer rings have more circumference; they absorb the remainder.
    counts = [base + (1 if m >= n_rings - extra else 0) for m in range(n_rings)]
    inner_chord = 2.0 * base_radius * math.sin(math.pi / counts[0])
    if inner_chord < min_sep:
        raise ScenarioError(
            f"infeasible ring packing: innermost chord {inner_chord:.6g} "
            f"< {min_sep:.6g}; increase base_radius or n_rings"
        )

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    starts: list[Vec2] = []
    for m, count in enumerate(counts):
        radius = base_radius + m * ring_gap
        slot = TWO_PI / count
        phase = m * slot / 2.0  # stagger rings against each other
        for t in range(count):
            jitter = angle_jitter * slot * (2.0 * float(rng.random()) - 1.0)
            a = t * slot + phase + jitter
            starts.append(Vec2(radius * math.cos(a), radius * math.sin(a)))
    targets = [-p for p in starts]

    spec = ScenarioSpec(
        kind="circle",
        seed=seed,
        r=r,
        starts=tuple(starts),
        targets=tuple(targets),
        params={
            "n_agents": n_agents,
            "n_rings": n_rings,
            "base_radius": base_radius,
            "ring_gap": ring_gap,
            "angle_jitter": angle_jitter,
        },
    )
    return _validate_spec(spec, min_sep)


def gen_crowd(
    n_agents: int = 100,
    area_side: float = 600.0,
    r: float = 10.0,
    seed: int = 0,
) -> ScenarioSpec:
    """Random starts and targets in a centered square, rejection-sampled so
    that starts (and, separately, targets) keep the spawn separation."""
    if n_agents < 1:
        raise ScenarioError("n_agents: must be >= 1")
    clearance = CLEARANCE_FACTOR * r
    min_sep = 2.0 * r + clearance
    if area_side < min_sep:
        raise ScenarioError("area_side: too small for even one spacing")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    half = area_side / 2.0
    budget = 1000 * n_agents

    def sample_set(label: str) -> list[Vec2]:
        points: list[Vec2] = []
        attempts = 0
        while len(points) < n_agents:
            if attempts >= budget:
                raise ScenarioError(
                    f"crowd sampling exhausted after {budget} attempts: "
                    f"placed {len(points)}/{n_agents} {label}s in "
                    f"{area_side} x {area_side}"
                )
            attempts += 1
            p = Vec2(
                float(rng.uniform(-half, half)), float(rng.uniform(-half, half))
            )
            if all((p - q).norm() >= min_sep for q in points):
                points.append(p)
        return points

    starts = sample_set("start")
    targets = sample_set("target")
    spec = ScenarioSpec(
        kind="crowd",
        seed=seed,
        r=r,
        starts=tuple(starts),
        targets=tuple(targets),
        params={"n_agents": n_agents, "area_side": area_side},
    )
    return _validate_spec(spec, min_sep)


def custom_spec(
    pairs: Sequence[tuple[Vec2, Vec2]], r: float = 10.0, seed: int = 0
) -> ScenarioSpec:
    """Explicit (start, target) pairs; only the hard 2r separation is
    required, clearance is the caller's business."""
    starts = tuple(p for p, _ in pairs)
    targets = tuple(t for _, t in pairs)
    spec = ScenarioSpec(
        kind="custom",
        seed=seed,
        r=r,
        starts=starts,
        targets=targets,
        params={"pairs": [[s.x, s.y, t.x, t.y] for s, t in pairs]},
    )
    return _validate_spec(spec, 2.0 * r)


def generate(kind: str, params: dict, r: float, seed: int) -> ScenarioSpec:
    """Build a spec from its serialized form (kind + generator parameters)."""
    if kind == "reflection":
        return gen_reflection(r=r, seed=seed, **params)
    if kind == "circle":
        return gen_circle(r=r, seed=seed, **params)
    if kind == "crowd":
        return gen_crowd(r=r, seed=seed, **params)
    if kind == "custom":
        pairs = [
            (Vec2(float(a), float(b)), Vec2(float(c), float(d)))
            for a, b, c, d in params["pairs"]
        ]
        return custom_spec(pairs, r=r, seed=seed)
    raise ScenarioError(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}")
