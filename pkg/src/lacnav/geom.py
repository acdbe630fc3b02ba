"""2D vector and angle primitives shared by every other module.

One angle convention is used everywhere: the direction of a vector is the
counterclockwise angle from the positive x-axis, reduced to [0, 2*pi).
Rotating a vector clockwise by its direction angle aligns it with +x.
"""

from __future__ import annotations

import math
from typing import NamedTuple

TWO_PI = 2.0 * math.pi

# Tolerance for angle comparisons in tests and assertions.
ANGLE_EPS = 1e-9


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":  # type: ignore[override]
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scaled(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def normalized(self) -> "Vec2":
        n = math.hypot(self.x, self.y)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Vec2(self.x / n, self.y / n)

    def rotated(self, angle: float) -> "Vec2":
        """Counterclockwise rotation by `angle` radians."""
        c = math.cos(angle)
        s = math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


def normalize_angle(a: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    r = a % TWO_PI
    # Float rounding can push the modulo result up to exactly 2*pi.
    return 0.0 if r >= TWO_PI else r


def rho(v: Vec2) -> float:
    """Direction angle of a nonzero vector, in [0, 2*pi)."""
    if v.x == 0.0 and v.y == 0.0:
        raise ValueError("direction of the zero vector is undefined")
    return normalize_angle(math.atan2(v.y, v.x))


def angular_distance(a: float, b: float) -> float:
    """Unsigned angle between two directions, in [0, pi].

    Written on abs(a - b) so the result is bit-identical under argument
    swap.
    """
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)
