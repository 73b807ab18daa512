from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from qpurify.errors import ConfigError
from qpurify.quantum_core import PureQubit

DEFAULT_GRID_SIZE = 1024

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class SphereGrid:
    points: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def spacing(self) -> float:
        """Typical angular distance between neighbouring points (radians)."""
        return math.sqrt(4.0 * math.pi / self.size)

    def qubit(self, index: int) -> PureQubit:
        return PureQubit.from_bloch(self.points[index])


def fibonacci_points(size: int) -> np.ndarray:
    """
    Fibonacci spiral on the upper hemisphere plus the antipode of every point.

    The antipodal pairing makes the grid mean vanish up to rounding.
    """
    if size < 2 or size % 2:
        raise ConfigError(f"grid size must be an even number >= 2, got {size}")

    half = size // 2
    i = np.arange(half)
    z = 1.0 - (2.0 * i + 1.0) / size
    r = np.sqrt(1.0 - z * z)
    phi = i * GOLDEN_ANGLE
    upper = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return np.concatenate([upper, -upper])


@lru_cache(maxsize=8)
def sphere_grid(size: int = DEFAULT_GRID_SIZE) -> SphereGrid:
    points = fibonacci_points(size)
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    points.setflags(write=False)
    return SphereGrid(points=points)
