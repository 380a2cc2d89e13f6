"""Finite point sets in the open polydisk used to sample kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    radius: float
    mode: str = "explicit"
    seed: int | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if not 0 < self.radius < 1:
            raise DomainError(f"radius must lie in (0, 1), got {self.radius}")
        if pts.size and np.max(np.abs(pts)) > self.radius * (1 + 1e-12):
            raise DomainError("point outside the polydisk of the stated radius")
        object.__setattr__(self, "points", pts)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def random(cls, d: int, count: int = 12, radius: float = 0.6, seed: int = 0,
               structured: bool = True) -> "PointSet":
        """``count`` seeded points, each coordinate uniform in the disk of ``radius``.

        With ``structured`` the origin and ``(0.5, ..., 0.5)`` (when inside
        the radius) are appended.
        """
        rng = np.random.default_rng(seed)
        mod = radius * np.sqrt(rng.uniform(size=(count, d)))
        arg = 2 * np.pi * rng.uniform(size=(count, d))
        pts = mod * np.exp(1j * arg)
        if structured:
            extra = [np.zeros(d)]
            if radius >= 0.5:
                extra.append(np.full(d, 0.5))
            pts = np.vstack([pts, np.array(extra, dtype=complex)])
        return cls(pts, radius, "random", seed)

    @classmethod
    def explicit(cls, points, radius: float | None = None) -> "PointSet":
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        if radius is None:
            radius = max(float(np.max(np.abs(pts))), 1e-3)
        return cls(pts, radius, "explicit")

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "count": len(self), "radius": self.radius, "seed": self.seed}
