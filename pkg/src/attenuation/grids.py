"""Evaluation grids and the structured result of a grid check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class GridSpec:
    """A reproducible 1-D grid.

    ``linear`` and ``log`` span [lo, hi] with ``n`` points. ``composite`` puts
    half the points on a linear core ``center +/- inner`` and a quarter on each
    geometric tail out to ``lo``/``hi``, so near-mode and far-tail behaviour are
    both sampled.
    """

    lo: float
    hi: float
    n: int
    spacing: Literal["linear", "log", "composite"] = "linear"
    center: float = 0.0
    inner: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter("grid needs at least one point")
        if self.n > 1 and not self.hi > self.lo:
            raise InvalidParameter(f"grid bounds must increase: lo={self.lo}, hi={self.hi}")
        if self.spacing == "log" and self.lo <= 0:
            raise InvalidParameter("log grid needs lo > 0")

    def points(self) -> np.ndarray:
        if self.n == 1:
            return np.array([self.lo])
        if self.spacing == "linear":
            return np.linspace(self.lo, self.hi, self.n)
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        if self.spacing == "composite":
            return self._composite()
        raise InvalidParameter(f"unknown spacing {self.spacing!r}")

    def _composite(self) -> np.ndarray:
        c, w = self.center, self.inner
        reach = max(self.hi - c, c - self.lo)
        if w <= 0 or w >= reach:
            return np.linspace(self.lo, self.hi, self.n)
        n_core = self.n // 2
        n_tail = (self.n - n_core) // 2
        core = np.linspace(c - w, c + w, n_core)
        tail = np.geomspace(w, reach, n_tail + 1)[1:]
        pts = np.concatenate([c - tail[::-1], core, c + tail])
        return pts[(pts >= self.lo) & (pts <= self.hi)]


def as_points(grid: "GridSpec | np.ndarray | list[float]") -> np.ndarray:
    if isinstance(grid, GridSpec):
        return grid.points()
    return np.asarray(grid, dtype=float)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural grid check.

    ``witness`` locates the worst (or first) violation; ``magnitude`` is the
    size of that violation in the check's own units.
    """

    name: str
    passed: bool
    witness: Any = None
    magnitude: float = 0.0
    strict: bool | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed
