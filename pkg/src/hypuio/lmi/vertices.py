"""Bounding boxes of weighted Lambda^{-1}(z) and their corner matrices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class DiagBounds:
    lower: np.ndarray
    upper: np.ndarray
    z: np.ndarray | None = None  # sampling grid, None when supplied analytically

    def __iter__(self):
        return iter(zip(self.lower, self.upper))


@dataclass
class VertexSet:
    matrices: list
    lower: np.ndarray
    upper: np.ndarray
    grid_points: int | None = None
    weight: str = "1"
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)


def diag_bounds(Lambda, weight=None, grid_points: int = 1001) -> DiagBounds:
    """Per-entry min/max over a uniform grid of weight(z) / Lambda_ii(z).

    ``weight`` defaults to 1. Including both endpoints makes the bounds
    exact for monotone entries; finer grids can only widen them.
    """
    if grid_points < 2:
        raise ValidationError("diag_bounds: need at least 2 grid points")
    z = np.linspace(0.0, 1.0, grid_points)
    d = Lambda.diag(z)
    if np.any(~(d > 0)):
        raise ValidationError("diag_bounds: nonpositive diagonal entry of Lambda on the grid")
    vals = 1.0 / d
    if weight is not None:
        vals = vals * np.asarray(weight(z), dtype=float).reshape(-1, 1)
    return DiagBounds(vals.min(axis=0), vals.max(axis=0), z)


def exp_weight(mu):
    return lambda z: np.exp(mu * np.asarray(z))


def build_vertex_set(lower, upper=None, **meta) -> VertexSet:
    """All corner diagonal matrices of the box prod_i [lower_i, upper_i].

    Accepts either two arrays or a :class:`DiagBounds`. Entries with
    lower == upper contribute one value, so duplicates never appear.
    """
    if isinstance(lower, DiagBounds):
        bounds = lower
        lower, upper = bounds.lower, bounds.upper
        if bounds.z is not None:
            meta.setdefault("grid_points", bounds.z.size)
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    if lower.shape != upper.shape:
        raise ValidationError("build_vertex_set: bound arrays differ in length")
    if np.any(lower <= 0):
        raise ValidationError("build_vertex_set: bounds must be positive")
    if np.any(lower > upper):
        raise ValidationError("build_vertex_set: lower bound exceeds upper bound")
    choices = [sorted({lo, hi}) for lo, hi in zip(lower, upper)]
    mats = [np.diag(c) for c in itertools.product(*choices)]
    return VertexSet(mats, lower, upper, **meta)
