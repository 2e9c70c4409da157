"""Explicit finite-volume steps for x_t + Lambda(z) x_z + source(x) = 0 with positive speeds.

Cells are uniform on [0, 1]; z = 0 is the inflow boundary and z = 1 the
outflow boundary (zero-order extrapolation).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import NumericalFault

SCHEMES = ("upwind1", "lax_friedrichs2")


class SpeedTable(NamedTuple):
    """Lambda sampled at cell centers (N, n) and at cell faces (N + 1, n)."""

    centers: np.ndarray
    faces: np.ndarray

    @classmethod
    def from_profile(cls, Lambda, n_cells):
        dz = 1.0 / n_cells
        zc = (np.arange(n_cells) + 0.5) * dz
        zf = np.arange(n_cells + 1) * dz
        return cls(Lambda.diag(zc), Lambda.diag(zf))

    @property
    def max_speed(self):
        return float(max(self.centers.max(), self.faces.max()))


def cell_centers(n_cells):
    return (np.arange(n_cells) + 0.5) / n_cells


def _speeds(Lambda, n_cells):
    if isinstance(Lambda, SpeedTable):
        return Lambda
    return SpeedTable.from_profile(Lambda, n_cells)


def step_pde(field, Lambda, source, dt, dz, inflow_value, scheme="upwind1"):
    """Advance the cell values ``field`` (shape (N, n)) by one time step.

    ``Lambda`` is a SpeedProfile or a precomputed :class:`SpeedTable`;
    ``source(x)`` returns S f(T x) row-wise (or None for no source).

    upwind1
        x_i+ = x_i - Lambda(z_i) dt/dz (x_i - x_{i-1}) - dt source(x_i), with
        the ghost x_{-1} = inflow_value. Advective form.
    lax_friedrichs2
        Richtmyer two-step. Face predictor with speeds Lambda(z_{i+1/2}),
        corrector with Lambda(z_i) on the face differences, source at both
        stages. ``inflow_value`` is imposed as the half-step value on the
        z = 0 face.
    """
    n_cells = field.shape[0]
    sp = _speeds(Lambda, n_cells)
    courant = sp.max_speed * dt / dz
    if courant > 1.0 + 1e-12:
        raise NumericalFault(f"CFL violated: max speed * dt / dz = {courant:.6g} > 1")
    inflow = np.asarray(inflow_value, dtype=float).reshape(1, -1)
    if scheme == "upwind1":
        c = sp.centers * (dt / dz)
        prev = np.concatenate([inflow, field[:-1]], axis=0)
        new = field - c * (field - prev)
        if source is not None:
            new -= dt * source(field)
    elif scheme == "lax_friedrichs2":
        half = 0.5 * dt
        left, right = field[:-1], field[1:]
        avg = 0.5 * (left + right)
        pred = avg - (half / dz) * sp.faces[1:-1] * (right - left)
        last = field[-1:]
        if source is not None:
            pred -= half * source(avg)
            last = last - half * source(last)
        faces = np.concatenate([inflow, pred, last], axis=0)
        new = field - (dt / dz) * sp.centers * (faces[1:] - faces[:-1])
        if source is not None:
            new -= dt * source(0.5 * (faces[1:] + faces[:-1]))
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if not np.all(np.isfinite(new)):
        raise NumericalFault("non-finite value in PDE field")
    return new
