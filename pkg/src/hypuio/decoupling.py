"""Algebraic observer gains and detectability of the boundary ODE.

The observer is

    xhat_t + Lambda xhat_z + S f(T xhat) = 0,  xhat(t, 0) = M chihat
    psi' = F psi + R B u + K y1 + L (y2 - yhat2),  chihat = psi + H y1

and the gains below cancel u, chi and w from the estimation error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AssumptionError, ValidationError
from .model import PlantSpec, as_matrix


def numerical_rank(mat) -> int:
    """SVD rank with threshold max(m, n) * eps * sigma_max (real or complex)."""
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    return int(np.linalg.matrix_rank(mat))


@dataclass
class ObserverGains:
    H: np.ndarray
    R: np.ndarray
    F: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K: np.ndarray
    L: np.ndarray

    def as_dict(self):
        return {k: getattr(self, k) for k in ("H", "R", "F", "K1", "K2", "K", "L")}

    @classmethod
    def zero(cls, plant: PlantSpec):
        """Open-loop copy of the plant: H = 0, R = I, F = A, K = 0, L = 0."""
        nc = plant.n_chi
        z1 = np.zeros((nc, plant.n_y1))
        return cls(H=z1.copy(), R=np.eye(nc), F=plant.A.copy(), K1=z1.copy(),
                   K2=z1.copy(), K=z1.copy(), L=np.zeros((nc, plant.n_y2)))

    def check_shapes(self, plant: PlantSpec):
        nc, ny1, ny2 = plant.n_chi, plant.n_y1, plant.n_y2
        expect = {"H": (nc, ny1), "R": (nc, nc), "F": (nc, nc), "K1": (nc, ny1),
                  "K2": (nc, ny1), "K": (nc, ny1), "L": (nc, ny2)}
        for key, shape in expect.items():
            if getattr(self, key).shape != shape:
                raise ValidationError(f"ObserverGains.{key}: shape {getattr(self, key).shape}, "
                                      f"expected {shape}")


def check_input_decoupling_rank(plant: PlantSpec) -> bool:
    """True iff C M E has full column rank n_w."""
    return numerical_rank(plant.CM @ plant.E) == plant.n_w


def compute_H(plant: PlantSpec) -> np.ndarray:
    """Left-inverse choice H = E ((CME)^T CME)^{-1} (CME)^T, so (I - HCM) E = 0."""
    if not check_input_decoupling_rank(plant):
        raise AssumptionError(
            "input decoupling condition violated: C M E is not full column rank "
            f"(rank {numerical_rank(plant.CM @ plant.E)} < n_w = {plant.n_w})")
    if plant.n_w == 0:
        return np.zeros((plant.n_chi, plant.n_y1))
    cme = plant.CM @ plant.E
    return plant.E @ np.linalg.solve(cme.T @ cme, cme.T)


def compute_gains(plant: PlantSpec, K1=None, L=None, H=None) -> ObserverGains:
    """Complete the gain tuple from the free parameters (K1, L).

    R = I - HCM, F = A - HCMA - K1 CM, K2 = F H, K = K1 + K2. ``H`` defaults
    to :func:`compute_H`; passing it explicitly (e.g. zeros) bypasses the
    rank assumption.
    """
    nc = plant.n_chi
    H = compute_H(plant) if H is None else as_matrix(H, "H", (nc, plant.n_y1))
    K1 = np.zeros((nc, plant.n_y1)) if K1 is None else as_matrix(K1, "K1", (nc, plant.n_y1))
    L = np.zeros((nc, plant.n_y2)) if L is None else as_matrix(L, "L", (nc, plant.n_y2))
    CM = plant.CM
    R = np.eye(nc) - H @ CM
    F = plant.A - H @ CM @ plant.A - K1 @ CM
    K2 = F @ H
    return ObserverGains(H=H, R=R, F=F, K1=K1, K2=K2, K=K1 + K2, L=L)


def residual_matrices(plant: PlantSpec, gains: ObserverGains):
    """(G_u, G_w, G_chi) of the coupled error dynamics."""
    I = np.eye(plant.n_chi)
    HCM = gains.H @ plant.CM
    G_u = (I - gains.R - HCM) @ plant.B
    G_w = (I - HCM) @ plant.E
    G_chi = plant.A - HCM @ plant.A - gains.K @ plant.CM
    return G_u, G_w, G_chi


class Detectability(NamedTuple):
    detectable: bool
    offending: list


def pbh_detectability(F0, Cobs, tol_stability: float = 1e-9) -> Detectability:
    """PBH rank test at every eigenvalue with Re(lambda) >= -tol_stability.

    Marginal (imaginary-axis) eigenvalues are tested too. Returns the
    eigenvalues at which rank [F0 - lambda I; Cobs] < n.
    """
    F0 = np.asarray(F0, dtype=float)
    Cobs = np.atleast_2d(np.asarray(Cobs, dtype=float))
    n = F0.shape[0]
    if F0.shape != (n, n) or Cobs.shape[1] != n:
        raise ValidationError("pbh_detectability: F0 must be square with Cobs sharing its columns")
    offending = []
    for lam in np.linalg.eigvals(F0):
        if lam.real < -tol_stability:
            continue
        stacked = np.vstack([F0 - lam * np.eye(n), Cobs])
        if numerical_rank(stacked) < n:
            offending.append(complex(lam))
    offending.sort(key=lambda v: (v.real, v.imag))
    return Detectability(not offending, offending)


def decoupled_pair(plant: PlantSpec, H=None):
    """(R A, C M) with R built from the decoupling H."""
    H = compute_H(plant) if H is None else H
    R = np.eye(plant.n_chi) - H @ plant.CM
    return R @ plant.A, plant.CM
