"""Block matrices of the certificate conditions.

The design-form builders (``assemble_Q_matrix``, ``assemble_F_block`` in
design form, ``assemble_Xi``, ``assemble_big_lmi_nondetectable``,
``assemble_Pi_positivity``) accept either numpy arrays or cvxpy
expressions for the decision variables, so the same code produces the
numeric matrices and the LMI constraints.

The z-dependent analysis forms (``matrix_D``, ``matrix_Pi``, ``matrix_Phi``)
are numeric only and are written out separately from their vertex
counterparts; verification relies on them.
"""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..model import PlantSpec, build_sector_matrix, he

try:
    import cvxpy as cp
except ImportError:  # pragma: no cover
    cp = None


def _is_expr(x):
    return cp is not None and isinstance(x, cp.Expression)


def bmat(rows):
    """np.block, or cp.bmat when any block is a cvxpy expression."""
    if any(_is_expr(b) for row in rows for b in row):
        return cp.bmat([[b if _is_expr(b) else cp.Constant(np.asarray(b, dtype=float)) for b in row]
                        for row in rows])
    return np.block(rows)


def _zeros(r, c):
    return np.zeros((r, c))


def _sector_terms(plant: PlantSpec):
    U1, U2 = plant.nonlinearity.bound.U1, plant.nonlinearity.bound.U2
    T = plant.T
    return T.T @ he(U1 @ U2) @ T, T.T @ (U1 + U2)


def _check_diag(D, n, name="D"):
    D = np.asarray(D, dtype=float)
    if D.shape != (n, n):
        raise ValidationError(f"{name}: expected shape {(n, n)}, got {D.shape}")
    return D


# ---------------------------------------------------------------------------
# detectable case


def assemble_Q_matrix(D, P, kappa, mu, plant: PlantSpec):
    """Vertex matrix [[-mu P - k T'He(U1U2)T, -D P S + k T'(U1+U2)], [., -k I]]."""
    D = _check_diag(D, plant.n_x)
    tt_he, tt_sum = _sector_terms(plant)
    top_left = -mu * P - kappa * tt_he
    off = -D @ P @ plant.S + kappa * tt_sum
    return bmat([[top_left, off], [off.T, -kappa * np.eye(plant.n_t)]])


def matrix_D(z, P, kappa, mu, plant: PlantSpec) -> np.ndarray:
    """Pointwise condition matrix at position z (Lambda^{-1}(z) in the coupling)."""
    P = np.asarray(P, dtype=float)
    lam_inv = np.diag(plant.Lambda.inverse_diag(np.array([z]))[0])
    msec = build_sector_matrix(plant.nonlinearity.bound)
    n_t = plant.n_t
    # kappa * [T 0; 0 I]' Msec [T 0; 0 I] carries the sector terms
    lift = np.block([[plant.T, _zeros(n_t, n_t)], [_zeros(n_t, plant.n_x), np.eye(n_t)]])
    base = np.block([[-mu * P, -lam_inv @ P @ plant.S],
                     [-(lam_inv @ P @ plant.S).T, _zeros(n_t, n_t)]])
    return base + kappa * lift.T @ msec @ lift


def assemble_F_block(P, Q, mu, plant: PlantSpec, *, F=None, L=None, RA=None, X=None, J=None):
    """Boundary/ODE block of the detectable-case certificate.

    Analysis form (pass ``F`` and ``L``)::

        [[-e^{-mu} P, -N' L' Q], [., He(F' Q) + M' P M]]

    Design form (pass ``RA``, ``X`` = Q K1 and ``J`` = Q L)::

        [[-e^{-mu} P, -N' J'], [., He(Q RA - X C M) + M' P M]]
    """
    if F is not None:
        if RA is not None or X is not None or J is not None:
            raise ValidationError("assemble_F_block: give either (F, L) or (RA, X, J)")
        L = np.zeros((plant.n_chi, plant.n_y2)) if L is None else L
        lower = he(F.T @ Q)
        off = -plant.N.T @ L.T @ Q
    else:
        if RA is None or X is None:
            raise ValidationError("assemble_F_block: design form needs RA and X")
        J = np.zeros((plant.n_chi, plant.n_y2)) if J is None else J
        lower = he(Q @ RA - X @ plant.CM)
        off = -plant.N.T @ J.T
    lower = lower + plant.M.T @ P @ plant.M
    return bmat([[-np.exp(-mu) * P, off], [off.T, lower]])


# ---------------------------------------------------------------------------
# non-detectable case


def assemble_Xi(omega, D, P, Q, Y, J, kappa, mu, plant: PlantSpec, F):
    """4x4 block matrix over (eps_x(z), eps_x(1), eps_chi, rho), with J = Q L."""
    nx, nc, nt = plant.n_x, plant.n_chi, plant.n_t
    D = _check_diag(D, nx)
    tt_he, tt_sum = _sector_terms(plant)
    S, M, N = plant.S, plant.M, plant.N
    b11 = -mu * omega * P - kappa * tt_he
    b13 = D @ Y.T @ F
    b14 = kappa * tt_sum - omega * D @ P @ S
    b23 = -Y.T - N.T @ J.T
    b33 = he(Q @ F + Y @ M) + M.T @ P @ M
    b34 = -Y @ D @ S
    return bmat([
        [b11, _zeros(nx, nx), b13, b14],
        [_zeros(nx, nx), -omega * P, b23, _zeros(nx, nt)],
        [b13.T, b23.T, b33, b34],
        [b14.T, _zeros(nt, nx), b34.T, -kappa * np.eye(nt)],
    ])


def theta_column(D, Y, plant: PlantSpec):
    """Column block [-Y D, 0, 0, 0]^T over the Xi partition."""
    nx, nc, nt = plant.n_x, plant.n_chi, plant.n_t
    return bmat([[-(Y @ D).T], [_zeros(nx, nc)], [_zeros(nc, nc)], [_zeros(nt, nc)]])


def z_selector(plant: PlantSpec) -> np.ndarray:
    """Z^T as a column: N^T in the eps_x(1) slot, zeros elsewhere."""
    nx, nc, nt, ny2 = plant.n_x, plant.n_chi, plant.n_t, plant.n_y2
    return np.vstack([_zeros(nx, ny2), plant.N.T, _zeros(nc, ny2), _zeros(nt, ny2)])


def assemble_big_lmi_nondetectable(omega, D, P, Q, Y, J, kappa, theta, mu, plant: PlantSpec, F):
    """[[Xi, Theta, theta Z'J'], [., -theta Q, 0], [., ., -theta Q]].

    The two -theta Q blocks absorb the bilinear term Lambda^{-1} Y' L N
    through a Young-type bound, which keeps everything affine in (Y, J).
    """
    nc = plant.n_chi
    xi = assemble_Xi(omega, D, P, Q, Y, J, kappa, mu, plant, F)
    th = theta_column(D, Y, plant)
    zj = theta * (z_selector(plant) @ J.T)
    zero = _zeros(nc, nc)
    return bmat([[xi, th, zj], [th.T, -theta * Q, zero], [zj.T, zero, -theta * Q]])


def assemble_Pi_positivity(Dhat, P, Q, Y):
    """[[Dhat P, Dhat Y'], [Y Dhat, Q]]."""
    Dhat = np.asarray(Dhat, dtype=float)
    return bmat([[Dhat @ P, Dhat @ Y.T], [Y @ Dhat, Q]])


def matrix_Pi(z, P, Q, Y, mu, plant: PlantSpec) -> np.ndarray:
    """Kernel of the cross-term functional at z."""
    lam_inv = np.diag(plant.Lambda.inverse_diag(np.array([z]))[0])
    off = lam_inv @ np.asarray(Y).T
    return np.block([[np.exp(-mu * z) * lam_inv @ P, off], [off.T, Q]])


def matrix_Phi(z, P, Q, Y, L, kappa, mu, plant: PlantSpec, F) -> np.ndarray:
    """Derivative kernel at z over (eps_x(z), eps_x(1), eps_chi, rho); uses L directly."""
    nx, nt = plant.n_x, plant.n_t
    lam_inv = np.diag(plant.Lambda.inverse_diag(np.array([z]))[0])
    w = np.exp(-mu * z)
    tt_he, tt_sum = _sector_terms(plant)
    S, M, N = plant.S, plant.M, plant.N
    u11 = -mu * w * P - kappa * tt_he
    u12 = -lam_inv @ Y.T @ L @ N
    u13 = lam_inv @ Y.T @ F
    u22 = -w * P
    u23 = -Y.T - N.T @ L.T @ Q
    u33 = he(Q @ F + Y @ M) + M.T @ P @ M
    upsilon = np.block([[u11, u12, u13], [u12.T, u22, u23], [u13.T, u23.T, u33]])
    gamma = np.vstack([kappa * tt_sum - w * lam_inv @ P @ S, _zeros(nx, nt), -Y @ lam_inv @ S])
    return np.block([[upsilon, gamma], [gamma.T, -kappa * np.eye(nt)]])
