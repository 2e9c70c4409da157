"""Error norms, Lyapunov functionals and decay statistics (midpoint quadrature)."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import ValidationError
from .schemes import cell_centers


def _inv_speeds(Lambda, n_cells):
    if isinstance(Lambda, np.ndarray):
        d = Lambda
    else:
        d = Lambda.diag(cell_centers(n_cells))
    if np.any(~(d > 0)):
        raise ValidationError("Lambda has a nonpositive or singular sample")
    return 1.0 / d


def squared_error_norm(eps_x, eps_chi) -> float:
    """||eps_x||^2_{L2(0,1)} + |eps_chi|^2 with cells of width 1/N."""
    eps_x = np.asarray(eps_x, dtype=float)
    eps_chi = np.asarray(eps_chi, dtype=float)
    return float(np.sum(eps_x * eps_x) / eps_x.shape[0] + eps_chi @ eps_chi)


def error_norms(trace) -> np.ndarray:
    """Per-step squared estimation-error norm recorded in a trace."""
    return np.asarray(trace.err_sq)


def evaluate_V(eps_x, eps_chi, P, Q, mu, Lambda) -> float:
    """int e^{-mu z} eps_x' Lambda^{-1} P eps_x dz + eps_chi' Q eps_chi.

    ``Lambda`` is a SpeedProfile or the speeds at the cell centers.
    """
    eps_x = np.asarray(eps_x, dtype=float)
    eps_chi = np.asarray(eps_chi, dtype=float)
    n = eps_x.shape[0]
    p = np.diag(np.asarray(P, dtype=float))
    weight = np.exp(-mu * cell_centers(n))[:, None] * _inv_speeds(Lambda, n) * p
    return float(np.sum(weight * eps_x**2) / n + eps_chi @ np.asarray(Q) @ eps_chi)


def pi_min_eigenvalues(P, Q, Y, mu, Lambda, n_cells) -> np.ndarray:
    """lambda_min of the cross-term kernel at each cell center."""
    z = cell_centers(n_cells)
    inv = _inv_speeds(Lambda, n_cells)
    P, Q, Y = (np.asarray(a, dtype=float) for a in (P, Q, Y))
    nx, nc = P.shape[0], Q.shape[0]
    kern = np.zeros((n_cells, nx + nc, nx + nc))
    kern[:, :nx, :nx] = (np.exp(-mu * z)[:, None] * inv * np.diag(P))[:, :, None] * np.eye(nx)
    off = inv[:, :, None] * Y.T[None, :, :]
    kern[:, :nx, nx:] = off
    kern[:, nx:, :nx] = np.transpose(off, (0, 2, 1))
    kern[:, nx:, nx:] = Q
    return np.linalg.eigvalsh(kern)[:, 0]


def evaluate_W(eps_x, eps_chi, P, Q, Y, mu, Lambda, check=True) -> float:
    """int [eps_x; eps_chi]' Pi(z) [eps_x; eps_chi] dz with the cross term Lambda^{-1} Y'.

    Raises if Pi(z) is not positive definite at some cell center
    (``check=False`` skips that test when the caller has done it once).
    """
    eps_x = np.asarray(eps_x, dtype=float)
    eps_chi = np.asarray(eps_chi, dtype=float)
    n = eps_x.shape[0]
    if check and pi_min_eigenvalues(P, Q, Y, mu, Lambda, n).min() <= 0:
        raise ValidationError("cross-term kernel Pi(z) is not positive definite "
                              "(functional positivity condition fails)")
    inv = _inv_speeds(Lambda, n)
    p = np.diag(np.asarray(P, dtype=float))
    z = cell_centers(n)
    diag_part = np.sum(np.exp(-mu * z)[:, None] * inv * p * eps_x**2) / n
    # 2 eps_x' Lambda^{-1} Y' eps_chi, summed over cells
    cross = 2.0 * np.sum((inv * eps_x) @ (np.asarray(Y).T @ eps_chi)) / n
    return float(diag_part + cross + eps_chi @ np.asarray(Q) @ eps_chi)


class DecayDiagnostics(NamedTuple):
    violations: int
    ratio: float
    rate: float
    nonpositive: int


def decay_diagnostics(series, times=None, rtol=1e-3, atol=0.0) -> DecayDiagnostics:
    """Monotonicity, terminal/initial ratio and fitted exponential rate.

    A violation is a step where the series grows by more than
    ``rtol * previous + atol``. The rate is the least-squares slope of
    log(series) against time over the final half of the horizon; nonpositive
    values are excluded from the fit and counted.
    """
    s = np.asarray(series, dtype=float)
    if s.size < 10:
        raise ValidationError("decay_diagnostics: series needs at least 10 samples")
    t = np.arange(s.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    growth = s[1:] - s[:-1]
    violations = int(np.count_nonzero(growth > rtol * np.abs(s[:-1]) + atol))
    ratio = float(s[-1] / s[0]) if s[0] != 0 else float("nan")
    tail = t >= t[0] + 0.5 * (t[-1] - t[0])
    pos = tail & (s > 0)
    nonpositive = int(np.count_nonzero(s <= 0))
    if np.count_nonzero(pos) >= 2:
        rate = float(np.polyfit(t[pos], np.log(s[pos]), 1)[0])
    else:
        rate = float("nan")
    return DecayDiagnostics(violations, ratio, rate, nonpositive)
