"""Co-simulation of the plant and the unknown-input observer."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..decoupling import ObserverGains
from ..errors import NumericalFault, ValidationError
from ..lmi.certificate import DETECTABLE, StabilityCertificate
from ..model import PlantSpec
from .functionals import evaluate_V, evaluate_W, pi_min_eigenvalues, squared_error_norm
from .schemes import SCHEMES, SpeedTable, cell_centers, step_pde


@dataclass(frozen=True)
class GridSpec:
    N_z: int = 200
    T_final: float = 20.0
    cfl: float = 0.9
    scheme: str = "upwind1"

    def __post_init__(self):
        if self.N_z < 2:
            raise ValidationError("GridSpec: N_z must be >= 2")
        if not 0 < self.cfl <= 1:
            raise ValidationError("GridSpec: cfl must lie in (0, 1]")
        if self.T_final <= 0:
            raise ValidationError("GridSpec: T_final must be positive")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"GridSpec: unknown scheme {self.scheme!r}")

    @property
    def dz(self):
        return 1.0 / self.N_z

    def time_step(self, Lambda) -> float:
        """cfl * dz / max speed, the max taken over cell centers and faces."""
        return self.cfl * self.dz / SpeedTable.from_profile(Lambda, self.N_z).max_speed

    def steps(self, Lambda):
        """Number of steps and the uniform step that lands exactly on T_final."""
        n = max(1, math.ceil(self.T_final / self.time_step(Lambda) - 1e-9))
        return n, self.T_final / n


@dataclass(frozen=True)
class Signal:
    """Vector signal: constant, a*sin(f t + phase), a*cos(f t + phase) or a sample table."""

    kind: str = "constant"
    amplitude: tuple = (0.0,)
    frequency: float = 0.0
    phase: float = 0.0
    times: tuple | None = None
    values: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "sin", "cos", "table"):
            raise ValidationError(f"Signal: unknown kind {self.kind!r}")
        if self.kind == "table" and (self.times is None or self.values is None):
            raise ValidationError("Signal: a table needs times and values")

    @property
    def size(self):
        if self.kind == "table":
            return np.asarray(self.values).reshape(len(self.times), -1).shape[1]
        return len(self.amplitude)

    def __call__(self, t):
        a = np.asarray(self.amplitude, dtype=float)
        if self.kind == "constant":
            return a
        if self.kind == "sin":
            return a * math.sin(self.frequency * t + self.phase)
        if self.kind == "cos":
            return a * math.cos(self.frequency * t + self.phase)
        ts = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=float).reshape(ts.size, -1)
        return np.array([np.interp(t, ts, vals[:, i]) for i in range(vals.shape[1])])

    def scaled(self, k):
        if self.kind == "table":
            return Signal("table", times=self.times,
                          values=tuple(np.asarray(self.values, float).ravel() * k))
        return Signal(self.kind, tuple(np.asarray(self.amplitude, float) * k), self.frequency,
                      self.phase)

    @classmethod
    def zero(cls, n):
        return cls("constant", (0.0,) * n)


@dataclass(frozen=True)
class SignalSpec:
    u: Signal | None = None
    w: Signal | None = None


@dataclass
class InitialData:
    x0: Callable
    chi0: np.ndarray
    xhat0: Callable
    chihat0: np.ndarray

    @classmethod
    def from_mapping(cls, d):
        return cls(d["x0"], np.asarray(d["chi0"], float), d["xhat0"],
                   np.asarray(d["chihat0"], float))

    def matched(self):
        """Observer started on the plant state."""
        return InitialData(self.x0, self.chi0.copy(), self.x0, self.chi0.copy())


@dataclass
class SimulationTrace:
    t: np.ndarray
    err_sq: np.ndarray
    eps_chi_sq: np.ndarray
    lyapunov: np.ndarray | None
    lyapunov_kind: str | None
    dt: float
    grid: GridSpec
    z: np.ndarray
    snapshot_t: np.ndarray
    x: np.ndarray  # (snapshots, N_z, n_x)
    xhat: np.ndarray
    chi: np.ndarray  # (snapshots, n_chi)
    chihat: np.ndarray
    psi: np.ndarray
    metadata: dict = field(default_factory=dict)


def _eval_profile(func, z, n, name):
    vals = np.asarray(func(z), dtype=float)
    if vals.shape != (z.size, n):
        raise ValidationError(f"initial {name}: expected shape {(z.size, n)}, got {vals.shape}")
    return vals


def simulate(plant: PlantSpec, gains: ObserverGains, signals: SignalSpec, initial: InitialData,
             grid: GridSpec, certificate: StabilityCertificate | None = None,
             snapshot_stride: int | None = None) -> SimulationTrace:
    """Run plant and observer side by side on one space-time grid.

    Both PDE fields use :func:`step_pde` with inflow M chi and M chihat.
    The stacked ODE (chi, psi) takes one classical RK4 step per PDE step,
    with y1 = C M chi evaluated at the stages and the boundary outputs
    y2 = N x(t, 1), yhat2 = N xhat(t, 1) held at their step-start values.
    With matching initial data the error recursion stays at zero for any w.

    When ``certificate`` is given, V (detectable) or W (nondetectable) is
    recorded at each stamp.
    """
    gains.check_shapes(plant)
    n, nx, nc = grid.N_z, plant.n_x, plant.n_chi
    speeds = SpeedTable.from_profile(plant.Lambda, n)
    n_steps, dt = grid.steps(plant.Lambda)
    if speeds.max_speed * dt / grid.dz > 1.0 + 1e-12:
        raise NumericalFault("CFL violated by the chosen time step")
    z = cell_centers(n)

    x = _eval_profile(initial.x0, z, nx, "x0")
    xh = _eval_profile(initial.xhat0, z, nx, "xhat0")
    chi = np.asarray(initial.chi0, dtype=float).reshape(nc)
    chih = np.asarray(initial.chihat0, dtype=float).reshape(nc)
    x_left = _eval_profile(initial.x0, np.array([0.0]), nx, "x0")[0]
    mismatch = np.abs(x_left - plant.M @ chi).max()
    if mismatch > 1e-9:
        warnings.warn(f"initial data incompatible with the boundary condition: "
                      f"|x0(0) - M chi0| = {mismatch:.3g}", stacklevel=2)
    psi = chih - gains.H @ (plant.C @ x_left)

    f = plant.nonlinearity.f
    S, T = plant.S, plant.T

    def source(v):
        return f(v @ T.T) @ S.T

    u_sig = signals.u or Signal.zero(plant.n_u)
    w_sig = signals.w or Signal.zero(plant.n_w)
    if u_sig.size != plant.n_u or w_sig.size != plant.n_w:
        raise ValidationError("signal dimension does not match B / E")

    A, B, E = plant.A, plant.B, plant.E
    HCM = gains.H @ plant.CM
    RB = gains.R @ B
    # stacked linear part for (chi, psi); K y1 = K C M chi
    A_st = np.block([[A, np.zeros((nc, nc))], [gains.K @ plant.CM, gains.F]])

    def rhs(t, state, inj):
        u = u_sig(t)
        drive = np.concatenate([B @ u + E @ w_sig(t), RB @ u + inj])
        return A_st @ state + drive

    lyap_kind = None
    lyap_fn = None
    if certificate is not None:
        P, Q, mu = certificate.P, certificate.Q, certificate.mu
        if certificate.mode == DETECTABLE:
            lyap_kind = "V"
            lyap_fn = lambda ex, ec: evaluate_V(ex, ec, P, Q, mu, speeds.centers)
        else:
            lyap_kind = "W"
            Y = certificate.Y
            if pi_min_eigenvalues(P, Q, Y, mu, speeds.centers, n).min() <= 0:
                raise ValidationError("cross-term kernel Pi(z) is not positive definite")
            lyap_fn = lambda ex, ec: evaluate_W(ex, ec, P, Q, Y, mu, speeds.centers, check=False)

    if snapshot_stride is None:
        snapshot_stride = max(1, n_steps // 200)

    stamps = n_steps + 1
    err = np.empty(stamps)
    ech = np.empty(stamps)
    lyap = np.empty(stamps) if lyap_fn else None
    snaps_t, snaps_x, snaps_xh, snaps_c, snaps_ch, snaps_p = [], [], [], [], [], []

    def record(k, t):
        ex = x - xh
        ec = chi - chih
        err[k] = squared_error_norm(ex, ec)
        ech[k] = float(ec @ ec)
        if lyap_fn:
            lyap[k] = lyap_fn(ex, ec)
        if k % snapshot_stride == 0 or k == stamps - 1:
            snaps_t.append(t)
            snaps_x.append(x.copy())
            snaps_xh.append(xh.copy())
            snaps_c.append(chi.copy())
            snaps_ch.append(chih.copy())
            snaps_p.append(psi.copy())

    state = np.concatenate([chi, psi])
    record(0, 0.0)
    # overflow is reported through the finiteness checks below
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            t = k * dt
            inj = gains.L @ (plant.N @ (x[-1] - xh[-1]))
            x = step_pde(x, speeds, source, dt, grid.dz, plant.M @ chi, grid.scheme)
            xh = step_pde(xh, speeds, source, dt, grid.dz, plant.M @ chih, grid.scheme)
            k1 = rhs(t, state, inj)
            k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1, inj)
            k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2, inj)
            k4 = rhs(t + dt, state + dt * k3, inj)
            state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state)):
                raise NumericalFault(f"non-finite ODE state at t={t + dt:g}")
            chi, psi = state[:nc], state[nc:]
            chih = psi + HCM @ chi
            record(k + 1, (k + 1) * dt)

    return SimulationTrace(
        t=np.arange(stamps) * dt, err_sq=err, eps_chi_sq=ech, lyapunov=lyap,
        lyapunov_kind=lyap_kind, dt=dt, grid=grid, z=z,
        snapshot_t=np.array(snaps_t), x=np.array(snaps_x), xhat=np.array(snaps_xh),
        chi=np.array(snaps_c), chihat=np.array(snaps_ch), psi=np.array(snaps_p),
        metadata={"scheme": grid.scheme, "N_z": n, "cfl": grid.cfl, "dt": dt,
                  "steps": n_steps, "snapshot_stride": snapshot_stride},
    )
