"""Plant description, incremental sector bounds and nonlinearity helpers.

The plant is a system of semilinear transport equations on z in [0, 1]

    x_t + Lambda(z) x_z + S f(T x) = 0,     x(t, 0) = M chi(t)
    chi' = A chi + B u + E w
    y1 = C x(t, 0),  y2 = N x(t, 1)

with f satisfying an incremental sector bound parameterized by (U1, U2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ValidationError


def he(X):
    """Hermitian part without the 1/2: X + X^T."""
    return X + X.T


def as_matrix(value, name="matrix", shape=None) -> np.ndarray:
    """Coerce nested sequences / scalars to a 2-D float array."""
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a row-major nested 2-D array, got ndim={arr.ndim}")
    if shape is not None:
        rows, cols = shape
        if (rows is not None and arr.shape[0] != rows) or (
            cols is not None and arr.shape[1] != cols
        ):
            raise ValidationError(
                f"{name}: expected shape {shape}, got {arr.shape}"
            )
    return arr


# ---------------------------------------------------------------------------
# characteristic speeds


class SpeedProfile:
    """Diagonal speed matrix Lambda(z) on [0, 1], stored by its diagonal.

    ``func`` maps an array of positions of shape (m,) to an array of shape
    (m, n) holding the diagonal entries. Use the constructors
    :meth:`constant`, :meth:`from_samples` or :meth:`from_function`.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], n: int, name: str = "custom",
                 source: dict | None = None):
        self._func = func
        self.n = int(n)
        self.name = name
        # how this profile was specified; used when echoing configs back out
        self.source = source

    @classmethod
    def constant(cls, values, name="constant"):
        vals = np.asarray(values, dtype=float).ravel()

        def func(z):
            z = np.atleast_1d(np.asarray(z, dtype=float))
            return np.broadcast_to(vals, (z.size, vals.size)).copy()

        return cls(func, vals.size, name, source={"constant": vals.tolist()})

    @classmethod
    def from_function(cls, func, n, name="custom"):
        def wrapped(z):
            z = np.atleast_1d(np.asarray(z, dtype=float))
            out = np.asarray(func(z), dtype=float)
            if out.ndim == 1:
                out = out.reshape(z.size, -1)
            return np.broadcast_to(out, (z.size, n)).copy()

        return cls(wrapped, n, name)

    @classmethod
    def from_samples(cls, z, diag, name="samples"):
        """Piecewise-linear interpolation of a uniform table with >= 101 points."""
        z = np.asarray(z, dtype=float).ravel()
        diag = np.asarray(diag, dtype=float)
        if diag.ndim == 1:
            diag = diag.reshape(-1, 1)
        if diag.shape[0] != z.size:
            raise ValidationError("Lambda samples: z and diag tables differ in length")
        if z.size < 101:
            raise ValidationError(f"Lambda samples: need >= 101 points, got {z.size}")
        if abs(z[0]) > 1e-12 or abs(z[-1] - 1.0) > 1e-12:
            raise ValidationError("Lambda samples: table must span [0, 1]")
        if not np.allclose(np.diff(z), 1.0 / (z.size - 1), rtol=1e-8, atol=1e-12):
            raise ValidationError("Lambda samples: grid must be uniform")

        def func(q):
            q = np.atleast_1d(np.asarray(q, dtype=float))
            return np.stack([np.interp(q, z, diag[:, i]) for i in range(diag.shape[1])], axis=-1)

        return cls(func, diag.shape[1], name,
                   source={"samples": {"z": z.tolist(), "diag": diag.tolist()}})

    def diag(self, z) -> np.ndarray:
        """Diagonal entries at the positions ``z``; shape (len(z), n)."""
        return self._func(z)

    def inverse_diag(self, z) -> np.ndarray:
        d = self.diag(z)
        if np.any(d <= 0):
            raise ValidationError("Lambda(z) has a nonpositive diagonal entry")
        return 1.0 / d

    def __call__(self, z: float) -> np.ndarray:
        return np.diag(self.diag(np.array([z]))[0])

    def check(self, grid_points=1001):
        z = np.linspace(0.0, 1.0, grid_points)
        d = self.diag(z)
        if d.shape != (grid_points, self.n):
            raise ValidationError(f"Lambda: evaluator returned shape {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            bad = z[np.any(~(d > 0), axis=1)][0]
            raise ValidationError(f"Lambda: diagonal must be positive on [0,1] (fails at z={bad:g})")

    def max_speed(self, z) -> float:
        return float(np.max(self.diag(z)))


# ---------------------------------------------------------------------------
# sector bound and nonlinearity


@dataclass(frozen=True)
class SectorBound:
    U1: np.ndarray
    U2: np.ndarray

    def __post_init__(self):
        U1 = as_matrix(self.U1, "SectorBound.U1")
        U2 = as_matrix(self.U2, "SectorBound.U2")
        if U1.shape[0] != U1.shape[1] or U2.shape != U1.shape:
            raise ValidationError(
                f"SectorBound: U1 {U1.shape} and U2 {U2.shape} must be square of equal size"
            )
        object.__setattr__(self, "U1", U1)
        object.__setattr__(self, "U2", U2)

    @property
    def n(self) -> int:
        return self.U1.shape[0]

    def check(self, tol=1e-12):
        """Raise unless U1 >= 0 and U2 - U1 > 0 (symmetric parts)."""
        low = np.linalg.eigvalsh(0.5 * he(self.U1)).min()
        gap = np.linalg.eigvalsh(0.5 * he(self.U2 - self.U1)).min()
        if low < -tol:
            raise ValidationError(f"SectorBound: U1 must be positive semidefinite (min eig {low:g})")
        if gap <= tol:
            raise ValidationError(f"SectorBound: U2 - U1 must be positive definite (min eig {gap:g})")


@dataclass(frozen=True)
class NonlinearitySpec:
    """Vectorized map f: (..., n_t) -> (..., n_t) with its sector bound."""

    f: Callable[[np.ndarray], np.ndarray]
    bound: SectorBound
    name: str = "custom"

    @classmethod
    def tanh(cls, U1=0.0, U2=0.5):
        return cls(np.tanh, SectorBound(U1, U2), "tanh")

    def __call__(self, y):
        return self.f(y)


def build_sector_matrix(bound: SectorBound) -> np.ndarray:
    """Symmetric matrix of the incremental sector quadratic form.

    Returns ``[[-He(U1 U2), U1 + U2], [(U1 + U2)^T, -I]]``.
    """
    U1, U2 = bound.U1, bound.U2
    if U1.shape != U2.shape:
        raise ValidationError("build_sector_matrix: U1 and U2 differ in shape")
    n = U1.shape[0]
    cross = U1 + U2
    return np.block([[-he(U1 @ U2), cross], [cross.T, -np.eye(n)]])


class SectorCheck(NamedTuple):
    ok: bool
    worst: float


def _sample_points(n_t, samples, lo, hi):
    grid = np.linspace(lo, hi, samples)
    if n_t == 1:
        return [grid[:, None]]
    # per scalar channel: one line per coordinate axis plus the all-ones diagonal
    lines = []
    for i in range(n_t):
        pts = np.zeros((samples, n_t))
        pts[:, i] = grid
        lines.append(pts)
    lines.append(np.repeat(grid[:, None], n_t, axis=1))
    return lines


def validate_sector_bound(spec: NonlinearitySpec, samples: int = 41, interval=(-5.0, 5.0),
                          tol: float = 1e-12) -> SectorCheck:
    """Sampled check of the incremental sector inequality.

    Every pair (y1, y2) taken from a deterministic grid is tested, together
    with the (0, 0) pair. The form is evaluated in expanded scalar form,
    independently of :func:`build_sector_matrix`.

    Returns
    -------
    SectorCheck
        ``ok`` is True iff the smallest form value is >= -tol.
    """
    if samples < 2:
        raise ValidationError("validate_sector_bound: need at least 2 samples")
    U1, U2 = spec.bound.U1, spec.bound.U2
    n_t = U1.shape[0]
    sym = he(U1 @ U2)
    cross = U1 + U2
    worst = np.inf
    for pts in _sample_points(n_t, samples, *interval) + [np.zeros((1, n_t))]:
        try:
            vals = np.asarray(spec.f(pts), dtype=float).reshape(pts.shape)
        except Exception as exc:  # evaluator failure is an input error
            raise ValidationError(f"nonlinearity '{spec.name}' failed to evaluate: {exc}") from exc
        dy = pts[:, None, :] - pts[None, :, :]
        df = vals[:, None, :] - vals[None, :, :]
        form = (-np.einsum("abi,ij,abj->ab", dy, sym, dy)
                + 2.0 * np.einsum("abi,ij,abj->ab", dy, cross, df)
                - np.einsum("abi,abi->ab", df, df))
        worst = min(worst, float(form.min()))
    return SectorCheck(worst >= -tol, worst)


def lipschitz_constant(bound: SectorBound) -> float:
    """Squared-norm Lipschitz constant implied by the sector bound.

    |f(a) - f(b)|^2 <= ell |a - b|^2 with ell = g2 / |g1|, where
    r = 2 max{1, lmax(He(U1 U2)) / |U1 + U2|}, g1 = (1 - r) / r and
    g2 = lmax(-He(U1 U2) + r |U1 + U2| I).
    """
    sym = he(bound.U1 @ bound.U2)
    norm = np.linalg.norm(bound.U1 + bound.U2, 2)
    if norm == 0:
        raise ValidationError("lipschitz_constant: degenerate bound, |U1 + U2| = 0")
    r = 2.0 * max(1.0, np.linalg.eigvalsh(sym).max() / norm)
    g1 = (1.0 - r) / r
    g2 = np.linalg.eigvalsh(-sym + r * norm * np.eye(sym.shape[0])).max()
    return float(g2 / abs(g1))


def evaluate_rho(spec: NonlinearitySpec, T, x, eps_x) -> np.ndarray:
    """rho(x, eps) = f(T x) - f(T (x - eps)); broadcasts over leading axes."""
    T = np.asarray(T, dtype=float)
    x = np.asarray(x, dtype=float)
    eps_x = np.asarray(eps_x, dtype=float)
    if x.shape[-1] != T.shape[1] or eps_x.shape[-1] != T.shape[1]:
        raise ValidationError("evaluate_rho: x / eps_x do not match the columns of T")
    try:
        return spec.f(x @ T.T) - spec.f((x - eps_x) @ T.T)
    except Exception as exc:
        raise ValidationError(f"nonlinearity '{spec.name}' failed to evaluate: {exc}") from exc


# ---------------------------------------------------------------------------
# plant


_PLANT_MATRICES = ("M", "A", "B", "E", "C", "N", "S", "T")


@dataclass
class PlantSpec:
    Lambda: SpeedProfile
    M: np.ndarray
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    C: np.ndarray
    N: np.ndarray
    S: np.ndarray
    T: np.ndarray
    nonlinearity: NonlinearitySpec
    name: str = "custom"
    notes: list = field(default_factory=list)

    def __post_init__(self):
        for key in _PLANT_MATRICES:
            setattr(self, key, as_matrix(getattr(self, key), f"PlantSpec.{key}"))
        self.check_shapes()

    # dimensions
    @property
    def n_x(self):
        return self.M.shape[0]

    @property
    def n_chi(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.B.shape[1]

    @property
    def n_w(self):
        return self.E.shape[1]

    @property
    def n_y1(self):
        return self.C.shape[0]

    @property
    def n_y2(self):
        return self.N.shape[0]

    @property
    def n_t(self):
        return self.T.shape[0]

    @property
    def CM(self):
        return self.C @ self.M

    def check_shapes(self):
        n_x, n_chi, n_t = self.M.shape[0], self.A.shape[0], self.T.shape[0]
        expect = {
            "M": (n_x, n_chi), "A": (n_chi, n_chi), "B": (n_chi, None),
            "E": (n_chi, None), "C": (None, n_x), "N": (None, n_x),
            "S": (n_x, n_t), "T": (n_t, n_x),
        }
        for key, (rows, cols) in expect.items():
            shape = getattr(self, key).shape
            if (rows is not None and shape[0] != rows) or (cols is not None and shape[1] != cols):
                raise ValidationError(f"PlantSpec: {key} has shape {shape}, expected "
                                      f"({rows or '*'}, {cols or '*'})")
        if self.Lambda.n != n_x:
            raise ValidationError(f"PlantSpec: Lambda has {self.Lambda.n} speeds, n_x = {n_x}")
        if self.nonlinearity.bound.n != n_t:
            raise ValidationError(
                f"PlantSpec: SectorBound is {self.nonlinearity.bound.n}x"
                f"{self.nonlinearity.bound.n}, n_t = {n_t}")

    def check(self, grid_points=1001):
        """Full invariant audit: shapes, positive speeds, sector bound."""
        self.check_shapes()
        self.Lambda.check(grid_points)
        self.nonlinearity.bound.check()
        return self

    def matrix_scale(self) -> float:
        """Largest infinity norm among the constant plant matrices."""
        return max(np.linalg.norm(getattr(self, k), np.inf) if getattr(self, k).size else 0.0
                   for k in _PLANT_MATRICES)

    def replace(self, **changes) -> "PlantSpec":
        kw = {k: getattr(self, k) for k in ("Lambda", *_PLANT_MATRICES, "nonlinearity", "name")}
        kw["notes"] = list(self.notes)
        kw.update(changes)
        return PlantSpec(**kw)
