"""Backend-neutral LMI feasibility problem and a cvxpy backend."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

try:
    import cvxpy as cp
except ImportError:  # pragma: no cover
    cp = None

TAGS = ("diagonal-positive", "symmetric-positive", "free", "nonnegative-scalar")


@dataclass
class LmiConstraint:
    name: str
    expr: object  # square affine matrix expression
    sense: str  # "<<" (expr <= -margin I) or ">>" (expr >= margin I)
    margin: float


@dataclass
class Solution:
    status: str
    values: dict = field(default_factory=dict)
    solver: str = ""

    @property
    def feasible(self):
        return self.status in ("optimal", "optimal_inaccurate") and bool(self.values)


class LmiProblem:
    """Named decision variables plus affine symmetric-matrix constraints.

    Variables are cvxpy objects; ``expr(name)`` returns the matrix-shaped
    expression (a diagonal-positive variable is stored as its diagonal).
    """

    def __init__(self):
        self.variables: dict[str, tuple[object, str]] = {}
        self.constraints: list[LmiConstraint] = []
        self.bounds: list = []  # scalar / elementwise normalizations
        self._fixed: dict[str, np.ndarray] = {}

    def add_variable(self, name, shape, tag):
        if tag not in TAGS:
            raise ValidationError(f"unknown variable tag {tag!r}")
        if tag == "diagonal-positive":
            var = cp.Variable(shape[0], name=name)
        elif tag == "symmetric-positive":
            var = cp.Variable(shape, symmetric=True, name=name)
        elif tag == "nonnegative-scalar":
            var = cp.Variable(nonneg=True, name=name)
        else:
            var = cp.Variable(shape, name=name)
        self.variables[name] = (var, tag)
        return self.expr(name)

    def fix(self, name, value):
        """Pin a declared variable to a constant (e.g. L = 0)."""
        var, _ = self.variables[name]
        value = np.asarray(value, dtype=float)
        self.bounds.append(var == value)
        self._fixed[name] = value

    def expr(self, name):
        var, tag = self.variables[name]
        return cp.diag(var) if tag == "diagonal-positive" else var

    def add_lmi(self, name, expr, sense, margin):
        if sense not in ("<<", ">>"):
            raise ValidationError(f"bad constraint sense {sense!r}")
        self.constraints.append(LmiConstraint(name, expr, sense, float(margin)))

    def add_bound(self, constraint):
        self.bounds.append(constraint)

    def audit_affine(self):
        """Raise unless every constraint expression is affine in the variables."""
        for c in self.constraints:
            if not c.expr.is_affine():
                raise ValidationError(f"constraint {c.name!r} is not affine")
            r, k = c.expr.shape
            if r != k:
                raise ValidationError(f"constraint {c.name!r} is not square ({r}x{k})")
        return True

    def to_cvxpy(self):
        cons = list(self.bounds)
        for c in self.constraints:
            n = c.expr.shape[0]
            sym = 0.5 * (c.expr + c.expr.T)
            if c.sense == "<<":
                cons.append(sym << -c.margin * np.eye(n))
            else:
                cons.append(sym >> c.margin * np.eye(n))
        return cp.Problem(cp.Minimize(0), cons)

    def solve(self, solver=None) -> Solution:
        self.audit_affine()
        problem = self.to_cvxpy()
        solver = solver or default_solver()
        try:
            with warnings.catch_warnings():
                # "inaccurate" answers are kept in the status and re-verified by callers
                warnings.simplefilter("ignore", UserWarning)
                problem.solve(solver=solver)
        except cp.error.SolverError as exc:
            return Solution(f"solver_error: {exc}".splitlines()[0], solver=solver)
        status = problem.status
        values = {}
        if status in ("optimal", "optimal_inaccurate"):
            for name, (var, tag) in self.variables.items():
                if var.value is None:
                    values = {}
                    break
                val = np.asarray(var.value, dtype=float)
                values[name] = np.diag(val) if tag == "diagonal-positive" else val
        return Solution(status, values, solver)


def default_solver():
    installed = cp.installed_solvers()
    for name in ("CLARABEL", "CVXOPT", "SCS"):
        if name in installed:
            return name
    raise RuntimeError("no conic solver with SDP support is installed")
