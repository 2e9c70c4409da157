"""Dense-grid verification of certificates against the pointwise conditions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..decoupling import ObserverGains
from ..errors import VerificationError
from ..model import PlantSpec
from .assembly import assemble_F_block, matrix_D, matrix_Phi, matrix_Pi
from .certificate import DETECTABLE, NONDETECTABLE, StabilityCertificate


@dataclass
class VerificationReport:
    mode: str
    passed: bool
    margin: float
    tol: float
    z: np.ndarray
    # per-z worst eigenvalues; "pointwise" is lambda_max(D(z)) or lambda_max(Phi(z)),
    # "positivity" is lambda_min(Pi(z)) (nondetectable only)
    pointwise: np.ndarray
    positivity: np.ndarray | None = None
    boundary: float | None = None  # lambda_max of the constant block (detectable only)
    first_violation_z: float | None = None
    messages: list = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"mode: {self.mode}", f"margin: {self.margin:.17g}",
                 f"tolerance: {self.tol:.17g}", f"z points: {self.z.size}"]
        if self.mode == DETECTABLE:
            lines.append(f"max lambda_max(D(z)): {self.pointwise.max():.17g}")
            lines.append(f"lambda_max(F block): {self.boundary:.17g}")
        else:
            lines.append(f"min lambda_min(Pi(z)): {self.positivity.min():.17g}")
            lines.append(f"max lambda_max(Phi(z)): {self.pointwise.max():.17g}")
        if self.first_violation_z is not None:
            lines.append(f"first violated z: {self.first_violation_z:.17g}")
        lines.extend(self.messages)
        lines.append("result: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _mode_consistency(plant, gains, cert):
    if cert.mode == NONDETECTABLE and np.abs(gains.K1).max(initial=0.0) > 0:
        raise VerificationError("mode mismatch: nondetectable certificate requires K1 = 0")
    if cert.mode == DETECTABLE and cert.X is None:
        raise VerificationError("mode mismatch: detectable certificate lacks X")
    if cert.mode == NONDETECTABLE and cert.Y is None:
        raise VerificationError("mode mismatch: nondetectable certificate lacks Y")


def verify_certificate(plant: PlantSpec, gains: ObserverGains, cert: StabilityCertificate,
                       z_points: int = 1001, tol: float = 0.0,
                       check_invariants: bool = True) -> VerificationReport:
    """Sweep z over a uniform grid and report the worst eigenvalue margin.

    Detectable mode checks lambda_max(D(z)) < 0 on the grid and
    lambda_max of the constant boundary block < 0, using F and L from
    ``gains``. Nondetectable mode checks lambda_min(Pi(z)) > 0 and
    lambda_max(Phi(z)) < 0. The margin is the smallest of the distances
    to zero on the correct side; the report passes iff margin > -tol.

    ``cert.verified_margin`` is updated in place.
    """
    if check_invariants:
        cert.check()
    _mode_consistency(plant, gains, cert)
    z = np.linspace(0.0, 1.0, z_points)
    P, Q = np.asarray(cert.P, dtype=float), np.asarray(cert.Q, dtype=float)
    msgs = []
    if cert.mode == DETECTABLE:
        worst = np.array([np.linalg.eigvalsh(matrix_D(zi, P, cert.kappa, cert.mu, plant)).max()
                          for zi in z])
        blk = assemble_F_block(P, Q, cert.mu, plant, F=gains.F, L=gains.L)
        boundary = float(np.linalg.eigvalsh(blk).max())
        margin = float(min(-worst.max(), -boundary))
        per_z_ok = worst < tol
        if boundary >= tol:
            msgs.append("boundary block is not negative definite")
        positivity = None
    else:
        Y = np.asarray(cert.Y, dtype=float)
        positivity = np.array([np.linalg.eigvalsh(matrix_Pi(zi, P, Q, Y, cert.mu, plant)).min()
                               for zi in z])
        worst = np.array([np.linalg.eigvalsh(
            matrix_Phi(zi, P, Q, Y, gains.L, cert.kappa, cert.mu, plant, gains.F)).max()
            for zi in z])
        margin = float(min(positivity.min(), -worst.max()))
        per_z_ok = (worst < tol) & (positivity > -tol)
        boundary = None
    passed = margin > -tol
    first = None
    if not per_z_ok.all():
        first = float(z[np.argmin(per_z_ok)])
    cert.verified_margin = margin
    return VerificationReport(cert.mode, bool(passed), margin, tol, z, worst, positivity,
                              boundary, first, msgs)
