from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import CertificateError

DETECTABLE = "detectable"
NONDETECTABLE = "nondetectable"
MODES = (DETECTABLE, NONDETECTABLE)


@dataclass
class StabilityCertificate:
    """Lyapunov certificate for the estimation error.

    ``X`` (= Q K1) is set in detectable mode, ``Y`` in nondetectable mode;
    ``J`` (= Q L) in both. ``verified_margin`` is filled in by
    ``verify_certificate``.
    """

    mode: str
    mu: float
    kappa: float
    P: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    X: np.ndarray | None = None
    Y: np.ndarray | None = None
    theta: float | None = None
    verified_margin: float | None = None
    metadata: dict = field(default_factory=dict)

    def check(self, tol=0.0):
        """Raise :class:`CertificateError` on a structural invariant violation."""
        if self.mode not in MODES:
            raise CertificateError(f"certificate: unknown mode {self.mode!r}")
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise CertificateError("certificate: P must be square")
        if np.any(P - np.diag(np.diag(P)) != 0):
            raise CertificateError("certificate: P must be diagonal")
        if np.any(np.diag(P) <= tol):
            raise CertificateError("certificate: P must have positive diagonal "
                                   f"(min entry {np.diag(P).min():g})")
        Q = np.asarray(self.Q, dtype=float)
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise CertificateError("certificate: Q must be symmetric")
        if np.linalg.eigvalsh(0.5 * (Q + Q.T)).min() <= tol:
            raise CertificateError("certificate: Q must be positive definite")
        if not self.mu > 0 or not self.kappa > 0:
            raise CertificateError("certificate: mu and kappa must be positive")
        if self.mode == NONDETECTABLE:
            if self.theta is None or not self.theta > 0:
                raise CertificateError("certificate: theta must be positive in nondetectable mode")
            if self.Y is None:
                raise CertificateError("certificate: nondetectable mode needs Y")
        elif self.X is None:
            raise CertificateError("certificate: detectable mode needs X")
        return self

    def scaled(self, s: float) -> "StabilityCertificate":
        """Multiply every homogeneous entry by s (gains Q^{-1}X, Q^{-1}J unchanged)."""
        mul = lambda a: None if a is None else s * np.asarray(a)
        return replace(self, kappa=s * self.kappa, P=mul(self.P), Q=mul(self.Q), J=mul(self.J),
                       X=mul(self.X), Y=mul(self.Y), verified_margin=None,
                       metadata=dict(self.metadata))

    @property
    def scale(self) -> float:
        """Size of the certificate, used to compare margins across grid points."""
        return float(max(np.abs(np.diag(self.P)).max(), np.linalg.eigvalsh(self.Q).max(),
                         self.kappa))
