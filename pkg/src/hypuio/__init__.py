"""Unknown-input observers for semilinear 1-D hyperbolic PDEs coupled with boundary ODEs."""
from .datasets import PLANTS, example1, example2
from .decoupling import (ObserverGains, compute_gains, compute_H, pbh_detectability,
                         residual_matrices)
from .errors import (AssumptionError, CertificateError, InfeasibleError, NumericalFault,
                     PreconditionError, UIOError, ValidationError, VerificationError)
from .lmi import (StabilityCertificate, VerificationReport, solve_detectable, solve_nondetectable,
                  verify_certificate)
from .model import NonlinearitySpec, PlantSpec, SectorBound, SpeedProfile
from .simulation import GridSpec, InitialData, Signal, SignalSpec, simulate

__all__ = [
    "PLANTS", "AssumptionError", "CertificateError", "GridSpec", "InfeasibleError",
    "InitialData", "NonlinearitySpec", "NumericalFault", "ObserverGains", "PlantSpec",
    "PreconditionError", "SectorBound", "Signal", "SignalSpec", "SpeedProfile",
    "StabilityCertificate", "UIOError", "ValidationError", "VerificationError",
    "VerificationReport", "compute_H", "compute_gains", "example1", "example2",
    "pbh_detectability", "residual_matrices", "simulate", "solve_detectable",
    "solve_nondetectable", "verify_certificate",
]
