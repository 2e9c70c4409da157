from .assembly import (assemble_big_lmi_nondetectable, assemble_F_block, assemble_Pi_positivity,
                       assemble_Q_matrix, assemble_Xi, matrix_D, matrix_Phi, matrix_Pi)
from .certificate import DETECTABLE, NONDETECTABLE, StabilityCertificate
from .problem import LmiProblem
from .solve import Design, default_epsilon, solve_detectable, solve_nondetectable
from .verify import VerificationReport, verify_certificate
from .vertices import VertexSet, build_vertex_set, diag_bounds

__all__ = [
    "DETECTABLE", "NONDETECTABLE", "Design", "LmiProblem", "StabilityCertificate",
    "VerificationReport", "VertexSet", "assemble_F_block", "assemble_Pi_positivity",
    "assemble_Q_matrix", "assemble_Xi", "assemble_big_lmi_nondetectable", "build_vertex_set",
    "default_epsilon", "diag_bounds", "matrix_D", "matrix_Phi", "matrix_Pi", "solve_detectable",
    "solve_nondetectable", "verify_certificate",
]
