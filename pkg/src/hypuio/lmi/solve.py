"""Observer synthesis by vertex-relaxed LMIs and a line search over (mu, theta)."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..decoupling import ObserverGains, compute_gains, compute_H, decoupled_pair, pbh_detectability
from ..errors import InfeasibleError, PreconditionError
from ..model import PlantSpec
from .assembly import (assemble_big_lmi_nondetectable, assemble_F_block, assemble_Pi_positivity,
                       assemble_Q_matrix)
from .certificate import DETECTABLE, NONDETECTABLE, StabilityCertificate
from .problem import LmiProblem
from .verify import verify_certificate
from .vertices import DiagBounds, build_vertex_set, diag_bounds, exp_weight

log = logging.getLogger(__name__)

DEFAULT_MU_GRID = tuple(np.logspace(-3, 1, 25))
DEFAULT_THETA_GRID = tuple(np.logspace(-3, 1, 25))


def default_epsilon(plant: PlantSpec) -> float:
    return 1e-6 * (1.0 + plant.matrix_scale())


@dataclass
class GridPoint:
    mu: float
    theta: float | None
    status: str
    margin: float | None = None


@dataclass
class Design:
    certificate: StabilityCertificate
    gains: ObserverGains
    log: list = field(default_factory=list)

    def __iter__(self):
        # allows ``cert, gains = solve_detectable(...)``
        return iter((self.certificate, self.gains))


def _vertices(plant, bounds, grid_points):
    if bounds is not None:
        lo, hi = bounds
        return build_vertex_set(DiagBounds(np.asarray(lo, float), np.asarray(hi, float)))
    return build_vertex_set(diag_bounds(plant.Lambda, grid_points=grid_points))


def _base_problem(plant, eps, with_design_vars):
    prob = LmiProblem()
    P = prob.add_variable("P", (plant.n_x, plant.n_x), "diagonal-positive")
    Q = prob.add_variable("Q", (plant.n_chi, plant.n_chi), "symmetric-positive")
    kappa = prob.add_variable("kappa", (), "nonnegative-scalar")
    for name, shape in with_design_vars:
        prob.add_variable(name, shape, "free")
    # P >= I removes the zero solution admitted by non-strict cones
    prob.add_bound(prob.variables["P"][0] >= 1.0)
    prob.add_bound(kappa >= eps)
    prob.add_lmi("Q positive", Q, ">>", eps)
    return prob, P, Q, kappa


def detectable_problem(plant: PlantSpec, mu: float, eps: float, vertices, RA,
                       force_L_zero=False) -> LmiProblem:
    """LMI problem for one value of mu in the detectable case."""
    prob, P, Q, kappa = _base_problem(
        plant, eps, [("X", (plant.n_chi, plant.n_y1)), ("J", (plant.n_chi, plant.n_y2))])
    X, J = prob.expr("X"), prob.expr("J")
    if force_L_zero:
        prob.fix("J", np.zeros((plant.n_chi, plant.n_y2)))
    for k, D in enumerate(vertices):
        prob.add_lmi(f"vertex {k}", assemble_Q_matrix(D, P, kappa, mu, plant), "<<", eps)
    prob.add_lmi("boundary block", assemble_F_block(P, Q, mu, plant, RA=RA, X=X, J=J), "<<", eps)
    return prob


def nondetectable_problem(plant: PlantSpec, mu: float, theta: float, eps: float, vertices,
                          pos_vertices, F) -> LmiProblem:
    """LMI problem for one (mu, theta) pair in the non-detectable case."""
    prob, P, Q, kappa = _base_problem(
        plant, eps, [("Y", (plant.n_chi, plant.n_x)), ("J", (plant.n_chi, plant.n_y2))])
    Y, J = prob.expr("Y"), prob.expr("J")
    for k, Dh in enumerate(pos_vertices):
        prob.add_lmi(f"Pi vertex {k}", assemble_Pi_positivity(Dh, P, Q, Y), ">>", eps)
    for omega, tag in ((1.0, "1"), (np.exp(-mu), "exp(-mu)")):
        for k, D in enumerate(vertices):
            big = assemble_big_lmi_nondetectable(omega, D, P, Q, Y, J, kappa, theta, mu, plant, F)
            prob.add_lmi(f"omega={tag} vertex {k}", big, "<<", eps)
    return prob


def _scalar(v):
    return float(np.asarray(v).reshape(()))


def _select(candidates, selection):
    """Pick from (index, design) pairs, deterministic in grid order."""
    if selection == "first":
        return candidates[0][1]
    best = max(candidates,
               key=lambda c: (c[1].certificate.verified_margin / c[1].certificate.scale, -c[0]))
    return best[1]


def _run(points, evaluate, selection, workers):
    """Evaluate grid points in order; ``first`` stops at the first success."""
    results = []
    if selection == "first" or workers <= 1:
        for idx, pt in enumerate(points):
            res = evaluate(*pt)
            results.append((idx, res))
            if selection == "first" and res[1] is not None:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(enumerate(pool.map(lambda pt: evaluate(*pt), points)))
    return results


def solve_detectable(plant: PlantSpec, mu_grid=None, epsilon=None, *, selection="first",
                     force_L_zero=False, lambda_grid_points=1001, bounds=None,
                     verify_points=1001, solver=None, workers=1) -> Design:
    """Search mu for a detectable-case certificate and recover K1 = Q^{-1}X, L = Q^{-1}J.

    Every solver answer is re-verified on ``verify_points`` z values before
    it is accepted. ``selection`` is ``"first"`` (first verified mu in grid
    order) or ``"max_margin"`` (largest margin relative to the certificate
    size). ``bounds`` may supply (lower, upper) extrema of Lambda^{-1}
    instead of sampling.
    """
    H = compute_H(plant)
    RA, CM = decoupled_pair(plant, H)
    det = pbh_detectability(RA, CM)
    if not det.detectable:
        raise PreconditionError(
            "detectable design needs (RA, CM) detectable; PBH test fails at "
            + ", ".join(f"{v:.6g}" for v in det.offending))
    eps = default_epsilon(plant) if epsilon is None else float(epsilon)
    mu_grid = [float(m) for m in (DEFAULT_MU_GRID if mu_grid is None else mu_grid)]
    verts = _vertices(plant, bounds, lambda_grid_points)

    def evaluate(mu):
        prob = detectable_problem(plant, mu, eps, verts, RA, force_L_zero)
        sol = prob.solve(solver)
        if not sol.feasible:
            return GridPoint(mu, None, sol.status), None
        v = sol.values
        Q = v["Q"]
        K1 = np.linalg.solve(Q, v["X"])
        L = np.linalg.solve(Q, v["J"])
        gains = compute_gains(plant, K1=K1, L=L, H=H)
        cert = StabilityCertificate(DETECTABLE, mu, _scalar(v["kappa"]), v["P"], Q, v["J"],
                                    X=v["X"],
                                    metadata={"epsilon": eps, "mu_grid": mu_grid,
                                              "lambda_grid_points": lambda_grid_points,
                                              "vertices": len(verts), "solver": sol.solver})
        rep = verify_certificate(plant, gains, cert, z_points=verify_points)
        if not rep.passed:
            return GridPoint(mu, None, "verification_failed", rep.margin), None
        return GridPoint(mu, None, "verified", rep.margin), Design(cert, gains)

    results = _run([(m,) for m in mu_grid], evaluate, selection, workers)
    trail = [r[1][0] for r in results]
    for gp in trail:
        log.info("mu=%.6g status=%s margin=%s", gp.mu, gp.status, gp.margin)
    found = [(i, r[1]) for i, r in results if r[1] is not None]
    if not found:
        raise InfeasibleError("no certificate found on the mu grid (detectable case)", trail)
    design = _select(found, selection)
    design.log = trail
    return design


def solve_nondetectable(plant: PlantSpec, mu_grid=None, theta_grid=None, epsilon=None, *,
                        selection="first", lambda_grid_points=1001, bounds=None,
                        verify_points=1001, solver=None, workers=1) -> Design:
    """Search (mu, theta) for a cross-term certificate with K1 = 0 and F = RA.

    Pairs are visited mu-major in grid order. The gain is L = Q^{-1}J.
    """
    H = compute_H(plant)
    RA, _ = decoupled_pair(plant, H)
    eps = default_epsilon(plant) if epsilon is None else float(epsilon)
    mu_grid = [float(m) for m in (DEFAULT_MU_GRID if mu_grid is None else mu_grid)]
    theta_grid = [float(t) for t in (DEFAULT_THETA_GRID if theta_grid is None else theta_grid)]
    verts = _vertices(plant, bounds, lambda_grid_points)
    pos_cache = {}

    def pos_vertices(mu):
        if mu not in pos_cache:
            pos_cache[mu] = build_vertex_set(
                diag_bounds(plant.Lambda, exp_weight(mu), lambda_grid_points), weight="exp(mu z)")
        return pos_cache[mu]

    for mu in mu_grid:
        pos_vertices(mu)

    def evaluate(mu, theta):
        prob = nondetectable_problem(plant, mu, theta, eps, verts, pos_vertices(mu), RA)
        sol = prob.solve(solver)
        if not sol.feasible:
            return GridPoint(mu, theta, sol.status), None
        v = sol.values
        Q = v["Q"]
        L = np.linalg.solve(Q, v["J"])
        gains = compute_gains(plant, L=L, H=H)
        cert = StabilityCertificate(NONDETECTABLE, mu, _scalar(v["kappa"]), v["P"], Q, v["J"],
                                    Y=v["Y"], theta=theta,
                                    metadata={"epsilon": eps, "mu_grid": mu_grid,
                                              "theta_grid": theta_grid,
                                              "lambda_grid_points": lambda_grid_points,
                                              "vertices": len(verts), "solver": sol.solver})
        rep = verify_certificate(plant, gains, cert, z_points=verify_points)
        if not rep.passed:
            return GridPoint(mu, theta, "verification_failed", rep.margin), None
        return GridPoint(mu, theta, "verified", rep.margin), Design(cert, gains)

    points = [(m, t) for m in mu_grid for t in theta_grid]
    results = _run(points, evaluate, selection, workers)
    trail = [r[1][0] for r in results]
    for gp in trail:
        log.info("mu=%.6g theta=%.6g status=%s margin=%s", gp.mu, gp.theta, gp.status, gp.margin)
    found = [(i, r[1]) for i, r in results if r[1] is not None]
    if not found:
        raise InfeasibleError("no certificate found on the (mu, theta) grid (nondetectable case)",
                              trail)
    design = _select(found, selection)
    design.log = trail
    return design
