"""Command line: design, verify, simulate, demo and sweep-mu."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import load_config
from .decoupling import compute_H, decoupled_pair, numerical_rank, pbh_detectability
from .errors import InfeasibleError, UIOError, VerificationError
from .lmi import solve_detectable, solve_nondetectable, verify_certificate
from .lmi.certificate import DETECTABLE, NONDETECTABLE
from .simulation import decay_diagnostics, simulate


def _mat(name, a):
    a = np.atleast_2d(a)
    rows = ["[" + ", ".join(io.fmt(v) for v in row) + "]" for row in a]
    return f"{name} = [" + ", ".join(rows) + "]"


def _complex(v):
    return f"{io.fmt(v.real)}{'+' if v.imag >= 0 else '-'}{io.fmt(abs(v.imag))}j"


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def choose_branch(plant, mode="auto"):
    """Decoupling checks, then the detectable or nondetectable branch. Returns (branch, lines)."""
    lines = []
    rank = numerical_rank(plant.CM @ plant.E)
    lines.append(f"input decoupling rank: rank(C M E) = {rank}, n_w = {plant.n_w}")
    H = compute_H(plant)
    RA, CM = decoupled_pair(plant, H)
    det = pbh_detectability(RA, CM)
    if det.detectable:
        lines.append("(RA, CM): detectable")
    else:
        lines.append("(RA, CM): not detectable; unobservable eigenvalues "
                     + ", ".join(_complex(v) for v in det.offending))
    if mode == "auto":
        branch = DETECTABLE if det.detectable else NONDETECTABLE
    else:
        branch = mode
    lines.append(f"branch: {branch}")
    return branch, lines


def run_design(cfg, mode=None, epsilon=None, mu_grid=None, selection=None):
    syn = cfg.synthesis
    mode = mode or syn.mode
    branch, lines = choose_branch(cfg.plant, mode)
    kw = dict(epsilon=syn.epsilon if epsilon is None else epsilon,
              selection=selection or syn.selection,
              lambda_grid_points=syn.lambda_grid_points, verify_points=syn.verify_points,
              workers=syn.workers)
    mus = mu_grid if mu_grid is not None else syn.mu_grid
    try:
        if branch == DETECTABLE:
            design = solve_detectable(cfg.plant, mus, force_L_zero=syn.force_L_zero, **kw)
        else:
            design = solve_nondetectable(cfg.plant, mus, syn.theta_grid, **kw)
    except InfeasibleError as exc:
        exc.report_lines = lines + _trail_lines(exc.log)
        raise
    return branch, lines, design


def _trail_lines(trail):
    out = ["grid search:"]
    for gp in trail:
        th = "" if gp.theta is None else f" theta={io.fmt(gp.theta)}"
        mg = "" if gp.margin is None else f" margin={io.fmt(gp.margin)}"
        out.append(f"  mu={io.fmt(gp.mu)}{th} status={gp.status}{mg}")
    return out


def design_report(cfg, lines, design, rep):
    cert, gains = design.certificate, design.gains
    out = [f"plant: {cfg.plant.name}", *lines, f"mu: {io.fmt(cert.mu)}"]
    if cert.theta is not None:
        out.append(f"theta: {io.fmt(cert.theta)}")
    out += [f"kappa: {io.fmt(cert.kappa)}", f"verified margin: {io.fmt(rep.margin)}",
            "gains:"] + ["  " + _mat(k, getattr(gains, k)) for k in io.GAIN_KEYS]
    out += _trail_lines(design.log)
    out += ["verification:", rep.summary()]
    return "\n".join(out) + "\n"


def cmd_design(args):
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    try:
        branch, lines, design = run_design(cfg, args.mode, args.epsilon)
    except InfeasibleError as exc:
        print("\n".join(getattr(exc, "report_lines", [])))
        raise
    rep = verify_certificate(cfg.plant, design.gains, design.certificate,
                             z_points=cfg.synthesis.verify_points)
    out.mkdir(parents=True, exist_ok=True)
    io.save_gains(design.gains, out / "gains.json")
    io.save_certificate(design.certificate, out / "certificate.json")
    text = design_report(cfg, lines, design, rep)
    _write(out / "design_report.txt", text)
    print(text, end="")
    print(f"wrote {out / 'gains.json'}, {out / 'certificate.json'}")
    return 0


def cmd_verify(args):
    cfg = load_config(args.config)
    gains = io.load_gains(args.gains)
    cert = io.load_certificate(args.certificate)
    rep = verify_certificate(cfg.plant, gains, cert, z_points=args.z_points, tol=args.tol)
    text = rep.summary() + "\n"
    if args.out:
        _write(Path(args.out) / "verify_report.txt", text)
    print(text, end="")
    if not rep.passed:
        raise VerificationError(f"certificate rejected (margin {io.fmt(rep.margin)})")
    return 0


def _grid_from_args(cfg, args):
    changes = {}
    for key, attr in (("N_z", "nz"), ("T_final", "T"), ("cfl", "cfl"), ("scheme", "scheme")):
        val = getattr(args, attr, None)
        if val is not None:
            changes[key] = val
    return dataclasses.replace(cfg.grid, **changes)


def run_simulation(cfg, gains, cert, grid, matched=False, w_scale=1.0, snapshot_stride=None):
    signals = cfg.signals
    if w_scale != 1.0:
        signals = dataclasses.replace(signals, w=signals.w.scaled(w_scale))
    initial = cfg.initial.matched() if matched else cfg.initial
    return simulate(cfg.plant, gains, signals, initial, grid, certificate=cert,
                    snapshot_stride=snapshot_stride)


def simulation_report(trace):
    out = [f"scheme: {trace.grid.scheme}", f"N_z: {trace.grid.N_z}",
           f"T_final: {io.fmt(trace.grid.T_final)}", f"cfl: {io.fmt(trace.grid.cfl)}",
           f"dt: {io.fmt(trace.dt)}", f"steps: {trace.t.size - 1}",
           f"err_sq(0): {io.fmt(trace.err_sq[0])}", f"err_sq(T): {io.fmt(trace.err_sq[-1])}",
           f"max err_sq: {io.fmt(trace.err_sq.max())}"]
    series = [("err_sq", trace.err_sq)]
    if trace.lyapunov is not None:
        series.append((trace.lyapunov_kind, trace.lyapunov))
    for name, s in series:
        if s.size < 10:
            out.append(f"{name}: fewer than 10 samples, decay statistics skipped")
        elif s[0] > 0:
            d = decay_diagnostics(s, trace.t)
            out.append(f"{name}: increases={d.violations} ratio={io.fmt(d.ratio)} "
                       f"rate={io.fmt(d.rate)} nonpositive={d.nonpositive}")
        else:
            out.append(f"{name}: zero initial value, decay statistics skipped")
    return "\n".join(out) + "\n"


def cmd_simulate(args):
    cfg = load_config(args.config)
    gains = io.load_gains(args.gains)
    cert = io.load_certificate(args.certificate) if args.certificate else None
    out = Path(args.out) if args.out else cfg.output_dir
    trace = run_simulation(cfg, gains, cert, _grid_from_args(cfg, args), args.matched,
                           args.w_scale, args.snapshot_stride)
    out.mkdir(parents=True, exist_ok=True)
    io.write_trace_csv(trace, out / "trace.csv")
    if args.snapshots:
        io.write_snapshots_csv(trace, out / "snapshots.csv")
    text = simulation_report(trace)
    _write(out / "simulate_report.txt", text)
    print(text, end="")
    return 0


def cmd_demo(args):
    cfg = load_config(args.example)
    out = Path(args.out) if args.out else Path(f"out-{args.example}")
    out.mkdir(parents=True, exist_ok=True)
    _, lines, design = run_design(cfg)
    rep = verify_certificate(cfg.plant, design.gains, design.certificate)
    io.save_gains(design.gains, out / "gains.json")
    io.save_certificate(design.certificate, out / "certificate.json")
    text = design_report(cfg, lines, design, rep)
    _write(out / "design_report.txt", text)
    print(text, end="")
    trace = run_simulation(cfg, design.gains, design.certificate, _grid_from_args(cfg, args))
    io.write_trace_csv(trace, out / "trace.csv")
    sim = simulation_report(trace)
    _write(out / "simulate_report.txt", sim)
    print(sim, end="")
    return 0


def cmd_sweep_mu(args):
    cfg = load_config(args.config)
    mus = [float(m) for m in args.mu] if args.mu else None
    try:
        _, lines, design = run_design(cfg, args.mode, args.epsilon, mus, selection="max_margin")
        trail = design.log
        best = design.certificate
    except InfeasibleError as exc:
        lines, trail, best = getattr(exc, "report_lines", [])[:3], exc.log, None
    text = "\n".join(lines[:3] + _trail_lines(trail))
    if best is not None:
        pick = f"selected mu={io.fmt(best.mu)}"
        if best.theta is not None:
            pick += f" theta={io.fmt(best.theta)}"
        text += "\n" + pick
    print(text)
    if best is None:
        return InfeasibleError.exit_code
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hypuio", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="synthesize observer gains and a certificate")
    d.add_argument("config", help="JSON config path or builtin name")
    d.add_argument("--out", help="output directory")
    d.add_argument("--mode", choices=("auto", DETECTABLE, NONDETECTABLE))
    d.add_argument("--epsilon", type=float)
    d.set_defaults(func=cmd_design)

    v = sub.add_parser("verify", help="dense-grid check of a certificate")
    v.add_argument("config")
    v.add_argument("--gains", required=True)
    v.add_argument("--certificate", required=True)
    v.add_argument("--z-points", type=int, default=1001)
    v.add_argument("--tol", type=float, default=0.0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    def grid_flags(q):
        q.add_argument("--nz", type=int, help="cell count")
        q.add_argument("--T", type=float, help="time horizon")
        q.add_argument("--cfl", type=float)
        q.add_argument("--scheme", choices=("upwind1", "lax_friedrichs2"))

    s = sub.add_parser("simulate", help="co-simulate plant and observer")
    s.add_argument("config")
    s.add_argument("--gains", required=True)
    s.add_argument("--certificate", help="record V or W along the run")
    s.add_argument("--matched", action="store_true", help="start the observer on the plant state")
    s.add_argument("--w-scale", type=float, default=1.0, help="multiply the unknown input")
    s.add_argument("--snapshots", action="store_true", help="also write snapshots.csv")
    s.add_argument("--snapshot-stride", type=int)
    s.add_argument("--out")
    grid_flags(s)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("demo", help="design, verify and simulate a builtin example")
    m.add_argument("example", choices=("example1", "example2"))
    m.add_argument("--out")
    grid_flags(m)
    m.set_defaults(func=cmd_demo)

    w = sub.add_parser("sweep-mu", help="solve at every grid point and tabulate the outcome")
    w.add_argument("config")
    w.add_argument("--mu", nargs="+", help="mu values (default: config grid)")
    w.add_argument("--mode", choices=("auto", DETECTABLE, NONDETECTABLE))
    w.add_argument("--epsilon", type=float)
    w.set_defaults(func=cmd_sweep_mu)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
