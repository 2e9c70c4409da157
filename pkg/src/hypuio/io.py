"""Flat-file formats: gains and certificates as JSON, traces as CSV.

Every float is written as a decimal string with 17 significant digits, which
round-trips IEEE doubles exactly. Readers accept plain JSON numbers too.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .decoupling import ObserverGains
from .errors import ValidationError
from .lmi.certificate import StabilityCertificate

GAIN_KEYS = ("H", "R", "F", "K1", "K2", "K", "L")


def fmt(x) -> str:
    return format(float(x), ".17g")


def encode(value):
    """Turn arrays and floats into JSON-ready nested lists of decimal strings."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    if isinstance(value, np.ndarray):
        return encode(value.tolist())
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def decode_matrix(value, name):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a numeric array ({exc})") from exc
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a nested 2-D array")
    return arr


def decode_float(value, name):
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a number") from exc


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2) + "\n"


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


# ---------------------------------------------------------------------------
# gains


def gains_to_dict(gains: ObserverGains) -> dict:
    return {"kind": "observer-gains", **{k: getattr(gains, k) for k in GAIN_KEYS}}


def gains_from_dict(d: dict) -> ObserverGains:
    missing = [k for k in GAIN_KEYS if k not in d]
    if missing:
        raise ValidationError(f"gains file: missing {', '.join(missing)}")
    return ObserverGains(**{k: decode_matrix(d[k], f"gains.{k}") for k in GAIN_KEYS})


def save_gains(gains: ObserverGains, path):
    Path(path).write_text(dumps(gains_to_dict(gains)))


def load_gains(path) -> ObserverGains:
    return gains_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# certificates


def certificate_to_dict(cert: StabilityCertificate) -> dict:
    return {
        "kind": "stability-certificate", "mode": cert.mode, "mu": cert.mu, "kappa": cert.kappa,
        "theta": cert.theta, "P": cert.P, "Q": cert.Q, "J": cert.J, "X": cert.X, "Y": cert.Y,
        "verified_margin": cert.verified_margin, "metadata": cert.metadata,
    }


def certificate_from_dict(d: dict) -> StabilityCertificate:
    for key in ("mode", "mu", "kappa", "P", "Q", "J"):
        if key not in d:
            raise ValidationError(f"certificate file: missing {key}")
    opt_mat = lambda k: None if d.get(k) is None else decode_matrix(d[k], f"certificate.{k}")
    opt_num = lambda k: None if d.get(k) is None else decode_float(d[k], f"certificate.{k}")
    return StabilityCertificate(
        mode=d["mode"], mu=decode_float(d["mu"], "certificate.mu"),
        kappa=decode_float(d["kappa"], "certificate.kappa"),
        P=decode_matrix(d["P"], "certificate.P"), Q=decode_matrix(d["Q"], "certificate.Q"),
        J=decode_matrix(d["J"], "certificate.J"), X=opt_mat("X"), Y=opt_mat("Y"),
        theta=opt_num("theta"), verified_margin=opt_num("verified_margin"),
        metadata=dict(d.get("metadata") or {}),
    )


def save_certificate(cert: StabilityCertificate, path):
    Path(path).write_text(dumps(certificate_to_dict(cert)))


def load_certificate(path) -> StabilityCertificate:
    return certificate_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# traces


def trace_columns(trace):
    cols = ["t", "err_sq"]
    if trace.lyapunov is not None:
        cols.append(trace.lyapunov_kind)
    cols.append("eps_chi_sq")
    return cols


def write_trace_csv(trace, path):
    """One row per time stamp: t, err_sq, V or W (when recorded), eps_chi_sq."""
    series = [trace.t, trace.err_sq]
    if trace.lyapunov is not None:
        series.append(trace.lyapunov)
    series.append(trace.eps_chi_sq)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_columns(trace))
        for row in zip(*series):
            w.writerow([fmt(v) for v in row])


def write_snapshots_csv(trace, path):
    """Per-cell plant and observer fields at the stored snapshot times."""
    nx = trace.x.shape[2]
    head = (["t", "z"] + [f"x{i + 1}" for i in range(nx)]
            + [f"xhat{i + 1}" for i in range(nx)])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        for k, t in enumerate(trace.snapshot_t):
            for j, z in enumerate(trace.z):
                w.writerow([fmt(t), fmt(z)] + [fmt(v) for v in trace.x[k, j]]
                           + [fmt(v) for v in trace.xhat[k, j]])


def read_trace_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, i] for i, name in enumerate(head)}
