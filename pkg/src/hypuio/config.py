"""Problem configuration files (JSON) and the builtin example setups."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import sympy

from .datasets import EXAMPLE_INITIAL_EXPR, EXAMPLE_W, example1_speeds, example2_speeds, PLANTS
from .errors import ValidationError
from .io import decode_float, decode_matrix, read_json
from .model import NonlinearitySpec, PlantSpec, SectorBound, SpeedProfile
from .simulation import GridSpec, InitialData, Signal, SignalSpec

BUILTIN_SPEEDS = {"example1": example1_speeds, "example2": example2_speeds}
_PLANT_KEYS = ("M", "A", "B", "E", "C", "N", "S", "T")

# synthesis grids of the builtin setups; example2 is searched exhaustively on a
# 5 x 5 (mu, theta) grid that contains (1, 1)
_SMALL_GRID = [0.25, 0.5, 1.0, 2.0, 4.0]
BUILTIN_SYNTHESIS = {
    "example1": {"mode": "auto", "selection": "first"},
    "example2": {"mode": "auto", "selection": "max_margin",
                 "mu_grid": _SMALL_GRID, "theta_grid": _SMALL_GRID},
}


@dataclass
class SynthesisConfig:
    mode: str = "auto"  # auto | detectable | nondetectable
    mu_grid: list | None = None
    theta_grid: list | None = None
    epsilon: float | None = None
    selection: str = "first"
    force_L_zero: bool = False
    lambda_grid_points: int = 1001
    verify_points: int = 1001
    workers: int = 1


@dataclass
class ProblemConfig:
    plant: PlantSpec
    signals: SignalSpec
    initial: InitialData
    grid: GridSpec
    synthesis: SynthesisConfig
    output_dir: Path
    raw: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# expression helpers


def _lambdify_profile(exprs, var, name):
    """Vectorized evaluator of component expressions in one variable."""
    sym = sympy.Symbol(var)
    if isinstance(exprs, (str, int, float)):
        exprs = [exprs]
    funcs = []
    for e in exprs:
        try:
            parsed = sympy.sympify(e, locals={var: sym}) if isinstance(e, str) else sympy.Float(e)
        except (sympy.SympifyError, TypeError, SyntaxError) as exc:
            raise ValidationError(f"{name}: cannot parse expression {e!r}: {exc}") from exc
        extra = parsed.free_symbols - {sym}
        if extra:
            raise ValidationError(f"{name}: unknown symbols {sorted(map(str, extra))} in {e!r}")
        funcs.append(sympy.lambdify(sym, parsed, "numpy"))

    def evaluate(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.stack([np.broadcast_to(np.asarray(f(z), dtype=float), z.shape) for f in funcs],
                        axis=-1)

    return evaluate, len(funcs)


def parse_speeds(block) -> SpeedProfile:
    if isinstance(block, str):
        block = {"builtin": block}
    if not isinstance(block, dict):
        raise ValidationError("plant.Lambda: expected a builtin name or an object")
    if "builtin" in block:
        name = block["builtin"]
        if name not in BUILTIN_SPEEDS:
            raise ValidationError(f"plant.Lambda: unknown builtin {name!r}")
        return BUILTIN_SPEEDS[name]()
    if "constant" in block:
        return SpeedProfile.constant([decode_float(v, "plant.Lambda") for v in block["constant"]])
    if "expressions" in block:
        func, n = _lambdify_profile(block["expressions"], "z", "plant.Lambda")
        prof = SpeedProfile.from_function(func, n, name="expressions")
        prof.source = {"expressions": list(block["expressions"])}
        return prof
    if "samples" in block:
        s = block["samples"]
        return SpeedProfile.from_samples(np.array(s["z"], dtype=float),
                                         np.array(s["diag"], dtype=float))
    raise ValidationError("plant.Lambda: use one of builtin, constant, expressions, samples")


def parse_nonlinearity(block) -> NonlinearitySpec:
    if not isinstance(block, dict):
        raise ValidationError("plant.nonlinearity: expected an object")
    for key in ("U1", "U2"):
        if key not in block:
            raise ValidationError(f"SectorBound: missing field {key!r} in the nonlinearity block")
    bound = SectorBound(decode_matrix(block["U1"], "SectorBound.U1"),
                        decode_matrix(block["U2"], "SectorBound.U2"))
    name = block.get("name", "tanh")
    if name == "tanh":
        return NonlinearitySpec(np.tanh, bound, "tanh")
    if name == "expression":
        # componentwise expressions in y
        func, n = _lambdify_profile(block["f"], "y", "plant.nonlinearity")
        if n != bound.n:
            raise ValidationError("plant.nonlinearity: expression count differs from U1 size")

        def f(y):
            y = np.asarray(y, dtype=float)
            out = np.stack([func(y[..., i].ravel())[:, i] for i in range(n)], axis=-1)
            return out.reshape(y.shape)

        return NonlinearitySpec(f, bound, "expression")
    raise ValidationError(f"plant.nonlinearity: unknown name {name!r} (tanh or expression)")


def parse_plant(block) -> PlantSpec:
    if isinstance(block, str):
        block = {"builtin": block}
    if "builtin" in block:
        name = block["builtin"]
        if name not in PLANTS:
            raise ValidationError(f"plant: unknown builtin {name!r} (choose {sorted(PLANTS)})")
        plant = PLANTS[name]()
        overrides = {k: decode_matrix(v, f"plant.{k}") for k, v in block.items()
                     if k in _PLANT_KEYS}
        return plant.replace(**overrides).check() if overrides else plant.check()
    missing = [k for k in (*_PLANT_KEYS, "Lambda", "nonlinearity") if k not in block]
    if missing:
        raise ValidationError(f"plant: missing fields {', '.join(missing)}")
    mats = {k: decode_matrix(block[k], f"plant.{k}") for k in _PLANT_KEYS}
    plant = PlantSpec(Lambda=parse_speeds(block["Lambda"]),
                      nonlinearity=parse_nonlinearity(block["nonlinearity"]),
                      name=block.get("name", "custom"), **mats)
    return plant.check()


def parse_signal(block, n, name) -> Signal:
    if block is None:
        return Signal.zero(n)
    kind = block.get("kind", "constant")
    if kind == "table":
        return Signal("table", times=tuple(float(t) for t in block["times"]),
                      values=tuple(np.asarray(block["values"], dtype=float).ravel()))
    amp = block.get("amplitude", [0.0] * n)
    amp = tuple(float(a) for a in np.atleast_1d(np.asarray(amp, dtype=float)))
    sig = Signal(kind, amp, float(block.get("frequency", 0.0)), float(block.get("phase", 0.0)))
    if sig.size != n:
        raise ValidationError(f"signals.{name}: size {sig.size}, expected {n}")
    return sig


def parse_initial(block, plant) -> InitialData:
    for key in ("x0", "chi0", "xhat0", "chihat0"):
        if key not in block:
            raise ValidationError(f"initial: missing {key}")
    x0, nx0 = _lambdify_profile(block["x0"], "z", "initial.x0")
    xh0, nx1 = _lambdify_profile(block["xhat0"], "z", "initial.xhat0")
    if nx0 != plant.n_x or nx1 != plant.n_x:
        raise ValidationError(f"initial: x0/xhat0 need {plant.n_x} components")
    chi0 = np.asarray(block["chi0"], dtype=float).ravel()
    chih0 = np.asarray(block["chihat0"], dtype=float).ravel()
    if chi0.size != plant.n_chi or chih0.size != plant.n_chi:
        raise ValidationError(f"initial: chi0/chihat0 need {plant.n_chi} entries")
    return InitialData(x0, chi0, xh0, chih0)


def builtin_config(name) -> dict:
    """Raw configuration of a builtin example."""
    if name not in PLANTS:
        raise ValidationError(f"unknown builtin {name!r} (choose {sorted(PLANTS)})")
    return {
        "plant": {"builtin": name},
        "signals": {"w": dict(EXAMPLE_W)},
        "initial": copy.deepcopy(EXAMPLE_INITIAL_EXPR),
        "grid": {"N_z": 200, "T_final": 20.0, "cfl": 0.9, "scheme": "upwind1"},
        "synthesis": copy.deepcopy(BUILTIN_SYNTHESIS[name]),
        "output": {"dir": f"out-{name}"},
    }


def parse_config(raw: dict, base_dir=".") -> ProblemConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config: top level must be an object")
    if "builtin" in raw:
        merged = builtin_config(raw["builtin"])
        for key, val in raw.items():
            if key == "builtin":
                continue
            if isinstance(val, dict) and isinstance(merged.get(key), dict):
                merged[key].update(val)
            else:
                merged[key] = val
        raw = merged
    if "plant" not in raw:
        raise ValidationError("config: missing plant block")
    plant = parse_plant(raw["plant"])
    sig = raw.get("signals") or {}
    signals = SignalSpec(u=parse_signal(sig.get("u"), plant.n_u, "u"),
                         w=parse_signal(sig.get("w"), plant.n_w, "w"))
    init_block = raw.get("initial") or EXAMPLE_INITIAL_EXPR
    initial = parse_initial(init_block, plant)
    g = raw.get("grid") or {}
    grid = GridSpec(int(g.get("N_z", 200)), float(g.get("T_final", 20.0)),
                    float(g.get("cfl", 0.9)), g.get("scheme", "upwind1"))
    s = dict(raw.get("synthesis") or {})
    known = set(SynthesisConfig.__dataclass_fields__)
    unknown = set(s) - known
    if unknown:
        raise ValidationError(f"synthesis: unknown fields {sorted(unknown)}")
    synthesis = SynthesisConfig(**s)
    if synthesis.mode not in ("auto", "detectable", "nondetectable"):
        raise ValidationError(f"synthesis.mode: {synthesis.mode!r}")
    if synthesis.selection not in ("first", "max_margin"):
        raise ValidationError(f"synthesis.selection: {synthesis.selection!r}")
    out = Path(base_dir) / (raw.get("output") or {}).get("dir", "out")
    return ProblemConfig(plant, signals, initial, grid, synthesis, out, raw)


def load_config(path) -> ProblemConfig:
    """Read a JSON config; the bare names "example1"/"example2" select a builtin setup."""
    if str(path) in PLANTS and not Path(path).exists():
        return parse_config(builtin_config(str(path)))
    path = Path(path)
    return parse_config(read_json(path), base_dir=path.parent)
