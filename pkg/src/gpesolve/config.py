"""Experiment configuration: YAML text to a validated :class:`ExperimentConfig`.

Validation collects every problem it finds and raises one
:class:`ConfigError` listing all of them.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import EvolveConfig
from .errors import InvalidInputError
from .grid import Grid
from .groundstate import GfdnConfig, default_grid, default_tau
from .model import DipoleParams, ModelParams, SpinOrbitParams, TrapParams, beta_from_kappa

MODES = (
    "groundstate",
    "groundstate-rotating",
    "evolve",
    "evolve-rotating",
    "evolve-dipolar",
    "evolve-cgpe",
    "bdg",
    "convergence-study",
)

SCHEME_FOR_MODE = {
    "evolve": "gpe",
    "evolve-rotating": "gpe-rotating",
    "evolve-dipolar": "gpe-dipolar",
    "evolve-cgpe": "cgpe-spinorbit",
    "convergence-study": "gpe",
}

INITIAL_TYPES = ("groundstate", "linear", "thomas-fermi", "gaussian", "soliton", "plane-wave", "file")

SECTIONS = {
    "mode": None,
    "grid": {"a", "b", "M", "L"},
    "model": {"dimension", "beta", "kappa", "gamma_y", "gamma_z", "omega", "epsilon", "potential",
              "dipole", "spin_orbit"},
    "groundstate": {"tau", "tol", "max_iter", "initial", "backend"},
    "evolve": {"tau", "T", "stride", "snapshot_times", "basis"},
    "initial": {"type", "path", "x0", "w0", "center", "width", "momentum", "A", "v", "theta0", "k",
                "beta", "fractions", "vortex"},
    "bdg": {"modes", "residual_tol"},
    "convergence": {"taus", "T", "refine_M"},
    "output": {"dir", "dtype", "dump_fields"},
}
DIPOLE_KEYS = {"lambda", "axis", "mode"}
SO_KEYS = {"k0", "delta", "rabi", "beta11", "beta12", "beta22"}

REQUIRED = {
    "evolve-dipolar": ["model.dipole"],
    "evolve-cgpe": ["model.spin_orbit"],
}


class ConfigError(InvalidInputError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    mode: str
    grid: Grid
    model: ModelParams
    dipole: DipoleParams | None = None
    spin_orbit: SpinOrbitParams | None = None
    gfdn: GfdnConfig = field(default_factory=GfdnConfig)
    evolve: EvolveConfig | None = None
    basis: str = "sine"
    initial: dict = field(default_factory=dict)
    bdg: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)


def _axes(value, d, name, cast, errors):
    arr = list(np.atleast_1d(value))
    if len(arr) == 1:
        arr = arr * d
    if len(arr) != d:
        errors.append(f"grid.{name}: expected 1 or {d} entries, got {len(arr)}")
        return None
    try:
        return [cast(v) for v in arr]
    except (TypeError, ValueError):
        errors.append(f"grid.{name}: entries must be numbers")
        return None


def _build(ctor, kwargs, where, errors):
    try:
        return ctor(**kwargs)
    except InvalidInputError as exc:
        errors.append(f"{where}: {exc}")
    except TypeError as exc:
        errors.append(f"{where}: {exc}")
    return None


def parse_config(text, mode=None, base_dir=None):
    """Parse and validate; ``mode`` (from the command line) overrides the file."""
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"not valid YAML: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping of sections"])
    data = copy.deepcopy(data)
    errors = []

    for key in data:
        if key not in SECTIONS:
            errors.append(f"unknown key '{key}'")
    for sec, allowed in SECTIONS.items():
        if allowed is None or sec not in data:
            continue
        if not isinstance(data[sec], dict):
            errors.append(f"section '{sec}' must be a mapping")
            data[sec] = {}
            continue
        for key in data[sec]:
            if key not in allowed:
                errors.append(f"unknown key '{sec}.{key}'")

    file_mode = data.get("mode")
    if mode is not None and file_mode is not None and file_mode != mode:
        errors.append(f"mode '{file_mode}' in file conflicts with command-line mode '{mode}'")
    mode = mode or file_mode
    if mode is None:
        errors.append("missing 'mode'")
    elif mode not in MODES:
        errors.append(f"unknown mode '{mode}' (expected one of {', '.join(MODES)})")
        mode = None

    # --- model ---------------------------------------------------------
    msec = data.get("model", {})
    if "model" not in data:
        errors.append("missing required section 'model'")
    d = msec.get("dimension", 1)
    if d not in (1, 2, 3):
        errors.append(f"model.dimension must be 1, 2 or 3, got {d!r}")
        d = 1
    trap = _build(TrapParams, {"gamma_y": float(msec.get("gamma_y", 1.0)), "gamma_z": float(msec.get("gamma_z", 1.0))},
                  "model", errors) or TrapParams()
    if "beta" in msec and "kappa" in msec:
        errors.append("model: give either beta or kappa, not both")
    beta = float(msec["beta"]) if "beta" in msec else (
        float(beta_from_kappa(float(msec["kappa"]), trap, d)) if "kappa" in msec else 0.0)

    dipole = None
    if "dipole" in msec:
        dsec = msec["dipole"] or {}
        for key in dsec:
            if key not in DIPOLE_KEYS:
                errors.append(f"unknown key 'model.dipole.{key}'")
        if "lambda" not in dsec:
            errors.append("model.dipole: missing 'lambda'")
        else:
            dipole = _build(DipoleParams, {"lam": float(dsec["lambda"]),
                                           "axis": tuple(dsec.get("axis", (0.0, 0.0, 1.0))),
                                           "mode": dsec.get("mode", "3d")}, "model.dipole", errors)
        if dipole is not None and dipole.dim != d:
            errors.append(f"model.dipole: mode '{dipole.mode}' needs dimension {dipole.dim}, got {d}")
    so = None
    if "spin_orbit" in msec:
        ssec = msec["spin_orbit"] or {}
        for key in ssec:
            if key not in SO_KEYS:
                errors.append(f"unknown key 'model.spin_orbit.{key}'")
        so = _build(SpinOrbitParams, {k: float(ssec[k]) for k in SO_KEYS if k in ssec}, "model.spin_orbit", errors)

    model = _build(ModelParams, {"dim": d, "beta": beta, "trap": trap, "omega": float(msec.get("omega", 0.0)),
                                 "epsilon": float(msec.get("epsilon", 1.0)),
                                 "potential": msec.get("potential", "harmonic")}, "model", errors)

    for req in REQUIRED.get(mode, []):
        sec, key = req.split(".")
        if key not in data.get(sec, {}):
            errors.append(f"mode '{mode}' requires '{req}'")

    # existence checks
    if model is not None and mode in ("groundstate", "bdg", "groundstate-rotating"):
        if model.dim == 3 and model.beta < 0:
            errors.append("no ground state exists for d=3 with beta < 0 (energy unbounded below)")
    if model is not None and mode == "groundstate-rotating":
        if abs(model.omega) >= 1:
            errors.append(f"no ground state exists for |omega| >= 1 (got {model.omega})")
        if model.dim < 2:
            errors.append("groundstate-rotating needs dimension 2 or 3")
    if model is not None and mode in ("groundstate", "bdg", "convergence-study", "evolve", "evolve-dipolar",
                                      "evolve-cgpe") and model.omega:
        errors.append(f"mode '{mode}' does not take a nonzero omega (use the rotating modes)")
    if model is not None and mode == "evolve-rotating" and model.dim < 2:
        errors.append("evolve-rotating needs dimension 2 or 3")
    if mode == "bdg" and d != 1:
        errors.append("bdg mode supports dimension 1 only")

    # --- grid ------------------------------------------------------------
    gsec = data.get("grid", {})
    grid = None
    if model is not None:
        if not gsec:
            grid = default_grid(model)
        else:
            if "M" not in gsec:
                errors.append("grid: missing 'M'")
            elif "L" in gsec and ("a" in gsec or "b" in gsec):
                errors.append("grid: give either L or a/b")
            else:
                M = _axes(gsec["M"], d, "M", int, errors)
                if "L" in gsec:
                    Ls = _axes(gsec["L"], d, "L", float, errors)
                    a, b = ([-x for x in Ls], Ls) if Ls else (None, None)
                elif "a" in gsec and "b" in gsec:
                    a = _axes(gsec["a"], d, "a", float, errors)
                    b = _axes(gsec["b"], d, "b", float, errors)
                else:
                    default = default_grid(model)
                    a, b = list(default.a), list(default.b)
                if M and a and b:
                    grid = _build(Grid, {"a": tuple(a), "b": tuple(b), "M": tuple(M)}, "grid", errors)

    # --- solver sections -------------------------------------------------
    gs = data.get("groundstate", {})
    gfdn = _build(GfdnConfig, {"tau": gs.get("tau", default_tau(beta)), "tol": float(gs.get("tol", 1e-6)),
                               "max_iter": int(gs.get("max_iter", 200_000)),
                               "initial": gs.get("initial", "auto"), "backend": gs.get("backend", "spectral")},
                  "groundstate", errors)
    if gfdn is not None and gfdn.initial == "user":
        errors.append("groundstate.initial 'user' is not available from a config (use initial.type: file)")

    ev = None
    esec = data.get("evolve", {})
    basis = esec.get("basis", "sine")
    if basis not in ("sine", "fourier"):
        errors.append(f"evolve.basis must be 'sine' or 'fourier', got {basis!r}")
    if mode in SCHEME_FOR_MODE:
        if "evolve" not in data and mode != "convergence-study":
            errors.append(f"mode '{mode}' requires section 'evolve' (tau, T, stride)")
        ev = _build(EvolveConfig, {"tau": float(esec.get("tau", 1e-3)), "T": float(esec.get("T", 1.0)),
                                   "stride": int(esec.get("stride", 1)), "scheme": SCHEME_FOR_MODE[mode],
                                   "snapshot_times": tuple(esec.get("snapshot_times", ()))}, "evolve", errors)
        if mode == "evolve-cgpe" and basis != "sine":
            errors.append("evolve-cgpe always uses the padded Fourier basis; drop evolve.basis")
        if mode == "evolve-rotating" and basis != "sine":
            errors.append("evolve-rotating runs on the sine basis only")

    init = dict(data.get("initial", {}))
    itype = init.setdefault("type", "groundstate")
    if itype not in INITIAL_TYPES:
        errors.append(f"initial.type must be one of {INITIAL_TYPES}, got {itype!r}")
    if itype == "file":
        path = init.get("path")
        if not path:
            errors.append("initial.type 'file' needs initial.path")
        else:
            p = Path(path)
            if not p.is_absolute() and base_dir is not None:
                p = Path(base_dir) / p
            if not p.exists():
                errors.append(f"initial.path '{path}' does not exist")
            init["path"] = str(p)
    if itype == "soliton" and model is not None and model.beta >= 0:
        errors.append("initial.type 'soliton' needs beta < 0")

    conv = dict(data.get("convergence", {}))
    conv.setdefault("taus", [4e-3, 2e-3, 1e-3])
    conv.setdefault("T", ev.T if ev is not None else 1.0)
    conv.setdefault("refine_M", True)
    if mode == "convergence-study" and len(conv["taus"]) != 3:
        errors.append("convergence.taus must list exactly three step sizes")

    bdg = dict(data.get("bdg", {}))
    bdg.setdefault("modes", 10)
    bdg.setdefault("residual_tol", 1e-6)

    out = dict(data.get("output", {}))
    out.setdefault("dir", "out")
    out.setdefault("dtype", "complex128")
    out.setdefault("dump_fields", True)
    if out["dtype"] not in ("complex64", "complex128"):
        errors.append(f"output.dtype must be complex64 or complex128, got {out['dtype']!r}")

    if errors:
        raise ConfigError(errors)

    resolved = {
        "mode": mode,
        "grid": grid.to_dict(),
        "model": dict(model.to_dict(), dimension=d),
        "groundstate": {"tau": gfdn.tau, "tol": gfdn.tol, "max_iter": gfdn.max_iter,
                        "initial": gfdn.initial, "backend": gfdn.backend},
        "initial": init,
        "bdg": bdg,
        "convergence": conv,
        "output": out,
    }
    resolved["model"].pop("dim", None)
    if dipole is not None:
        resolved["model"]["dipole"] = {"lambda": dipole.lam, "axis": list(dipole.axis), "mode": dipole.mode}
    if so is not None:
        resolved["model"]["spin_orbit"] = {k: getattr(so, k) for k in sorted(SO_KEYS)}
    if ev is not None:
        resolved["evolve"] = {"tau": ev.tau, "T": ev.T, "stride": ev.stride, "scheme": ev.scheme,
                              "snapshot_times": list(ev.snapshot_times), "basis": basis}
    return ExperimentConfig(mode, grid, model, dipole, so, gfdn, ev, basis, init, bdg, conv, out, resolved)


def load_config(path, mode=None):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), mode=mode, base_dir=path.parent)
