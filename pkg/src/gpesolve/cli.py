"""Command-line experiment runner.

    gpesolve <mode> --config run.yaml [--out DIR] [--deterministic]

Exit codes: 0 success, 2 invalid config/input, 3 non-convergence,
4 blow-up or numerical instability, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import observables as obs
from .bogoliubov import assemble_bdg, solve_bdg, write_modes_csv
from .config import MODES, ConfigError, ExperimentConfig, load_config
from .dynamics import EvolveConfig, evolve, estimate_order
from .errors import BlowUpError, InvalidInputError, NonConvergenceError, NumericalFailureError
from .grid import THREADS_ENV, Grid, read_field, sine_interpolate, write_field
from .groundstate import solve_ground_state, solve_ground_state_rotating, tf_ground_state
from .model import ModelParams
from .oracles import bright_soliton, gaussian, linear_ground_state

log = logging.getLogger("gpesolve")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE, EXIT_BLOWUP, EXIT_IO = 0, 2, 3, 4, 5


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


# ----------------------------------------------------------------------------
# initial data


def _shift_sample(grid, phi, layout, x0):
    """``phi(x - x0)`` by sine interpolation, on the requested layout."""
    coords = grid.coords(layout)
    full = np.meshgrid(*[np.ravel(c) for c in coords], indexing="ij")
    pts = np.stack([f.ravel() for f in full], axis=1) - np.asarray(x0, float)
    return sine_interpolate(grid, phi, pts).reshape(full[0].shape)


def _zero_boundary(grid, field):
    out = np.array(field, dtype=complex)
    for k in range(grid.dim):
        idx = [slice(None)] * grid.dim
        idx[k] = [0, -1]
        out[tuple(idx)] = 0
    return out


def build_initial(cfg: ExperimentConfig, grid=None, layout=None):
    """Initial field from the ``initial`` section (oracle name plus parameters)."""
    grid = grid or cfg.grid
    layout = layout or ("periodic" if cfg.basis == "fourier" else "full")
    spec = cfg.initial
    d = grid.dim
    kind = spec.get("type", "groundstate")
    coords = grid.coords(layout)
    x0 = np.zeros(d) if spec.get("x0") is None else np.broadcast_to(np.asarray(spec["x0"], float), (d,))
    w0 = np.zeros(d) if spec.get("w0") is None else np.broadcast_to(np.asarray(spec["w0"], float), (d,))
    extra = {}
    if kind == "groundstate":
        model = cfg.model
        frame = ModelParams(model.dim, float(spec.get("beta", model.beta)), model.trap, 0.0, model.epsilon)
        res = solve_ground_state(frame, grid, cfg.gfdn)
        extra = {"E_g": res.energy, "mu_g": res.mu, "iterations": res.iterations}
        if np.any(x0 != 0) or layout == "periodic":
            psi = _shift_sample(grid, res.phi, layout, x0)
        else:
            psi = res.phi
    elif kind == "linear":
        sampler, _, _ = linear_ground_state(d, cfg.model.trap, cfg.model.epsilon)
        psi = sampler([c - x for c, x in zip(coords, x0)])
    elif kind == "thomas-fermi":
        phi, _, _ = tf_ground_state(cfg.model, grid)
        psi = _shift_sample(grid, phi, layout, x0)
        psi = psi / np.sqrt(obs.mass(grid, psi))
    elif kind == "gaussian":
        psi = gaussian(coords, center=spec.get("center", x0), width=spec.get("width", 1.0),
                       momentum=spec.get("momentum", w0))
        w0 = np.zeros(d)
    elif kind == "soliton":
        if d != 1:
            raise InvalidInputError("soliton initial data is one-dimensional")
        psi = bright_soliton(coords[0], 0.0, float(spec.get("A", 1.0)), float(spec.get("v", 0.0)),
                             float(x0[0]), float(spec.get("theta0", 0.0)), cfg.model.beta)
    elif kind == "plane-wave":
        k = np.broadcast_to(np.asarray(spec.get("k", 0.0), float), (d,))
        psi = float(spec.get("A", 1.0)) * np.exp(1j * sum(kk * c for kk, c in zip(k, coords)))
        psi = np.broadcast_to(psi, grid.shape if layout == "full" else grid.periodic_shape)
    elif kind == "file":
        fgrid, psi = read_field(spec["path"])
        if fgrid != grid:
            raise InvalidInputError(f"field dump grid {fgrid.to_dict()} does not match config grid")
    else:
        raise InvalidInputError(f"unknown initial type {kind!r}")
    psi = np.asarray(psi, dtype=complex)
    if np.any(w0 != 0):
        psi = psi * np.exp(1j * sum(w * c for w, c in zip(w0, coords)))
    if spec.get("vortex"):
        if d < 2:
            raise InvalidInputError("vortex imprinting needs d >= 2")
        psi = psi * (coords[0] + 1j * coords[1]) ** int(spec["vortex"])
        psi = psi / np.sqrt(obs.mass(grid, psi))
    if layout == "full":
        psi = _zero_boundary(grid, psi)
    return psi, extra


def _pair(cfg, psi):
    f = np.asarray(cfg.initial.get("fractions", (0.5, 0.5)), float)
    if f.shape != (2,) or np.any(f < 0):
        raise InvalidInputError("initial.fractions must be two nonnegative numbers")
    return np.stack([np.sqrt(f[0]) * psi, np.sqrt(f[1]) * psi])


# ----------------------------------------------------------------------------
# modes


def _run_groundstate(cfg, out, rotating=False):
    gfdn = cfg.gfdn
    if cfg.initial.get("type") == "file":
        psi, _ = build_initial(cfg)
        gfdn = replace(gfdn, initial="user", initial_field=psi if rotating else np.abs(psi))
    solver = solve_ground_state_rotating if rotating else solve_ground_state
    res = solver(cfg.model, cfg.grid, gfdn)
    rec = obs.observe(cfg.grid, res.phi, cfg.model, 0.0)
    obs.write_csv(out / "observables.csv", [rec], cfg.grid.dim)
    if cfg.output["dump_fields"]:
        write_field(out / "ground_state.field", cfg.grid, res.phi, cfg.output["dtype"])
    summary = res.summary(cfg.model)
    if rotating:
        summary["Lz"] = rec.lz
    return summary


def _run_evolve(cfg, out, progress):
    psi, extra = build_initial(cfg)
    grid = cfg.grid
    if cfg.mode == "evolve-cgpe":
        psi = _pair(cfg, psi)
    traj = evolve(grid, psi, cfg.model, cfg.evolve, dipole=cfg.dipole, so=cfg.spin_orbit, progress=progress)
    obs.write_csv(out / "observables.csv", traj.records, grid.dim)
    if cfg.output["dump_fields"]:
        if cfg.mode == "evolve-cgpe":
            for j in range(2):
                write_field(out / f"final_{j + 1}.field", grid, traj.final[j], cfg.output["dtype"])
        else:
            snap_grid = grid
            write_field(out / "final.field", grid, traj.final, cfg.output["dtype"])
            for t, snap in traj.snapshots.items():
                write_field(out / f"snapshot_t{t:.6g}.field", snap_grid, snap, cfg.output["dtype"])
    mass = traj.column("mass")
    summary = {
        "records": len(traj.records),
        "steps": cfg.evolve.steps,
        "mass_drift": float(np.max(np.abs(mass - mass[0]))),
        "energy_drift": traj.energy_drift(),
        "final": _jsonable(traj.records[-1].energy.to_dict()),
    }
    summary.update(extra)
    return summary


def _run_bdg(cfg, out):
    res = solve_ground_state(cfg.model, cfg.grid, cfg.gfdn)
    spec = solve_bdg(assemble_bdg(cfg.grid, res.phi, res.mu, cfg.model, cfg.bdg["residual_tol"]))
    write_modes_csv(out / "modes.csv", spec)
    n = int(cfg.bdg["modes"])
    if cfg.output["dump_fields"]:
        for i, m in enumerate(spec.modes[:n]):
            write_field(out / f"mode_{i}_u.field", cfg.grid, m.u, cfg.output["dtype"])
            write_field(out / f"mode_{i}_v.field", cfg.grid, m.v, cfg.output["dtype"])
    return {
        "E_g": res.energy,
        "mu_g": res.mu,
        "frequencies": [m.omega.real for m in spec.modes[:n]],
        "max_imag": float(max((abs(m.omega.imag) for m in spec.modes), default=0.0)),
        "zero_modes": len(spec.zero),
    }


def _run_convergence(cfg, out, progress):
    conv = cfg.convergence
    T = float(conv["T"])
    psi0, _ = build_initial(cfg)
    finals = []
    rows = []
    for tau in conv["taus"]:
        steps = max(1, int(round(T / tau)))
        ec = EvolveConfig(tau=float(tau), T=T, stride=steps, scheme="gpe")
        traj = evolve(cfg.grid, psi0, cfg.model, ec, progress=progress)
        finals.append(traj.final)
    order, e1, e2 = estimate_order(finals)
    rows.append((conv["taus"][0], conv["taus"][1], e1))
    rows.append((conv["taus"][1], conv["taus"][2], e2))
    summary = {"order": order, "differences": [e1, e2], "taus": list(conv["taus"]), "T": T}
    if conv.get("refine_M"):
        grid = cfg.grid
        fine = Grid(grid.a, grid.b, tuple(2 * m for m in grid.M))
        fine_cfg = replace(cfg, grid=fine)
        psi_f, _ = build_initial(fine_cfg)
        tau = float(conv["taus"][-1])
        ec = EvolveConfig(tau=tau, T=T, stride=max(1, int(round(T / tau))), scheme="gpe")
        traj = evolve(fine, psi_f, cfg.model, ec, progress=progress)
        sub = traj.final[tuple(slice(None, None, 2) for _ in range(grid.dim))]
        summary["spatial_change"] = float(np.max(np.abs(sub - finals[-1])))
        summary["spatial_below_temporal"] = summary["spatial_change"] < e2
    with open(out / "convergence.csv", "w") as fh:
        fh.write("tau_coarse,tau_fine,max_abs_difference\n")
        for r in rows:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")
    return summary


def run_experiment(cfg: ExperimentConfig, out_dir=None, deterministic=False, progress=False):
    """Run one experiment; returns ``(exit_code, summary_dict)`` and writes artifacts."""
    out = Path(out_dir or cfg.output["dir"])
    summary = {"version": __version__, "mode": cfg.mode, "config": cfg.resolved}
    code = EXIT_OK
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.mode in ("groundstate", "groundstate-rotating"):
            results = _run_groundstate(cfg, out, rotating=cfg.mode == "groundstate-rotating")
        elif cfg.mode == "bdg":
            results = _run_bdg(cfg, out)
        elif cfg.mode == "convergence-study":
            results = _run_convergence(cfg, out, progress)
        else:
            results = _run_evolve(cfg, out, progress)
        summary["status"] = "ok"
        summary["results"] = _jsonable(results)
    except NonConvergenceError as exc:
        code = EXIT_NONCONVERGENCE
        summary.update(status="non-convergence", error=str(exc), iterations=exc.iterations, residual=exc.residual)
    except (BlowUpError, NumericalFailureError) as exc:
        code = EXIT_BLOWUP
        summary.update(status="blow-up", error=str(exc), time=getattr(exc, "time", None))
    except InvalidInputError as exc:
        code = EXIT_INVALID
        summary.update(status="invalid-input", error=str(exc))
    except OSError as exc:
        code = EXIT_IO
        summary.update(status="io-error", error=str(exc))
    if not deterministic:
        summary["wall_time_s"] = time.perf_counter() - start
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.json", "w") as fh:
            json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"gpesolve: cannot write summary: {exc}", file=sys.stderr)
        code = code or EXIT_IO
    return code, summary


def build_parser():
    p = argparse.ArgumentParser(prog="gpesolve", description="Gross-Pitaevskii experiment runner")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="YAML experiment file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded transforms and no wall-clock fields in the summary")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="[gpesolve] %(message)s")
    if args.deterministic:
        os.environ[THREADS_ENV] = "1"
    try:
        cfg = load_config(args.config, mode=args.mode)
    except ConfigError as exc:
        print(f"gpesolve: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"gpesolve: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    code, summary = run_experiment(cfg, args.out, args.deterministic, progress=True)
    if code:
        print(f"gpesolve: {summary.get('status')}: {summary.get('error')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
