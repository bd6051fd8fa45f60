"""Temporal order of the time-splitting scheme and the effect of spatial refinement."""

import argparse

import numpy as np

from gpesolve.dynamics import EvolveConfig, estimate_order, evolve
from gpesolve.grid import Grid, sine_interpolate
from gpesolve.groundstate import GfdnConfig, solve_ground_state
from gpesolve.model import ModelParams


def shifted_ground_state(grid, model, x0):
    phi = solve_ground_state(model, grid, GfdnConfig(tol=1e-10)).phi
    return sine_interpolate(grid, phi, (grid.x[0] - x0)[:, None]).astype(complex)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--M", type=int, default=256)
    p.add_argument("--taus", type=float, nargs="+", default=[8e-3, 4e-3, 2e-3, 1e-3, 5e-4])
    args = p.parse_args()
    grid = Grid(-16.0, 16.0, args.M)
    m = ModelParams(1, args.beta)
    psi = shifted_ground_state(grid, m, 0.5)
    finals = [evolve(grid, psi, m, EvolveConfig(tau=t, T=args.T, stride=10**9)).final for t in args.taus]
    print(f"{'tau':>10} {'tau/2':>10} {'diff':>11} {'order':>7}")
    for i in range(len(finals) - 2):
        order, e1, e2 = estimate_order(finals[i:i + 3])
        print(f"{args.taus[i + 1]:10.2e} {args.taus[i + 2]:10.2e} {e2:11.3e} {order:7.3f}")
    fine = Grid(grid.a, grid.b, 2 * args.M)
    psi_f = shifted_ground_state(fine, m, 0.5)
    final_f = evolve(fine, psi_f, m, EvolveConfig(tau=args.taus[-1], T=args.T, stride=10**9)).final
    print(f"change on doubling M at tau={args.taus[-1]:g}: {np.max(np.abs(final_f[::2] - finals[-1])):.3e}")


if __name__ == "__main__":
    main()
