"""Vortex-free against vortex-seeded rotating ground states over a range of Omega."""

import argparse

from gpesolve import observables as obs
from gpesolve.grid import Grid
from gpesolve.groundstate import GfdnConfig, solve_ground_state, solve_ground_state_rotating
from gpesolve.model import ModelParams


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--beta", type=float, default=100.0)
    p.add_argument("--omegas", type=float, nargs="+", default=[0.2, 0.4, 0.5, 0.6])
    p.add_argument("--M", type=int, default=64)
    p.add_argument("--L", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=1e-5)
    args = p.parse_args()
    grid = Grid.cube(-args.L, args.L, args.M, 2)
    radial = solve_ground_state(ModelParams(2, args.beta), grid, GfdnConfig(tol=1e-8)).phi
    print(f"{'omega':>6} {'E_novortex':>12} {'E_vortex':>12} {'Lz_vortex':>10} {'lower':>8}")
    for om in args.omegas:
        m = ModelParams(2, args.beta, omega=om)
        # the radial state is stationary in the rotating frame, so its energy is the vortex-free one
        e_free = obs.energy(grid, radial, m).total
        res = solve_ground_state_rotating(m, grid, GfdnConfig(tol=args.tol, initial="vortex"))
        lz = obs.angular_momentum(grid, res.phi)
        lower = "vortex" if res.energy < e_free else "none"
        print(f"{om:6.2f} {e_free:12.6f} {res.energy:12.6f} {lz:10.4f} {lower:>8}")


if __name__ == "__main__":
    main()
