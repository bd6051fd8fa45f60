"""Lowest Bogoliubov frequencies against the oscillator and hydrodynamic limits."""

import argparse

import numpy as np

from gpesolve.bogoliubov import assemble_bdg, solve_bdg
from gpesolve.grid import Grid
from gpesolve.groundstate import GfdnConfig, solve_ground_state
from gpesolve.model import ModelParams


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--betas", type=float, nargs="+", default=[0, 1, 10, 100, 1000])
    p.add_argument("--M", type=int, default=256)
    p.add_argument("--modes", type=int, default=4)
    args = p.parse_args()
    grid = Grid(-16.0, 16.0, args.M)
    n = np.arange(1, args.modes + 1)
    print("oscillator limit:  ", " ".join(f"{w:8.4f}" for w in n))
    print("hydrodynamic limit:", " ".join(f"{w:8.4f}" for w in np.sqrt(n * (n + 1) / 2)))
    for beta in args.betas:
        m = ModelParams(1, beta)
        res = solve_ground_state(m, grid, GfdnConfig(tau=1e-3 if beta > 100 else 1e-2, tol=1e-12))
        spec = solve_bdg(assemble_bdg(grid, res.phi, res.mu, m))
        w = spec.frequencies[: args.modes].real
        print(f"beta={beta:<10g}    ", " ".join(f"{v:8.4f}" for v in w))


if __name__ == "__main__":
    main()
