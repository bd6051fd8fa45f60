"""Bright-soliton propagation error against the exact moving solution."""

import argparse

import numpy as np

from gpesolve import oracles as orc
from gpesolve.dynamics import EvolveConfig, evolve
from gpesolve.grid import Grid
from gpesolve.model import ModelParams


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--Ms", type=int, nargs="+", default=[256, 512, 1024])
    p.add_argument("--tau", type=float, default=1e-3)
    args = p.parse_args()
    beta = -1.0
    print(f"{'M':>6} {'max error':>11} {'mass':>16}")
    for M in args.Ms:
        g = Grid(-32.0, 32.0, M)
        x = g.coords("periodic")[0]
        psi = orc.bright_soliton(x, 0.0, args.A, args.v, beta=beta)
        tr = evolve(g, psi, ModelParams(1, beta, potential="free"),
                    EvolveConfig(tau=args.tau, T=args.T, stride=10**9))
        exact = orc.bright_soliton(x, args.T, args.A, args.v, beta=beta)
        print(f"{M:6d} {np.max(np.abs(tr.final - exact)):11.3e} {tr.column('mass')[-1]:16.12f}")
    print("oracle mass:", orc.soliton_mass(args.A, beta))


if __name__ == "__main__":
    main()
