"""Ground-state energy and chemical potential against the Thomas-Fermi closed forms."""

import argparse

from gpesolve import oracles as orc
from gpesolve.groundstate import GfdnConfig, default_grid, default_tau, solve_ground_state
from gpesolve.model import ModelParams


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=1, choices=(1, 2))
    p.add_argument("--betas", type=float, nargs="+", default=[10, 50, 100, 400, 1600])
    p.add_argument("--tol", type=float, default=1e-8)
    args = p.parse_args()
    print(f"{'beta':>8} {'E_g':>12} {'E_TF':>12} {'rel':>9} {'mu_g':>12} {'mu_TF':>12} {'rel':>9}")
    for beta in args.betas:
        m = ModelParams(args.dim, beta)
        est = orc.tf_estimates(beta, m.trap, args.dim)
        res = solve_ground_state(m, default_grid(m), GfdnConfig(tau=default_tau(beta), tol=args.tol))
        print(f"{beta:8g} {res.energy:12.6f} {est.energy:12.6f} {abs(res.energy / est.energy - 1):9.2e} "
              f"{res.mu:12.6f} {est.mu:12.6f} {abs(res.mu / est.mu - 1):9.2e}")


if __name__ == "__main__":
    main()
