"""Bogoliubov-de Gennes excitations of a 1D ground state.

Linearizing ``psi = e^{-i mu t}[phi + u e^{-i w t} - conj(v) e^{i conj(w) t}]``
around a real ground state gives

    w u =  L u - beta phi^2 v,
    w v = beta phi^2 u - L v,      L = -eps^2/2 Lap + V + 2 beta phi^2 - mu,

discretized with the sine-spectral Laplacian used by the ground-state
solver and solved densely.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInputError, NumericalFailureError, UnsupportedDimensionError
from .groundstate import eigen_residual

ZERO_TOL = 1e-6


@dataclass
class BdgMode:
    omega: complex
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    norm: float = 1.0

    @property
    def norm_defect(self):
        return self.norm - 1.0


@dataclass
class BdgSpectrum:
    modes: list
    zero: np.ndarray
    negative: np.ndarray

    @property
    def frequencies(self):
        return np.array([m.omega for m in self.modes])


@dataclass
class BdgOperator:
    matrix: np.ndarray
    grid: object
    L: np.ndarray = field(repr=False)


def sine_laplacian_matrix(grid):
    """Dense ``(M-1) x (M-1)`` matrix of the sine-spectral Laplacian on interior nodes."""
    if grid.dim != 1:
        raise UnsupportedDimensionError("Bogoliubov operator is assembled for d = 1 only")
    M = grid.M[0]
    j = np.arange(1, M)
    S = np.sin(np.pi * np.outer(j, j) / M)
    mu2 = grid.freqs[0] ** 2
    return -(2.0 / M) * (S * mu2) @ S


def assemble_bdg(grid, phi, mu, model, residual_tol=1e-6):
    """Block operator ``[[L, -beta phi^2], [beta phi^2, -L]]`` on interior nodes."""
    if model.dim != 1 or grid.dim != 1:
        raise UnsupportedDimensionError("Bogoliubov operator is assembled for d = 1 only")
    phi = np.asarray(phi)
    if np.iscomplexobj(phi):
        if np.max(np.abs(phi.imag)) > 1e-12:
            raise InvalidInputError("ground state must be real")
        phi = phi.real
    res = eigen_residual(grid, phi, mu, model)
    if res > residual_tol:
        raise InvalidInputError(f"ground state not converged: eigen-residual {res:.3e} > {residual_tol:g}")
    inner = phi[grid.interior]
    V = model.potential_on(grid)[grid.interior]
    L = -0.5 * model.epsilon**2 * sine_laplacian_matrix(grid)
    L[np.diag_indices_from(L)] += V + 2 * model.beta * inner**2 - mu
    C = np.diag(model.beta * inner**2)
    return BdgOperator(np.block([[L, -C], [C, -L]]), grid, L)


def solve_bdg(op, zero_tol=ZERO_TOL):
    """Dense eigensolve; positive-norm modes normalized to ``||u||^2 - ||v||^2 = 1``.

    An eigenpair counts as a zero (Goldstone) mode when ``|w| < zero_tol`` or
    when its indefinite norm vanishes relative to ``||u||^2 + ||v||^2``.
    """
    try:
        w, vecs = sla.eig(op.matrix)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(f"BdG eigensolve failed: {exc}") from exc
    grid = op.grid
    h = grid.h[0]
    n = op.L.shape[0]
    modes, zero, negative = [], [], []
    for k in range(len(w)):
        u, v = vecs[:n, k], vecs[n:, k]
        pu = h * float(np.vdot(u, u).real)
        pv = h * float(np.vdot(v, v).real)
        norm = pu - pv
        if abs(w[k]) < zero_tol or abs(norm) < 1e-8 * (pu + pv):
            zero.append(w[k])
            continue
        if norm < 0:
            negative.append(w[k])
            continue
        scale = 1.0 / np.sqrt(norm)
        U = np.zeros(grid.shape, dtype=complex)
        Vf = np.zeros(grid.shape, dtype=complex)
        U[grid.interior] = u * scale
        Vf[grid.interior] = v * scale
        modes.append(BdgMode(complex(w[k]), U, Vf, (pu - pv) * scale**2))
    modes.sort(key=lambda m: m.omega.real)
    return BdgSpectrum(modes, np.array(zero), np.sort_complex(np.array(negative)))


def write_modes_csv(path, spectrum):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re_omega", "im_omega", "norm_defect"])
        for i, m in enumerate(spectrum.modes):
            writer.writerow([i, repr(m.omega.real), repr(m.omega.imag), repr(m.norm_defect)])
