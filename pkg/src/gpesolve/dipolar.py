"""Nonlocal dipolar term ``eta * L_n u`` with ``u = G * |psi|^2``.

``G`` is the Coulomb kernel ``1/(4 pi |x|)`` in 3D and ``1/(2 pi |x|)`` for
the 2D surface-density model (Fourier symbols ``1/|xi|^2`` and
``1/|xi|``).

Two solvers are provided, chosen by the field layout:

* full (Dirichlet) layout: free-space convolution with a truncated kernel.
  The kernel is cut off at ``R`` = box diameter, whose Fourier transform is
  smooth (``(1 - cos(R k))/k^2`` in 3D, ``(1/k) int_0^{kR} J0`` in 2D), so
  the convolution over the box is computed exactly for band-limited
  densities by a zero-padded FFT. This realizes ``u -> 0`` at infinity.
* periodic layout: plain FFT with the zero mode of ``G`` set to 0.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft
from scipy.special import j0, j1, struve

from .errors import InvalidInputError
from .grid import fft_workers
from .model import DipoleParams, dipolar_kernel_hat


def truncated_kernel_hat(k, R, mode):
    """Fourier transform of the kernel restricted to ``|x| <= R``."""
    k = np.asarray(k, dtype=float)
    if mode == "3d":
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 2.0 * np.sin(0.5 * R * k) ** 2 / k**2
        return np.where(k > 0, out, 0.5 * R * R)
    if mode == "2d-sdm":
        x = R * k
        out = R * (j0(x) + 0.5 * np.pi * (j1(x) * struve(0, x) - j0(x) * struve(1, x)))
        return np.where(k > 0, out, R)
    raise InvalidInputError(f"unknown kernel mode {mode!r}")


def _ln_symbol(xi, dipole):
    """Fourier symbol of ``L_n``: ``-(n.xi)^2`` (3D) or ``-(n_perp.xi)^2 + n3^2 |xi|^2`` (2D)."""
    n = dipole.axis
    if dipole.mode == "3d":
        return -sum(nk * x for nk, x in zip(n, xi)) ** 2
    return -(n[0] * xi[0] + n[1] * xi[1]) ** 2 + n[2] ** 2 * (xi[0] ** 2 + xi[1] ** 2)


class DipolarSolver:
    def __init__(self, grid, dipole: DipoleParams):
        if grid.dim != dipole.dim:
            raise InvalidInputError(f"dipole mode {dipole.mode!r} needs a {dipole.dim}D grid, got {grid.dim}D")
        self.grid = grid
        self.dipole = dipole
        self._free = None
        self._periodic = None

    # --- free space (full layout) --------------------------------------
    def _build_free(self):
        grid = self.grid
        lengths = grid.length
        R = math.sqrt(sum(L * L for L in lengths))
        over = [math.ceil((R + L) / L) + 1 for L in lengths]
        P = [s * m for s, m in zip(over, grid.M)]
        freq = [2 * np.pi * np.arange(p // 2 + 1) / (p * h) for p, h in zip(P, grid.h)]
        K = np.meshgrid(*freq, indexing="ij", sparse=True)
        ghat = truncated_kernel_hat(np.sqrt(sum(k * k for k in K)), R, self.dipole.mode)
        g = sfft.dctn(ghat, type=1, workers=fft_workers()) / float(np.prod([p * h for p, h in zip(P, grid.h)]))
        idx = [np.minimum(np.arange(2 * m), 2 * m - np.arange(2 * m)) for m in grid.M]
        kernel = g[np.ix_(*idx)]
        khat = sfft.rfftn(kernel, workers=fft_workers())
        xi = self._padded_wavenumbers()
        self._free = (khat * grid.cell_volume, khat * _ln_symbol(xi, self.dipole) * grid.cell_volume)

    def _padded_wavenumbers(self):
        grid = self.grid
        axes = [2 * np.pi * np.fft.fftfreq(2 * m, d=h) for m, h in zip(grid.M[:-1], grid.h[:-1])]
        axes.append(2 * np.pi * np.fft.rfftfreq(2 * grid.M[-1], d=grid.h[-1]))
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def _convolve(self, rho, which):
        if self._free is None:
            self._build_free()
        grid = self.grid
        shape = tuple(2 * m for m in grid.M)
        w = fft_workers()
        rhat = sfft.rfftn(rho, s=shape, workers=w)
        out = sfft.irfftn(rhat * self._free[which], s=shape, workers=w)
        return out[tuple(slice(0, m + 1) for m in grid.M)]

    # --- periodic layout -------------------------------------------------
    def _build_periodic(self):
        grid = self.grid
        xi = np.meshgrid(*grid.wavenumbers, indexing="ij", sparse=True)
        xi_vec = np.stack(np.broadcast_arrays(*xi), axis=-1)
        ghat = dipolar_kernel_hat(xi_vec, self.dipole.mode)
        self._periodic = (ghat, ghat * _ln_symbol(xi, self.dipole))

    def _periodic_apply(self, rho, which):
        if self._periodic is None:
            self._build_periodic()
        w = fft_workers()
        return sfft.ifftn(sfft.fftn(rho, workers=w) * self._periodic[which], workers=w).real

    # --- public ------------------------------------------------------------
    def potential(self, rho):
        """``u = G * rho``."""
        if self.grid.layout(rho) == "full":
            return self._convolve(np.asarray(rho, dtype=float), 0)
        return self._periodic_apply(rho, 0)

    def term(self, rho):
        """``eta * L_n u``, the real potential added to the phase step."""
        if self.grid.layout(rho) == "full":
            out = self._convolve(np.asarray(rho, dtype=float), 1)
        else:
            out = self._periodic_apply(rho, 1)
        return self.dipole.eta * out


def dipolar_term(grid, psi, dipole):
    """``eta * L_n (G * |psi|^2)`` for a single field."""
    rho = (psi * np.conj(psi)).real
    return DipolarSolver(grid, dipole).term(rho)


def poisson_potential(grid, rho, dipole):
    return DipolarSolver(grid, dipole).potential(rho)


def ddi_potential_periodic(grid, rho, lam, axis):
    """3D dipole-dipole potential from its Fourier symbol ``lam (3 (n.xi)^2/|xi|^2 - 1)``.

    The symbol is taken as ``-lam`` at ``xi = 0``, matching the zero-mode
    convention of the decomposed form.
    """
    if grid.dim != 3:
        raise InvalidInputError("the dipole-dipole kernel is three-dimensional")
    xi = np.meshgrid(*grid.wavenumbers, indexing="ij", sparse=True)
    k2 = sum(x * x for x in xi)
    nxi = sum(n * x for n, x in zip(axis, xi))
    with np.errstate(invalid="ignore", divide="ignore"):
        sym = np.where(k2 > 0, lam * (3 * nxi**2 / np.where(k2 > 0, k2, 1.0) - 1), -lam)
    w = fft_workers()
    return sfft.ifftn(sfft.fftn(rho, workers=w) * sym, workers=w).real
