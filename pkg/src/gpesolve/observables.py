"""Mass, energy, chemical potential and moment diagnostics.

Every integral is the h-weighted node sum that defines the discrete norm.
Gradients are spectral by default (sine series on the full layout, FFT on
the periodic layout); ``gradient="fd"`` switches the kinetic energy to
forward differences as a cross-check.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.fft as sfft

from .errors import InvalidInputError, UnsupportedDimensionError
from .grid import fft_workers, fourier_symbol, gradient, sine_forward, sine_symbol

log = logging.getLogger(__name__)

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float = 0.0
    potential: float = 0.0
    interaction: float = 0.0
    rotation: float = 0.0
    dipolar: float = 0.0
    josephson: float = 0.0

    @property
    def total(self):
        return (self.kinetic + self.potential + self.interaction
                + self.rotation + self.dipolar + self.josephson)

    def to_dict(self):
        return dict(asdict(self), total=self.total)


def _density(psi):
    return (psi * np.conj(psi)).real


def mass(grid, psi):
    return grid.cell_volume * float(np.sum(_density(psi)))


def kinetic_energy(grid, psi, epsilon=1.0, gradient_mode="spectral"):
    """``eps^2 / 2 int |grad psi|^2``."""
    layout = grid.layout(psi)
    if gradient_mode == "spectral":
        if layout == "full":
            weight = float(np.prod([2 * h / m for h, m in zip(grid.h, grid.M)]))
            c = sine_forward(grid, psi)
            val = weight * float(np.sum(sine_symbol(grid) * _density(c)))
        else:
            F = sfft.fftn(psi, workers=fft_workers())
            val = grid.cell_volume / psi.size * float(np.sum(fourier_symbol(grid) * _density(F)))
    elif gradient_mode == "fd":
        val = 0.0
        for k, h in enumerate(grid.h):
            diff = np.diff(psi, axis=k) if layout == "full" else np.roll(psi, -1, axis=k) - psi
            val += float(np.sum(_density(diff))) / h**2
        val *= grid.cell_volume
    else:
        raise InvalidInputError(f"unknown gradient mode {gradient_mode!r}")
    return 0.5 * epsilon**2 * val


def angular_momentum(grid, psi, return_residual=False):
    """``<Lz> = int conj(psi) (-i)(x dpsi/dy - y dpsi/dx)``, real part.

    With ``return_residual=True`` the imaginary part of the integral is
    returned as well; it should vanish up to discretization error.
    """
    if grid.dim < 2:
        raise UnsupportedDimensionError("angular momentum needs dimension 2 or 3")
    coords = grid.coords_like(psi)
    lz_psi = -1j * (coords[0] * gradient(grid, psi, 1) - coords[1] * gradient(grid, psi, 0))
    value = grid.cell_volume * np.vdot(psi, lz_psi)
    if abs(value.imag) > 1e-10:
        log.debug("angular momentum imaginary residual %.3e", value.imag)
    if return_residual:
        return float(value.real), float(value.imag)
    return float(value.real)


def energy(grid, psi, model, *, dipole=None, potential=None, gradient_mode="spectral",
           dipolar_solver=None):
    """Energy split into its parts; absent physics contributes exactly 0.

    ``potential`` overrides the trap sampled from ``model`` (it must match
    the array layout of ``psi``). ``dipolar_solver`` is an optional
    precomputed :class:`gpesolve.dipolar.DipolarSolver`.
    """
    model.check_grid(grid)
    layout = grid.layout(psi)
    V = model.potential_on(grid, layout) if potential is None else potential
    rho = _density(psi)
    dv = grid.cell_volume
    kin = kinetic_energy(grid, psi, model.epsilon, gradient_mode)
    pot = dv * float(np.sum(V * rho))
    inter = 0.5 * model.beta * dv * float(np.sum(rho * rho))
    rot = -model.omega * angular_momentum(grid, psi) if model.omega else 0.0
    dip = 0.0
    if dipole is not None:
        from .dipolar import DipolarSolver

        solver = dipolar_solver or DipolarSolver(grid, dipole)
        dip = 0.5 * dv * float(np.sum(solver.term(rho) * rho))
    return EnergyBreakdown(kin, pot, inter, rot, dip)


def chemical_potential(grid, phi, model, **kwargs):
    """``mu = E + E_int`` (plus the dipolar part, which is also quartic)."""
    e = energy(grid, phi, model, **kwargs)
    return e.total + e.interaction + e.dipolar


def widths(grid, psi):
    """Second moments ``delta_alpha = int alpha^2 |psi|^2`` per axis."""
    rho = _density(psi)
    return tuple(grid.cell_volume * float(np.sum(x * x * rho)) for x in grid.coords_like(psi))


def center_of_mass(grid, psi):
    rho = _density(psi)
    return np.array([grid.cell_volume * float(np.sum(x * rho)) for x in grid.coords_like(psi)])


def second_moments(grid, psi):
    """Full matrix ``int x_i x_j |psi|^2``."""
    rho = _density(psi)
    coords = grid.coords_like(psi)
    d = grid.dim
    out = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            out[i, j] = out[j, i] = grid.cell_volume * float(np.sum(coords[i] * coords[j] * rho))
    return out


def momentum(grid, psi):
    """``int Im(conj(psi) grad psi)``, the initial velocity of the center of mass."""
    return np.array([grid.cell_volume * float(np.sum((np.conj(psi) * gradient(grid, psi, k)).imag))
                     for k in range(grid.dim)])


def width_rates(grid, psi):
    """``2 int alpha Im(conj(psi) d_alpha psi)`` per axis."""
    coords = grid.coords_like(psi)
    return tuple(2 * grid.cell_volume * float(np.sum(x * (np.conj(psi) * gradient(grid, psi, k)).imag))
                 for k, x in enumerate(coords))


def energy_cgpe(grid, Psi, model, so):
    """Energy of a two-component spin-orbit-coupled state ``Psi`` (leading axis 2)."""
    psi1, psi2 = Psi
    layout = grid.layout(psi1)
    V = model.potential_on(grid, layout)
    dv = grid.cell_volume
    rho = np.stack([_density(psi1), _density(psi2)])
    kin = kinetic_energy(grid, psi1, model.epsilon) + kinetic_energy(grid, psi2, model.epsilon)
    pot = dv * float(np.sum(V * (rho[0] + rho[1])))
    B = so.beta_matrix
    inter = 0.5 * dv * float(sum(B[j, l] * np.sum(rho[j] * rho[l]) for j in range(2) for l in range(2)))
    detuning = 0.5 * so.delta * dv * float(np.sum(rho[0] - rho[1]))
    so_term = so.k0 * dv * np.vdot(psi1, gradient(grid, psi1, 0)) - so.k0 * dv * np.vdot(psi2, gradient(grid, psi2, 0))
    # i k0 (conj(psi) dpsi) integrates to a real number since the integral is imaginary
    spin_orbit = float((1j * so_term).real)
    rabi = so.rabi * dv * float(np.sum((psi1 * np.conj(psi2)).real))
    return EnergyBreakdown(kin, pot, inter, josephson=detuning + spin_orbit + rabi)


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    mass: float
    energy: EnergyBreakdown
    mu: float
    widths: tuple
    center: tuple
    lz: float = math.nan

    def row(self, d):
        e = self.energy
        w = list(self.widths) + [math.nan] * (3 - len(self.widths))
        return ([self.t, self.mass, e.total, e.kinetic, e.potential, e.interaction, e.rotation,
                 e.dipolar, e.josephson, self.mu] + w + list(self.center[:d]) + [self.lz])


def csv_columns(d):
    return (["t", "N", "E_total", "E_kin", "E_pot", "E_int", "E_rot", "E_dip", "E_jj", "mu",
             "delta_x", "delta_y", "delta_z"] + [f"xc_{k + 1}" for k in range(d)] + ["Lz"])


def observe(grid, psi, model, t=0.0, **energy_kwargs):
    e = energy(grid, psi, model, **energy_kwargs)
    lz = angular_momentum(grid, psi) if grid.dim >= 2 else math.nan
    return ObservableRecord(
        t=float(t),
        mass=mass(grid, psi),
        energy=e,
        mu=e.total + e.interaction + e.dipolar,
        widths=widths(grid, psi),
        center=tuple(center_of_mass(grid, psi)),
        lz=lz,
    )


def write_csv(path, records, d):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_columns(d))
        for rec in records:
            writer.writerow([repr(float(v)) for v in rec.row(d)])
