"""Two-component spin-orbit-coupled GPE on a periodic Fourier basis.

    i d_t psi1 = [-Lap/2 + V + i k0 d_x + delta/2 + b11|psi1|^2 + b12|psi2|^2] psi1 + (Omega/2) psi2
    i d_t psi2 = [-Lap/2 + V - i k0 d_x - delta/2 + b21|psi1|^2 + b22|psi2|^2] psi2 + (Omega/2) psi1

The ``i k0 d_x`` term is diagonal in Fourier space (symbol ``-k0 k_x``), so
the pair is stepped on the periodic layout of a padded grid. One step is
``K(tau/2) P(tau/2) R(tau) P(tau/2) K(tau/2)`` with ``K`` the kinetic plus
spin-orbit part, ``P`` the pointwise phase and ``R`` the exact Rabi
rotation.

In the phase-transformed form (``psi1 = phi1 e^{i(w t + k0 x)}``,
``psi2 = phi2 e^{i(w t - k0 x)}``, ``w = (delta - k0^2)/2``) the kinetic part
is plain ``-Lap/2``, the diagonal potentials are ``V + delta - k0^2`` and
``V - k0^2`` and the Rabi coupling picks up the phases ``e^{-+2 i k0 x}``.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from . import observables as obs
from .errors import InvalidInputError
from .grid import crop_periodic, embed_periodic, fft_workers
from .model import ModelParams

FORMS = ("original", "transformed")
DEFAULT_PAD = 2


def _check_pair(grid, Psi):
    Psi = np.asarray(Psi)
    if Psi.ndim != grid.dim + 1 or Psi.shape[0] != 2:
        raise InvalidInputError(f"expected a field pair of shape (2, ...), got {Psi.shape}")
    return grid.layout(Psi[0])


class CgpeStepper:
    """Splitting stepper for field pairs in the periodic layout of ``grid``."""

    def __init__(self, grid, model, so, tau, form="original"):
        model.check_grid(grid)
        if form not in FORMS:
            raise InvalidInputError(f"form must be one of {FORMS}, got {form!r}")
        self.grid, self.model, self.so, self.tau, self.form = grid, model, so, tau, form
        V = model.potential_on(grid, "periodic")
        k = np.meshgrid(*grid.wavenumbers, indexing="ij", sparse=True)
        k2 = sum(kk * kk for kk in k)
        kx = k[0]
        if form == "original":
            sym = np.stack(np.broadcast_arrays(0.5 * k2 - so.k0 * kx, 0.5 * k2 + so.k0 * kx))
            self.diag = np.stack(np.broadcast_arrays(V + 0.5 * so.delta, V - 0.5 * so.delta))
            self.coupling = np.full(grid.periodic_shape, 0.5 * so.rabi, dtype=complex)
        else:
            sym = np.stack(np.broadcast_arrays(0.5 * k2, 0.5 * k2))
            shift = so.k0**2
            self.diag = np.stack(np.broadcast_arrays(V + so.delta - shift, V - shift))
            x = grid.coords("periodic")[0]
            self.coupling = np.broadcast_to(0.5 * so.rabi * np.exp(-2j * so.k0 * x), grid.periodic_shape).copy()
        self.kinetic = np.exp(-0.5j * tau * sym)
        self.beta = so.beta_matrix
        # exact exp(-i tau [[0, c], [conj(c), 0]])
        a = np.abs(self.coupling)
        self.rot_cos = np.cos(tau * a)
        # the phase comes from the angle so subnormal couplings cannot overflow
        self.rot_sin = np.sin(tau * a) * np.exp(1j * np.angle(self.coupling))

    def _kinetic(self, Psi):
        w = fft_workers()
        axes = tuple(range(1, self.grid.dim + 1))
        return sfft.ifftn(sfft.fftn(Psi, axes=axes, workers=w) * self.kinetic, axes=axes, workers=w)

    def _phase(self, Psi, dt):
        rho = (Psi * np.conj(Psi)).real
        B = self.beta
        pot = np.stack([
            self.diag[0] + B[0, 0] * rho[0] + B[0, 1] * rho[1],
            self.diag[1] + B[1, 0] * rho[0] + B[1, 1] * rho[1],
        ])
        return Psi * np.exp(-1j * dt * pot)

    def _rabi(self, Psi):
        p1, p2 = Psi
        return np.stack([
            self.rot_cos * p1 - 1j * self.rot_sin * p2,
            self.rot_cos * p2 - 1j * np.conj(self.rot_sin) * p1,
        ])

    def step(self, Psi, t=0.0):
        Psi = self._kinetic(np.asarray(Psi, dtype=complex))
        Psi = self._phase(Psi, 0.5 * self.tau)
        Psi = self._rabi(Psi)
        Psi = self._phase(Psi, 0.5 * self.tau)
        return self._kinetic(Psi)

    def run(self, Psi, n, t0=0.0):
        for _ in range(n):
            Psi = self.step(Psi)
        return Psi


def tssp_step_cgpe(grid, Psi, model, so, tau, form="original"):
    """One splitting step for a periodic-layout pair on ``grid``."""
    if _check_pair(grid, Psi) != "periodic":
        raise InvalidInputError("the spin-orbit stepper works on the periodic layout (see evolve_cgpe)")
    return CgpeStepper(grid, model, so, tau, form).step(Psi)


def cgpe_phase_transform(grid, Psi, direction, so, t):
    """Map between the original and the phase-transformed unknowns.

    ``direction="forward"`` returns ``phi`` from ``psi``; ``"inverse"`` the
    reverse. Only phases change, so densities are untouched.
    """
    layout = _check_pair(grid, Psi)
    x = grid.coords(layout)[0]
    omega = 0.5 * (so.delta - so.k0**2)
    ph1 = np.exp(1j * (omega * t + so.k0 * x))
    ph2 = np.exp(1j * (omega * t - so.k0 * x))
    if direction == "forward":
        return np.stack([Psi[0] * np.conj(ph1), Psi[1] * np.conj(ph2)])
    if direction == "inverse":
        return np.stack([Psi[0] * ph1, Psi[1] * ph2])
    raise InvalidInputError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def energy_record(grid, Psi, model, so, t):
    e = obs.energy_cgpe(grid, Psi, model, so)
    rho = (Psi[0] * np.conj(Psi[0])).real + (Psi[1] * np.conj(Psi[1])).real
    coords = grid.coords_like(Psi[0])
    dv = grid.cell_volume
    lz = np.nan
    if grid.dim >= 2:
        lz = obs.angular_momentum(grid, Psi[0]) + obs.angular_momentum(grid, Psi[1])
    return obs.ObservableRecord(
        t=float(t),
        mass=dv * float(rho.sum()),
        energy=e,
        mu=e.total + e.interaction,
        widths=tuple(dv * float(np.sum(x * x * rho)) for x in coords),
        center=tuple(dv * float(np.sum(x * rho)) for x in coords),
        lz=lz,
    )


def evolve_cgpe(grid, Psi0, model, so, config, pad=DEFAULT_PAD, form="original", progress=False):
    """Evolve a full-layout pair on ``grid`` inside the ``pad``-fold periodic box.

    The padded state is carried through the whole run; observables are
    evaluated on the padded periodic grid and ``final`` is cropped back to
    the full layout of ``grid``.
    """
    from .dynamics import Trajectory, _drive

    if _check_pair(grid, Psi0) != "full":
        raise InvalidInputError("evolve_cgpe expects a full-layout pair on the original grid")
    big = grid.padded(pad)
    big_model = ModelParams(model.dim, model.beta, model.trap, 0.0, model.epsilon, model.potential)
    Psi = np.stack([embed_periodic(grid, Psi0[j], pad) for j in range(2)]).astype(complex)
    stepper = CgpeStepper(big, big_model, so, config.tau, form)

    def record(P, t):
        return energy_record(big, P, big_model, so, t)

    traj = _drive(big, Psi, stepper, config, record, progress, pair=True)
    final = np.stack([crop_periodic(grid, traj.final[j], pad) for j in range(2)])
    return Trajectory(traj.records, final, traj.snapshots)
