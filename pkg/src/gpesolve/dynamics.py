"""Time-splitting spectral propagation of the GPE.

One Strang step is a half kinetic step (exact in sine or Fourier space), a
full pointwise phase step with ``V + beta |psi|^2`` (exact, since the
density does not change during it), and another half kinetic step. With
the semiclassical parameter ``eps`` the kinetic multiplier is
``exp(-i tau eps |mu|^2 / 4)`` and the phase is divided by ``eps``.

Full-layout fields step on the sine basis (Dirichlet box); periodic-layout
fields step on the Fourier basis.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import observables as obs
from .errors import BlowUpError, InvalidInputError, UnsupportedDimensionError
from .grid import fft_workers, fourier_symbol, sine_interpolate, sine_symbol
from .model import ModelParams, harmonic_potential, rotate_points, rotation_matrix

log = logging.getLogger(__name__)

SCHEMES = ("gpe", "gpe-rotating", "gpe-dipolar", "cgpe-spinorbit")
MASS_TOL = 1e-8


@dataclass(frozen=True)
class EvolveConfig:
    tau: float = 1e-3
    T: float = 1.0
    stride: int = 1
    scheme: str = "gpe"
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidInputError(f"tau must be positive, got {self.tau}")
        if not self.T >= 0:
            raise InvalidInputError(f"final time must be nonnegative, got {self.T}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise InvalidInputError(f"stride must be a positive integer, got {self.stride}")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    @property
    def steps(self):
        return int(round(self.T / self.tau))


@dataclass
class Trajectory:
    records: list
    final: np.ndarray = field(repr=False)
    snapshots: dict = field(default_factory=dict, repr=False)

    @property
    def times(self):
        return np.array([r.t for r in self.records])

    def column(self, name):
        """Observable series by attribute path, e.g. ``"mass"`` or ``"energy.total"``."""
        out = []
        for rec in self.records:
            val = rec
            for part in name.split("."):
                val = getattr(val, part)
            out.append(val)
        return np.array(out)

    def energy_drift(self):
        e = self.column("energy.total")
        return float(np.max(np.abs(e - e[0])) / abs(e[0])) if e[0] else float(np.max(np.abs(e - e[0])))


class SplitStepper:
    """Second-order splitting for ``i eps psi_t = [-eps^2/2 Lap + V + beta |psi|^2 + extra] psi``.

    ``potential`` is an array on the field layout or a callable ``t -> array``
    (evaluated at the midpoint of each step). ``extra`` is an optional
    callable returning an additional real potential from the density, e.g.
    the dipolar term.
    """

    def __init__(self, grid, model, tau, layout="full", potential=None, extra=None):
        model.check_grid(grid)
        if layout not in ("full", "periodic"):
            raise InvalidInputError(f"unknown layout {layout!r}")
        self.grid, self.model, self.tau, self.layout = grid, model, tau, layout
        self.extra = extra
        self.potential = model.potential_on(grid, layout) if potential is None else potential
        self._set_tau(tau)

    def _set_tau(self, tau):
        self.tau = tau
        eps = self.model.epsilon
        if self.layout == "full":
            symbol = sine_symbol(self.grid)
            scale = 2.0**self.grid.dim * float(np.prod(self.grid.M))
        else:
            symbol = fourier_symbol(self.grid)
            scale = 1.0
        self.kinetic = np.exp(-0.25j * tau * eps * symbol) / scale
        self.kinetic_full = np.exp(-0.5j * tau * eps * symbol) / scale

    def _kinetic(self, psi, multiplier=None):
        w = fft_workers()
        multiplier = self.kinetic if multiplier is None else multiplier
        if self.layout == "full":
            out = np.zeros_like(psi)
            inner = self.grid.interior
            out[inner] = sfft.dstn(sfft.dstn(psi[inner], type=1, workers=w) * multiplier, type=1, workers=w)
            return out
        return sfft.ifftn(sfft.fftn(psi, workers=w) * multiplier, workers=w)

    def _potential_at(self, t):
        return self.potential(t) if callable(self.potential) else self.potential

    def _phase(self, psi, t):
        rho = (psi * np.conj(psi)).real
        total = self._potential_at(t + 0.5 * self.tau) + self.model.beta * rho
        if self.extra is not None:
            total = total + self.extra(rho)
        return psi * np.exp(-1j * self.tau / self.model.epsilon * total)

    def step(self, psi, t=0.0):
        psi = self._kinetic(np.asarray(psi, dtype=complex))
        psi = self._phase(psi, t)
        return self._kinetic(psi)

    def run(self, psi, n, t0=0.0):
        """``n`` steps with adjacent half kinetic steps fused into full ones.

        Identical to ``n`` calls of :meth:`step` up to roundoff, with half the
        transforms.
        """
        if n <= 0:
            return np.asarray(psi, dtype=complex)
        psi = self._kinetic(np.asarray(psi, dtype=complex))
        for k in range(n):
            psi = self._phase(psi, t0 + k * self.tau)
            psi = self._kinetic(psi, self.kinetic if k == n - 1 else self.kinetic_full)
        return psi


def tssp_step(grid, psi, model, tau, potential=None, dipole=None):
    """One TSSP step on the basis matching the layout of ``psi``."""
    if model.omega:
        raise InvalidInputError("use tssp_step_rotating for Omega != 0")
    extra = None
    if dipole is not None:
        from .dipolar import DipolarSolver

        extra = DipolarSolver(grid, dipole).term
    return SplitStepper(grid, model, tau, grid.layout(psi), potential, extra).step(psi)


# ----------------------------------------------------------------------------
# rotating frame


def _static_rotation(model):
    return model.trap.gamma_y == 1 or model.omega == 0


class RotatingStepper(SplitStepper):
    """TSSP in rotating Lagrangian coordinates with ``W(x~, t) = V(A(t) x~)``.

    For ``gamma_y = 1`` (or ``Omega = 0``) ``W`` does not depend on time and the
    plain nonrotating path is used.
    """

    def __init__(self, grid, model, tau):
        if model.dim < 2:
            raise UnsupportedDimensionError("rotating frame needs d = 2 or 3")
        frame = ModelParams(model.dim, model.beta, model.trap, 0.0, model.epsilon, model.potential)
        self.omega = model.omega
        if _static_rotation(model):
            super().__init__(grid, frame, tau)
        else:
            coords = grid.coords()

            def W(t):
                A = rotation_matrix(t, self.omega, grid.dim)
                return harmonic_potential(rotate_points(A, coords), model.trap, grid.dim)

            super().__init__(grid, frame, tau, potential=W)


def tssp_step_rotating(grid, phi, model, t, tau):
    return RotatingStepper(grid, model, tau).step(phi, t)


def to_eulerian(grid, phi, t, omega):
    """Eulerian field ``psi(x, t) = phi(A(t)^T x, t)`` on the same nodes (sine interpolation)."""
    A = rotation_matrix(t, omega, grid.dim)
    if np.allclose(A, np.eye(grid.dim), atol=0, rtol=0):
        return np.array(phi, copy=True)
    if grid.dim == 2:
        X, Y = np.meshgrid(*grid.x, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1) @ A  # rows are A^T x
        return sine_interpolate(grid, phi, pts).reshape(grid.shape)
    # 3D: the rotation leaves z fixed, so interpolate plane by plane
    plane = type(grid)(grid.a[:2], grid.b[:2], grid.M[:2])
    X, Y = np.meshgrid(*grid.x[:2], indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1) @ A[:2, :2]
    out = np.empty(grid.shape, dtype=complex)
    for k in range(grid.shape[2]):
        out[..., k] = sine_interpolate(plane, phi[..., k], pts).reshape(plane.shape)
    return out


def rotating_observables(grid, phi, model, t, W=None):
    """Eulerian observables computed from the Lagrangian field."""
    A = rotation_matrix(t, model.omega, grid.dim)
    if W is None:
        W = harmonic_potential(rotate_points(A, grid.coords()), model.trap, grid.dim)
    frame = ModelParams(model.dim, model.beta, model.trap, 0.0, model.epsilon, model.potential)
    e = obs.energy(grid, phi, frame, potential=W)
    lz = obs.angular_momentum(grid, phi)
    parts = obs.EnergyBreakdown(e.kinetic, e.potential, e.interaction, -model.omega * lz)
    moments = A @ obs.second_moments(grid, phi) @ A.T
    return obs.ObservableRecord(
        t=float(t),
        mass=obs.mass(grid, phi),
        energy=parts,
        mu=parts.total + parts.interaction,
        widths=tuple(np.diag(moments)),
        center=tuple(A @ obs.center_of_mass(grid, phi)),
        lz=lz,
    )


# ----------------------------------------------------------------------------
# driver


def _check(psi, mass0, grid, t, pair=False):
    if not np.all(np.isfinite(psi)):
        raise BlowUpError(f"non-finite values at t={t:.6g} (finite-time blow-up or instability)", time=t)
    n = obs.mass(grid, psi[0]) + obs.mass(grid, psi[1]) if pair else obs.mass(grid, psi)
    if abs(n - mass0) > MASS_TOL:
        raise BlowUpError(
            f"mass drift {abs(n - mass0):.3e} at t={t:.6g} exceeds {MASS_TOL:g} "
            "(under-resolved grid or blow-up)",
            time=t,
        )


def evolve(grid, psi0, model, config, dipole=None, so=None, progress=False):
    """Propagate ``psi0`` to ``config.T`` and record observables every ``stride`` steps.

    The scheme is chosen by ``config.scheme``. Rotating runs evolve the
    Lagrangian field; records hold Eulerian observables and ``final`` is the
    Lagrangian field. Spin-orbit runs expect a pair ``(2, ...)`` and delegate
    to :func:`gpesolve.spinorbit.evolve_cgpe`.
    """
    if config.scheme == "cgpe-spinorbit":
        from .spinorbit import evolve_cgpe

        if so is None:
            raise InvalidInputError("spin-orbit scheme needs SpinOrbitParams")
        return evolve_cgpe(grid, psi0, model, so, config, progress=progress)
    psi = np.array(psi0, dtype=complex)
    layout = grid.layout(psi)
    if config.scheme == "gpe-rotating":
        stepper = RotatingStepper(grid, model, config.tau)

        def record(p, t):
            return rotating_observables(grid, p, model, t, W=stepper._potential_at(t))

    elif config.scheme == "gpe-dipolar":
        from .dipolar import DipolarSolver

        if dipole is None:
            raise InvalidInputError("dipolar scheme needs DipoleParams")
        solver = DipolarSolver(grid, dipole)
        stepper = SplitStepper(grid, model, config.tau, layout, extra=solver.term)

        def record(p, t):
            return obs.observe(grid, p, model, t, dipole=dipole, dipolar_solver=solver)

    else:
        stepper = SplitStepper(grid, model, config.tau, layout)

        def record(p, t):
            return obs.observe(grid, p, model, t)

    return _drive(grid, psi, stepper, config, record, progress)


def _drive(grid, psi, stepper, config, record, progress, pair=False):
    mass0 = (obs.mass(grid, psi[0]) + obs.mass(grid, psi[1])) if pair else obs.mass(grid, psi)
    n = config.steps
    tau = config.tau
    snap_steps = {int(round(ts / tau)): ts for ts in config.snapshot_times}
    records = [record(psi, 0.0)]
    snapshots = {}
    if 0 in snap_steps:
        snapshots[snap_steps[0]] = psi.copy()
    stops = sorted({k for k in range(config.stride, n + 1, config.stride)} | {k for k in snap_steps if 0 < k <= n} | {n})
    done = 0
    next_report = max(1, n // 10)
    for k in stops:
        psi = stepper.run(psi, k - done, done * tau)
        done = k
        t = k * tau
        _check(psi, mass0, grid, t, pair)
        if k % config.stride == 0:
            records.append(record(psi, t))
        if k in snap_steps:
            snapshots[snap_steps[k]] = psi.copy()
        if progress and k >= next_report:
            print(f"[gpesolve] step {k}/{n} t={t:.4g}", file=sys.stderr)
            next_report += max(1, n // 10)
    return Trajectory(records, psi, snapshots)


def estimate_order(fields, norm=None):
    """Temporal order ``log2(|u_tau - u_tau/2| / |u_tau/2 - u_tau/4|)`` from three levels."""
    f1, f2, f3 = fields
    norm = norm or (lambda v: float(np.max(np.abs(v))))
    e1, e2 = norm(f1 - f2), norm(f2 - f3)
    return math.log2(e1 / e2), e1, e2
