"""Dimensionless model parameters, trap potentials and the dipolar kernel."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInputError, UnsupportedDimensionError

POTENTIALS = ("harmonic", "free")
DIPOLE_MODES = ("3d", "2d-sdm")


@dataclass(frozen=True)
class TrapParams:
    gamma_y: float = 1.0
    gamma_z: float = 1.0

    def __post_init__(self):
        if self.gamma_y < 1 or self.gamma_z < 1:
            raise InvalidInputError(
                f"trap ratios must satisfy gamma_y >= 1, gamma_z >= 1 (got {self.gamma_y}, {self.gamma_z})"
            )

    def frequencies(self, d):
        """Per-axis trap frequencies (1, gamma_y, gamma_z)[:d]."""
        return np.array((1.0, self.gamma_y, self.gamma_z)[:d])


@dataclass(frozen=True)
class DipoleParams:
    """Dipolar strength ``lam`` along unit axis ``axis``; ``mode`` picks the kernel."""

    lam: float
    axis: tuple = (0.0, 0.0, 1.0)
    mode: str = "3d"

    def __post_init__(self):
        axis = tuple(float(v) for v in self.axis)
        object.__setattr__(self, "axis", axis)
        if len(axis) != 3:
            raise InvalidInputError("dipole axis must have three components")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise InvalidInputError(f"dipole axis must be a unit vector, |n| = {np.linalg.norm(axis)}")
        if self.mode not in DIPOLE_MODES:
            raise InvalidInputError(f"dipole mode must be one of {DIPOLE_MODES}, got {self.mode!r}")

    @property
    def dim(self):
        return 3 if self.mode == "3d" else 2

    @property
    def eta(self):
        """Coefficient of the nonlocal term: -3 lam (3D), -3 lam / 2 (2D-SDM)."""
        return -3.0 * self.lam if self.mode == "3d" else -1.5 * self.lam

    def contact_beta(self, kappa, trap=TrapParams()):
        """Contact coupling after the long-range part is split off."""
        if self.mode == "3d":
            return kappa - self.lam
        n3 = self.axis[2]
        return np.sqrt(trap.gamma_z) * (kappa + self.lam * (3 * n3**2 - 1)) / np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class SpinOrbitParams:
    k0: float = 0.0
    delta: float = 0.0
    rabi: float = 0.0
    beta11: float = 0.0
    beta12: float = 0.0
    beta22: float = 0.0

    @property
    def beta_matrix(self):
        return np.array([[self.beta11, self.beta12], [self.beta12, self.beta22]])


@dataclass(frozen=True)
class ModelParams:
    """Unified GPE ``i eps dt psi = [-eps^2/2 Lap + V - Omega Lz + beta |psi|^2] psi``.

    ``epsilon = 1`` is the standard scaling; ``potential='free'`` sets V = 0.
    """

    dim: int = 1
    beta: float = 0.0
    trap: TrapParams = field(default_factory=TrapParams)
    omega: float = 0.0
    epsilon: float = 1.0
    potential: str = "harmonic"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidInputError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")
        if self.omega != 0 and self.dim == 1:
            raise UnsupportedDimensionError("rotation needs dimension 2 or 3")
        if self.omega != 0 and self.epsilon != 1:
            raise InvalidInputError("rotation is only supported in the standard scaling (epsilon = 1)")
        if self.potential not in POTENTIALS:
            raise InvalidInputError(f"potential must be one of {POTENTIALS}, got {self.potential!r}")

    def check_grid(self, grid):
        if grid.dim != self.dim:
            raise InvalidInputError(f"model dimension {self.dim} does not match grid dimension {grid.dim}")

    def potential_on(self, grid, layout="full"):
        """Trap potential sampled on the grid nodes."""
        self.check_grid(grid)
        coords = grid.coords(layout)
        if self.potential == "free":
            return np.zeros(np.broadcast_shapes(*(c.shape for c in coords)))
        return harmonic_potential(coords, self.trap, self.dim)

    def to_dict(self):
        out = asdict(self)
        out.update(out.pop("trap"))
        return out


def harmonic_potential(x, trap, d):
    """``V = (x^2 + gamma_y^2 y^2 + gamma_z^2 z^2) / 2`` truncated to ``d`` axes.

    ``x`` is a length-``d`` sequence of coordinates (scalars or broadcastable
    arrays).
    """
    if len(x) != d:
        raise InvalidInputError(f"point has {len(x)} coordinates, expected {d}")
    gam = trap.frequencies(d)
    return 0.5 * sum((g * np.asarray(xi, dtype=float)) ** 2 for g, xi in zip(gam, x))


def beta_from_kappa(kappa, trap, d):
    if d == 3:
        return kappa
    if d == 2:
        return kappa * np.sqrt(trap.gamma_z / (2 * np.pi))
    if d == 1:
        return kappa * np.sqrt(trap.gamma_y * trap.gamma_z) / (2 * np.pi)
    raise UnsupportedDimensionError(f"dimension must be 1, 2 or 3, got {d}")


def rotation_matrix(t, omega, d):
    if d not in (2, 3):
        raise UnsupportedDimensionError("rotating frame needs dimension 2 or 3")
    c, s = np.cos(omega * t), np.sin(omega * t)
    A = np.eye(d)
    A[:2, :2] = [[c, s], [-s, c]]
    return A


def rotate_points(A, x):
    """Apply ``A`` to a sequence of coordinate arrays, returning the rotated sequence."""
    return [sum(A[i, j] * x[j] for j in range(len(x))) for i in range(len(x))]


def rotating_potential(x, t, omega, trap, d):
    """``W(x~, t) = V(A(t) x~)``."""
    A = rotation_matrix(t, omega, d)
    return harmonic_potential(rotate_points(A, list(x)), trap, d)


def dipolar_kernel_hat(xi, mode):
    """Fourier symbol of the dipolar Green's function.

    ``1/|xi|^2`` in 3D, ``1/|xi|`` for the 2D surface-density model. At
    ``xi = 0`` the symbol is set to 0 (the mean of ``u`` is fixed so that it
    carries no zero-mode contribution).
    """
    xi = np.asarray(xi, dtype=float)
    if mode == "3d":
        p, d = 2, 3
    elif mode == "2d-sdm":
        p, d = 1, 2
    else:
        raise InvalidInputError(f"unknown kernel mode {mode!r}")
    if xi.shape[-1] != d:
        raise InvalidInputError(f"mode {mode!r} needs {d}-component frequencies")
    r = np.linalg.norm(xi, axis=-1)
    with np.errstate(divide="ignore"):
        out = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0) ** p, 0.0)
    return out if out.ndim else float(out)
