"""Ground states by gradient flow with discrete normalization.

Each step is backward Euler in imaginary time with the nonlinearity frozen
at the previous iterate,

    (phi1 - phi_n) / tau = eps^2/2 Lap phi1 - (V + beta |phi_n|^2) phi1,

followed by projection onto the unit sphere of the discrete norm. Two
linear-solve backends are available:

* ``"spectral"`` (default): sine-pseudospectral Laplacian, solved by
  conjugate gradients preconditioned with the sine-diagonal part of the
  operator. The fixed point is the sine-collocation ground state.
* ``"fd"``: second-order finite differences; Thomas algorithm in 1D and
  per-axis tridiagonal sweeps (ADI splitting) in 2D/3D.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator, cg

from . import observables as obs
from .errors import InvalidInputError, NonConvergenceError, NonexistenceError, NumericalFailureError
from .grid import Grid, discrete_norm, fft_workers, gradient, laplacian, sine_symbol
from .oracles import linear_ground_state, tf_estimates, tf_profile

log = logging.getLogger(__name__)

INITIAL_GUESSES = ("auto", "gaussian", "thomas-fermi", "user", "vortex")
BACKENDS = ("spectral", "fd")


@dataclass(frozen=True)
class GfdnConfig:
    """Gradient-flow settings; ``tau=None`` picks the default for the model."""

    tau: float | None = None
    tol: float = 1e-6
    max_iter: int = 200_000
    initial: str = "auto"
    backend: str = "spectral"
    initial_field: np.ndarray | None = field(default=None, repr=False, compare=False)
    cg_rtol: float = 1e-13

    def __post_init__(self):
        if self.tau is not None and not self.tau > 0:
            raise InvalidInputError(f"tau must be positive, got {self.tau}")
        if not self.tol > 0:
            raise InvalidInputError(f"stop tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be at least 1")
        if self.initial not in INITIAL_GUESSES:
            raise InvalidInputError(f"initial guess must be one of {INITIAL_GUESSES}, got {self.initial!r}")
        if self.backend not in BACKENDS:
            raise InvalidInputError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.initial == "user" and self.initial_field is None:
            raise InvalidInputError("initial='user' needs initial_field")


@dataclass
class GroundStateResult:
    phi: np.ndarray
    energy: float
    mu: float
    iterations: int
    residual: float
    parts: obs.EnergyBreakdown
    grid: Grid = field(repr=False)
    tau: float = 0.0
    energy_history: list = field(default_factory=list, repr=False)

    def summary(self, model):
        return {
            "E_g": self.energy,
            "mu_g": self.mu,
            "iterations": self.iterations,
            "residual": self.residual,
            "virial_residual": virial(self.parts, model.dim),
            "eigen_residual": eigen_residual(self.grid, self.phi, self.mu, model),
            "energy_parts": self.parts.to_dict(),
            "tau": self.tau,
        }


def default_tau(beta):
    return 0.01 if beta <= 100 else 0.001


def default_grid(model, h=0.125, min_nodes=64):
    """Box ``[-L, L]`` per axis with ``L = max(8, 1.5 R_TF)``; ``M`` a power of two."""
    if model.beta > 0:
        radii = tf_estimates(model.beta, model.trap, model.dim).radii
    else:
        radii = (0.0,) * model.dim
    half = [max(8.0, 1.5 * r) for r in radii]
    M = [max(min_nodes, 2 ** math.ceil(math.log2(2 * L / h))) for L in half]
    return Grid([-L for L in half], half, M)


def virial(parts, d):
    return 2 * parts.kinetic - 2 * parts.potential + d * parts.interaction


def eigen_residual(grid, phi, mu, model):
    """``|| mu phi - [-eps^2/2 Lap + V + beta |phi|^2] phi ||_h`` with the spectral Laplacian."""
    V = model.potential_on(grid, grid.layout(phi))
    H_phi = -0.5 * model.epsilon**2 * laplacian(grid, phi) + (V + model.beta * np.abs(phi) ** 2) * phi
    if model.omega:
        H_phi = H_phi - model.omega * _lz(grid, phi)
    return discrete_norm(grid, mu * phi - H_phi)


def _lz(grid, phi):
    x, y = grid.coords_like(phi)[:2]
    return -1j * (x * gradient(grid, phi, 1) - y * gradient(grid, phi, 0))


# ----------------------------------------------------------------------------
# linear solves


class _SpectralSolver:
    """PCG for ``(1/tau + eps^2/2 (-Lap) + W) x = b`` on interior nodes."""

    def __init__(self, grid, tau, epsilon, rtol):
        self.grid = grid
        self.shape = grid.interior_shape
        self.scale = 2.0**grid.dim * float(np.prod(grid.M))
        self.kin = 0.5 * epsilon**2 * sine_symbol(grid) + 1.0 / tau
        self.tau = tau
        self.rtol = rtol

    def _dst2(self, x, symbol):
        w = fft_workers()
        return sfft.dstn(sfft.dstn(x, type=1, workers=w) * symbol, type=1, workers=w) / self.scale

    def solve(self, W, b, x0, iteration=None):
        shape = self.shape
        dtype = np.result_type(b, x0, np.float64)
        inv = 1.0 / (self.kin + 0.5 * (W.min() + W.max()))

        def matvec(v):
            v = v.reshape(shape)
            return (self._dst2(v, self.kin) + W * v).ravel()

        def precond(v):
            return self._dst2(v.reshape(shape), inv).ravel()

        n = int(np.prod(shape))
        A = LinearOperator((n, n), matvec=matvec, dtype=dtype)
        P = LinearOperator((n, n), matvec=precond, dtype=dtype)
        x, info = cg(A, b.ravel(), x0=x0.ravel(), rtol=self.rtol, atol=0.0, M=P, maxiter=500)
        if info != 0:
            raise NumericalFailureError(f"PCG did not converge (info={info})", iteration=iteration)
        return x.reshape(shape)


def thomas(lower, diag, upper, rhs, axis=0):
    """Solve tridiagonal systems along ``axis`` of ``rhs`` (vectorized over other axes).

    ``lower``/``upper`` are scalars (constant off-diagonals); ``diag`` broadcasts
    against ``rhs``.
    """
    d = np.moveaxis(np.broadcast_to(diag, rhs.shape), axis, 0).astype(float)
    r = np.moveaxis(rhs, axis, 0).astype(np.result_type(rhs, float))
    n = d.shape[0]
    cp = np.empty_like(d)
    dp = np.empty_like(r)
    cp[0] = upper / d[0]
    dp[0] = r[0] / d[0]
    for i in range(1, n):
        denom = d[i] - lower * cp[i - 1]
        if np.any(denom == 0):
            raise NumericalFailureError("zero pivot in tridiagonal solve")
        cp[i] = upper / denom
        dp[i] = (r[i] - lower * dp[i - 1]) / denom
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.moveaxis(x, 0, axis)


def _fd_solve(grid, tau, epsilon, W, b):
    """Backward-Euler FD solve; exact Thomas in 1D, per-axis sweeps otherwise."""
    d = grid.dim
    x = b * tau
    for k, h in enumerate(grid.h):
        off = -0.5 * epsilon**2 / h**2
        diag = 1.0 / tau + epsilon**2 / h**2 + W / d
        x = thomas(off, diag, off, x / tau, axis=k)
    return x


# ----------------------------------------------------------------------------
# gradient flow


def _check_existence(model):
    if model.dim == 3 and model.beta < 0:
        raise NonexistenceError("no ground state exists for d=3 with beta < 0 (energy unbounded below)")
    if abs(model.omega) >= 1:
        raise NonexistenceError(f"no ground state exists for |Omega| >= 1 (got {model.omega})")


def gfdn_step(grid, phi, model, tau, backend="spectral", *, _solver=None, iteration=None, cg_rtol=1e-13):
    """One backward-Euler gradient-flow step followed by normalization.

    ``phi`` is a full-layout field. When ``model.omega`` is nonzero the
    rotation term ``Omega Lz phi_n`` is added explicitly to the right-hand
    side and complex fields are kept.
    """
    model.check_grid(grid)
    if grid.layout(phi) != "full":
        raise InvalidInputError("gradient flow works on full-layout Dirichlet fields")
    inner = grid.interior
    V = model.potential_on(grid)[inner]
    W = V + model.beta * np.abs(phi[inner]) ** 2
    b = phi[inner] / tau
    if model.omega:
        b = b + model.omega * _lz(grid, phi)[inner]
    if backend == "spectral":
        solver = _solver or _SpectralSolver(grid, tau, model.epsilon, cg_rtol)
        x = solver.solve(W, b, phi[inner], iteration=iteration)
    elif backend == "fd":
        x = _fd_solve(grid, tau, model.epsilon, W, b)
    else:
        raise InvalidInputError(f"unknown backend {backend!r}")
    out = np.zeros(grid.shape, dtype=x.dtype)
    out[inner] = x
    if not np.all(np.isfinite(x)):
        raise NumericalFailureError("non-finite values in gradient-flow step", iteration=iteration)
    norm = discrete_norm(grid, out)
    if norm == 0:
        raise NumericalFailureError("gradient-flow iterate vanished", iteration=iteration)
    return out / norm


def tf_ground_state(model, grid):
    """Thomas-Fermi profile on the grid with ``E_TF = mu_TF - E_int(phi_TF)``."""
    if not model.beta > 0:
        raise InvalidInputError(f"Thomas-Fermi state needs beta > 0, got {model.beta}")
    model.check_grid(grid)
    est = tf_estimates(model.beta, model.trap, model.dim)
    phi = tf_profile(grid.coords(), est.mu, model.beta, model.trap, model.dim)
    phi = np.broadcast_to(phi, grid.shape).copy()
    for idx in _boundary_slices(grid):
        phi[idx] = 0.0
    e_int = 0.5 * model.beta * grid.cell_volume * float(np.sum(phi**4))
    return phi, est.mu, est.mu - e_int


def _boundary_slices(grid):
    for k in range(grid.dim):
        for j in (0, -1):
            idx = [slice(None)] * grid.dim
            idx[k] = j
            yield tuple(idx)


def _smooth(field, grid):
    """One pass of a 3-point average per axis (smooths the TF support edge by one cell)."""
    out = field.copy()
    for k in range(grid.dim):
        out = 0.25 * np.roll(out, 1, axis=k) + 0.5 * out + 0.25 * np.roll(out, -1, axis=k)
    for idx in _boundary_slices(grid):
        out[idx] = 0.0
    return out


def initial_guess(grid, model, config):
    kind = config.initial
    if kind == "auto":
        kind = "thomas-fermi" if model.beta > 10 else "gaussian"
    if kind == "user":
        phi = np.asarray(config.initial_field)
        if phi.shape != grid.shape:
            raise InvalidInputError(f"initial field shape {phi.shape} does not match grid {grid.shape}")
        phi = phi.copy()
    elif kind == "thomas-fermi":
        phi = _smooth(tf_ground_state(model, grid)[0], grid)
    else:
        sampler, _, _ = linear_ground_state(model.dim, model.trap, model.epsilon)
        phi = np.broadcast_to(sampler(grid.coords()), grid.shape).astype(float)
        if kind == "vortex":
            if model.dim < 2:
                raise InvalidInputError("vortex seeding needs d >= 2")
            x, y = grid.coords()[:2]
            phi = phi * (x + 1j * y)
    for idx in _boundary_slices(grid):
        phi[idx] = 0.0
    return phi / discrete_norm(grid, phi)


def _run_flow(grid, model, config, phi, rotating, track_energy):
    tau = config.tau if config.tau is not None else default_tau(model.beta)
    solver = _SpectralSolver(grid, tau, model.epsilon, config.cg_rtol) if config.backend == "spectral" else None
    if not rotating:
        phi = np.abs(phi)
    history = []
    residual = math.inf
    for it in range(1, config.max_iter + 1):
        new = gfdn_step(grid, phi, model, tau, config.backend, _solver=solver, iteration=it)
        if not rotating:
            new = np.abs(new)
        residual = float(np.max(np.abs(new - phi))) / tau
        phi = new
        if track_energy:
            history.append(obs.energy(grid, phi, model).total)
        if residual <= config.tol:
            break
        if it % 1000 == 0:
            log.info("gfdn iteration %d residual %.3e", it, residual)
    else:
        raise NonConvergenceError(
            f"gradient flow did not reach tol {config.tol:g} in {config.max_iter} iterations "
            f"(last residual {residual:.3e})",
            iterations=config.max_iter,
            residual=residual,
        )
    parts = obs.energy(grid, phi, model)
    mu = parts.total + parts.interaction
    return GroundStateResult(phi, parts.total, mu, it, residual, parts, grid, tau, history)


def solve_ground_state(model, grid=None, config=GfdnConfig(), track_energy=False):
    """Nonrotating ground state; iterates are kept real and nonnegative."""
    if model.omega:
        raise InvalidInputError("use solve_ground_state_rotating for Omega != 0")
    _check_existence(model)
    grid = grid or default_grid(model)
    model.check_grid(grid)
    phi = initial_guess(grid, model, config)
    return _run_flow(grid, model, config, phi, rotating=False, track_energy=track_energy)


def solve_ground_state_rotating(model, grid=None, config=GfdnConfig(), track_energy=False):
    """Ground state in a rotating frame; complex iterates, explicit ``Omega Lz`` term."""
    if model.dim < 2:
        raise InvalidInputError("rotating ground states need d = 2 or 3")
    if model.beta < 0:
        raise InvalidInputError("rotating ground states are computed for beta >= 0 only")
    _check_existence(model)
    grid = grid or default_grid(model)
    model.check_grid(grid)
    phi = initial_guess(grid, model, config).astype(complex)
    return _run_flow(grid, model, config, phi, rotating=True, track_energy=track_energy)


def with_tau(config, tau):
    return replace(config, tau=tau)
