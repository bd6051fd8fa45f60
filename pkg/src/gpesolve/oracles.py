"""Closed-form reference solutions used as test oracles and initial data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import InvalidInputError
from .model import TrapParams, harmonic_potential


def linear_ground_state(d, trap=TrapParams(), epsilon=1.0):
    """Exact ground state of ``-eps^2/2 Lap + V``.

    Returns ``(sampler, E0, mu0)`` where ``sampler(coords)`` evaluates the
    normalized Gaussian on a sequence of ``d`` coordinate arrays.
    """
    if d not in (1, 2, 3):
        raise InvalidInputError(f"dimension must be 1, 2 or 3, got {d}")
    gam = trap.frequencies(d)
    energy = 0.5 * epsilon * float(gam.sum())

    def sampler(coords):
        out = 1.0
        for g, x in zip(gam, coords):
            out = out * (g / (np.pi * epsilon)) ** 0.25 * np.exp(-g * np.asarray(x) ** 2 / (2 * epsilon))
        return out

    return sampler, energy, energy


def interaction_constant(d, trap=TrapParams()):
    """``C_d = int |phi_g^0|^4`` by quadrature, one factor per axis."""
    total = 1.0
    for g in trap.frequencies(d):
        val, _ = quad(lambda x: (g / np.pi) * np.exp(-2 * g * x * x), -np.inf, np.inf, epsabs=1e-15)
        total *= val
    return total


def weak_interaction_estimates(beta, d, trap=TrapParams()):
    _, e0, mu0 = linear_ground_state(d, trap)
    c = interaction_constant(d, trap)
    return e0 + 0.5 * beta * c, mu0 + beta * c


@dataclass(frozen=True)
class TFEstimate:
    mu: float
    energy: float
    radii: tuple


def tf_estimates(beta, trap=TrapParams(), d=1):
    if not beta > 0:
        raise InvalidInputError(f"Thomas-Fermi estimates need beta > 0, got {beta}")
    gy, gz = trap.gamma_y, trap.gamma_z
    if d == 1:
        mu = 0.5 * (1.5 * beta) ** (2 / 3)
    elif d == 2:
        mu = np.sqrt(beta * gy / np.pi)
    elif d == 3:
        mu = 0.5 * (15 * beta * gy * gz / (4 * np.pi)) ** 0.4
    else:
        raise InvalidInputError(f"dimension must be 1, 2 or 3, got {d}")
    energy = (d + 2) / (d + 4) * mu
    radii = tuple(np.sqrt(2 * mu) / g for g in trap.frequencies(d))
    return TFEstimate(float(mu), float(energy), radii)


def tf_profile(coords, mu, beta, trap=TrapParams(), d=1):
    """``sqrt((mu - V)/beta)`` inside the support, zero outside."""
    V = harmonic_potential(coords, trap, d)
    return np.sqrt(np.maximum(mu - V, 0.0) / beta)


def _check_soliton(A, beta):
    if not beta < 0:
        raise InvalidInputError(f"bright solitons need beta < 0, got {beta}")
    if not A > 0:
        raise InvalidInputError(f"soliton amplitude parameter must be positive, got {A}")


def bright_soliton(x, t, A=1.0, v=0.0, x0=0.0, theta0=0.0, beta=-1.0):
    _check_soliton(A, beta)
    x = np.asarray(x, dtype=float)
    envelope = A / np.sqrt(-beta) / np.cosh(A * (x - v * t - x0))
    return envelope * np.exp(1j * (v * x - 0.5 * (v * v - A * A) * t + theta0))


def soliton_mass(A, beta):
    _check_soliton(A, beta)
    return -2 * A / beta


def soliton_energy(A, v, beta):
    _check_soliton(A, beta)
    return A * v * v / (-beta) - A**3 / (3 * (-beta))


def dispersion_omega(k, A, beta):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return 0.5 * float(k @ k) + beta * abs(A) ** 2


def width_closed_form(t, energy0, delta0, delta1):
    """Squared width for d=1, beta=0 (or delta_r in 2D radial traps).

    ``delta1 = 2 int x Im(conj(psi0) dpsi0/dx)`` is the initial growth rate of
    the width, hence the factor one half on the sine term.
    """
    t = np.asarray(t, dtype=float)
    return energy0 + (delta0 - energy0) * np.cos(2 * t) + 0.5 * delta1 * np.sin(2 * t)


def center_of_mass_trajectory(t, x0, w0, lam):
    """Solution of ``x'' + Lambda x = 0``; returns ``(x_c(t), x_c'(t))``."""
    x0, w0 = np.atleast_1d(np.asarray(x0, float)), np.atleast_1d(np.asarray(w0, float))
    omega = np.sqrt(np.atleast_1d(np.asarray(lam, float)))
    if np.any(omega <= 0):
        raise InvalidInputError("Lambda must be positive")
    wt = omega * t
    pos = x0 * np.cos(wt) + w0 / omega * np.sin(wt)
    vel = -x0 * omega * np.sin(wt) + w0 * np.cos(wt)
    return pos, vel


@dataclass(frozen=True)
class TransportedSolutionSpec:
    """Stationary state ``profile`` (callable on coordinate sequences) moved by the trap."""

    profile: Callable
    mu: float
    x0: tuple
    w0: tuple
    g0: float = 0.0
    lam: tuple = (1.0,)

    @classmethod
    def for_trap(cls, profile, mu, x0, w0, g0=0.0, trap=TrapParams()):
        d = len(np.atleast_1d(x0))
        return cls(profile, mu, tuple(np.atleast_1d(x0)), tuple(np.atleast_1d(w0)), g0,
                   tuple(trap.frequencies(d) ** 2))


def transported_phase(t, spec):
    """``g(t) = g0 + int_0^t [x_c.Lambda x_c / 2 - |w|^2 / 2] ds``."""

    def rate(s):
        xc, w = center_of_mass_trajectory(s, spec.x0, spec.w0, spec.lam)
        return 0.5 * float(np.sum(np.asarray(spec.lam) * xc * xc)) - 0.5 * float(w @ w)

    if t == 0:
        return spec.g0
    val, _ = quad(rate, 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=500)
    return spec.g0 + val


def transported_solution(coords, t, spec):
    """Exact GPE solution started from ``profile(x - x0) exp(i(w0.x + g0))``."""
    xc, w = center_of_mass_trajectory(t, spec.x0, spec.w0, spec.lam)
    g = transported_phase(t, spec)
    shifted = [np.asarray(x) - c for x, c in zip(coords, xc)]
    phase = sum(wi * np.asarray(x) for wi, x in zip(w, coords)) + g - spec.mu * t
    return spec.profile(shifted) * np.exp(1j * phase)


def gaussian(coords, center=None, width=1.0, momentum=None):
    """Normalized Gaussian wave packet ``prod exp(-(x-c)^2 / (2 s^2) + i p x)``."""
    d = len(coords)
    center = np.zeros(d) if center is None else np.atleast_1d(np.asarray(center, float))
    momentum = np.zeros(d) if momentum is None else np.atleast_1d(np.asarray(momentum, float))
    widths = np.broadcast_to(np.asarray(width, dtype=float), (d,))
    out = 1.0 + 0j
    for x, c, s, p in zip(coords, center, widths, momentum):
        x = np.asarray(x)
        out = out * (np.pi * s * s) ** -0.25 * np.exp(-((x - c) ** 2) / (2 * s * s) + 1j * p * x)
    return out
