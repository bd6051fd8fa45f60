import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpesolve import observables as obs
from gpesolve.dynamics import EvolveConfig, SplitStepper, evolve
from gpesolve.errors import InvalidInputError
from gpesolve.grid import Grid
from gpesolve.model import ModelParams, SpinOrbitParams
from gpesolve.spinorbit import CgpeStepper, cgpe_phase_transform, evolve_cgpe, tssp_step_cgpe

GP = Grid(-12.0, 12.0, 256)  # used in the periodic layout
M1 = ModelParams(1, 0.0)


def random_pair(grid, seed, layout="periodic"):
    rng = np.random.default_rng(seed)
    x = grid.coords(layout)[0]
    shape = x.shape
    env = np.exp(-(x**2) / 2)
    P = np.stack([env * (1 + 0.2 * rng.normal(size=shape)) * np.exp(0.5j * rng.normal(size=shape))
                  for _ in range(2)])
    if layout == "full":
        P[:, [0, -1]] = 0
    total = obs.mass(grid, P[0]) + obs.mass(grid, P[1])
    return P / np.sqrt(total)


def smooth_pair(grid, layout="periodic"):
    x = grid.coords(layout)[0]
    P = np.stack([np.exp(-((x - 0.5) ** 2) / 2) * np.exp(0.3j * x), 0.8 * np.exp(-((x + 0.7) ** 2) / 1.5)])
    P = P.astype(complex)
    if layout == "full":
        P[:, [0, -1]] = 0
    return P / np.sqrt(obs.mass(grid, P[0]) + obs.mass(grid, P[1]))


def masses(grid, P):
    return np.array([obs.mass(grid, P[0]), obs.mass(grid, P[1])])


so_params = st.builds(
    SpinOrbitParams,
    k0=st.floats(0, 3), delta=st.floats(-2, 2), rabi=st.floats(0, 5),
    beta11=st.floats(0, 50), beta12=st.floats(0, 50), beta22=st.floats(0, 50),
)


class TestStepper:
    def test_decoupled_matches_scalar(self):
        so = SpinOrbitParams(beta11=30.0, beta22=30.0)
        P = random_pair(GP, 0)
        out = tssp_step_cgpe(GP, P, M1, so, 1e-2)
        scalar = SplitStepper(GP, ModelParams(1, 30.0), 1e-2, "periodic")
        for j in range(2):
            np.testing.assert_allclose(out[j], scalar.step(P[j]), atol=1e-13)

    @settings(max_examples=20)
    @given(so_params, st.integers(0, 2**32 - 1))
    def test_total_mass_per_step(self, so, seed):
        P = random_pair(GP, seed)
        out = tssp_step_cgpe(GP, P, M1, so, 1e-2)
        assert abs(masses(GP, out).sum() - masses(GP, P).sum()) <= 1e-13

    @given(st.integers(0, 2**32 - 1))
    def test_component_masses_without_rabi(self, seed):
        so = SpinOrbitParams(k0=1.0, delta=0.5, beta11=10, beta12=5, beta22=8)
        P = random_pair(GP, seed)
        m0 = masses(GP, P)
        out = CgpeStepper(GP, M1, so, 1e-3).run(P, 100)
        assert np.max(np.abs(masses(GP, out) - m0)) <= 1e-12

    def test_rabi_oscillation(self):
        # no trap physics beyond a shared potential: populations follow cos^2(Omega t / 2)
        so = SpinOrbitParams(rabi=2.0)
        P = np.stack([random_pair(GP, 1)[0], np.zeros(GP.periodic_shape, complex)])
        P = P / np.sqrt(obs.mass(GP, P[0]))
        t = 0.7
        out = CgpeStepper(GP, M1, so, 1e-3).run(P, 700)
        assert obs.mass(GP, out[0]) == pytest.approx(np.cos(t) ** 2, abs=1e-12)

    def test_rejects_full_layout_and_bad_shape(self):
        P = random_pair(GP, 0, "full")
        with pytest.raises(InvalidInputError):
            tssp_step_cgpe(GP, P, M1, SpinOrbitParams(), 1e-3)
        with pytest.raises(InvalidInputError):
            tssp_step_cgpe(GP, np.zeros((3,) + GP.periodic_shape), M1, SpinOrbitParams(), 1e-3)
        with pytest.raises(InvalidInputError):
            CgpeStepper(GP, M1, SpinOrbitParams(), 1e-3, form="rotated")


class TestPhaseTransform:
    def test_identity_without_coupling(self):
        P = random_pair(GP, 2)
        so = SpinOrbitParams(rabi=1.0, beta11=3.0)
        np.testing.assert_array_equal(cgpe_phase_transform(GP, P, "forward", so, 1.3), P)

    @given(so_params, st.floats(0, 10))
    def test_densities_invariant(self, so, t):
        P = random_pair(GP, 3)
        Q = cgpe_phase_transform(GP, P, "forward", so, t)
        np.testing.assert_allclose(np.abs(Q) ** 2, np.abs(P) ** 2, rtol=1e-14, atol=1e-300)
        np.testing.assert_allclose(cgpe_phase_transform(GP, Q, "inverse", so, t), P, atol=1e-15)

    def test_bad_direction(self):
        with pytest.raises(InvalidInputError):
            cgpe_phase_transform(GP, random_pair(GP, 0), "sideways", SpinOrbitParams(), 0.0)

    def test_dual_path(self):
        so = SpinOrbitParams(k0=1.5, delta=0.4, rabi=1.2, beta11=20, beta12=15, beta22=18)
        m = ModelParams(1, 0.0)
        P = smooth_pair(GP)
        tau, n = 1e-3, 50
        a = CgpeStepper(GP, m, so, tau).run(P, n)
        Q = cgpe_phase_transform(GP, P, "forward", so, 0.0)
        Q = CgpeStepper(GP, m, so, tau, "transformed").run(Q, n)
        b = cgpe_phase_transform(GP, Q, "inverse", so, n * tau)
        assert np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2)) <= 1e-6
        assert np.max(np.abs(a - b)) <= 1e-10


class TestEvolve:
    def test_energy_and_mass(self):
        g = Grid(-8.0, 8.0, 128)
        so = SpinOrbitParams(k0=1.0, delta=0.3, rabi=0.8, beta11=10, beta12=8, beta22=9)
        P = smooth_pair(g, "full")
        tr = evolve(g, P, ModelParams(1, 0.0), EvolveConfig(tau=1e-3, T=1.0, stride=100, scheme="cgpe-spinorbit"),
                    so=so)
        assert np.max(np.abs(tr.column("mass") - 1)) <= 1e-12
        assert tr.energy_drift() <= 1e-6
        assert tr.final.shape == (2,) + g.shape
        assert np.all(tr.final[:, [0, -1]] == 0)

    def test_requires_full_layout(self):
        with pytest.raises(InvalidInputError):
            evolve_cgpe(GP, random_pair(GP, 0), M1, SpinOrbitParams(), EvolveConfig())

    def test_energy_functional_spin_orbit_sign(self):
        # psi1 = f e^{i q x}: the i k0 d_x term contributes -k0 q int |f|^2
        g = Grid(-12.0, 12.0, 256)
        x = g.coords("periodic")[0]
        f = np.pi**-0.25 * np.exp(-(x**2) / 2)
        q, k0 = 0.7, 1.3
        P = np.stack([f * np.exp(1j * q * x), np.zeros_like(f, dtype=complex)])
        so = SpinOrbitParams(k0=k0)
        e = obs.energy_cgpe(g, P, ModelParams(1, 0.0), so)
        assert e.josephson == pytest.approx(-k0 * q, abs=1e-10)
