import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from gpesolve.errors import InvalidInputError
from gpesolve.grid import (
    Grid,
    coefficient_norm,
    crop_periodic,
    discrete_norm,
    embed_periodic,
    gradient,
    laplacian,
    normalize,
    read_field,
    sine_forward,
    sine_interpolate,
    sine_inverse,
    write_field,
)

from conftest import direct_sine_forward, direct_sine_inverse, zero_boundary


class TestGrid:
    def test_spacing_and_nodes(self):
        g = Grid(-1.0, 3.0, 8)
        assert g.h == (0.5,)
        assert g.x[0][0] == -1.0 and g.x[0][-1] == 3.0
        assert g.shape == (9,)

    @pytest.mark.parametrize("a,b,M", [(0, 1, 7), (0, 1, 6), (1, 0, 8), (0, 0, 8)])
    def test_invalid(self, a, b, M):
        with pytest.raises(InvalidInputError):
            Grid(a, b, M)

    def test_bad_dimension(self):
        with pytest.raises(InvalidInputError):
            Grid((0,) * 4, (1,) * 4, (8,) * 4)

    def test_layout_detection(self):
        g = Grid.cube(0, 1, 8, 2)
        assert g.layout(np.zeros((9, 9))) == "full"
        assert g.layout(np.zeros((8, 8))) == "periodic"
        with pytest.raises(InvalidInputError):
            g.layout(np.zeros((7, 9)))

    def test_freqs_increasing(self):
        mu = Grid(0, 2, 16).freqs[0]
        assert len(mu) == 15
        assert np.all(np.diff(mu) > 0)


class TestSineTransform:
    def test_single_mode(self):
        g = Grid(0.0, 1.0, 16)
        f = np.sin(np.pi * g.x[0])
        c = sine_forward(g, f)
        expected = np.zeros(15)
        expected[0] = 8.0
        np.testing.assert_allclose(c, expected, atol=1e-12)

    def test_zero(self):
        g = Grid(0.0, 1.0, 16)
        assert np.all(sine_forward(g, np.zeros(17)) == 0)
        assert np.all(sine_inverse(g, np.zeros(15)) == 0)

    def test_inverse_of_scaled_unit_coefficient(self):
        g = Grid(0.0, 1.0, 16)
        c = np.zeros(15)
        c[0] = 8.0
        np.testing.assert_allclose(sine_inverse(g, c), np.sin(np.pi * g.x[0]), atol=1e-14)

    def test_matches_direct_summation(self, rng):
        M = 64
        g = Grid(-2.0, 5.0, M)
        f = zero_boundary(rng.normal(size=M + 1) + 1j * rng.normal(size=M + 1))
        np.testing.assert_allclose(sine_forward(g, f), direct_sine_forward(f[1:-1], M), atol=1e-11)
        c = rng.normal(size=M - 1)
        np.testing.assert_allclose(sine_inverse(g, c)[1:-1], direct_sine_inverse(c, M), atol=1e-12)

    def test_round_trip_random_field(self, rng):
        g = Grid(0.0, 1.0, 128)
        f = zero_boundary(rng.normal(size=129))
        assert np.max(np.abs(sine_inverse(g, sine_forward(g, f)) - f)) < 1e-12

    def test_round_trip_2d_coefficients(self, rng):
        g = Grid.cube(0.0, 1.0, 32, 2)
        c = rng.normal(size=(31, 31)) + 1j * rng.normal(size=(31, 31))
        assert np.max(np.abs(sine_forward(g, sine_inverse(g, c)) - c)) < 1e-12

    def test_2d_tensor_against_direct(self, rng):
        M = 16
        g = Grid.cube(0.0, 1.0, M, 2)
        f = zero_boundary(rng.normal(size=(M + 1, M + 1)))
        j = np.arange(1, M)
        S = np.sin(np.pi * np.outer(j, j) / M)
        np.testing.assert_allclose(sine_forward(g, f), S @ f[1:-1, 1:-1] @ S.T, atol=1e-11)

    def test_shape_mismatch(self):
        g = Grid(0.0, 1.0, 16)
        with pytest.raises(InvalidInputError):
            sine_forward(g, np.zeros(16))
        with pytest.raises(InvalidInputError):
            sine_inverse(g, np.zeros(16))

    @given(st.sampled_from([8, 16, 64, 256, 1024]), st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, M, seed):
        g = Grid(-3.0, 4.0, M)
        f = zero_boundary(np.random.default_rng(seed).normal(size=M + 1))
        assert np.max(np.abs(sine_inverse(g, sine_forward(g, f)) - f)) <= 1e-11

    @given(st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_parseval_property(self, d, seed):
        g = Grid.cube(-1.0, 2.0, 8 if d == 3 else 16, d)
        f = zero_boundary(np.random.default_rng(seed).normal(size=g.shape))
        assert abs(discrete_norm(g, f) - coefficient_norm(g, sine_forward(g, f))) <= 1e-11


class TestNorm:
    def test_constant_interior(self):
        g = Grid(0.0, 1.0, 10)
        f = np.ones(11)
        f[[0, -1]] = 0
        assert discrete_norm(g, f) ** 2 == pytest.approx(0.9, abs=1e-14)

    def test_zero(self):
        assert discrete_norm(Grid(0.0, 1.0, 10), np.zeros(11)) == 0.0

    def test_gaussian_against_quadrature(self):
        g = Grid(-16.0, 16.0, 512)
        f = np.pi**-0.25 * np.exp(-g.x[0] ** 2 / 2)
        continuum, _ = quad(lambda x: np.pi**-0.5 * np.exp(-x * x), -np.inf, np.inf)
        assert discrete_norm(g, f) ** 2 == pytest.approx(continuum, abs=1e-10)

    def test_normalize_halves(self):
        g = Grid(0.0, 1.0, 10)
        f = np.zeros(11)
        f[1:-1] = 2 / np.sqrt(0.9)
        np.testing.assert_allclose(normalize(g, f), f / 2, rtol=1e-15)

    def test_normalize_zero_raises(self):
        with pytest.raises(ZeroDivisionError, match="zero"):
            normalize(Grid(0.0, 1.0, 10), np.zeros(11))

    def test_normalized_unchanged(self, rng):
        g = Grid(0.0, 1.0, 32)
        f = normalize(g, zero_boundary(rng.normal(size=33)))
        assert np.max(np.abs(normalize(g, f) - f)) <= 1e-15

    @given(st.integers(0, 2**32 - 1))
    def test_normalize_unit_and_idempotent(self, seed):
        g = Grid.cube(-1.0, 1.0, 16, 2)
        f = zero_boundary(np.random.default_rng(seed).normal(size=g.shape))
        n1 = normalize(g, f)
        assert abs(discrete_norm(g, n1) - 1) <= 1e-14
        assert np.max(np.abs(normalize(g, n1) - n1)) <= 2e-16 * np.max(np.abs(n1)) * 4


class TestDerivatives:
    def test_sine_gradient_of_gaussian(self):
        g = Grid(-12.0, 12.0, 256)
        x = g.x[0]
        f = np.exp(-x * x / 2)
        np.testing.assert_allclose(gradient(g, f, 0), -x * f, atol=1e-12)

    def test_laplacian_full_and_periodic(self):
        g = Grid(-12.0, 12.0, 256)
        x = g.x[0]
        f = np.exp(-x * x / 2)
        np.testing.assert_allclose(laplacian(g, f), (x * x - 1) * f, atol=1e-11)
        fp = f[:-1]
        np.testing.assert_allclose(laplacian(g, fp), ((x * x - 1) * f)[:-1], atol=1e-11)
        np.testing.assert_allclose(gradient(g, fp, 0), (-x * f)[:-1], atol=1e-12)

    def test_gradient_2d_axis(self):
        g = Grid.cube(-10.0, 10.0, 128, 2)
        X, Y = g.coords()
        f = np.exp(-(X**2 + 2 * Y**2) / 2)
        np.testing.assert_allclose(gradient(g, f, 1), -2 * Y * f, atol=1e-11)


class TestInterpolationAndIO:
    def test_interpolate_nodes_and_midpoints(self):
        g = Grid(-10.0, 10.0, 128)
        f = np.exp(-g.x[0] ** 2)
        pts = np.array([[0.0], [0.05], [1.2345], [11.0]])
        vals = sine_interpolate(g, f, pts)
        np.testing.assert_allclose(vals, [1.0, np.exp(-0.0025), np.exp(-1.2345**2), 0.0], atol=1e-12)

    def test_interpolate_3d(self):
        g = Grid.cube(-8.0, 8.0, 32, 3)
        X, Y, Z = g.coords()
        f = np.broadcast_to(np.exp(-(X**2 + Y**2 + Z**2) / 4), g.shape)
        val = sine_interpolate(g, f, [[0.3, -0.2, 0.1]])
        assert val[0] == pytest.approx(np.exp(-0.14 / 4), abs=1e-9)

    def test_embed_crop_round_trip(self, rng):
        g = Grid.cube(-1.0, 1.0, 16, 2)
        f = zero_boundary(rng.normal(size=g.shape))
        for pad in (1, 2, 3):
            np.testing.assert_array_equal(crop_periodic(g, embed_periodic(g, f, pad), pad), f)

    def test_embed_coordinates_line_up(self):
        g = Grid(-2.0, 2.0, 16)
        big = g.padded(2)
        arr = embed_periodic(g, g.x[0], 2)
        xb = big.coords("periodic")[0]
        mask = arr != 0
        np.testing.assert_allclose(arr[mask], xb[mask])

    @pytest.mark.parametrize("dtype", ["complex64", "complex128"])
    def test_field_dump_round_trip(self, tmp_path, rng, dtype):
        g = Grid((-1.0, 0.0), (1.0, 2.0), (8, 10))
        f = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
        write_field(tmp_path / "f.bin", g, f, dtype)
        with open(tmp_path / "f.bin", "rb") as fh:
            header = fh.readline()
        assert b'"dtype": "%s"' % dtype.encode() in header
        g2, f2 = read_field(tmp_path / "f.bin")
        assert g2 == g
        np.testing.assert_allclose(f2, f.astype(dtype), rtol=0, atol=0)
