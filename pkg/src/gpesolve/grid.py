"""Tensor grids, discrete norms and sine/Fourier spectral transforms.

Arrays on a :class:`Grid` come in two layouts:

* full layout, shape ``(M+1, ...)`` -- every node including the boundary,
  where a Dirichlet field is identically zero;
* periodic layout, shape ``(M, ...)`` -- nodes ``x_0 .. x_{M-1}`` read as one
  period of length ``b - a``. Only the Fourier-basis steppers use it.

The sine transform convention puts the plain sum in the forward direction,

    c_l = sum_j f_j sin(mu_l (x_j - a)),      mu_l = l pi / (b - a),

and the ``2/M`` factor in the inverse, per axis.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .errors import InvalidInputError

THREADS_ENV = "GPESOLVE_THREADS"


def fft_workers():
    """Thread count for scipy.fft, from the environment (default 1)."""
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _as_tuple(value, cast):
    return tuple(cast(v) for v in np.atleast_1d(value))


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid on ``[a_1, b_1] x ... x [a_d, b_d]``.

    ``M`` is the number of intervals per axis, so an axis carries ``M + 1``
    nodes ``x_j = a + j h`` with ``h = (b - a) / M``.
    """

    a: tuple
    b: tuple
    M: tuple

    def __post_init__(self):
        a = _as_tuple(self.a, float)
        b = _as_tuple(self.b, float)
        M = _as_tuple(self.M, int)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "M", M)
        if not (len(a) == len(b) == len(M)):
            raise InvalidInputError("a, b and M must have one entry per axis")
        if len(a) not in (1, 2, 3):
            raise InvalidInputError(f"grid dimension must be 1, 2 or 3, got {len(a)}")
        for k, (lo, hi, m) in enumerate(zip(a, b, M)):
            if not hi > lo:
                raise InvalidInputError(f"axis {k}: need b > a, got [{lo}, {hi}]")
            if m < 8 or m % 2:
                raise InvalidInputError(f"axis {k}: M must be even and >= 8, got {m}")

    @classmethod
    def cube(cls, a, b, M, dim=1):
        return cls((a,) * dim, (b,) * dim, (M,) * dim)

    @property
    def dim(self):
        return len(self.M)

    @property
    def length(self):
        return tuple(hi - lo for lo, hi in zip(self.a, self.b))

    @property
    def h(self):
        return tuple(L / m for L, m in zip(self.length, self.M))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def x(self):
        """Node coordinates per axis, boundary nodes included."""
        return tuple(lo + h * np.arange(m + 1) for lo, h, m in zip(self.a, self.h, self.M))

    @property
    def shape(self):
        return tuple(m + 1 for m in self.M)

    @property
    def interior_shape(self):
        return tuple(m - 1 for m in self.M)

    @property
    def periodic_shape(self):
        return tuple(self.M)

    @property
    def interior(self):
        return (slice(1, -1),) * self.dim

    @property
    def freqs(self):
        """Sine frequencies ``mu_l = l pi / (b - a)``, ``l = 1 .. M-1``, per axis."""
        return tuple(np.arange(1, m) * np.pi / L for m, L in zip(self.M, self.length))

    @property
    def wavenumbers(self):
        """Angular wavenumbers of the periodic layout, per axis (numpy FFT order)."""
        return tuple(2 * np.pi * np.fft.fftfreq(m, d=h) for m, h in zip(self.M, self.h))

    def layout(self, arr):
        shape = np.shape(arr)
        if shape == self.shape:
            return "full"
        if shape == self.periodic_shape:
            return "periodic"
        raise InvalidInputError(
            f"array of shape {shape} matches neither full {self.shape} "
            f"nor periodic {self.periodic_shape} layout of this grid"
        )

    def coords(self, layout="full"):
        """Sparse broadcastable coordinate arrays (``indexing='ij'``)."""
        if layout == "full":
            axes = self.x
        elif layout == "periodic":
            axes = tuple(x[:-1] for x in self.x)
        else:
            raise InvalidInputError(f"unknown layout {layout!r}")
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def coords_like(self, arr):
        return self.coords(self.layout(arr))

    def padded(self, pad):
        """Grid enlarged ``pad``-fold per axis around the same centre and spacing."""
        pad = int(pad)
        if pad < 1:
            raise InvalidInputError("padding factor must be a positive integer")
        ext = [(pad - 1) * L / 2 for L in self.length]
        return Grid(
            tuple(lo - e for lo, e in zip(self.a, ext)),
            tuple(hi + e for hi, e in zip(self.b, ext)),
            tuple(pad * m for m in self.M),
        )

    def to_dict(self):
        return {"dim": self.dim, "a": list(self.a), "b": list(self.b), "M": list(self.M)}


def _check_full(grid, field):
    if np.shape(field) != grid.shape:
        raise InvalidInputError(f"field shape {np.shape(field)} does not match grid shape {grid.shape}")


def sine_forward(grid, field):
    """Sine coefficients of a Dirichlet field, shape ``(M-1, ...)``."""
    _check_full(grid, field)
    interior = np.asarray(field)[grid.interior]
    return sfft.dstn(interior, type=1, workers=fft_workers()) / 2**grid.dim


def sine_inverse(grid, coeffs):
    """Field on all nodes (zero boundary) from its sine coefficients."""
    if np.shape(coeffs) != grid.interior_shape:
        raise InvalidInputError(
            f"coefficient shape {np.shape(coeffs)} does not match {grid.interior_shape}"
        )
    values = sfft.dstn(coeffs, type=1, workers=fft_workers()) / float(np.prod(grid.M))
    out = np.zeros(grid.shape, dtype=values.dtype)
    out[grid.interior] = values
    return out


def discrete_norm(grid, field):
    """``sqrt(prod(h) * sum |f_j|^2)`` over interior nodes (all nodes if periodic)."""
    field = np.asarray(field)
    if grid.layout(field) == "full":
        field = field[grid.interior]
    return float(np.sqrt(grid.cell_volume * np.vdot(field, field).real))


def normalize(grid, field):
    norm = discrete_norm(grid, field)
    if norm == 0.0:
        raise ZeroDivisionError("cannot normalize a field whose discrete norm is zero")
    return np.asarray(field) / norm


def coefficient_norm(grid, coeffs):
    """Discrete norm of the field represented by ``coeffs`` (Parseval)."""
    weight = float(np.prod([2 * h / m for h, m in zip(grid.h, grid.M)]))
    return float(np.sqrt(weight * np.vdot(coeffs, coeffs).real))


def sine_symbol(grid):
    """``|mu|^2`` summed over axes, on the coefficient index space."""
    grids = np.meshgrid(*grid.freqs, indexing="ij", sparse=True)
    return sum(g**2 for g in grids)


def fourier_symbol(grid):
    grids = np.meshgrid(*grid.wavenumbers, indexing="ij", sparse=True)
    return sum(g**2 for g in grids)


def _sine_derivative(grid, field, axis):
    M = grid.M[axis]
    f = np.moveaxis(np.asarray(field), axis, 0)
    c = sfft.dst(f[1:-1], type=1, axis=0, workers=fft_workers()) / 2
    mu = grid.freqs[axis].reshape((-1,) + (1,) * (f.ndim - 1))
    d = np.zeros(f.shape, dtype=c.dtype)
    d[1:-1] = c * mu
    out = sfft.dct(d, type=1, axis=0, workers=fft_workers()) / M
    return np.moveaxis(out, 0, axis)


def _fourier_derivative(grid, field, axis):
    k = grid.wavenumbers[axis].copy()
    k[grid.M[axis] // 2] = 0.0
    shape = [1] * grid.dim
    shape[axis] = -1
    fhat = sfft.fft(field, axis=axis, workers=fft_workers())
    out = sfft.ifft(1j * k.reshape(shape) * fhat, axis=axis, workers=fft_workers())
    return out.real if np.isrealobj(field) else out


def gradient(grid, field, axis):
    """Spectral derivative along ``axis``.

    Full-layout fields are differentiated through their sine series (the
    result is a cosine series, nonzero on the boundary); periodic fields
    through the FFT.
    """
    if grid.layout(field) == "full":
        return _sine_derivative(grid, field, axis)
    return _fourier_derivative(grid, field, axis)


def laplacian(grid, field):
    if grid.layout(field) == "full":
        return sine_inverse(grid, -sine_symbol(grid) * sine_forward(grid, field))
    fhat = sfft.fftn(field, workers=fft_workers())
    out = sfft.ifftn(-fourier_symbol(grid) * fhat, workers=fft_workers())
    return out.real if np.isrealobj(field) else out


def sine_interpolate(grid, field, points):
    """Evaluate the sine series of a Dirichlet field at arbitrary points.

    ``points`` has shape ``(P, d)``; points outside the box give 0. Cost is
    ``O(P M^d)``, meant for 1D/2D and modest point counts.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != grid.dim:
        raise InvalidInputError(f"points must have {grid.dim} columns")
    coeffs = sine_forward(grid, field) * float(np.prod([2.0 / m for m in grid.M]))
    bases = [np.sin(np.outer(points[:, k] - grid.a[k], grid.freqs[k])) for k in range(grid.dim)]
    if grid.dim == 1:
        values = bases[0] @ coeffs
    elif grid.dim == 2:
        values = np.einsum("pl,pl->p", bases[0] @ coeffs, bases[1])
    else:
        values = np.einsum("plm,pl,pm->p", np.tensordot(bases[0], coeffs, axes=(1, 0)), bases[1], bases[2])
    inside = np.all((points >= np.array(grid.a)) & (points <= np.array(grid.b)), axis=1)
    return np.where(inside, values, 0.0)


def embed_periodic(grid, field, pad=1):
    """Place a Dirichlet field into the periodic layout of ``grid.padded(pad)``."""
    _check_full(grid, field)
    big = grid.padded(pad)
    out = np.zeros(big.periodic_shape, dtype=np.asarray(field).dtype)
    offset = [(pad - 1) * m // 2 for m in grid.M]
    target = tuple(slice(o, o + m) for o, m in zip(offset, grid.M))
    out[target] = np.asarray(field)[tuple(slice(0, m) for m in grid.M)]
    return out


def crop_periodic(grid, arr, pad=1):
    """Inverse of :func:`embed_periodic`; boundary nodes are reset to zero."""
    big = grid.padded(pad)
    if np.shape(arr) != big.periodic_shape:
        raise InvalidInputError("array does not match the padded periodic layout")
    out = np.asarray(arr)
    for k, m in enumerate(grid.M):
        offset = (pad - 1) * m // 2
        idx = (offset + np.arange(m + 1)) % big.M[k]
        out = np.take(out, idx, axis=k)
    out = out.copy()
    for k in range(grid.dim):
        edge = [slice(None)] * grid.dim
        edge[k] = [0, -1]
        out[tuple(edge)] = 0
    return out


def write_field(path, grid, field, dtype="complex128"):
    """Write a field dump: one JSON header line, then little-endian raw values."""
    if dtype not in ("complex64", "complex128"):
        raise InvalidInputError(f"unsupported dump dtype {dtype!r}")
    field = np.asarray(field)
    header = dict(grid.to_dict(), dtype=dtype, shape=list(field.shape))
    data = np.ascontiguousarray(field, dtype=np.dtype(dtype).newbyteorder("<"))
    with open(Path(path), "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(data.tobytes())


def read_field(path):
    with open(Path(path), "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = Grid(header["a"], header["b"], header["M"])
    shape = tuple(header.get("shape", grid.shape))
    dtype = np.dtype(header["dtype"]).newbyteorder("<")
    field = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(np.dtype(header["dtype"]))
    return grid, field
