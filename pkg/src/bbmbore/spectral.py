"""Periodic grids, Fourier transforms, multipliers and dealiased products.

Transform convention: the forward transform is the unnormalized sum
``F[k] = sum_x f[x] exp(-i k x)`` and the inverse divides by the total
number of points (the ``numpy.fft`` convention). Each axis spans
``[-L/2, L/2)`` and physical wavenumbers are ``2*pi*n/L``.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "GridSpec",
    "Field",
    "MultiplierOp",
    "transform",
    "inverse_transform",
    "apply_multiplier",
    "derivative_op",
    "laplacian_op",
    "helmholtz_inverse_op",
    "gradient",
    "divergence",
    "dealias_mask",
    "dealias_product",
    "friedrichs_project",
    "inner",
    "write_field_csv",
    "read_field_csv",
    "write_field_binary",
    "read_field_binary",
]


def _as_tuple(value, kind):
    if np.isscalar(value):
        return (kind(value),)
    return tuple(kind(v) for v in value)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in one or two dimensions.

    Parameters
    ----------
    lengths : float or sequence of float
        Domain length per axis; axis ``l`` covers ``[-L_l/2, L_l/2)``.
    points : int or sequence of int
        Even number of nodes per axis, at least 4.
    """

    lengths: tuple
    points: tuple

    def __post_init__(self):
        lengths = _as_tuple(self.lengths, float)
        points = _as_tuple(self.points, int)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "points", points)
        if len(lengths) != len(points):
            raise ConfigurationError("lengths and points differ in dimension", "grid")
        if len(points) not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {len(points)}", "grid.dim")
        for L, n in zip(lengths, points):
            if not (np.isfinite(L) and L > 0):
                raise ConfigurationError(f"length must be positive, got {L}", "grid.length")
            if n < 4 or n % 2:
                raise ConfigurationError(f"points must be even and >= 4, got {n}", "grid.points")

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axis(self, l: int = 0) -> np.ndarray:
        L, n = self.lengths[l], self.points[l]
        return -L / 2 + L * np.arange(n) / n

    @cached_property
    def coords(self) -> tuple:
        """Node coordinates, one array of ``shape`` per axis (ij indexing)."""
        return tuple(np.meshgrid(*[self.axis(l) for l in range(self.dim)], indexing="ij"))

    def index_axis(self, l: int = 0) -> np.ndarray:
        """Integer wavenumber indices in FFT order; -N/2 is the Nyquist index."""
        n = self.points[l]
        return np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)

    def k_axis(self, l: int = 0) -> np.ndarray:
        return 2 * np.pi * self.index_axis(l) / self.lengths[l]

    @cached_property
    def kvec(self) -> tuple:
        """Physical wavenumber components on the full lattice."""
        return tuple(np.meshgrid(*[self.k_axis(l) for l in range(self.dim)], indexing="ij"))

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.kvec))

    @cached_property
    def kabs_deriv(self) -> np.ndarray:
        """|k| with Nyquist components removed, matching spectral derivatives."""
        out = np.zeros(self.shape)
        for l in range(self.dim):
            out += np.imag(derivative_op(self, l).symbol) ** 2
        return np.sqrt(out)

    @property
    def kmax(self) -> float:
        return float(self.kabs.max())

    def line(self, l: int = 0) -> "GridSpec":
        """One-dimensional grid matching axis ``l``."""
        return GridSpec(self.lengths[l], self.points[l])

    def check_array(self, a: np.ndarray, what: str = "array") -> None:
        if np.shape(a) != self.shape:
            raise ConfigurationError(
                f"{what} shape {np.shape(a)} does not match grid shape {self.shape}"
            )


class Field:
    """Real samples on a periodic grid with a lazily cached spectrum."""

    __slots__ = ("grid", "samples", "_spectrum")

    def __init__(self, grid: GridSpec, samples, spectrum=None):
        samples = np.array(samples, dtype=float)
        grid.check_array(samples, "samples")
        samples.setflags(write=False)
        self.grid = grid
        self.samples = samples
        self._spectrum = None
        if spectrum is not None:
            spectrum = np.array(spectrum, dtype=complex)
            spectrum.setflags(write=False)
            self._spectrum = spectrum

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape, complex))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "Field":
        return cls(grid, fn(*grid.coords))

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            spec = np.fft.fftn(self.samples)
            spec.setflags(write=False)
            self._spectrum = spec
        return self._spectrum

    def l2(self) -> float:
        """Discrete L2 norm with spacing quadrature."""
        return float(np.sqrt(self.grid.cell_volume * np.sum(self.samples**2)))

    def linf(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ConfigurationError("fields live on different grids")
            return other.samples
        return other

    def __add__(self, other):
        return Field(self.grid, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.samples - self._coerce(other))

    def __rsub__(self, other):
        return Field(self.grid, self._coerce(other) - self.samples)

    def __mul__(self, c):
        if isinstance(c, Field):
            raise TypeError("use dealias_product for field products")
        return Field(self.grid, self.samples * c)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples)

    def __repr__(self):
        return f"Field(grid={self.grid}, linf={self.linf():.4g})"


def transform(f: Field) -> np.ndarray:
    """Unnormalized forward DFT of ``f`` (read-only view of the cache)."""
    return f.spectrum


def inverse_transform(spectrum, grid: GridSpec, *, check_real: bool = True) -> Field:
    """Inverse DFT (divided by the point count) returning a real field."""
    spectrum = np.asarray(spectrum, dtype=complex)
    grid.check_array(spectrum, "spectrum")
    values = np.fft.ifftn(spectrum)
    if check_real:
        scale = max(np.max(np.abs(values.real)), 1e-300)
        if np.max(np.abs(values.imag)) > 1e-9 * scale:
            raise ConfigurationError("spectrum is not Hermitian; inverse is not real")
    return Field(grid, values.real, spectrum)


@dataclass(frozen=True)
class MultiplierOp:
    """Fourier multiplier with a symbol tabulated on the full lattice."""

    grid: GridSpec
    symbol: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        sym = np.asarray(self.symbol)
        self.grid.check_array(sym, "symbol")
        if not np.all(np.isfinite(sym)):
            raise ConfigurationError(f"multiplier {self.label!r} has non-finite symbol values")

    def __matmul__(self, other: "MultiplierOp") -> "MultiplierOp":
        if other.grid != self.grid:
            raise ConfigurationError("multipliers on different grids")
        return MultiplierOp(self.grid, self.symbol * other.symbol, f"{self.label}*{other.label}")


def apply_multiplier(op: MultiplierOp, f: Field) -> Field:
    if op.grid != f.grid:
        raise ConfigurationError("multiplier and field live on different grids")
    return inverse_transform(op.symbol * f.spectrum, f.grid)


def _nyquist_free(grid: GridSpec, l: int) -> np.ndarray:
    k = grid.k_axis(l).copy()
    k[grid.points[l] // 2] = 0.0
    return k


def derivative_op(grid: GridSpec, l: int = 0, order: int = 1) -> MultiplierOp:
    """Spectral partial derivative along axis ``l`` with the Nyquist mode zeroed."""
    k = _nyquist_free(grid, l)
    shape = [1] * grid.dim
    shape[l] = grid.points[l]
    sym = np.broadcast_to(((1j * k) ** order).reshape(shape), grid.shape).copy()
    return MultiplierOp(grid, sym, f"d{order}/dx{l}")


def laplacian_op(grid: GridSpec) -> MultiplierOp:
    return MultiplierOp(grid, -(grid.kabs_deriv**2).astype(complex), "laplacian")


def helmholtz_inverse_op(grid: GridSpec, coef: float) -> MultiplierOp:
    """(I - coef*Laplacian)^{-1}; ``coef`` plays the role of eps*b or eps*d."""
    if coef < 0:
        raise ConfigurationError(f"coefficient must be nonnegative, got {coef}")
    sym = 1.0 / (1.0 + coef * grid.kabs_deriv**2)
    return MultiplierOp(grid, sym.astype(complex), f"(I-{coef:g}lap)^-1")


def gradient(f: Field) -> list:
    return [apply_multiplier(derivative_op(f.grid, l), f) for l in range(f.grid.dim)]


def divergence(components: Sequence[Field]) -> Field:
    grid = components[0].grid
    if len(components) != grid.dim:
        raise ConfigurationError("divergence needs one component per axis")
    spec = sum(derivative_op(grid, l).symbol * c.spectrum for l, c in enumerate(components))
    return inverse_transform(spec, grid)


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Two-thirds rule: keep integer indices with |n| < N/3 on every axis."""
    masks = [np.abs(grid.index_axis(l)) * 3 < grid.points[l] for l in range(grid.dim)]
    return np.logical_and.reduce(np.meshgrid(*masks, indexing="ij"))


def dealias_product(f: Field, g: Field) -> Field:
    """Alias-free product of two fields truncated to the two-thirds band."""
    if f.grid != g.grid:
        raise ConfigurationError("product of fields on different grids")
    mask = dealias_mask(f.grid)
    a = np.fft.ifftn(f.spectrum * mask).real
    b = np.fft.ifftn(g.spectrum * mask).real
    return inverse_transform(np.fft.fftn(a * b) * mask, f.grid)


def friedrichs_project(f: Field, m: float) -> Field:
    """Zero every Fourier mode with |k| > m."""
    if not m > 0:
        raise ConfigurationError(f"cutoff m must be positive, got {m}")
    return inverse_transform(np.where(f.grid.kabs <= m, f.spectrum, 0), f.grid)


def inner(f: Field, g: Field) -> float:
    """Discrete L2 inner product with spacing quadrature."""
    if f.grid != g.grid:
        raise ConfigurationError("inner product of fields on different grids")
    return float(f.grid.cell_volume * np.sum(f.samples * g.samples))


# ---------------------------------------------------------------- serialization

def write_field_csv(f: Field, path) -> None:
    """One row per node: coordinates then value, 17 significant digits."""
    names = ["x", "y"][: f.grid.dim] + ["value"]
    cols = [c.ravel() for c in f.grid.coords] + [f.samples.ravel()]
    with open(path, "w", newline="") as fh:
        fh.write(f"# lengths={','.join(repr(L) for L in f.grid.lengths)}"
                 f" points={','.join(str(n) for n in f.grid.points)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow(["%.17g" % v for v in row])


def read_field_csv(path) -> Field:
    with open(path) as fh:
        meta = fh.readline().lstrip("# ").split()
        info = dict(item.split("=") for item in meta)
        lengths = [float(v) for v in info["lengths"].split(",")]
        points = [int(v) for v in info["points"].split(",")]
        grid = GridSpec(lengths, points)
        reader = csv.reader(fh)
        next(reader)
        values = [float(row[-1]) for row in reader]
    if len(values) != grid.size:
        raise ConfigurationError(f"{path}: expected {grid.size} rows, found {len(values)}")
    return Field(grid, np.array(values).reshape(grid.shape))


def write_field_binary(f: Field, path) -> None:
    """Header (int64 dim, float64 lengths, int64 points; little-endian), then float64 samples."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", g.dim))
        fh.write(struct.pack(f"<{g.dim}d", *g.lengths))
        fh.write(struct.pack(f"<{g.dim}q", *g.points))
        fh.write(np.ascontiguousarray(f.samples, dtype="<f8").tobytes(order="C"))


def read_field_binary(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    (dim,) = struct.unpack_from("<q", raw, 0)
    if dim not in (1, 2):
        raise ConfigurationError(f"{path}: bad dimension header {dim}")
    lengths = struct.unpack_from(f"<{dim}d", raw, 8)
    points = struct.unpack_from(f"<{dim}q", raw, 8 + 8 * dim)
    grid = GridSpec(lengths, points)
    offset = 8 + 16 * dim
    data = np.frombuffer(raw, dtype="<f8", offset=offset)
    if data.size != grid.size:
        raise ConfigurationError(f"{path}: expected {grid.size} samples, found {data.size}")
    return Field(grid, data.reshape(grid.shape).astype(float))
