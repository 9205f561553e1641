"""Trigonometric polynomials on the d-dimensional torus.

Coefficient order, per axis: the constant first, then each frequency
k = 1..n contributing two entries. For the real basis those are
(sqrt(2) cos kx, sqrt(2) sin kx); for the complex basis (e^{ikx}, e^{-ikx}).
Multi-indices are lexicographic (C order), so a d-dimensional coefficient
vector reshapes to (2n+1,) * d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache, reduce
from typing import TYPE_CHECKING, Literal

import numpy as np

from .errors import BasisError, DomainError, ShapeError, SizeError

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    type FloatArray = npt.NDArray[np.float64]
    type ComplexArray = npt.NDArray[np.complex128]

type EvalMethod = Literal["auto", "fft", "direct"]

_SQRT2 = math.sqrt(2.0)
_TWO_PI = 2.0 * math.pi

# |sin(x/2)| below this switches the Dirichlet kernel to its cosine series
DIRICHLET_SERIES_THRESHOLD = 1e-8


class BasisKind(Enum):
    """Orthonormal systems spanning the trigonometric polynomials of degree <= n."""

    REAL_1D = "real-1d"  # {1, sqrt2 cos kx, sqrt2 sin kx}
    REAL_TENSOR = "real-tensor"  # d-fold tensor product of REAL_1D
    COMPLEX_EXP = "complex-exponential"  # {e^{ik.x} : |k|_inf <= n}

    def __repr__(self) -> str:
        return str(self.value)

    @property
    def is_real(self) -> bool:
        return self is not BasisKind.COMPLEX_EXP


@dataclass(frozen=True, slots=True)
class BasisSpec:
    dimension: int
    degree: int
    kind: BasisKind = BasisKind.REAL_1D

    def __post_init__(self) -> None:
        if self.dimension < 1:
            msg = f"dimension must be positive, provided {self.dimension=}"
            raise ShapeError(msg)
        if self.degree < 0:
            msg = f"degree must be non-negative, provided {self.degree=}"
            raise BasisError(msg)
        if self.kind is BasisKind.REAL_1D and self.dimension != 1:
            msg = f"real-1d basis requires dimension 1, provided {self.dimension=}"
            raise BasisError(msg)

    @property
    def axis_size(self) -> int:
        return 2 * self.degree + 1

    @property
    def size(self) -> int:
        """N = (2n+1)^d."""
        return self.axis_size**self.dimension


def default_basis(
    dimension: int, degree: int, kind: BasisKind | None = None
) -> BasisSpec:
    """Real-1d in one dimension, real-tensor above, unless kind is given."""
    if kind is None:
        kind = BasisKind.REAL_1D if dimension == 1 else BasisKind.REAL_TENSOR
    return BasisSpec(dimension=dimension, degree=degree, kind=kind)


@dataclass(frozen=True, slots=True, eq=False)
class TrigPoly:
    """T(x) = sum_i coeffs[i] phi_i(x) for the orthonormal basis phi."""

    basis: BasisSpec
    coeffs: FloatArray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.shape[0] != self.basis.size:
            msg = (
                f"coefficient vector must have length N={self.basis.size}, "
                f"provided shape {coeffs.shape}"
            )
            raise SizeError(msg)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.basis.degree

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def scaled(self, factor: float) -> TrigPoly:
        return TrigPoly(self.basis, factor * self.coeffs)

    def coeff_tensor(self) -> FloatArray:
        return self.coeffs.reshape((self.basis.axis_size,) * self.basis.dimension)


def make_poly(basis: BasisSpec, coeffs: Sequence[float] | FloatArray) -> TrigPoly:
    return TrigPoly(basis, np.asarray(coeffs, dtype=np.float64))


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Equispaced tensor grid: x_j = offset + 2 pi j / M on every axis."""

    dimension: int
    points: int
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.dimension < 1 or self.points < 1:
            msg = f"grid needs positive dimension and points, provided {self}"
            raise ShapeError(msg)
        if not 0.0 <= self.offset < _TWO_PI / self.points:
            msg = f"grid offset must lie in [0, 2pi/M), provided {self.offset=}"
            raise ShapeError(msg)

    @property
    def size(self) -> int:
        return self.points**self.dimension

    @property
    def nodes(self) -> FloatArray:
        return self.offset + _TWO_PI * np.arange(self.points) / self.points


def canonical_grid(basis: BasisSpec) -> GridSpec:
    """The N-point grid x_k = 2 pi k / (2n+1) on which grid samples are whitened."""
    return GridSpec(dimension=basis.dimension, points=basis.axis_size)


# --- per-axis building blocks -------------------------------------------------
@lru_cache(maxsize=256)
def axis_frequencies(degree: int) -> tuple[int, ...]:
    """Frequency carried by each per-axis basis slot: 0, 1, -1, 2, -2, ..."""
    freqs = [0]
    for k in range(1, degree + 1):
        freqs.extend((k, -k))
    return tuple(freqs)


@lru_cache(maxsize=256)
def _fourier_map(kind: BasisKind, degree: int) -> ComplexArray:
    """Per-axis matrix from basis coefficients to Fourier coefficients c_k (row k+n)."""
    size = 2 * degree + 1
    fourier = np.zeros((size, size), dtype=np.complex128)
    fourier[degree, 0] = 1.0
    for k in range(1, degree + 1):
        first, second = 2 * k - 1, 2 * k
        if kind is BasisKind.COMPLEX_EXP:
            fourier[degree + k, first] = 1.0
            fourier[degree - k, second] = 1.0
        else:
            fourier[degree + k, first] = fourier[degree - k, first] = 1 / _SQRT2
            fourier[degree + k, second] = -1j / _SQRT2
            fourier[degree - k, second] = 1j / _SQRT2
    fourier.flags.writeable = False
    return fourier


def axis_basis_values(
    kind: BasisKind, degree: int, x: Sequence[float] | FloatArray
) -> FloatArray | ComplexArray:
    """Matrix of shape (len(x), 2n+1): the per-axis basis functions at each x."""
    xs = np.asarray(x, dtype=np.float64)
    phase = np.multiply.outer(xs, np.arange(1, degree + 1))
    if kind is BasisKind.COMPLEX_EXP:
        values = np.empty((xs.shape[0], 2 * degree + 1), dtype=np.complex128)
        values[:, 1::2] = np.exp(1j * phase)
        values[:, 2::2] = np.exp(-1j * phase)
    else:
        values = np.empty((xs.shape[0], 2 * degree + 1), dtype=np.float64)
        values[:, 1::2] = _SQRT2 * np.cos(phase)
        values[:, 2::2] = _SQRT2 * np.sin(phase)
    values[:, 0] = 1.0
    return values


def _contract(tensor: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Applies mats[a] along axis a of tensor."""
    for axis, mat in enumerate(mats):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor


# --- evaluation ---------------------------------------------------------------
def evaluate(
    poly: TrigPoly, grid: GridSpec, *, method: EvalMethod = "auto"
) -> FloatArray | ComplexArray:
    """Values of poly on every grid point, as an array of shape (M,) * d.

    "auto" takes the FFT path whenever M >= 2n+1 and direct summation
    otherwise. Real bases give real arrays.
    """
    basis = poly.basis
    if grid.dimension != basis.dimension:
        msg = (
            f"grid dimension {grid.dimension} does not match "
            f"basis dimension {basis.dimension}"
        )
        raise ShapeError(msg)
    if method == "auto":
        method = "fft" if grid.points >= basis.axis_size else "direct"
    if method == "fft":
        if grid.points < basis.axis_size:
            msg = f"fft evaluation needs M >= 2n+1={basis.axis_size}, provided M={grid.points}"
            raise ShapeError(msg)
        values = _evaluate_fft(poly, grid)
    else:
        values = _evaluate_direct(poly, grid)
    if basis.kind.is_real:
        return np.ascontiguousarray(values.real)
    return values


def _evaluate_direct(poly: TrigPoly, grid: GridSpec) -> np.ndarray:
    basis = poly.basis
    phi = axis_basis_values(basis.kind, basis.degree, grid.nodes)
    return _contract(poly.coeff_tensor(), [phi] * basis.dimension)


def _evaluate_fft(poly: TrigPoly, grid: GridSpec) -> ComplexArray:
    basis = poly.basis
    n, d, m = basis.degree, basis.dimension, grid.points
    fourier = _contract(
        poly.coeff_tensor().astype(np.complex128),
        [_fourier_map(basis.kind, n)] * d,
    )
    freqs = np.arange(-n, n + 1)
    if grid.offset:
        shift = np.exp(1j * freqs * grid.offset)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = -1
            fourier = fourier * shift.reshape(shape)
    spectrum = np.zeros((m,) * d, dtype=np.complex128)
    index = freqs % m
    spectrum[np.ix_(*([index] * d))] = fourier
    return np.fft.ifftn(spectrum, norm="forward")


def evaluate_at(poly: TrigPoly, point: Sequence[float] | FloatArray) -> float | complex:
    """T(point) by direct summation."""
    basis = poly.basis
    x = np.atleast_1d(np.asarray(point, dtype=np.float64))
    if x.shape != (basis.dimension,):
        msg = f"point must have {basis.dimension} coordinates, provided {x.shape}"
        raise ShapeError(msg)
    value = poly.coeff_tensor()
    for xa in x:
        row = axis_basis_values(basis.kind, basis.degree, [xa])[0]
        value = np.tensordot(row, value, axes=([0], [0]))
    if basis.kind.is_real:
        return float(value.real)
    return complex(value)


# --- structural quantities ----------------------------------------------------
def christoffel_m(basis: BasisSpec, point: Sequence[float] | FloatArray) -> float:
    """m(x) = sum_i |phi_i(x)|^2 over all N basis functions.

    Equals N identically for every kind here; the sum is formed explicitly.
    """
    x = np.atleast_1d(np.asarray(point, dtype=np.float64))
    if x.shape != (basis.dimension,):
        msg = f"point must have {basis.dimension} coordinates, provided {x.shape}"
        raise ShapeError(msg)
    rows = [axis_basis_values(basis.kind, basis.degree, [xa])[0] for xa in x]
    everything = reduce(np.multiply.outer, rows)
    return float(np.sum(np.abs(everything) ** 2))


def dirichlet_kernel(n: int, x: float | FloatArray) -> float | FloatArray:
    """D_n(x) = 1 + 2 sum_{k<=n} cos kx = sin((n+1/2)x) / sin(x/2)."""
    if n < 0:
        msg = f"degree must be non-negative, provided {n=}"
        raise DomainError(msg)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    half = np.sin(xs / 2)
    near = np.abs(half) < DIRICHLET_SERIES_THRESHOLD
    values = np.sin((n + 0.5) * xs) / np.where(near, 1.0, half)
    if np.any(near):
        cosines = np.cos(np.multiply.outer(xs[near], np.arange(1, n + 1)))
        values[near] = 1.0 + 2.0 * cosines.sum(axis=-1)
    if scalar:
        return float(values[0])
    return values


def fejer_poly(n: int, dimension: int = 1) -> TrigPoly:
    """Fejer kernel F_n, tensorised over d axes, in the real basis.

    F_n(x) = sum_{|k|<=n} (1 - |k|/(n+1)) e^{ikx}; non-negative with mean 1.
    """
    if n < 0:
        msg = f"degree must be non-negative, provided {n=}"
        raise DomainError(msg)
    axis = np.zeros(2 * n + 1)
    axis[0] = 1.0
    axis[1::2] = _SQRT2 * (1.0 - np.arange(1, n + 1) / (n + 1))
    basis = default_basis(dimension, n)
    if dimension == 1:
        return TrigPoly(basis, axis)
    return TrigPoly(basis, reduce(np.multiply.outer, [axis] * dimension).ravel())
