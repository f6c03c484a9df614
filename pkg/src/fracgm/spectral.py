"""Uniform periodic grids and Fourier-multiplier calculus on them.

The real line is truncated to ``[-L, L)`` with periodic wrap.  Every operator
here is a Fourier multiplier applied with a real FFT; the multiplier symbols
are checked once for Hermitian symmetry so that the result is real by
construction.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    FitDomainError,
    IncompatibleGridError,
    InvalidFieldError,
    InvalidParameterError,
)

#: imaginary residue tolerated in a multiplier before it is declared broken
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[-half_length, half_length)``.

    The point ``x = 0`` is always a node (index ``n_points // 2``) and the
    reflection ``x -> -x`` maps nodes onto nodes, so even/odd symmetry is
    exact on the discrete level.
    """

    n_points: int
    half_length: float

    def __post_init__(self):
        n = int(self.n_points)
        if n != self.n_points or n < 8 or n & (n - 1):
            raise InvalidParameterError(f"n_points must be a power of two >= 8, got {self.n_points}")
        if not (np.isfinite(self.half_length) and self.half_length > 0):
            raise InvalidParameterError(f"half_length must be positive, got {self.half_length}")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @functools.cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.spacing * np.arange(self.n_points)
        x[self.n_points // 2] = 0.0
        x.setflags(write=False)
        return x

    @functools.cached_property
    def xi(self) -> np.ndarray:
        """Wavenumbers pi*j/L in FFT order, j = 0..n/2-1, -n/2..-1."""
        xi = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        xi.setflags(write=False)
        return xi

    @functools.cached_property
    def rxi(self) -> np.ndarray:
        """Nonnegative wavenumbers used by the real FFT (last is Nyquist)."""
        rxi = 2.0 * np.pi * np.fft.rfftfreq(self.n_points, d=self.spacing)
        rxi.setflags(write=False)
        return rxi

    @functools.cached_property
    def mirror(self) -> np.ndarray:
        """Index permutation implementing f(x) -> f(-x)."""
        idx = (-np.arange(self.n_points)) % self.n_points
        idx.setflags(write=False)
        return idx

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.n_points * factor, self.half_length)

    def index_of(self, x0: float) -> int:
        return int(round((x0 + self.half_length) / self.spacing)) % self.n_points


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`Grid1D`.  Immutable."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise InvalidFieldError(
                f"field has shape {v.shape}, grid expects ({self.grid.n_points},)")
        if not np.all(np.isfinite(v)):
            raise InvalidFieldError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def reflect(self) -> "Field":
        return Field(self.grid, self.values[self.grid.mirror])

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    @classmethod
    def from_function(cls, grid: Grid1D, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, func(grid.x))


def _check_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise IncompatibleGridError(f"grids differ: {f.grid} vs {g.grid}")


def _check_symbol(grid: Grid1D, full_symbol: np.ndarray) -> np.ndarray:
    """Verify Hermitian symmetry of a multiplier and return its rfft half."""
    partner = full_symbol[grid.mirror]
    scale = max(1.0, float(np.max(np.abs(full_symbol))))
    if np.max(np.abs(partner - np.conj(full_symbol))) > IMAG_TOL * scale:
        raise InvalidParameterError("multiplier is not Hermitian; output would not be real")
    half = full_symbol[: grid.n_points // 2 + 1].copy()
    # Nyquist mode is its own partner: the symbol there must be real
    half[-1] = half[-1].real if np.iscomplexobj(half) else half[-1]
    return half


@functools.lru_cache(maxsize=64)
def _frac_symbol(grid: Grid1D, s: float) -> np.ndarray:
    half = _check_symbol(grid, np.abs(grid.xi) ** (2.0 * s))
    half.setflags(write=False)
    return half


@functools.lru_cache(maxsize=64)
def _resolvent_symbol(grid: Grid1D, s: float, m: float) -> np.ndarray:
    half = _check_symbol(grid, 1.0 / (np.abs(grid.xi) ** (2.0 * s) + m))
    half.setflags(write=False)
    return half


@functools.lru_cache(maxsize=8)
def _derivative_symbol(grid: Grid1D) -> np.ndarray:
    sym = 1j * grid.xi
    sym[grid.n_points // 2] = 0.0  # Nyquist: i*xi has no real counterpart
    half = _check_symbol(grid, sym)
    half.setflags(write=False)
    return half


def apply_symbol(values: np.ndarray, grid: Grid1D, half_symbol: np.ndarray) -> np.ndarray:
    """Multiply the rfft of ``values`` by ``half_symbol`` and transform back."""
    return np.fft.irfft(np.fft.rfft(values) * half_symbol, n=grid.n_points)


def flap(values: np.ndarray, grid: Grid1D, s: float) -> np.ndarray:
    """Array-level (-Delta)^s."""
    return apply_symbol(values, grid, _frac_symbol(grid, float(s)))


def resolve(values: np.ndarray, grid: Grid1D, s: float, m: float) -> np.ndarray:
    """Array-level ((-Delta)^s + m)^{-1}."""
    if not m > 0:
        raise InvalidParameterError(f"resolvent mass must be positive, got {m}")
    return apply_symbol(values, grid, _resolvent_symbol(grid, float(s), float(m)))


def derivative(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    return apply_symbol(values, grid, _derivative_symbol(grid))


def shift(values: np.ndarray, grid: Grid1D, a: float) -> np.ndarray:
    """Return samples of f(x - a) by spectral (trigonometric) interpolation."""
    half = np.exp(-1j * grid.rxi * a)
    half[-1] = np.cos(grid.rxi[-1] * a)
    return apply_symbol(values, grid, half)


def _check_s(s: float):
    if not 0.0 < s < 1.0:
        raise InvalidParameterError(f"fractional order must lie in (0, 1), got {s}")


def fractional_laplacian(f: Field, s: float) -> Field:
    """(-Delta)^s f via the multiplier |xi|^{2s}; the zero mode maps to 0."""
    _check_s(s)
    if not np.all(np.isfinite(f.values)):
        raise InvalidFieldError("non-finite input to fractional_laplacian")
    return Field(f.grid, flap(f.values, f.grid, s))


def resolvent(f: Field, s: float, m: float) -> Field:
    """((-Delta)^s + m)^{-1} f via the multiplier 1/(|xi|^{2s} + m)."""
    _check_s(s)
    if not m > 0:
        raise InvalidParameterError(f"resolvent mass must be positive, got {m}")
    return Field(f.grid, resolve(f.values, f.grid, s, m))


def spectral_derivative(f: Field) -> Field:
    return Field(f.grid, derivative(f.values, f.grid))


def spectral_shift(f: Field, a: float) -> Field:
    return Field(f.grid, shift(f.values, f.grid, a))


def inner_product(f: Field, g: Field) -> float:
    """Rectangle rule h * sum(f g); exact for trigonometric polynomials."""
    _check_grid(f, g)
    return float(f.grid.spacing * np.dot(f.values, g.values))


def fit_decay_exponent(f: Field, window) -> tuple[float, float]:
    """Least-squares fit ``f ~ coefficient * x**(-exponent)`` on ``window``.

    Only grid nodes with ``x_lo <= x <= x_hi`` (positive side) are used.
    """
    x_lo, x_hi = map(float, window)
    L = f.grid.half_length
    if not 0 < x_lo < x_hi < L:
        raise FitDomainError(f"window {window} must satisfy 0 < x_lo < x_hi < {L}")
    x = f.grid.x
    sel = (x >= x_lo) & (x <= x_hi)
    if sel.sum() < 2:
        raise FitDomainError("window contains fewer than two grid nodes")
    y = f.values[sel]
    if np.any(y <= 0):
        raise FitDomainError("non-positive samples inside the fit window")
    slope, intercept = np.polyfit(np.log(x[sel]), np.log(y), 1)
    return float(-slope), float(np.exp(intercept))


def fit_power_law(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Fit ``y ~ c * x**(-p)`` on arbitrary positive samples; returns (p, c)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitDomainError("power-law fit needs positive abscissae and samples")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(-slope), float(np.exp(intercept))


# --- serialization ---------------------------------------------------------

def write_csv(f: Field, path) -> None:
    """Two columns ``x,value`` with 17 significant digits (round-trips exactly)."""
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for xv, v in zip(f.grid.x, f.values):
            fh.write(f"{float(xv)!r},{float(v)!r}\n")


def read_csv(path) -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, v = data[:, 0], data[:, 1]
    grid = Grid1D(len(x), float(-x[0]))
    if np.max(np.abs(grid.x - x)) > 1e-9 * grid.half_length:
        raise InvalidFieldError(f"{path}: abscissae do not form a periodic grid")
    return Field(grid, v)


_BIN_HEADER = np.dtype([("n", "<i8"), ("L", "<f8")])


def write_binary(f: Field, path) -> None:
    """Little-endian int64 n, float64 L, then n float64 samples."""
    header = np.array([(f.grid.n_points, f.grid.half_length)], dtype=_BIN_HEADER)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.asarray(f.values, dtype="<f8").tobytes())


def read_binary(path) -> Field:
    raw = open(path, "rb").read()
    header = np.frombuffer(raw[: _BIN_HEADER.itemsize], dtype=_BIN_HEADER)[0]
    n = int(header["n"])
    values = np.frombuffer(raw[_BIN_HEADER.itemsize:], dtype="<f8")
    if values.size != n:
        raise InvalidFieldError(f"{path}: expected {n} samples, found {values.size}")
    return Field(Grid1D(n, float(header["L"])), values.copy())
