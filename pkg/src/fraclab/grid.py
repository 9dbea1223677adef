"""Periodic-box discretization of R^n and Fourier multiplier operators.

Conventions
-----------
Grid points are ``x_j = (j - N/2) * dx`` per axis, so the box centre is the
grid point with index ``N/2`` on every axis.  Frequencies are
``xi_k = 2*pi*k/L`` with ``k`` in ``[-N/2, N/2)``, stored in numpy FFT order.

The forward transform approximates ``f^(xi) = int f(x) exp(-i x.xi) dx``::

    u^_k = dx^n * sum_j u_j exp(-i x_j . xi_k)

and the inverse carries the ``(2 pi)^-n dxi^n = L^-n`` factor, so the pair is
an exact inverse and Parseval reads
``dx^n sum |u|^2 = L^-n sum |u^|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, PreconditionError, ZeroModeError


@dataclass(frozen=True)
class Grid:
    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise PreconditionError("n in {1,2,3}", f"dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 8 or self.N & (self.N - 1):
            raise PreconditionError("N power of two >= 8", f"N must be a power of two >= 8, got {self.N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise PreconditionError("L > 0", f"box length must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N**self.n

    @property
    def dx(self):
        return self.L / self.N

    @property
    def dxi(self):
        return 2 * np.pi / self.L

    @property
    def cell_volume(self):
        return self.dx**self.n

    @property
    def center_index(self):
        return (self.N // 2,) * self.n

    @cached_property
    def x(self):
        """1-D coordinate axis (identical on every axis)."""
        return (np.arange(self.N) - self.N // 2) * self.dx

    @cached_property
    def coords(self):
        return np.meshgrid(*([self.x] * self.n), indexing="ij")

    @cached_property
    def radius(self):
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def k(self):
        """Integer wave numbers along one axis, FFT order."""
        return np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)

    @cached_property
    def xi_abs(self):
        ks = np.meshgrid(*([self.k] * self.n), indexing="ij")
        return self.dxi * np.sqrt(sum(kk.astype(float) ** 2 for kk in ks))

    @cached_property
    def _phase(self):
        # exp(i L/2 xi_k) = (-1)^k per axis
        sign = np.where(self.k % 2 == 0, 1.0, -1.0)
        out = sign
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, sign)
        return out

    def spec(self):
        return f"{self.n},{self.N},{self.L!r}"

    @classmethod
    def parse(cls, text):
        parts = [p for p in text.replace(",", " ").split() if p]
        if len(parts) != 3:
            raise PreconditionError("grid n,N,L", f"grid must be 'n,N,L', got {text!r}")
        return cls(int(parts[0]), int(parts[1]), float(parts[2]))


@dataclass
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.size:
            raise PreconditionError(
                "length = N^n", f"expected {self.grid.size} values, got {v.size}"
            )
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise PreconditionError("finite values", "field contains non-finite values")
        self.values = v

    def like(self, values):
        return Field(self.grid, values)

    def __mul__(self, a):
        return Field(self.grid, self.values * float(a))

    __rmul__ = __mul__

    def __add__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass
class Spectrum:
    grid: Grid
    coefficients: np.ndarray


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def transform(u: Field) -> Spectrum:
    g = u.grid
    coef = np.fft.fftn(u.values) * g._phase * g.cell_volume
    return Spectrum(g, coef)


def inverse_transform(S: Spectrum) -> Field:
    g = S.grid
    c = np.asarray(S.coefficients)
    if not np.all(np.isfinite(c)):
        raise PreconditionError("finite values", "spectrum contains non-finite values")
    vals = np.fft.ifftn(c * g._phase) * (g.size / g.L**g.n)
    return Field(g, vals.real)


def apply_multiplier(u: Field, m: np.ndarray) -> Field:
    """Apply a real, even Fourier multiplier ``m(xi)`` to ``u``.

    The phase factor and both normalizations cancel for multipliers, so this
    skips them.
    """
    return Field(u.grid, np.fft.ifftn(np.fft.fftn(u.values) * m).real)


def power_symbol(grid: Grid, s: float) -> np.ndarray:
    """``|xi|^s`` with the zero mode set to 1 for ``s == 0`` and 0 otherwise."""
    if s == 0:
        return np.ones(grid.shape)
    return grid.xi_abs**s


def fractional_laplacian(u: Field, s: float) -> Field:
    """Multiplier ``|xi|^s``, i.e. ``(-Delta)^(s/2)``."""
    if not s >= 0:
        raise PreconditionError("s >= 0", f"fractional order must be >= 0, got {s} (use riesz_potential)")
    if s == 0:
        return Field(u.grid, u.values.copy())
    return apply_multiplier(u, power_symbol(u.grid, s))


def bessel_potential(u: Field, alpha: float) -> Field:
    if not alpha > 0:
        raise PreconditionError("alpha > 0", f"Bessel order must be positive, got {alpha}")
    return apply_multiplier(u, (1.0 + u.grid.xi_abs**2) ** (-alpha / 2))


def riesz_potential(f: Field, s: float) -> Field:
    """Right inverse of ``fractional_laplacian(., s)`` on mean-zero fields."""
    g = f.grid
    if not 0 < s < g.n:
        raise PreconditionError("0 < s < n", f"Riesz order must lie in (0, {g.n}), got {s}")
    zero_mode = abs(math.fsum(f.values.ravel())) * g.cell_volume
    if zero_mode > 1e-12 * g.L ** (g.n / 2) * lp_norm(f, 2):
        raise ZeroModeError()
    m = np.zeros(g.shape)
    nz = g.xi_abs > 0
    m[nz] = g.xi_abs[nz] ** (-s)
    return apply_multiplier(f, m)


def riesz_kernel_constant(n: int, s: float) -> float:
    """Constant ``C`` with ``|xi|^-s f^  <->  C * int f(y) |x-y|^(s-n) dy``.

    Under the ``exp(-i x.xi)`` convention this is
    ``(2 pi)^-s * c_{n-s} / c_s`` with ``c_a = Gamma(a/2) / pi^(a/2)``.
    """
    def c(a):
        return math.gamma(a / 2) / math.pi ** (a / 2)

    return (2 * math.pi) ** (-s) * c(n - s) / c(s)


def lp_norm(u: Field, t: float) -> float:
    if t == 0:
        raise PreconditionError("t != 0", "Lebesgue exponent must be nonzero")
    a = np.abs(u.values)
    if t < 0 and np.any(a == 0):
        raise PreconditionError("nonzero values for t < 0", "negative exponent with a zero value")
    return (u.grid.cell_volume * np.sum(a**t)) ** (1.0 / t)


def inner(u: Field, v: Field) -> float:
    _same_grid(u, v)
    return u.grid.cell_volume * float(np.vdot(u.values, v.values).real)


def dirichlet_energy(u: Field, s: float) -> float:
    """``int |(-Delta)^(s/2) u|^2 dx``, computed on the spectral side.

    At ``s == 0`` the value is summed in physical space with ``math.fsum``
    so that any two equimeasurable fields give bitwise-equal energies.
    """
    if not s >= 0:
        raise PreconditionError("s >= 0", f"fractional order must be >= 0, got {s}")
    g = u.grid
    if s == 0:
        return g.cell_volume * math.fsum((u.values.ravel()) ** 2)
    coef = np.fft.fftn(u.values)
    w = g.xi_abs ** (2 * s)
    return g.cell_volume / g.size * float(np.sum(w * (coef.real**2 + coef.imag**2)))


def dilate(u: Field, d: int) -> Field:
    """Grid dilation ``x -> u(d x)`` about the box centre, integer ``d >= 1``.

    Samples falling outside the box are set to zero, so ``u`` should be
    negligible near the box edge.
    """
    if int(d) != d or d < 1:
        raise PreconditionError("integer dilation", f"dilation factor must be a positive integer, got {d}")
    d = int(d)
    g = u.grid
    c = g.N // 2
    idx = c + d * (np.arange(g.N) - c)
    valid = (idx >= 0) & (idx < g.N)
    out = np.zeros(g.shape)
    sel = np.ix_(*([np.nonzero(valid)[0]] * g.n))
    src = np.ix_(*([idx[valid]] * g.n))
    out[sel] = u.values[src]
    return Field(g, out)


def translate(u: Field, cells) -> Field:
    """Periodic shift by whole grid cells (int or per-axis tuple)."""
    if np.isscalar(cells):
        cells = (int(cells),) * u.grid.n
    return Field(u.grid, np.roll(u.values, tuple(cells), axis=tuple(range(u.grid.n))))
