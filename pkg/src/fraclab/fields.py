"""Built-in field generators."""
import numpy as np

from .errors import PreconditionError
from .grid import Field, Grid


def gaussian(grid: Grid, width=1.0, amplitude=1.0, center=None) -> Field:
    r2 = _r2(grid, center)
    return Field(grid, amplitude * np.exp(-r2 / (2 * width**2)))


def bump(grid: Grid, radius=1.0, amplitude=1.0, center=None) -> Field:
    """Smooth compactly supported bump ``exp(-1/(1-|x/radius|^2))``."""
    t = _r2(grid, center) / radius**2
    inside = t < 1
    out = np.zeros(grid.shape)
    out[inside] = np.exp(-1.0 / (1.0 - t[inside]))
    return Field(grid, amplitude * out)


def two_bump(grid: Grid, separation=None, width=1.0, amplitudes=(1.0, 0.6)) -> Field:
    if separation is None:
        separation = grid.L / 4
    shift = np.zeros(grid.n)
    shift[0] = separation / 2
    a = gaussian(grid, width, amplitudes[0], center=-shift)
    b = gaussian(grid, width, amplitudes[1], center=shift)
    return a + b


def indicator(grid: Grid, radius=1.0, height=1.0, center=None) -> Field:
    return Field(grid, np.where(_r2(grid, center) <= radius**2, float(height), 0.0))


def random_bandlimited(grid: Grid, seed=0, kmax=8, decay=True) -> Field:
    """Random real field whose Fourier modes satisfy ``|k| <= kmax``.

    ``kmax`` counts wave numbers on the box, so the same seed gives the same
    continuous function on every resolution with ``N/2 > kmax``.
    """
    if 2 * kmax >= grid.N:
        raise PreconditionError("kmax < N/2", "band limit must stay below Nyquist")
    rng = np.random.default_rng(seed)
    m = 2 * kmax + 1
    shape = (m,) * grid.n
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    ks = np.meshgrid(*([np.arange(-kmax, kmax + 1)] * grid.n), indexing="ij")
    kk = np.sqrt(sum(k.astype(float) ** 2 for k in ks))
    mask = kk <= kmax
    if decay:
        coef = coef / (1.0 + kk)
    coef = coef * mask
    # Hermitian symmetrization makes the synthesized field real
    coef = 0.5 * (coef + np.conj(coef[(slice(None, None, -1),) * grid.n]))
    # evaluate the trig polynomial at the grid points through one inverse FFT
    full = np.zeros(grid.shape, dtype=complex)
    idx = np.arange(-kmax, kmax + 1) % grid.N
    full[np.ix_(*([idx] * grid.n))] = coef
    vals = np.fft.ifftn(full * grid._phase) * grid.size
    return Field(grid, vals.real)


def random_nonnegative(grid: Grid, seed=0) -> Field:
    rng = np.random.default_rng(seed)
    return Field(grid, rng.random(grid.shape))


GENERATORS = {
    "gaussian": gaussian,
    "bump": bump,
    "two-bump": two_bump,
    "indicator": indicator,
    "random": random_bandlimited,
}


def generate(name, grid, seed=0):
    if name not in GENERATORS:
        raise PreconditionError("known generator", f"unknown field generator {name!r}")
    if name == "random":
        return random_bandlimited(grid, seed=seed)
    return GENERATORS[name](grid)


def _r2(grid, center):
    if center is None:
        center = np.zeros(grid.n)
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    return sum((c - c0) ** 2 for c, c0 in zip(grid.coords, center))
