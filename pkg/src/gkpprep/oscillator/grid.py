"""Sampled wave functions on uniform grids and the FFT bridge between quadratures."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson
from scipy.special import erf

from ..errors import AlignmentError, DomainError, TruncationError
from .comb import GaussianComb, evaluate
from .comb import interval_mass as comb_interval_mass
from .quadrature import Quadrature

COVERAGE_WIDTHS = 8.0
WRAP_TOLERANCE = 1e-10


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridState:
    """Complex amplitudes psi(origin + k * spacing), k = 0 .. N-1, N a power of two.

    The grid is treated as one period of a periodic function, which is what
    the discrete Fourier transform assumes; states should decay well inside
    the window.
    """

    axis: Quadrature
    origin: float
    spacing: float
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if not _is_power_of_two(amps.size):
            raise DomainError(f"grid length must be a power of two, got {amps.size}")
        spacing = float(self.spacing)
        if not np.isfinite(spacing) or spacing <= 0:
            raise DomainError(f"grid spacing must be positive, got {self.spacing}")
        amps.setflags(write=False)
        object.__setattr__(self, "axis", Quadrature.parse(self.axis))
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return self.amplitudes.size

    def __repr__(self) -> str:
        return (
            f"GridState(axis={self.axis.value}, origin={self.origin:g}, "
            f"spacing={self.spacing:g}, length={len(self)})"
        )

    @cached_property
    def coords(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(len(self))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @cached_property
    def norm_squared(self) -> float:
        return float(np.sum(self.density) * self.spacing)

    def normalize(self) -> "GridState":
        nrm = self.norm_squared
        if nrm <= 0:
            raise DomainError("cannot normalize a zero grid state")
        return self.with_amplitudes(self.amplitudes / np.sqrt(nrm))

    def with_amplitudes(self, amplitudes) -> "GridState":
        return GridState(self.axis, self.origin, self.spacing, amplitudes)

    def same_grid(self, other: "GridState", rtol: float = 1e-12) -> bool:
        return (
            self.axis is other.axis
            and len(self) == len(other)
            and abs(self.spacing - other.spacing) <= rtol * self.spacing
            and abs(self.origin - other.origin) <= rtol * max(1.0, abs(self.origin))
        )

    def inner(self, other: "GridState") -> complex:
        """<self|other> by the grid sum."""
        if not self.same_grid(other):
            raise DomainError("inner product needs identical grids")
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.spacing)


def dual_spacing(length: int, spacing: float) -> float:
    return 2.0 * np.pi / (length * spacing)


def fourier(state: GridState, origin: float = None) -> GridState:
    """Transform to the dual quadrature.

    Position to momentum uses exp(-i p q), momentum to position exp(+i p q),
    both with the (2 pi)^(-1/2) normalization, so the map is exactly unitary
    on the grid and applying it twice (with matching origins) is the identity.
    The dual grid is centered on zero unless ``origin`` is given.
    """
    n = len(state)
    h = state.spacing
    eta = dual_spacing(n, h)
    y0 = -0.5 * n * eta if origin is None else float(origin)
    x0 = state.origin
    s = -1.0 if state.axis is Quadrature.POSITION else 1.0
    j = np.arange(n)
    pre = state.amplitudes * np.exp(1j * s * y0 * h * j)
    if s < 0:
        core = np.fft.fft(pre)
    else:
        core = np.fft.ifft(pre) * n
    post = np.exp(1j * s * (y0 * x0 + eta * x0 * j))
    return GridState(state.axis.dual, y0, eta, core * post * (h / np.sqrt(2.0 * np.pi)))


def refine(state: GridState, factor: int) -> GridState:
    """Resample on a grid ``factor`` times finer over the same window.

    Zero-pads the dual representation, i.e. evaluates the band-limited
    interpolant of the samples.
    """
    factor = int(factor)
    if factor == 1:
        return state
    if not _is_power_of_two(factor):
        raise DomainError(f"refinement factor must be a power of two, got {factor}")
    dual = fourier(state)
    n = len(state)
    pad = (factor - 1) * n // 2
    padded = np.zeros(factor * n, dtype=complex)
    padded[pad:pad + n] = dual.amplitudes
    wide = GridState(dual.axis, dual.origin - pad * dual.spacing, dual.spacing, padded)
    return fourier(wide, origin=state.origin)


def to_grid(comb: GaussianComb, origin: float, spacing: float, length: int, axis=None) -> GridState:
    """Sample ``comb`` pointwise on a grid in ``axis`` (default: the comb's own).

    Raises TruncationError when the window misses the stated coverage
    (8 widths beyond the extreme peaks, or around the envelope for the dual axis).
    """
    axis = comb.axis if axis is None else Quadrature.parse(axis)
    if not _is_power_of_two(int(length)):
        raise DomainError(f"grid length must be a power of two, got {length}")
    start = float(origin)
    stop = start + (int(length) - 1) * float(spacing)
    if axis is comb.axis:
        lo = comb.centers[0] - COVERAGE_WIDTHS * comb.delta
        hi = comb.centers[-1] + COVERAGE_WIDTHS * comb.delta
        if lo < start or hi > stop:
            lost = comb.norm_squared - comb_interval_mass(comb, [(start, stop)])
            raise TruncationError("grid window does not cover the comb", max(lost, 0.0))
    else:
        width = 1.0 / comb.delta
        lo = comb.kick - COVERAGE_WIDTHS * width
        hi = comb.kick + COVERAGE_WIDTHS * width
        if lo < start or hi > stop:
            inside = 0.5 * (erf((stop - comb.kick) / width) - erf((start - comb.kick) / width))
            raise TruncationError(
                "grid window does not cover the dual-axis envelope",
                comb.norm_squared * (1.0 - inside),
            )
    coords = start + float(spacing) * np.arange(int(length))
    return GridState(axis, start, spacing, evaluate(comb, coords, axis))


def cells(amount: float, spacing: float, tol: float = 1e-9) -> int:
    """Number of grid cells in ``amount``; AlignmentError when not whole."""
    ratio = amount / spacing
    m = int(round(ratio))
    if abs(ratio - m) > tol * max(1.0, abs(ratio)):
        raise AlignmentError(f"shift {amount!r} is not a multiple of the grid spacing {spacing!r}")
    return m


def shift(state: GridState, amount: float, axis=None, spectral: bool = False) -> GridState:
    """Displacement operator applied to a grid state.

    Along the dual axis this is an exact phase multiplication. Along the
    state's own axis the amount must be a whole number of cells (exact cyclic
    shift) unless ``spectral`` is set, which translates the band-limited
    interpolant instead.
    """
    axis = state.axis if axis is None else Quadrature.parse(axis)
    amount = float(amount)
    if amount == 0.0:
        return state
    s = state.axis.sign
    if axis is not state.axis:
        return state.with_amplitudes(state.amplitudes * np.exp(1j * s * amount * state.coords))
    try:
        m = cells(amount, state.spacing)
    except AlignmentError:
        if not spectral:
            raise
        m = None
    if m is not None:
        _check_wrap(state, int(np.sign(m)), abs(m))
        return state.with_amplitudes(np.roll(state.amplitudes, m))
    _check_wrap(state, int(np.sign(amount)), int(np.ceil(abs(amount) / state.spacing)))
    dual = fourier(state)
    moved = dual.with_amplitudes(dual.amplitudes * np.exp(-1j * s * amount * dual.coords))
    return fourier(moved, origin=state.origin)


def _check_wrap(state: GridState, direction: int, count: int):
    if count == 0:
        return
    edge = state.amplitudes[-count:] if direction > 0 else state.amplitudes[:count]
    lost = float(np.sum(np.abs(edge) ** 2) * state.spacing)
    if lost > WRAP_TOLERANCE * max(state.norm_squared, 1e-300):
        raise TruncationError("shift pushes amplitude across the grid edge", lost)


def interval_mass(state: GridState, intervals, refine_factor: int = 8) -> float:
    """Probability mass over a union of intervals.

    The state is first refined onto a finer grid via its band-limited
    interpolant, then each interval is integrated with composite Simpson
    weights. Interval end points must fall on refined grid points; parts of
    an interval outside the window are dropped. All weights are positive,
    so tiny tail masses keep their relative precision.
    """
    fine = refine(state, refine_factor)
    h = fine.spacing
    x0 = fine.origin
    # The window is one period of a periodic grid: its right edge carries the first sample.
    last = len(fine)
    dens = np.append(fine.density, fine.density[0])
    total = 0.0
    for a, b in intervals:
        ia = 0 if a <= x0 else cells(a - x0, h, tol=1e-6)
        ib = last if b >= x0 + last * h else cells(b - x0, h, tol=1e-6)
        if ib <= ia:
            continue
        total += float(simpson(dens[ia:ib + 1], dx=h))
    return total


def periodic_cells(center: float, period: float, width: float, lo: float, hi: float) -> list:
    """Intervals [center + k*period - width/2, center + k*period + width/2) meeting [lo, hi]."""
    k_min = int(np.floor((lo - center - width / 2) / period))
    k_max = int(np.ceil((hi - center + width / 2) / period))
    out = []
    for k in range(k_min, k_max + 1):
        c = center + k * period
        a, b = c - width / 2, c + width / 2
        if b > lo and a < hi:
            out.append((a, b))
    return out
