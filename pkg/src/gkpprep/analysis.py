"""Misidentification probabilities, their closed-form bounds, and energy."""

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .errors import DomainError
from .oscillator import GaussianComb, GridState, Quadrature, fourier, interval_mass, overlap, periodic_cells
from .protocol import ProtocolConfig, default_grid, prepare

NORM_TOLERANCE = 1e-9
POSITION_REFINE = 8
MOMENTUM_REFINE = 16


def _require_normalized(state):
    nrm = state.norm_squared
    if abs(nrm - 1.0) > NORM_TOLERANCE:
        raise DomainError(f"state must be normalized (norm^2 = {nrm:.12g})")


def _window(state):
    if isinstance(state, GridState):
        return state.origin, state.origin + len(state) * state.spacing
    lo = state.centers[0] - 40 * state.delta
    hi = state.centers[-1] + 40 * state.delta
    return lo, hi


def position_error_prob(state, alpha: float, bit: int = 0, refine_factor: int = POSITION_REFINE) -> float:
    """Probability that a q measurement lands nearer the other logical value's lattice.

    For bit 0 that is the mass in cells of width alpha centered on odd
    multiples of alpha; for bit 1 the cells around even multiples. Grid
    states are integrated on their band-limited interpolant; combs in closed
    form.
    """
    if state.axis is not Quadrature.POSITION:
        raise DomainError("position error needs a position-space state")
    _require_normalized(state)
    lo, hi = _window(state)
    center = alpha if bit == 0 else 0.0
    cells = periodic_cells(center, 2 * alpha, alpha, lo, hi)
    if isinstance(state, GaussianComb):
        return float(np.clip(interval_mass(state, cells), 0.0, 1.0))
    return float(np.clip(interval_mass(state, cells, refine_factor=refine_factor), 0.0, 1.0))


def position_error_bound(delta: float, alpha: float) -> float:
    """(4 delta / (sqrt(pi) alpha)) exp(-(alpha/delta)^2 / 8); the same for every n."""
    if not (delta > 0 and alpha > 0):
        raise DomainError("delta and alpha must be positive")
    r = alpha / delta
    return 4.0 / (math.sqrt(math.pi) * r) * math.exp(-(r * r) / 8.0)


def position_tail_sum(delta: float, alpha: float, n: int) -> float:
    """2^n * 2 * integral_{alpha/2}^inf |g(q, delta) / sqrt(2^n)|^2 dq, by adaptive quadrature."""
    m = 2 ** n
    dens = lambda q: math.exp(-(q / delta) ** 2) / (delta * math.sqrt(math.pi)) / m
    val, _ = quad(dens, alpha / 2, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return 2 * m * val


def difference_state(state0: GridState, state1: GridState) -> GridState:
    """(|0> - |1>) / sqrt(2 - 2 Re<0|1>), i.e. the difference normalized exactly."""
    if not state0.same_grid(state1):
        raise DomainError("momentum error needs both states on the same grid")
    diff = state0.amplitudes - state1.amplitudes
    nrm = float(np.sum(np.abs(diff) ** 2) * state0.spacing)
    if nrm <= 1e-24:
        raise DomainError("the two states coincide; their difference is the zero vector")
    return state0.with_amplitudes(diff / math.sqrt(nrm))


def momentum_error_prob(state0: GridState, state1: GridState, alpha: float,
                        refine_factor: int = MOMENTUM_REFINE) -> float:
    """Probability that the normalized difference state sits nearer an even multiple of pi/alpha.

    Cells have width pi/alpha and are centered on 2k pi/alpha.
    """
    if state0.axis is not Quadrature.MOMENTUM or state1.axis is not Quadrature.MOMENTUM:
        raise DomainError("momentum error needs momentum-space grids")
    diff = difference_state(state0, state1)
    lo, hi = _window(diff)
    period = math.pi / alpha
    cells = periodic_cells(0.0, 2 * period, period, lo, hi)
    return float(np.clip(interval_mass(diff, cells, refine_factor=refine_factor), 0.0, 1.0))


def momentum_error_bound(n: int) -> float:
    if n < 1:
        raise DomainError(f"momentum bound needs n >= 1, got {n}")
    return 1.0 / (math.pi * 2 ** (n + 1))


class TailEstimate(NamedTuple):
    """integral_x^inf exp(-t^2) dt by quadrature, and its leading asymptotic term."""

    exact: float
    asymptotic: float

    @property
    def relative_gap(self) -> float:
        return abs(self.asymptotic - self.exact) / self.exact


def erf_tail(x: float) -> TailEstimate:
    if not x > 0:
        raise DomainError(f"tail integral needs x > 0, got {x}")
    # Substituting t = x + u factors out exp(-x^2) and keeps relative precision for large x.
    scaled, _ = quad(lambda u: math.exp(-u * (2 * x + u)), 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    exact = math.exp(-x * x) * scaled
    return TailEstimate(exact, math.exp(-x * x) / (2 * x))


def fit_tail_coefficient(xs) -> float:
    """Least C with relative_gap(x) <= C / x^2 over the sample points."""
    return max(erf_tail(x).relative_gap * x * x for x in xs)


def erfc_tail(x: float) -> float:
    return 0.5 * math.sqrt(math.pi) * erfc(x)


def mean_energy(state: GridState) -> float:
    """<(q^2 + p^2) / 2> with one moment from each representation."""
    _require_normalized(state)
    other = fourier(state)
    m_own = float(np.sum(state.coords**2 * state.density) * state.spacing)
    m_dual = float(np.sum(other.coords**2 * other.density) * other.spacing)
    return 0.5 * (m_own + m_dual)


@dataclass(frozen=True)
class ErrorReport:
    alpha: float
    delta: float
    n: int
    position_error: float
    position_bound: float
    momentum_error: float
    momentum_bound: float
    overlap01: float
    mean_energy: float

    @property
    def position_ok(self) -> bool:
        return self.position_error <= self.position_bound

    @property
    def momentum_ok(self) -> bool:
        return self.momentum_error <= self.momentum_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["position_ok"] = self.position_ok
        out["momentum_ok"] = self.momentum_ok
        return out


def encoded_pair(config: ProtocolConfig):
    """Post-selected (logical zero, logical one) combs for ``config``."""
    base = config.replace(mode="postselect")
    return prepare(base.replace(bit=0)).state, prepare(base.replace(bit=1)).state


def error_report(config: ProtocolConfig) -> ErrorReport:
    if config.n < 1:
        raise DomainError("error analysis needs at least one iteration")
    zero, one = encoded_pair(config)
    grid = default_grid(config)
    q0, q1 = grid.sample(zero), grid.sample(one)
    p0, p1 = fourier(q0), fourier(q1)
    return ErrorReport(
        alpha=config.alpha,
        delta=config.delta,
        n=config.n,
        position_error=position_error_prob(q0, config.alpha, bit=0),
        position_bound=position_error_bound(config.delta, config.alpha),
        momentum_error=momentum_error_prob(p0, p1, config.alpha),
        momentum_bound=momentum_error_bound(config.n),
        overlap01=float(abs(overlap(zero, one))),
        mean_energy=mean_energy(grid.sample(one)),
    )
