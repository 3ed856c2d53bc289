"""Shift-error syndrome extraction with a second oscillator as ancilla.

The encoded mode and the ancilla live on one shared grid spacing, so the
SUM gate exp(-i q_e p_a) is an exact integer-cell shift of each ancilla row.
Momentum recovery uses exp(-i p_e q_a) and is carried out in the momentum
frame of both modes, where the ancilla row shift runs the other way and the
ancilla momentum is measured.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateMeasurementError, DomainError, TruncationError
from .oscillator import GaussianComb, GridState, Quadrature, fourier, gaussian, overlap, to_grid
from .oscillator.grid import WRAP_TOLERANCE, cells, shift
from .protocol import ProtocolConfig, encoded_comb, prepare, run_outcomes

NORM_TOLERANCE = 1e-9
CELLS_PER_PERIOD = 32
ANCILLA_LENGTH = 512
ANCILLA_WIDTH = 0.05


def encode_superposition(c0: complex, c1: complex, config: ProtocolConfig) -> GaussianComb:
    """c0 |0> + c1 |1> built from the post-selected logical combs of ``config``."""
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > NORM_TOLERANCE:
        raise DomainError("logical amplitudes must satisfy |c0|^2 + |c1|^2 = 1")
    base = config.replace(mode="postselect")
    zero = prepare(base.replace(bit=0)).state
    one = prepare(base.replace(bit=1)).state
    terms = [t for t in ((c0, zero), (c1, one)) if t[0] != 0]
    out = terms[0][1] * terms[0][0]
    for c, s in terms[1:]:
        out = out + s * c
    return out.normalize()


def apply_shift_error(state, dq: float, dp: float):
    """exp(i dp q) exp(-i dq p): a position shift by dq followed by a momentum kick dp."""
    if isinstance(state, GaussianComb):
        return state.shifted(dq, Quadrature.POSITION).shifted(dp, Quadrature.MOMENTUM)
    out = shift(state, dq, Quadrature.POSITION, spectral=True)
    return shift(out, dp, Quadrature.MOMENTUM, spectral=True)


@dataclass(frozen=True)
class TwoModeGrid:
    """Joint wave function Psi[i, j] of the encoded mode (rows) and the ancilla (columns).

    Both modes are represented along ``axis`` with the same spacing. A
    periodic ancilla axis wraps around; otherwise amplitude pushed past its
    edge is lost and reported.
    """

    axis: Quadrature
    spacing: float
    origin_e: float
    origin_a: float
    amplitudes: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axis", Quadrature.parse(self.axis))
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 2:
            raise DomainError("joint amplitudes must be a 2-D array")
        object.__setattr__(self, "amplitudes", amps)
        nrm = self.norm_squared
        if abs(nrm - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"joint state must be normalized (norm^2 = {nrm:.12g})")

    @classmethod
    def product(cls, encoded: GridState, ancilla: GridState, periodic: bool = False) -> "TwoModeGrid":
        if encoded.axis is not ancilla.axis:
            raise DomainError("encoded and ancilla grids must use the same quadrature")
        if not math.isclose(encoded.spacing, ancilla.spacing, rel_tol=1e-12):
            raise DomainError("encoded and ancilla grids must share one spacing")
        cells(encoded.origin, encoded.spacing)
        cells(ancilla.origin, ancilla.spacing)
        e = encoded.normalize().amplitudes
        a = ancilla.normalize().amplitudes
        return cls(encoded.axis, encoded.spacing, encoded.origin, ancilla.origin, np.outer(e, a), periodic)

    @property
    def shape(self):
        return self.amplitudes.shape

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.spacing**2)

    @property
    def encoded_coords(self) -> np.ndarray:
        return self.origin_e + self.spacing * np.arange(self.shape[0])

    @property
    def ancilla_coords(self) -> np.ndarray:
        return self.origin_a + self.spacing * np.arange(self.shape[1])

    def ancilla_marginal(self) -> np.ndarray:
        """Ancilla probability density, integrated over the encoded coordinate."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0) * self.spacing


def sum_gate(joint: TwoModeGrid, direction=Quadrature.POSITION) -> TwoModeGrid:
    """exp(-i q_e p_a) for direction=position, exp(-i p_e q_a) for direction=momentum.

    The first adds q_e to the ancilla position, Psi(x, y) -> Psi(x, y - x);
    the second subtracts p_e from the ancilla momentum, Psi(p, r) -> Psi(p, r + p).
    The joint state must already be in the matching frame.
    """
    direction = Quadrature.parse(direction)
    if joint.axis is not direction:
        raise DomainError(f"a {direction.value} SUM needs the joint state in the {direction.value} frame")
    h = joint.spacing
    rows, cols = joint.shape
    steps = cells(joint.origin_e, h) + np.arange(rows)
    src = np.arange(cols)[None, :] - direction.sign * steps[:, None]
    if joint.periodic:
        out = np.take_along_axis(joint.amplitudes, src % cols, axis=1)
    else:
        inside = (src >= 0) & (src < cols)
        out = np.where(inside, np.take_along_axis(joint.amplitudes, np.clip(src, 0, cols - 1), axis=1), 0.0)
        lost = 1.0 - float(np.sum(np.abs(out) ** 2) * h * h)
        if lost > WRAP_TOLERANCE:
            raise TruncationError("SUM gate pushes the ancilla past its window", lost)
        out = out / math.sqrt(1.0 - lost)
    return TwoModeGrid(joint.axis, h, joint.origin_e, joint.origin_a, out, joint.periodic)


def measure_ancilla(joint: TwoModeGrid, outcome: Optional[float] = None, rng: np.random.Generator = None):
    """Measure the ancilla along the joint frame's quadrature.

    A given ``outcome`` is snapped to the nearest ancilla grid point and
    replayed; otherwise one is drawn from the marginal with ``rng``.
    Returns (outcome, collapsed encoded state, marginal density at the outcome).
    """
    dens = joint.ancilla_marginal()
    if outcome is None:
        rng = np.random.default_rng() if rng is None else rng
        w = dens / dens.sum()
        j = int(rng.choice(len(w), p=w))
    else:
        j = int(round((float(outcome) - joint.origin_a) / joint.spacing))
        if not 0 <= j < joint.shape[1]:
            raise DomainError(f"outcome {outcome} lies outside the ancilla window")
    if dens[j] <= 1e-300:
        raise DegenerateMeasurementError(f"ancilla outcome {joint.ancilla_coords[j]:.6g} has zero density")
    col = joint.amplitudes[:, j] / math.sqrt(dens[j])
    collapsed = GridState(joint.axis, joint.origin_e, joint.spacing, col)
    return float(joint.ancilla_coords[j]), collapsed, float(dens[j])


@dataclass(frozen=True)
class Syndrome:
    measured: float
    estimate: float
    correction: float


def wrap(x: float, period: float) -> float:
    """Reduce into [-period/2, period/2)."""
    return float(np.mod(x + 0.5 * period, period) - 0.5 * period)


def syndrome_to_correction(measured: float, period: float) -> Syndrome:
    if not period > 0:
        raise DomainError(f"lattice period must be positive, got {period}")
    est = wrap(measured, period)
    return Syndrome(float(measured), est, -est)


def periodic_ancilla(period: float, width: float, spacing: float, length: int = ANCILLA_LENGTH,
                     axis=Quadrature.POSITION) -> GridState:
    """Ideal-code ancilla: equal Gaussian peaks of ``width`` on every multiple of ``period``.

    The window spans a whole number of periods, so the sampled comb is
    exactly periodic and cyclic shifts of it are exact.
    """
    per_period = cells(period, spacing)
    if length % per_period:
        raise DomainError("ancilla window must hold a whole number of periods")
    origin = -0.5 * length * spacing
    y = origin + spacing * np.arange(length)
    r = np.mod(y + 0.5 * period, period) - 0.5 * period
    amps = np.zeros(length)
    for k in range(-3, 4):
        amps += gaussian(r + k * period, width)
    return GridState(axis, origin, spacing, amps.astype(complex)).normalize()


def prepared_ancilla_comb(bits: Sequence[int], config: ProtocolConfig, axis=Quadrature.POSITION,
                          width: float = None) -> GaussianComb:
    """Ancilla from one outcome branch of the preparation protocol, on the recovery lattice.

    The protocol is run with half the lattice period as its unit, which puts
    the peaks on odd multiples of half a period; a final half-period shift
    moves them onto the integer multiples the syndrome is read against.
    """
    axis = Quadrature.parse(axis)
    period = config.alpha if axis is Quadrature.POSITION else math.pi / config.alpha
    cfg = ProtocolConfig(alpha=period / 2, delta=config.delta if width is None else width,
                         n=len(bits), bit=1, axis=axis, mode="deterministic" if bits else "postselect")
    comb = run_outcomes(cfg, bits).state
    return comb.shifted(period / 2, axis)


def _pow2(n: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1.0)))))


def encoded_window(comb: GaussianComb, spacing: float, margin: float, min_length: int = 512):
    """(origin, length) of a zero-centered grid holding ``comb`` plus ``margin`` on both sides."""
    half = max(abs(comb.centers[0]), abs(comb.centers[-1])) + 8 * comb.delta + margin
    length = max(min_length, _pow2(2 * half / spacing))
    return -0.5 * length * spacing, length


@dataclass(frozen=True)
class RecoveryResult:
    corrected: GridState
    syndrome: Syndrome
    fidelity: float
    shift: float
    residual: float
    period: float
    quadrature: Quadrature

    @property
    def estimate_error(self) -> float:
        return self.syndrome.estimate - self.shift

    @property
    def logical_failure(self) -> bool:
        """True when the net displacement lands on a different lattice point."""
        return round(self.residual / self.period) != 0

    def to_dict(self) -> dict:
        return {
            "quadrature": self.quadrature.value,
            "shift": self.shift,
            "measured": self.syndrome.measured,
            "estimate": self.syndrome.estimate,
            "correction": self.syndrome.correction,
            "fidelity": self.fidelity,
            "residual": self.residual,
            "logical_failure": self.logical_failure,
        }


AncillaSource = Union[str, Sequence[int], GridState]


def parse_ancilla(source: AncillaSource):
    """'ideal' -> 'ideal'; 'bits:101' or a bit sequence -> tuple of ints; grids pass through."""
    if isinstance(source, GridState):
        return source
    if isinstance(source, str):
        if source == "ideal":
            return "ideal"
        if source.startswith("bits:"):
            digits = source[5:]
            if not digits or set(digits) - {"0", "1"}:
                raise DomainError(f"bad ancilla bit pattern {digits!r}")
            return tuple(int(c) for c in digits)
        raise DomainError(f"unknown ancilla source {source!r}")
    bits = tuple(int(b) for b in source)
    if set(bits) - {0, 1}:
        raise DomainError("ancilla bits must be 0 or 1")
    return bits


def build_ancilla(source: AncillaSource, config: ProtocolConfig, axis, spacing: float, reach: float,
                  ideal_width: float = ANCILLA_WIDTH, ideal_length: int = ANCILLA_LENGTH):
    """(ancilla grid, periodic flag) on the recovery spacing.

    ``reach`` is the largest shift the SUM gate can apply; a finite prepared
    ancilla gets a window wide enough to take it without loss.
    """
    axis = Quadrature.parse(axis)
    src = parse_ancilla(source)
    period = config.alpha if axis is Quadrature.POSITION else math.pi / config.alpha
    if isinstance(src, GridState):
        return src, False
    if src == "ideal":
        return periodic_ancilla(period, ideal_width, spacing, ideal_length, axis), True
    comb = prepared_ancilla_comb(src, config, axis)
    origin, length = encoded_window(comb, spacing, reach + period, min_length=ideal_length)
    return to_grid(comb, origin, spacing, length), False


def recover(encoded: GridState, error=(0.0, 0.0), ancilla: AncillaSource = "ideal",
            config: ProtocolConfig = None, rng: np.random.Generator = None, outcome: float = None,
            quadrature=Quadrature.POSITION, ideal_width: float = ANCILLA_WIDTH) -> RecoveryResult:
    """Shift, couple to an ancilla, measure it and undo the estimated shift.

    ``encoded`` is the pre-error state; the fidelity of the corrected state is
    taken against it. For position recovery the ancilla position is measured
    and reduced modulo alpha; for momentum recovery the ancilla momentum is
    measured, negated and reduced modulo pi/alpha. The corrected state is
    returned on the input grid.
    """
    config = ProtocolConfig() if config is None else config
    quadrature = Quadrature.parse(quadrature)
    dq, dp = (float(v) for v in error)
    pre = encoded.normalize()
    shifted = apply_shift_error(pre, dq, dp)

    frame = shifted if shifted.axis is quadrature else fourier(shifted)
    period = config.alpha if quadrature is Quadrature.POSITION else math.pi / config.alpha
    reach = float(np.max(np.abs(frame.coords)))
    anc, periodic = build_ancilla(ancilla, config, quadrature, frame.spacing, reach, ideal_width)

    joint = sum_gate(TwoModeGrid.product(frame, anc, periodic), quadrature)
    measured, collapsed, _ = measure_ancilla(joint, outcome=outcome, rng=rng)
    syn = syndrome_to_correction(quadrature.sign * measured, period)
    syn = Syndrome(measured, syn.estimate, syn.correction)
    fixed = shift(collapsed, syn.correction, quadrature, spectral=True)
    if fixed.axis is not pre.axis:
        fixed = fourier(fixed, origin=pre.origin)

    true_shift = dq if quadrature is Quadrature.POSITION else dp
    return RecoveryResult(
        corrected=fixed,
        syndrome=syn,
        fidelity=float(abs(pre.inner(fixed)) ** 2),
        shift=true_shift,
        residual=true_shift + syn.correction,
        period=period,
        quadrature=quadrature,
    )


def recovery_grid(comb: GaussianComb, max_shift: float = 0.0,
                  cells_per_period: int = CELLS_PER_PERIOD, period: float = None) -> GridState:
    """Sample an encoded comb on a grid suited to :func:`recover`.

    Spacing is period / cells_per_period (period defaults to the comb's
    alpha-lattice, read off its peak spacing), the origin is a whole number
    of cells, and the window leaves room for shifts up to ``max_shift``.
    """
    if period is None:
        if len(comb) < 2:
            raise DomainError("pass the lattice period for a single-peak state")
        period = float(np.min(np.diff(comb.centers))) / 2
    h = period / cells_per_period
    origin, length = encoded_window(comb, h, abs(max_shift) + period)
    return to_grid(comb, origin, h, length)


def comb_fidelity(a: GaussianComb, b: GaussianComb) -> float:
    return abs(overlap(a, b)) ** 2 / (a.norm_squared * b.norm_squared)


__all__ = [
    "RecoveryResult",
    "Syndrome",
    "TwoModeGrid",
    "apply_shift_error",
    "build_ancilla",
    "comb_fidelity",
    "encode_superposition",
    "encoded_comb",
    "encoded_window",
    "measure_ancilla",
    "parse_ancilla",
    "periodic_ancilla",
    "prepared_ancilla_comb",
    "recover",
    "recovery_grid",
    "sum_gate",
    "syndrome_to_correction",
    "wrap",
]
