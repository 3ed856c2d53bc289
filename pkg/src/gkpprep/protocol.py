"""Qubit-assisted comb preparation: post-selected, all-branch and sampled runs.

One iteration k (k = 1..n) resets the qubit to |0>, applies
H . exp(-i d p sigma_z) . H with d = 2^(k-1) alpha, and measures the qubit.
Outcome 0 keeps the symmetric combination psi(q - d) + psi(q + d), outcome 1
the antisymmetric one. After n zero outcomes the oscillator holds 2^n equal
peaks at alpha * (1 + 2^n - 2s), s = 1..2^n (logical one); a further
displacement by +alpha gives the logical zero with peaks at alpha * (2s - 2^n).
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateMeasurementError, DomainError
from .oscillator import GaussianComb, GridState, Quadrature, squeezed_vacuum, superpose, to_grid
from .oscillator.grid import fourier

MAX_ITERATIONS = 16
MAX_ENUMERATED = 12
MODES = ("postselect", "deterministic", "sample")
SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ProtocolConfig:
    alpha: float = math.sqrt(math.pi / 2)
    delta: float = 0.15
    n: int = 3
    bit: int = 1
    axis: Quadrature = Quadrature.POSITION
    mode: str = "postselect"
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta}")
        if int(self.n) != self.n or not 0 <= self.n <= MAX_ITERATIONS:
            raise DomainError(f"iterations must be an integer in [0, {MAX_ITERATIONS}], got {self.n}")
        if self.bit not in (0, 1):
            raise DomainError(f"target bit must be 0 or 1, got {self.bit}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "deterministic" and self.n > MAX_ENUMERATED:
            raise DomainError(f"branch enumeration is capped at n = {MAX_ENUMERATED}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "axis", Quadrature.parse(self.axis))
        if self.delta / self.alpha >= 1:
            warnings.warn(
                f"delta/alpha = {self.delta / self.alpha:.3g} >= 1: peaks overlap, "
                "the comb no longer encodes a qubit",
                stacklevel=3,
            )

    def replace(self, **changes) -> "ProtocolConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ProtocolConfig(**values)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "delta": self.delta,
            "n": self.n,
            "bit": self.bit,
            "axis": self.axis.value,
            "mode": self.mode,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class QubitOscState:
    """Oscillator amplitude attached to qubit |0> and |1>; ``None`` is a zero branch."""

    branch0: Optional[GaussianComb]
    branch1: Optional[GaussianComb] = None

    @property
    def norm_squared(self) -> float:
        return sum(b.norm_squared for b in (self.branch0, self.branch1) if b is not None)

    def branch(self, outcome: int) -> Optional[GaussianComb]:
        return self.branch0 if outcome == 0 else self.branch1


@dataclass(frozen=True)
class OutcomeRecord:
    bits: tuple
    probability: float
    state: GaussianComb
    norm_factor: float
    step_probabilities: tuple = field(default=())

    def to_dict(self) -> dict:
        from .oscillator.io import comb_to_dict

        return {
            "bits": list(self.bits),
            "probability": self.probability,
            "step_probabilities": list(self.step_probabilities),
            "norm_factor": self.norm_factor,
            "state": comb_to_dict(self.state),
        }


def hadamard(s: QubitOscState) -> QubitOscState:
    return QubitOscState(
        superpose([(SQRT_HALF, s.branch0), (SQRT_HALF, s.branch1)]),
        superpose([(SQRT_HALF, s.branch0), (-SQRT_HALF, s.branch1)]),
    )


def conditional_displacement(s: QubitOscState, d: float, axis=Quadrature.POSITION) -> QubitOscState:
    """exp(-i d x sigma_z)-type shift: the |0> branch moves by +d, the |1> branch by -d."""
    axis = Quadrature.parse(axis)
    return QubitOscState(
        None if s.branch0 is None else s.branch0.shifted(d, axis),
        None if s.branch1 is None else s.branch1.shifted(-d, axis),
    )


def measure_qubit(s: QubitOscState, outcome: int):
    """Project the qubit on ``outcome``; returns (probability, normalized oscillator state)."""
    if outcome not in (0, 1):
        raise DomainError(f"qubit outcome must be 0 or 1, got {outcome}")
    total = s.norm_squared
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"joint state is not normalized (norm^2 = {total:.12g})")
    chosen = s.branch(outcome)
    prob = 0.0 if chosen is None else chosen.norm_squared
    if prob <= 0.0:
        raise DegenerateMeasurementError(f"outcome {outcome} has zero probability")
    return prob, chosen / math.sqrt(prob)


def step_displacement(config: ProtocolConfig, k: int) -> float:
    """Signed shift for iteration k along the comb axis.

    The momentum variant uses exp(-i d q sigma_z), which moves the |0>
    branch by -d in p.
    """
    d = 2 ** (k - 1) * config.alpha
    return d if config.axis is Quadrature.POSITION else -d


def _iterate(psi: GaussianComb, config: ProtocolConfig, k: int) -> QubitOscState:
    s = QubitOscState(psi)
    s = hadamard(s)
    s = conditional_displacement(s, step_displacement(config, k), config.axis)
    return hadamard(s)


def canonical_phase(comb: GaussianComb) -> GaussianComb:
    """Fix the global phase so the leftmost peak coefficient is positive real."""
    c = comb.coeffs[0]
    return comb * (abs(c) / c)


def _finish(psi: GaussianComb, config: ProtocolConfig, bits, step_probs) -> OutcomeRecord:
    psi = canonical_phase(psi)
    norm_factor = abs(psi.coeffs[0]) * math.sqrt(len(psi))
    if config.bit == 0:
        psi = psi.shifted(config.alpha, config.axis)
    return OutcomeRecord(
        bits=tuple(bits),
        probability=float(np.prod(step_probs)) if step_probs else 1.0,
        state=psi,
        norm_factor=norm_factor,
        step_probabilities=tuple(step_probs),
    )


def run_outcomes(config: ProtocolConfig, bits) -> OutcomeRecord:
    """Follow one fixed outcome sequence through the n iterations."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != config.n:
        raise DomainError(f"expected {config.n} outcomes, got {len(bits)}")
    psi = squeezed_vacuum(config.delta, config.axis)
    probs = []
    for k, b in enumerate(bits, start=1):
        p, psi = measure_qubit(_iterate(psi, config, k), b)
        probs.append(p)
    return _finish(psi, config, bits, probs)


def prepare(config: ProtocolConfig) -> OutcomeRecord:
    """Post-selected preparation: every qubit measurement must read 0."""
    return run_outcomes(config, (0,) * config.n)


def enumerate_branches(config: ProtocolConfig) -> list:
    """All 2^n outcome sequences with their exact probabilities, in binary order."""
    if config.n > MAX_ENUMERATED:
        raise DomainError(f"branch enumeration is capped at n = {MAX_ENUMERATED}")
    frontier = [((), squeezed_vacuum(config.delta, config.axis), ())]
    for k in range(1, config.n + 1):
        nxt = []
        for bits, psi, probs in frontier:
            s = _iterate(psi, config, k)
            for b in (0, 1):
                chosen = s.branch(b)
                if chosen is None:
                    continue
                p = chosen.norm_squared
                nxt.append((bits + (b,), chosen / math.sqrt(p), probs + (p,)))
        frontier = nxt
    return [_finish(psi, config, bits, probs) for bits, psi, probs in frontier]


def sample_run(config: ProtocolConfig, rng: np.random.Generator = None) -> OutcomeRecord:
    """One run keeping every outcome, each drawn by the Born rule.

    With no generator given, a PCG64 generator seeded from ``config.seed`` is used.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    psi = squeezed_vacuum(config.delta, config.axis)
    bits, probs = [], []
    for k in range(1, config.n + 1):
        s = _iterate(psi, config, k)
        p0 = 0.0 if s.branch0 is None else s.branch0.norm_squared
        b = 0 if rng.random() < p0 else 1
        p, psi = measure_qubit(s, b)
        bits.append(b)
        probs.append(p)
    return _finish(psi, config, bits, probs)


def sample_bits(config: ProtocolConfig, runs: int, seed: int = None) -> np.ndarray:
    """Outcome bit strings for ``runs`` independent runs, shape (runs, n).

    Conditional outcome probabilities are computed once per prefix of the
    outcome tree, so large run counts stay cheap.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    out = np.zeros((runs, config.n), dtype=np.int8)
    cache = {(): squeezed_vacuum(config.delta, config.axis)}
    p0_cache = {}
    prefix_index = np.zeros(runs, dtype=np.int64)
    prefixes = [()]
    for k in range(1, config.n + 1):
        u = rng.random(runs)
        p0 = np.empty(len(prefixes))
        for i, pre in enumerate(prefixes):
            if pre not in p0_cache:
                s = _iterate(cache[pre], config, k)
                for b in (0, 1):
                    br = s.branch(b)
                    if br is not None:
                        cache[pre + (b,)] = br.normalize()
                p0_cache[pre] = 0.0 if s.branch0 is None else s.branch0.norm_squared
            p0[i] = p0_cache[pre]
        b = (u >= p0[prefix_index]).astype(np.int8)
        out[:, k - 1] = b
        prefixes = [pre + (bit,) for pre in prefixes for bit in (0, 1)]
        prefix_index = 2 * prefix_index + b
    return out


def encoded_comb(config: ProtocolConfig, bit: int = None) -> GaussianComb:
    """Directly written comb: 2^n equal peaks, no operator sequence involved."""
    bit = config.bit if bit is None else bit
    m = 2 ** config.n
    s = np.arange(1, m + 1)
    centers = config.alpha * ((2 * s - m) if bit == 0 else (2 * s - 1 - m))
    return GaussianComb(config.delta, config.axis, centers, np.ones(m)).normalize()


def encoded_momentum_closed_form(p, config: ProtocolConfig, norm_factor: float = None):
    """Momentum wave function of the post-selected logical one in closed form.

    (delta / (2^n sqrt(pi)))^(1/2) N exp(-(p delta)^2 / 2) sin(2^n alpha p) / sin(alpha p),
    with the removable singularities at alpha p = k pi replaced by their limit
    2^n (-1)^((2^n - 1) k). For bit 0 the extra factor exp(-i alpha p) applies.
    """
    p = np.asarray(p, dtype=float)
    n, a, d = config.n, config.alpha, config.delta
    m = 2 ** n
    if norm_factor is None:
        norm_factor = prepare(config.replace(bit=1, mode="postselect")).norm_factor
    num = np.sin(m * a * p)
    den = np.sin(a * p)
    singular = np.abs(den) < 1e-8
    k = np.rint(a * p / np.pi).astype(np.int64)
    limit = m * np.where(((m - 1) * k) % 2 == 0, 1.0, -1.0)
    ratio = np.where(singular, limit, num / np.where(singular, 1.0, den))
    out = np.sqrt(d / (m * np.sqrt(np.pi))) * norm_factor * np.exp(-0.5 * (p * d) ** 2) * ratio
    if config.bit == 0:
        out = out * np.exp(-1j * a * p)
    return out.astype(complex)


@dataclass(frozen=True)
class GridSpec:
    origin: float
    spacing: float
    length: int

    def sample(self, comb: GaussianComb) -> GridState:
        return to_grid(comb, self.origin, self.spacing, self.length)


def default_grid(config: ProtocolConfig, cells_per_alpha: int = 64, min_length: int = 4096) -> GridSpec:
    """Grid with spacing alpha/64, centered on zero, wide enough for 2^n + 6 alphas each side.

    The spacing divides alpha, so logical displacements and lattice cell
    edges at half-integer multiples of alpha land on grid points.
    """
    h = config.alpha / cells_per_alpha
    half = (2 ** config.n + 6) * config.alpha
    length = max(min_length, 1 << int(math.ceil(math.log2(2 * half / h))))
    return GridSpec(-0.5 * length * h, h, length)


def prepared_grids(config: ProtocolConfig, record: OutcomeRecord = None):
    """(position grid, momentum grid) of a record on the default grid."""
    record = prepare(config) if record is None else record
    pos = default_grid(config).sample(record.state)
    return pos, fourier(pos)
