"""Pulse schedules for the preparation protocol on a trapped ion.

Each iteration k maps to a pi/2 pulse, a state-dependent displacement of
2^(k-1) alpha, a pi pulse swapping the internal states, a second
displacement, another pi/2 pulse and a fluorescence measurement. Pulses are
idealized as instantaneous; all elapsed time sits in Wait ops, and each
Measure falls on a whole trap period, where the free oscillation has
returned the motional state to its starting phase.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import ScheduleError
from .oscillator import GaussianComb, Quadrature, overlap, squeezed_vacuum
from .protocol import ProtocolConfig, QubitOscState, canonical_phase, hadamard, measure_qubit

SCHEMA_VERSION = "1"
PATTERN_TOLERANCE = 1e-12


class PulseKind(str, Enum):
    PI_HALF = "PiHalfPulse"
    PI = "PiPulse"
    DISPLACEMENT = "DisplacementPulse"
    MEASURE = "Measure"
    WAIT = "Wait"


ITERATION_PATTERN = (
    PulseKind.PI_HALF,
    PulseKind.DISPLACEMENT,
    PulseKind.PI,
    PulseKind.DISPLACEMENT,
    PulseKind.PI_HALF,
    PulseKind.MEASURE,
)


@dataclass(frozen=True)
class PulseOp:
    """One schedule entry; ``t`` and ``duration`` are in trap periods.

    ``magnitude`` (displacements, units of alpha), ``phase`` (pulses,
    radians), ``duration`` (waits) and ``bright`` (measurements: the outcome
    that fluoresces) are set only where they apply.
    """

    kind: PulseKind
    t: float
    magnitude: Optional[float] = None
    phase: Optional[float] = None
    duration: Optional[float] = None
    bright: Optional[int] = None

    def to_dict(self) -> dict:
        out = {"t": self.t, "kind": self.kind.value}
        for key in ("magnitude", "phase", "duration", "bright"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PulseOp":
        return cls(
            PulseKind(data["kind"]),
            float(data["t"]),
            data.get("magnitude"),
            data.get("phase"),
            data.get("duration"),
            data.get("bright"),
        )


@dataclass(frozen=True)
class PulseSchedule:
    config: ProtocolConfig
    ops: tuple = field(default=())
    total_duration: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def pulse_ops(self) -> list:
        return [op for op in self.ops if op.kind is not PulseKind.WAIT]

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "total_duration": self.total_duration,
            "ops": [op.to_dict() for op in self.ops],
        }


def compile(config: ProtocolConfig) -> PulseSchedule:  # noqa: A001 - mirrors the public operation name
    """Lower ``config`` to a pulse schedule; pure in ``config``."""
    if config.n < 1:
        raise ScheduleError("a schedule needs at least one iteration (n >= 1)")
    if config.axis is not Quadrature.POSITION:
        raise ScheduleError("the ion-trap sequence drives position displacements only")
    ops = []
    for k in range(1, config.n + 1):
        t0 = float(k - 1)
        mag = float(2 ** (k - 1))
        ops += [
            PulseOp(PulseKind.PI_HALF, t0, phase=0.0),
            PulseOp(PulseKind.DISPLACEMENT, t0, magnitude=mag, phase=math.pi),
            PulseOp(PulseKind.PI, t0, phase=0.0),
            PulseOp(PulseKind.DISPLACEMENT, t0, magnitude=mag, phase=0.0),
            PulseOp(PulseKind.PI_HALF, t0, phase=0.0),
            PulseOp(PulseKind.WAIT, t0, duration=1.0),
            PulseOp(PulseKind.MEASURE, float(k), bright=1),
        ]
    return PulseSchedule(config, ops, float(config.n))


def _iterations(schedule: PulseSchedule):
    pulses = schedule.pulse_ops
    size = len(ITERATION_PATTERN)
    return [pulses[i:i + size] for i in range(0, len(pulses), size)]


def validate(schedule: PulseSchedule) -> list:
    """Structural violations as human-readable strings; empty means valid."""
    problems = []
    times = [op.t for op in schedule.ops]
    if any(b < a for a, b in zip(times, times[1:])):
        problems.append("timestamps not sorted")
    for op in schedule.ops:
        if op.kind is PulseKind.MEASURE and abs(op.t - round(op.t)) > PATTERN_TOLERANCE:
            problems.append(f"measure off-period at t={op.t:g}")
        if op.kind is PulseKind.WAIT and not (op.duration is not None and op.duration >= 0):
            problems.append(f"wait without a valid duration at t={op.t:g}")

    chunks = _iterations(schedule)
    if not chunks:
        problems.append("empty schedule")
    expected_mag = 1.0
    for k, chunk in enumerate(chunks, start=1):
        kinds = tuple(op.kind for op in chunk)
        if kinds != ITERATION_PATTERN:
            problems.append(f"iteration {k}: pattern {[x.value for x in kinds]} broken")
            continue
        mags = [op.magnitude for op in chunk if op.kind is PulseKind.DISPLACEMENT]
        if any(m is None or abs(m - expected_mag) > PATTERN_TOLERANCE * expected_mag for m in mags):
            problems.append(f"magnitude not doubling at iteration {k}: {mags}, expected {expected_mag:g}")
        expected_mag *= 2.0
    if len(chunks) != schedule.config.n:
        problems.append(f"schedule has {len(chunks)} iterations, config asks for {schedule.config.n}")

    if abs(schedule.total_duration - len(chunks)) > PATTERN_TOLERANCE:
        problems.append(f"total duration {schedule.total_duration:g} is not one trap period per iteration")
    return problems


def emit(schedule: PulseSchedule, fmt: str = "json") -> bytes:
    """Serialize a valid schedule as versioned JSON or a plain-text timeline."""
    problems = validate(schedule)
    if problems:
        raise ScheduleError("refusing to emit an invalid schedule: " + "; ".join(problems))
    if fmt == "json":
        return (json.dumps(schedule.to_dict(), indent=2) + "\n").encode()
    if fmt == "text":
        return _timeline(schedule).encode()
    raise ScheduleError(f"unknown format {fmt!r}")


def _timeline(schedule: PulseSchedule) -> str:
    c = schedule.config
    lines = [f"# schedule v{SCHEMA_VERSION}: n={c.n} alpha={c.alpha:.12g} delta={c.delta:g} "
             f"total={schedule.total_duration:g} trap periods"]
    for op in sorted(schedule.ops, key=lambda o: o.t):
        detail = []
        if op.magnitude is not None:
            detail.append(f"{op.magnitude:g} alpha")
        if op.phase is not None:
            detail.append(f"phase {op.phase:.6g}")
        if op.duration is not None:
            detail.append(f"for {op.duration:g}")
        if op.bright is not None:
            detail.append(f"fluorescence = |{op.bright}>")
        lines.append(f"t={op.t:8.3f}  {op.kind.value:<18s} {', '.join(detail)}".rstrip())
    return "\n".join(lines) + "\n"


def parse(data) -> PulseSchedule:
    """Inverse of ``emit(schedule, 'json')``."""
    doc = json.loads(data)
    if doc.get("version") != SCHEMA_VERSION:
        raise ScheduleError(f"unsupported schedule version {doc.get('version')!r}")
    cfg = ProtocolConfig(**doc["config"])
    ops = tuple(PulseOp.from_dict(o) for o in doc["ops"])
    return PulseSchedule(cfg, ops, float(doc["total_duration"]))


def _displace_excited(s: QubitOscState, amount: float) -> QubitOscState:
    b1 = None if s.branch1 is None else s.branch1.shifted(amount, Quadrature.POSITION)
    return QubitOscState(s.branch0, b1)


def interpret(schedule: PulseSchedule, outcomes: Sequence[int] = None) -> GaussianComb:
    """Run the schedule under abstract pulse semantics.

    pi/2 pulse: Hadamard; pi pulse: swap of the internal states;
    displacement: shift of the motion attached to the excited state by
    magnitude * alpha * cos(phase); Measure: projection on the given outcome
    followed by a reset to the ground state. The returned comb carries the
    same global-phase convention as the protocol module, and the logical
    zero's final half-lattice shift is applied at the end.
    """
    cfg = schedule.config
    outcomes = (0,) * cfg.n if outcomes is None else tuple(outcomes)
    remaining = list(outcomes)
    state = QubitOscState(squeezed_vacuum(cfg.delta, Quadrature.POSITION))
    for op in schedule.ops:
        if op.kind is PulseKind.PI_HALF:
            state = hadamard(state)
        elif op.kind is PulseKind.PI:
            state = QubitOscState(state.branch1, state.branch0)
        elif op.kind is PulseKind.DISPLACEMENT:
            state = _displace_excited(state, op.magnitude * cfg.alpha * math.cos(op.phase))
        elif op.kind is PulseKind.MEASURE:
            if not remaining:
                raise ScheduleError("more measurements than supplied outcomes")
            _, psi = measure_qubit(state, remaining.pop(0))
            state = QubitOscState(psi)
    if remaining:
        raise ScheduleError("fewer measurements than supplied outcomes")
    psi = canonical_phase(state.branch0)
    if cfg.bit == 0:
        psi = psi.shifted(cfg.alpha, Quadrature.POSITION)
    return psi


def l2_distance(a: GaussianComb, b: GaussianComb) -> float:
    """||a - b|| from overlaps, without sampling."""
    d2 = a.norm_squared + b.norm_squared - 2.0 * overlap(a, b).real
    return math.sqrt(max(d2, 0.0))
