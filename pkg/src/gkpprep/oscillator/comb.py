"""Analytic superpositions of equal-width Gaussian peaks."""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np
from scipy.special import erf, erfc

from ..errors import DomainError
from .quadrature import Quadrature, gaussian

PRUNE_THRESHOLD = 1e-300
# Centers closer than this (in units of the width) are the same peak.
MERGE_TOLERANCE = 1e-9
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class GaussianComb:
    """Exact wave function sum_j c_j g(x - mu_j, delta) in one quadrature.

    ``kick`` is a common displacement along the dual quadrature, stored as
    the phase factor exp(i * axis.sign * kick * x). Centers are kept sorted,
    coincident peaks merged and negligible coefficients pruned, so two combs
    describing the same function have the same peak list.
    """

    delta: float
    axis: Quadrature
    centers: np.ndarray
    coeffs: np.ndarray
    kick: float = 0.0

    def __post_init__(self):
        delta = float(self.delta)
        if not np.isfinite(delta) or delta <= 0:
            raise DomainError(f"peak width must be positive, got {self.delta}")
        centers = np.atleast_1d(np.asarray(self.centers, dtype=float))
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if centers.shape != coeffs.shape or centers.ndim != 1:
            raise DomainError("centers and coeffs must be 1-D arrays of equal length")
        centers, coeffs = _canonical(centers, coeffs, delta)
        if centers.size == 0:
            raise DomainError("a comb needs at least one peak above the pruning threshold")
        centers.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "axis", Quadrature.parse(self.axis))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "kick", float(self.kick))

    @classmethod
    def from_peaks(cls, delta, peaks, axis=Quadrature.POSITION, kick=0.0) -> "GaussianComb":
        peaks = list(peaks)
        centers = [mu for mu, _ in peaks]
        coeffs = [c for _, c in peaks]
        return cls(delta, axis, np.array(centers, dtype=float), np.array(coeffs, dtype=complex), kick)

    @property
    def peaks(self) -> list:
        return list(zip(self.centers.tolist(), self.coeffs.tolist()))

    def __len__(self) -> int:
        return self.centers.size

    def __repr__(self) -> str:
        return (
            f"GaussianComb(delta={self.delta:g}, axis={self.axis.value}, "
            f"peaks={len(self)}, kick={self.kick:g})"
        )

    @cached_property
    def norm_squared(self) -> float:
        return overlap(self, self).real

    def normalize(self) -> "GaussianComb":
        nrm = self.norm_squared
        if nrm <= 0:
            raise DomainError("cannot normalize a zero-norm comb")
        return self * (1.0 / np.sqrt(nrm))

    def with_coeffs(self, coeffs) -> "GaussianComb":
        return GaussianComb(self.delta, self.axis, self.centers, coeffs, self.kick)

    def __mul__(self, factor) -> "GaussianComb":
        return self.with_coeffs(self.coeffs * complex(factor))

    __rmul__ = __mul__

    def __truediv__(self, factor) -> "GaussianComb":
        return self * (1.0 / complex(factor))

    def __neg__(self) -> "GaussianComb":
        return self * -1.0

    def __add__(self, other: "GaussianComb") -> "GaussianComb":
        out = superpose([(1.0, self), (1.0, other)])
        if out is None:
            raise DomainError("sum of combs vanishes identically")
        return out

    def __sub__(self, other: "GaussianComb") -> "GaussianComb":
        out = superpose([(1.0, self), (-1.0, other)])
        if out is None:
            raise DomainError("difference of combs vanishes identically")
        return out

    def shifted(self, amount: float, axis=None) -> "GaussianComb":
        """Apply the displacement operator along ``axis`` (default: own axis)."""
        axis = self.axis if axis is None else Quadrature.parse(axis)
        amount = float(amount)
        if amount == 0.0:
            return self
        if axis is self.axis:
            phase = np.exp(-1j * self.axis.sign * self.kick * amount)
            return GaussianComb(self.delta, self.axis, self.centers + amount, self.coeffs * phase, self.kick)
        return GaussianComb(self.delta, self.axis, self.centers, self.coeffs, self.kick + amount)


def _canonical(centers, coeffs, delta):
    order = np.argsort(centers, kind="stable")
    centers, coeffs = centers[order], coeffs[order]
    if centers.size > 1:
        gaps = np.diff(centers) > MERGE_TOLERANCE * delta
        starts = np.concatenate(([0], np.nonzero(gaps)[0] + 1))
        if starts.size < centers.size:
            coeffs = np.add.reduceat(coeffs, starts)
            centers = centers[starts]
    keep = np.abs(coeffs) >= PRUNE_THRESHOLD
    return centers[keep].copy(), coeffs[keep].copy()


def _check_compatible(a: GaussianComb, b: GaussianComb, need_kick: bool = False):
    if a.axis is not b.axis:
        raise DomainError(f"quadrature mismatch: {a.axis.value} vs {b.axis.value}")
    if abs(a.delta - b.delta) > 1e-12 * max(a.delta, b.delta):
        raise DomainError(f"width mismatch: {a.delta} vs {b.delta}")
    if need_kick and abs(a.kick - b.kick) > 1e-12 * max(1.0, abs(a.kick)):
        raise DomainError("cannot superpose combs carrying different dual-axis kicks")


def superpose(terms: Iterable) -> Optional[GaussianComb]:
    """Linear combination sum_i w_i * comb_i; ``None`` entries count as zero.

    Returns ``None`` when every coefficient cancels below the pruning threshold.
    """
    terms = [(complex(w), c) for w, c in terms if c is not None]
    if not terms:
        return None
    first = terms[0][1]
    for _, comb in terms[1:]:
        _check_compatible(first, comb, need_kick=True)
    centers = np.concatenate([c.centers for _, c in terms])
    coeffs = np.concatenate([w * c.coeffs for w, c in terms])
    centers, coeffs = _canonical(centers, coeffs, first.delta)
    if centers.size == 0:
        return None
    return GaussianComb(first.delta, first.axis, centers, coeffs, first.kick)


def _raw_overlap(a: GaussianComb, b: GaussianComb) -> complex:
    delta = a.delta
    K = a.axis.sign * (b.kick - a.kick)
    damp = np.exp(-0.25 * (K * delta) ** 2)
    total = 0.0j
    for lo in range(0, len(a), _BLOCK):
        mu_a = a.centers[lo:lo + _BLOCK, None]
        ca = np.conj(a.coeffs[lo:lo + _BLOCK, None])
        d = mu_a - b.centers[None, :]
        w = np.exp(-(d * d) / (4.0 * delta * delta))
        if K != 0.0:
            w = w * np.exp(0.5j * K * (mu_a + b.centers[None, :]))
        total += np.sum((ca * b.coeffs[None, :]) * w)
    return complex(total * damp)


def overlap(a: GaussianComb, b: GaussianComb) -> complex:
    """Inner product <a|b> in closed form.

    Evaluated symmetrically so that overlap(a, b) == conj(overlap(b, a))
    holds bit for bit, and overlap(a, a) is exactly real.
    """
    _check_compatible(a, b)
    s_ab = _raw_overlap(a, b)
    s_ba = _raw_overlap(b, a)
    return (s_ab + np.conj(s_ba)) / 2


def evaluate(comb: GaussianComb, x, axis=None):
    """Wave-function amplitude at ``x`` in ``axis`` (own axis or its dual).

    The dual-axis value uses the analytic transform of each Gaussian, so no
    grid is involved.
    """
    axis = comb.axis if axis is None else Quadrature.parse(axis)
    x_arr = np.asarray(x, dtype=float)
    flat = x_arr.reshape(-1)
    out = np.zeros(flat.shape, dtype=complex)
    s = comb.axis.sign
    if axis is comb.axis:
        for lo in range(0, len(comb), _BLOCK):
            mu = comb.centers[lo:lo + _BLOCK]
            g = gaussian(flat[:, None] - mu[None, :], comb.delta)
            out += g @ comb.coeffs[lo:lo + _BLOCK]
        if comb.kick != 0.0:
            out *= np.exp(1j * s * comb.kick * flat)
    else:
        u = flat - comb.kick
        for lo in range(0, len(comb), _BLOCK):
            mu = comb.centers[lo:lo + _BLOCK]
            out += np.exp(-1j * s * np.outer(u, mu)) @ comb.coeffs[lo:lo + _BLOCK]
        out *= gaussian(u, 1.0 / comb.delta)
    if x_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(x_arr.shape)


def _erf_difference(lo, hi):
    """erf(hi) - erf(lo) elementwise, keeping relative precision in the tails."""
    lo, hi = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    out = erf(hi) - erf(lo)
    right = lo >= 0
    left = hi <= 0
    out = np.where(right, erfc(lo) - erfc(hi), out)
    out = np.where(left, erfc(-hi) - erfc(-lo), out)
    return out


def interval_mass(comb: GaussianComb, intervals) -> float:
    """Exact probability mass of ``comb`` over a union of disjoint intervals.

    Uses the error-function closed form of every peak-pair product, so tail
    masses keep full relative precision. Intervals are in the comb's axis.
    """
    delta = comb.delta
    mu = comb.centers
    c = comb.coeffs
    total = 0.0
    for lo in range(0, len(comb), _BLOCK):
        mu_j = mu[lo:lo + _BLOCK, None]
        pair = np.conj(c[lo:lo + _BLOCK, None]) * c[None, :]
        d = mu_j - mu[None, :]
        mid = 0.5 * (mu_j + mu[None, :])
        weight = pair * np.exp(-(d * d) / (4.0 * delta * delta))
        for a, b in intervals:
            frac = 0.5 * _erf_difference((a - mid) / delta, (b - mid) / delta)
            total += float(np.sum(weight * frac).real)
    return total
