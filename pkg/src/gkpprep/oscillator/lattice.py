from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .quadrature import Quadrature


@dataclass(frozen=True)
class IdealLattice:
    """Delta-comb codeword: bit 0 sits on even multiples of alpha in q, bit 1 on odd ones.

    In p both sit on multiples of pi/alpha, bit 1 carrying the sign (-1)^s.
    """

    alpha: float
    bit: int
    axis: Quadrature = Quadrature.POSITION

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.bit not in (0, 1):
            raise DomainError(f"logical bit must be 0 or 1, got {self.bit}")
        object.__setattr__(self, "axis", Quadrature.parse(self.axis))

    @property
    def spacing(self) -> float:
        if self.axis is Quadrature.POSITION:
            return 2.0 * self.alpha
        return np.pi / self.alpha

    def peaks(self, cutoff: int) -> list:
        """(location, sign) pairs with |location| <= cutoff * spacing."""
        if cutoff < 1:
            raise DomainError(f"cutoff must be >= 1, got {cutoff}")
        out = []
        if self.axis is Quadrature.POSITION:
            offset = 0.5 if self.bit else 0.0
            for s in range(-cutoff, cutoff + 2):
                x = 2.0 * self.alpha * (s - offset)
                if abs(s - offset) <= cutoff:
                    out.append((x, 1))
        else:
            for s in range(-cutoff, cutoff + 1):
                sign = (-1) ** (s % 2) if self.bit else 1
                out.append((np.pi * s / self.alpha, sign))
        return out


def ideal_lattice(bit: int, alpha: float, axis=Quadrature.POSITION, cutoff: int = 1) -> list:
    return IdealLattice(alpha, bit, axis).peaks(cutoff)
