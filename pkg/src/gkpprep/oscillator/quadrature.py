from enum import Enum

import numpy as np


class Quadrature(str, Enum):
    """Which canonical variable a wave function is written in.

    Units are hbar = 1 with [q, p] = i, and the Fourier pair is
    psi(p) = (2 pi)^(-1/2) * integral psi(q) exp(-i p q) dq.
    """

    POSITION = "position"
    MOMENTUM = "momentum"

    @property
    def dual(self) -> "Quadrature":
        return Quadrature.MOMENTUM if self is Quadrature.POSITION else Quadrature.POSITION

    @property
    def sign(self) -> int:
        # A shift b along the dual axis multiplies the wave function by exp(i*sign*b*x).
        return 1 if self is Quadrature.POSITION else -1

    @classmethod
    def parse(cls, value) -> "Quadrature":
        if isinstance(value, cls):
            return value
        aliases = {"q": cls.POSITION, "x": cls.POSITION, "p": cls.MOMENTUM}
        key = str(value).lower()
        return aliases.get(key) or cls(key)


def gaussian(x, delta: float):
    """Normalized squeezed-vacuum amplitude exp(-x^2 / 2 delta^2) / sqrt(delta sqrt(pi))."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / delta) ** 2) / np.sqrt(delta * np.sqrt(np.pi))
