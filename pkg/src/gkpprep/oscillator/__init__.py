"""Single-mode oscillator states: analytic Gaussian combs and sampled grids."""

from ..errors import DomainError
from . import comb as _comb
from . import grid as _grid
from .comb import GaussianComb, evaluate, overlap, superpose
from .grid import GridState, fourier, periodic_cells, refine, to_grid
from .lattice import IdealLattice, ideal_lattice
from .quadrature import Quadrature, gaussian

__all__ = [
    "GaussianComb",
    "GridState",
    "IdealLattice",
    "Quadrature",
    "displace",
    "evaluate",
    "fourier",
    "gaussian",
    "ideal_lattice",
    "interval_mass",
    "overlap",
    "periodic_cells",
    "refine",
    "squeezed_vacuum",
    "superpose",
    "to_grid",
]


def squeezed_vacuum(delta: float, axis=Quadrature.POSITION) -> GaussianComb:
    """Vacuum squeezed to width ``delta`` in ``axis``; delta = 1 is the ground state."""
    if not delta > 0:
        raise DomainError(f"squeezing width must be positive, got {delta}")
    return GaussianComb(delta, axis, [0.0], [1.0])


def displace(state, amount: float, axis=Quadrature.POSITION, spectral: bool = False):
    """Displacement operator exp(-i a p) (axis=position) or exp(i b q) (axis=momentum).

    Combs are shifted exactly. Grid states need a whole number of cells
    along their own axis unless ``spectral`` is set.
    """
    if isinstance(state, GaussianComb):
        return state.shifted(amount, axis)
    if isinstance(state, GridState):
        return _grid.shift(state, amount, axis, spectral=spectral)
    raise TypeError(f"cannot displace {type(state).__name__}")


def interval_mass(state, intervals, **kwargs) -> float:
    """Probability mass of a comb (exact, error functions) or grid (refined Simpson)."""
    if isinstance(state, GaussianComb):
        return _comb.interval_mass(state, intervals)
    return _grid.interval_mass(state, intervals, **kwargs)
