"""CSV and JSON forms of grid states and combs.

Floats are written with 17 significant digits so files round-trip exactly
and identical inputs give byte-identical output.
"""

import io
import json

import numpy as np

from .comb import GaussianComb
from .grid import GridState

CSV_HEADER = ("coordinate", "re", "im", "density")


def _f(x: float) -> str:
    return format(float(x), ".17g")


def grid_to_csv(state: GridState) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for x, a, d in zip(state.coords, state.amplitudes, state.density):
        buf.write(f"{_f(x)},{_f(a.real)},{_f(a.imag)},{_f(d)}\n")
    return buf.getvalue()


def grid_from_csv(text: str, axis) -> GridState:
    rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    x = rows[:, 0]
    spacing = (x[-1] - x[0]) / (len(x) - 1)
    return GridState(axis, x[0], spacing, rows[:, 1] + 1j * rows[:, 2])


def grid_to_dict(state: GridState) -> dict:
    return {
        "axis": state.axis.value,
        "origin": state.origin,
        "spacing": state.spacing,
        "re": state.amplitudes.real.tolist(),
        "im": state.amplitudes.imag.tolist(),
    }


def grid_from_dict(data: dict) -> GridState:
    amps = np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float)
    return GridState(data["axis"], data["origin"], data["spacing"], amps)


def comb_to_dict(comb: GaussianComb) -> dict:
    out = {
        "delta": comb.delta,
        "axis": comb.axis.value,
        "peaks": [{"mu": mu, "re": c.real, "im": c.imag} for mu, c in comb.peaks],
    }
    if comb.kick:
        out["kick"] = comb.kick
    return out


def comb_from_dict(data: dict) -> GaussianComb:
    peaks = [(p["mu"], complex(p["re"], p["im"])) for p in data["peaks"]]
    return GaussianComb.from_peaks(data["delta"], peaks, data["axis"], data.get("kick", 0.0))


def dumps(data) -> str:
    return json.dumps(data, indent=2) + "\n"
