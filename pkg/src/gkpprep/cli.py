"""Command-line entry point: ``gkpprep {prepare,analyze,recover,compile-schedule}``.

Exit codes: 0 on success, 1 when a computation fails (domain, truncation,
degenerate measurement or schedule errors), 2 for usage errors.
"""

import argparse
import csv
import hashlib
import io
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_report
from .errors import GkpError
from .iontrap import compile as compile_schedule
from .iontrap import emit
from .oscillator import Quadrature
from .oscillator.io import dumps, grid_to_csv
from .protocol import ProtocolConfig, prepare, prepared_grids, run_outcomes, sample_run
from .recovery import encode_superposition, recover, recovery_grid

ALPHA_TOKENS = {
    "sqrt(pi/2)": math.sqrt(math.pi / 2),
    "sqrt(pi)": math.sqrt(math.pi),
}
LOGICAL = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "plus": (math.sqrt(0.5), math.sqrt(0.5)),
    "minus": (math.sqrt(0.5), -math.sqrt(0.5)),
}


def positive_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(val) and val > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def alpha_value(text: str) -> float:
    key = text.replace(" ", "").lower()
    if key in ALPHA_TOKENS:
        return ALPHA_TOKENS[key]
    return positive_float(text)


def nonneg_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {val}")
    return val


def positive_int(text: str) -> int:
    val = nonneg_int(text)
    if val == 0:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def bit_string(text: str) -> tuple:
    if set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"bit pattern must contain only 0 and 1, got {text!r}")
    return tuple(int(c) for c in text)


def shift_spec(text: str):
    """A fixed shift, or ``uniform:<max>`` for a uniform draw from (-max, max)."""
    if text.startswith("uniform:"):
        return ("uniform", abs(float(text[8:])))
    try:
        return ("fixed", float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or uniform:<max>, got {text!r}")


class Outputs:
    """Writes files under one directory and remembers them for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def write(self, name: str, data) -> Path:
        path = self.root / name
        raw = data.encode() if isinstance(data, str) else data
        path.write_bytes(raw)
        self.files.append({"path": name, "sha256": hashlib.sha256(raw).hexdigest()})
        return path

    def manifest(self, command: str, args: argparse.Namespace, started: float) -> Path:
        params = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func", "out_dir")}
        doc = {
            "command": command,
            "config": params,
            "seed": params.get("seed"),
            "outputs": self.files + [{"path": "manifest.json"}],
            "version": __version__,
            "wall_time_s": time.perf_counter() - started,
        }
        path = self.root / "manifest.json"
        path.write_text(dumps(doc))
        return path


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, Quadrature):
        return v.value
    return v


def _config(args, **extra) -> ProtocolConfig:
    kw = dict(alpha=args.alpha, delta=args.delta, n=args.n)
    kw.update(extra)
    return ProtocolConfig(**kw)


def cmd_prepare(args, out: Outputs) -> None:
    mode = args.mode
    if args.bits is not None:
        if mode == "postselect":
            mode = "deterministic"
        if len(args.bits) != args.n:
            raise GkpError(f"--bits has {len(args.bits)} outcomes but --n is {args.n}")
    cfg = ProtocolConfig(alpha=args.alpha, delta=args.delta, n=args.n, bit=args.bit,
                         axis=args.axis, mode=mode, seed=args.seed)
    if mode == "deterministic":
        if args.bits is None:
            raise GkpError("deterministic mode needs --bits")
        record = run_outcomes(cfg, args.bits)
    elif mode == "sample":
        record = sample_run(cfg)
    else:
        record = prepare(cfg)
    own, dual = prepared_grids(cfg, record)
    pos, mom = (own, dual) if cfg.axis is Quadrature.POSITION else (dual, own)
    out.write("position.csv", grid_to_csv(pos))
    out.write("momentum.csv", grid_to_csv(mom))
    doc = {"config": cfg.to_dict(), "record": record.to_dict()}
    out.write("record.json", dumps(doc))
    bits = "".join(map(str, record.bits)) or "-"
    print(f"outcomes {bits}  probability {record.probability:.12g}  peaks {len(record.state)}  "
          f"norm factor {record.norm_factor:.12g}")


SWEEP_COLUMNS = (
    "delta", "n", "position_error", "position_bound", "position_bound_ok",
    "momentum_error", "momentum_bound", "momentum_bound_ok", "overlap01", "mean_energy",
)


def cmd_analyze(args, out: Outputs) -> None:
    reports = []
    for delta in args.delta:
        for n in args.n:
            reports.append(error_report(ProtocolConfig(alpha=args.alpha, delta=delta, n=n)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in reports:
        d = r.to_dict()
        d["position_bound_ok"], d["momentum_bound_ok"] = r.position_ok, r.momentum_ok
        w.writerow([_cell(d[c]) for c in SWEEP_COLUMNS])
    out.write("sweep.csv", buf.getvalue())
    out.write("report.json", dumps({"alpha": args.alpha, "reports": [r.to_dict() for r in reports]}))
    for r in reports:
        print(f"delta={r.delta:g} n={r.n}: P_q={r.position_error:.3e} (bound {r.position_bound:.3e})  "
              f"P_p={r.momentum_error:.5f} (bound {r.momentum_bound:.5f})")


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return v


TRIAL_COLUMNS = ("trial", "shift", "measured", "estimate", "estimate_error", "fidelity", "residual",
                 "logical_failure")


def _draw(spec, rng) -> float:
    kind, val = spec
    return rng.uniform(-val, val) if kind == "uniform" else val


def cmd_recover(args, out: Outputs) -> None:
    cfg = _config(args, bit=1)
    c0, c1 = LOGICAL[args.logical]
    comb = encode_superposition(c0, c1, cfg)
    unit_q, unit_p = cfg.alpha, math.pi / cfg.alpha
    reach = 0.0 if args.dq_shift[0] == "fixed" and args.dq_shift[1] == 0 else abs(args.dq_shift[1]) * unit_q
    grid = recovery_grid(comb, max_shift=reach, period=cfg.alpha)
    ancilla = "ideal" if args.ancilla == "ideal" else args.ancilla

    rows, results = [], []
    for trial, child in enumerate(np.random.SeedSequence(args.seed).spawn(args.trials)):
        rng = np.random.default_rng(child)
        dq = _draw(args.dq_shift, rng) * unit_q
        dp = _draw(args.dp_shift, rng) * unit_p
        res = recover(grid, (dq, dp), ancilla, cfg, rng=rng, quadrature=args.quadrature,
                      ideal_width=args.ancilla_width)
        results.append(res)
        rows.append((trial, res.shift, res.syndrome.measured, res.syndrome.estimate, res.estimate_error,
                     res.fidelity, res.residual, res.logical_failure))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    out.write("trials.csv", buf.getvalue())

    errs = np.abs([r.estimate_error for r in results])
    fids = np.array([r.fidelity for r in results])
    summary = {
        "config": cfg.to_dict(),
        "quadrature": Quadrature.parse(args.quadrature).value,
        "ancilla": args.ancilla,
        "logical": args.logical,
        "trials": args.trials,
        "grid_spacing": grid.spacing,
        "two_dq": 2 * grid.spacing,
        "median_abs_estimate_error": float(np.median(errs)),
        "fidelity_mean": float(fids.mean()),
        "fidelity_median": float(np.median(fids)),
        "fidelity_min": float(fids.min()),
        "logical_failure_rate": float(np.mean([r.logical_failure for r in results])),
    }
    out.write("summary.json", dumps(summary))
    print(f"{args.trials} trials: median |eps_est - eps| = {summary['median_abs_estimate_error']:.4g} "
          f"(2 dq = {summary['two_dq']:.4g}), mean fidelity {summary['fidelity_mean']:.4f}, "
          f"logical failures {summary['logical_failure_rate']:.2%}")


def cmd_compile(args, out: Outputs) -> None:
    cfg = ProtocolConfig(alpha=args.alpha, delta=args.delta, n=args.n, bit=args.bit, seed=args.seed)
    data = emit(compile_schedule(cfg), args.format)
    name = "schedule.json" if args.format == "json" else "schedule.txt"
    out.write(name, data)
    sys.stdout.write(data.decode() if args.format == "text" else f"wrote {name}\n")


def _common(p: argparse.ArgumentParser, n_default=3):
    p.add_argument("--alpha", type=alpha_value, default=ALPHA_TOKENS["sqrt(pi/2)"],
                   help="lattice unit: a positive number, sqrt(pi/2) or sqrt(pi) (default sqrt(pi/2))")
    p.add_argument("--delta", type=positive_float, default=0.15, help="peak width (default 0.15)")
    p.add_argument("--n", type=nonneg_int, default=n_default, help="protocol iterations")
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("."), help="directory for output files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkpprep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="prepare an encoded state and write its wave functions")
    _common(p)
    p.add_argument("--bit", type=int, choices=(0, 1), default=1)
    p.add_argument("--axis", choices=("position", "momentum"), default="position")
    p.add_argument("--mode", choices=("postselect", "deterministic", "sample"), default="postselect")
    p.add_argument("--bits", type=bit_string, help="fixed outcome sequence, e.g. 101")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("analyze", help="misidentification probabilities against their bounds")
    p.add_argument("--alpha", type=alpha_value, default=ALPHA_TOKENS["sqrt(pi/2)"])
    p.add_argument("--delta", type=positive_float, nargs="+", default=[0.15])
    p.add_argument("--n", type=nonneg_int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recover", help="seeded shift-error recovery trials")
    _common(p)
    p.add_argument("--dq-shift", type=shift_spec, default=("fixed", 0.0),
                   help="position shift in units of alpha, or uniform:<max>")
    p.add_argument("--dp-shift", type=shift_spec, default=("fixed", 0.0),
                   help="momentum shift in units of pi/alpha, or uniform:<max>")
    p.add_argument("--ancilla", default="ideal", help="'ideal' or bits:<pattern> for a prepared ancilla")
    p.add_argument("--ancilla-width", type=positive_float, default=0.05, help="ideal-ancilla peak width")
    p.add_argument("--quadrature", choices=("position", "momentum"), default="position")
    p.add_argument("--logical", choices=sorted(LOGICAL), default="plus", help="encoded logical state")
    p.add_argument("--trials", type=positive_int, default=100)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("compile-schedule", help="ion-trap pulse schedule")
    _common(p)
    p.add_argument("--bit", type=int, choices=(0, 1), default=1)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_compile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "ancilla", "ideal") != "ideal" and not args.ancilla.startswith("bits:"):
        parser.error(f"--ancilla must be 'ideal' or bits:<pattern>, got {args.ancilla!r}")
    started = time.perf_counter()
    out = Outputs(args.out_dir)
    try:
        args.func(args, out)
    except GkpError as exc:
        print(f"gkpprep {args.command}: error: {exc}", file=sys.stderr)
        return 1
    out.manifest(args.command, args, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
