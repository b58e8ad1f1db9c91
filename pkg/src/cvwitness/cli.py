"""Command-line surface: generate states, certify CM files, sweep
parameters and run oracle comparisons.

Exit codes are stable API: 0 success, 1 usage or I/O error, 2 physically
invalid input, 3 oracle disagreement. Reports are emitted as JSON with
numbers formatted to 17 significant digits in a fixed field order, so a
given input, flag set and seed reproduces the same bytes (the timing_ms
field is the one exception). CVW_DEFAULT_TOL overrides the default
tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceMatrix, split_standard, standard_form_reduce_two_mode
from .criteria import (
    CorrelationVerdict,
    certify,
    default_tolerance,
    _standardize,
)
from .optimize import (
    FUNCTIONALS,
    GridSpec,
    OptimizerConfig,
    brute_force_min,
    min_separability_sum_numeric,
    min_separability_sum_two_mode,
    min_steering_sum_ab,
    min_steering_sum_ab_numeric,
    min_steering_sum_ba_numeric,
)
from .states import GeneratorSpec

__all__ = ["main", "render_json", "Report"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONPHYSICAL = 2
EXIT_ORACLE_DISAGREEMENT = 3

_FLOAT_DIGITS = ".17g"


def _render_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), _FLOAT_DIGITS)
    return json.dumps(str(x))


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON rendering: insertion-ordered keys, floats at 17
    significant digits."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f"{inner}{json.dumps(str(k))}: {render_json(v, indent + 2)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        rows = [f"{inner}{render_json(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    return _render_scalar(obj)


@dataclass
class Report:
    """Machine-readable certification record."""

    input_descriptor: str
    verdict: CorrelationVerdict
    timing_ms: float
    config: dict

    def to_dict(self) -> dict:
        return {
            "input_descriptor": self.input_descriptor,
            "verdict": self.verdict.to_dict(),
            "timing_ms": self.timing_ms,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(
            input_descriptor=data["input_descriptor"],
            verdict=CorrelationVerdict.from_dict(data["verdict"]),
            timing_ms=float(data["timing_ms"]),
            config=dict(data["config"]),
        )


def _report_csv(report: Report) -> str:
    head = ["input_descriptor"]
    cells = [report.input_descriptor]
    v = report.verdict.to_dict()
    for key, val in v.items():
        if key == "witnesses":
            continue
        head.append(key)
        cells.append("" if val is None else _render_scalar(val).strip('"'))
    for key, val in v["witnesses"].items():
        head.append(key)
        cells.append(format(float(val), _FLOAT_DIGITS))
    head.append("timing_ms")
    cells.append(format(report.timing_ms, _FLOAT_DIGITS))
    return ",".join(head) + "\n" + ",".join(cells) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the CLI reserves 2 for
    # non-physical inputs, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cvwitness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a covariance-matrix file")
    gen.add_argument("kind", choices=GeneratorSpec.KINDS)
    gen.add_argument("--n", type=int, default=2, help="number of modes")
    gen.add_argument("--n-alice", type=int, default=None)
    gen.add_argument("--r", type=float, default=0.5, help="squeezing parameter")
    gen.add_argument(
        "--nbar", type=str, default="0",
        help="mean occupation (comma list for thermal)",
    )
    gen.add_argument("--side", choices=("A", "B"), default="A")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, default=None)

    cert = sub.add_parser("certify", help="certify a covariance-matrix file")
    cert.add_argument("path")
    cert.add_argument("--tol", type=float, default=None)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--format", choices=("json", "csv"), default="json")
    cert.add_argument("--out", type=str, default=None)
    _add_optimizer_flags(cert)

    sweep = sub.add_parser("sweep", help="certify along a parameter range")
    sweep.add_argument("kind", choices=GeneratorSpec.KINDS)
    sweep.add_argument("--param", required=True, help="generator parameter to sweep")
    sweep.add_argument(
        "--range", required=True, dest="value_range", metavar="LO,HI,STEPS"
    )
    sweep.add_argument("--n", type=int, default=2)
    sweep.add_argument("--n-alice", type=int, default=None)
    sweep.add_argument("--r", type=float, default=0.5)
    sweep.add_argument("--nbar", type=float, default=0.0)
    sweep.add_argument("--side", choices=("A", "B"), default="A")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--tol", type=float, default=None)
    sweep.add_argument("--out", type=str, default=None)

    orc = sub.add_parser("oracle", help="compare minimizer, sampler and closed form")
    orc.add_argument("path")
    orc.add_argument("--functional", required=True, choices=FUNCTIONALS)
    orc.add_argument("--samples", type=int, default=100_000)
    orc.add_argument("--oracle-tol", type=float, default=1e-3)
    orc.add_argument("--closed-form-tol", type=float, default=1e-6)
    orc.add_argument("--tol", type=float, default=None)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--out", type=str, default=None)
    _add_optimizer_flags(orc)

    return parser


def _add_optimizer_flags(sub) -> None:
    defaults = OptimizerConfig()
    sub.add_argument("--opt-tol", type=float, default=defaults.tol)
    sub.add_argument("--max-iters", type=int, default=defaults.max_iters)
    sub.add_argument("--max-restarts", type=int, default=defaults.max_restarts)
    sub.add_argument(
        "--positivity-floor", type=float, default=defaults.positivity_floor
    )


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        tol=args.opt_tol,
        max_iters=args.max_iters,
        max_restarts=args.max_restarts,
        positivity_floor=args.positivity_floor,
        rng_seed=args.seed,
    )


def _cmd_gen(args) -> int:
    params = {"r": args.r, "side": args.side, "seed": args.seed}
    if args.kind == "thermal":
        params["nbar"] = [float(x) for x in args.nbar.split(",")]
    else:
        params["nbar"] = float(args.nbar)
    if args.n_alice is not None:
        params["n_alice"] = args.n_alice
    spec = GeneratorSpec(kind=args.kind, n_modes=args.n, params=params)
    cm = spec.build()
    _emit(render_json(cm.to_dict()) + "\n", args.out)
    return EXIT_OK


def _cmd_certify(args) -> int:
    cm = CovarianceMatrix.load(args.path)
    tol = args.tol if args.tol is not None else default_tolerance()
    start = time.perf_counter()
    verdict = certify(cm, tol=tol)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    config = {"tol": tol, "optimizer": _optimizer_config(args).to_dict()}
    report = Report(
        input_descriptor=args.path,
        verdict=verdict,
        timing_ms=elapsed_ms,
        config=config,
    )
    if args.format == "csv":
        _emit(_report_csv(report), args.out)
    else:
        _emit(render_json(report.to_dict()) + "\n", args.out)
    return EXIT_OK if verdict.physical else EXIT_NONPHYSICAL


_SWEEP_FLAGS = ("ppt", "steerable_a_to_b", "steerable_b_to_a")


def _cmd_sweep(args) -> int:
    try:
        lo_s, hi_s, steps_s = args.value_range.split(",")
        lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
    except ValueError:
        print(f"bad --range {args.value_range!r}, expected LO,HI,STEPS", file=sys.stderr)
        return EXIT_USAGE
    if steps < 1:
        print("--range needs at least one step", file=sys.stderr)
        return EXIT_USAGE
    values = np.linspace(lo, hi, steps)
    tol = args.tol if args.tol is not None else default_tolerance()
    base = {"r": args.r, "nbar": args.nbar, "side": args.side, "seed": args.seed}
    if args.n_alice is not None:
        base["n_alice"] = args.n_alice

    header = [
        args.param,
        "min_symplectic_eig_pt",
        "steer_sum_ab_min",
        "det_ratio_ab",
        "physical",
        *_SWEEP_FLAGS,
        "crossings",
    ]
    lines = [",".join(header)]
    previous: dict | None = None
    for value in values:
        params = dict(base)
        params[args.param] = int(value) if args.param == "seed" else float(value)
        cm = GeneratorSpec(kind=args.kind, n_modes=args.n, params=params).build()
        verdict = certify(cm, tol=tol)
        vd = verdict.to_dict()
        wit = vd["witnesses"]
        row = [format(float(value), _FLOAT_DIGITS)]
        for key in ("min_symplectic_eig_pt", "steer_sum_ab_min", "det_ratio_ab"):
            row.append("" if key not in wit else format(wit[key], _FLOAT_DIGITS))
        row.append(_render_scalar(vd["physical"]))
        flags = {k: vd[k] for k in _SWEEP_FLAGS}
        for key in _SWEEP_FLAGS:
            row.append("" if flags[key] is None else _render_scalar(flags[key]))
        crossed = []
        if previous is not None:
            crossed = [k for k in _SWEEP_FLAGS if previous[k] != flags[k]]
        row.append(";".join(crossed))
        previous = flags
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _closed_form_for(sf, functional, std_cm) -> float | None:
    if functional in ("sep_plus", "sep_minus"):
        if sf.n_modes != 2:
            return None
        params, _ = standard_form_reduce_two_mode(std_cm)
        return min_separability_sum_two_mode(
            params, "plus" if functional == "sep_plus" else "minus"
        )
    if functional == "steer_ab":
        return min_steering_sum_ab(sf)
    if sf.n_modes == 2:
        det_full = np.linalg.det(sf.vq) * np.linalg.det(sf.vp)
        det_bob = sf.vq[-1, -1] * sf.vp[-1, -1]
        return float(2.0 * np.sqrt(det_full / det_bob))
    return None


def _cmd_oracle(args) -> int:
    cm = CovarianceMatrix.load(args.path)
    tol = args.tol if args.tol is not None else default_tolerance()
    std = _standardize(cm, tol=tol)
    sf = split_standard(std, tol=tol)
    config = _optimizer_config(args)
    if args.functional in ("sep_plus", "sep_minus"):
        numeric = min_separability_sum_numeric(
            sf, "plus" if args.functional == "sep_plus" else "minus", config
        )
    elif args.functional == "steer_ab":
        numeric = min_steering_sum_ab_numeric(sf, config)
    else:
        numeric = min_steering_sum_ba_numeric(sf, config)
    brute = brute_force_min(
        sf, args.functional, GridSpec(samples=args.samples, seed=args.seed)
    )
    closed = _closed_form_for(sf, args.functional, std)

    gap_brute = abs(numeric.value - brute)
    ok_brute = bool(gap_brute <= args.oracle_tol)
    ok_closed = None
    if closed is not None:
        ok_closed = bool(abs(numeric.value - closed) <= args.closed_form_tol)

    record = {
        "input_descriptor": args.path,
        "functional": args.functional,
        "numeric_min": numeric.value,
        "numeric_converged": numeric.converged,
        "numeric_boundary_flag": numeric.boundary_flag,
        "brute_force_min": brute,
        "closed_form": closed,
        "numeric_vs_brute": gap_brute,
        "agreement_numeric_brute": ok_brute,
        "agreement_closed_form": ok_closed,
        "samples": args.samples,
        "config": {
            "tol": tol,
            "oracle_tol": args.oracle_tol,
            "optimizer": config.to_dict(),
        },
    }
    _emit(render_json(record) + "\n", args.out)
    if not ok_brute or ok_closed is False:
        return EXIT_ORACLE_DISAGREEMENT
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "certify":
            return _cmd_certify(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_oracle(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
