"""Command-line front end.

Data goes to stdout (JSON by default, or two-column CSV), diagnostics to
stderr. Exit codes: 0 ok, 1 unreadable input, 2 bad gate or matrix, 3 parse
error, 4 validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, dbmerge, dsl, epr, fixedpoint, operators
from .errors import (
    DimensionError,
    NotUnitaryError,
    ScenarioError,
    StateError,
    UnknownGateError,
)
from .state import Cbit, Qbit, RngStream, sample_qbit_counts

EXIT_OK, EXIT_IO, EXIT_GATE, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _num(x: float) -> float:
    # 15 significant digits keep output stable across platforms; + 0.0 folds -0.0
    return float(f"{x:.15g}") + 0.0


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        re, im = _num(z.real), _num(z.imag)
        return re if im == 0 else [re, im]
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, Qbit):
        return to_jsonable([obj.a, obj.b])
    return obj


def render(data: dict, fmt: str) -> str:
    data = to_jsonable(data)
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value"])
    for k, v in data.items():
        w.writerow([k, v if isinstance(v, (str, int, float)) else json.dumps(v)])
    return buf.getvalue()


def parse_angle(text: str) -> float:
    t = text.strip()
    sign = -1.0 if t.startswith("-") else 1.0
    if t.lstrip("+-") == "pi":
        return sign * math.pi
    try:
        x = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError("angles must be finite")
    return x


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _manifest(args, **extra) -> dict:
    out = {"command": args.command, "tool_version": __version__}
    if hasattr(args, "seed"):
        out["seed"] = args.seed
    out.update(extra)
    return out


def _density(rho) -> list | None:
    return None if rho is None else rho.matrix


def report_dict(report: fixedpoint.FixedPointReport) -> dict:
    return {
        "classical_fixed_points": report.classical_fixed_points,
        "quantum_eigenspace": report.quantum_eigenspace,
        "channel_fixed_point": _density(report.channel_fixed_point),
        "classification": report.classification,
        "residual": report.residual,
    }


def _gate_for(args) -> operators.Gate:
    try:
        if args.matrix is not None:
            try:
                m = dsl.parse_matrix(args.matrix)
            except dsl.ParseError as exc:
                raise CliError(EXIT_GATE, f"bad matrix literal: {exc}") from None
            return operators.gate_from_matrix("custom", m)
        return operators.lookup(args.gate)
    except (UnknownGateError, NotUnitaryError, DimensionError) as exc:
        raise CliError(EXIT_GATE, str(exc)) from None


def cmd_analyze(args) -> dict:
    g = _gate_for(args)
    if g.dim != 2:
        raise CliError(EXIT_GATE, "analyze expects a 2x2 gate")
    report = fixedpoint.analyze(g)
    return _manifest(args, gate=g.name, matrix=g.matrix, **report_dict(report))


def _scenario_text(path: str) -> tuple[str, bytes]:
    p = Path(path)
    if p.is_file():
        return str(p), p.read_bytes()
    bundled = resources.files("qparadox").joinpath("scenarios", p.name)
    if bundled.is_file():
        return p.name, bundled.read_bytes()
    raise CliError(EXIT_IO, f"cannot read scenario {path!r}")


def load_scenario(path: str):
    label, data = _scenario_text(path)
    try:
        scenario, warnings = dsl.load(data)
    except dsl.ParseError as exc:
        raise CliError(EXIT_PARSE, f"{label}:{exc}") from None
    except dsl.ValidationError as exc:
        raise CliError(
            EXIT_INVALID, "\n".join(f"{label}:{d}" for d in exc.diagnostics)
        ) from None
    for w in warnings:
        print(f"{label}:{w}", file=sys.stderr)
    return label, scenario


def cmd_run(args) -> dict:
    label, scenario = load_scenario(args.scenario)
    try:
        result = epr.run_loop(
            scenario, args.mode, RngStream(args.seed), shots=args.shots, workers=args.workers
        )
    except (ScenarioError, DimensionError) as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    out = _manifest(args, scenario=scenario.name, mode=result.mode, paradox=result.paradox)
    if result.mode == "classical":
        out["consistent_assignments"] = [c.sign for c in result.consistent_assignments]
    else:
        out["shots"] = result.shots
        out["histogram"] = result.outcome_histogram
        out["fixed_point_used"] = result.fixed_point_used
        out["fixed_point_density"] = _density(result.fixed_point_density)
    out["loop_unitary"] = result.loop_unitary
    return out


def cmd_correlate(args) -> dict:
    left, right, _ = epr.sample_pairs(
        args.alpha, args.beta, args.shots, RngStream(args.seed), workers=args.workers
    )
    analytic = epr.correlation(args.alpha, args.beta)
    products = left.astype(np.int64) * right
    sampled = float(products.mean())
    return _manifest(
        args,
        alpha=args.alpha,
        beta=args.beta,
        shots=args.shots,
        analytic=analytic,
        sampled=sampled,
        difference=sampled - analytic,
        discordant=int(np.count_nonzero(products < 0)),
    )


def _pipeline(text: str | None) -> list[operators.Gate]:
    if not text:
        return []
    try:
        return [operators.lookup(name.strip()) for name in text.split(",") if name.strip()]
    except UnknownGateError as exc:
        raise CliError(EXIT_GATE, str(exc)) from None


def _record_out(r: dbmerge.FactRecord) -> dict:
    if isinstance(r.state, Qbit):
        return {"kind": "qbit", "amplitudes": r.state}
    return {"kind": "cbit", "value": int(r.state)}


def cmd_merge(args) -> dict:
    pipeline = _pipeline(args.pipeline)
    a = dbmerge.FactRecord("fact", Cbit(args.a), ("source-a",))
    b = dbmerge.FactRecord("fact", Cbit(args.b), ("source-b",))
    merged = dbmerge.merge_records("fact", a, b)
    processed = dbmerge.process(pipeline, merged)
    if isinstance(processed.state, Cbit):
        v = int(processed.state)
        hist = {"0": args.resolutions * (1 - v), "1": args.resolutions * v}
    else:
        (n0, n1), _ = sample_qbit_counts(
            processed.state, args.resolutions, RngStream(args.seed), workers=args.workers
        )
        hist = {"0": n0, "1": n1}
    return _manifest(
        args,
        inputs=[args.a, args.b],
        pipeline=[g.name for g in pipeline],
        merged=_record_out(merged),
        processed=_record_out(processed),
        resolutions=args.resolutions,
        histogram=hist,
    )


def cmd_parse_check(args) -> dict:
    label, scenario = load_scenario(args.scenario)
    return _manifest(args, scenario=scenario.name, ok=True, canonical=dsl.serialize(scenario))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=_u64, default=0)
    seeded.add_argument(
        "--workers", type=_positive, default=1, help="threads for shot batches"
    )

    p = argparse.ArgumentParser(prog="qparadox", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="fixed points of a gate")
    which = a.add_mutually_exclusive_group(required=True)
    which.add_argument("--gate", help="catalog gate: " + ", ".join(operators.CATALOG))
    which.add_argument("--matrix", help='2x2 literal, e.g. "[0,1;1,0]"')
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("run", parents=[common, seeded], help="simulate a loop scenario")
    r.add_argument("scenario", help=".scn path (bundled names such as fig2.scn also work)")
    r.add_argument("--mode", choices=("classical", "quantum"), default="quantum")
    r.add_argument("--shots", type=_positive, default=None)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("correlate", parents=[common, seeded], help="singlet correlation")
    c.add_argument("alpha", type=parse_angle)
    c.add_argument("beta", type=parse_angle)
    c.add_argument("--shots", type=_positive, default=100_000)
    c.set_defaults(func=cmd_correlate)

    m = sub.add_parser("merge", parents=[common, seeded], help="merge two cbits")
    m.add_argument("a", type=int, choices=(0, 1))
    m.add_argument("b", type=int, choices=(0, 1))
    m.add_argument("--pipeline", help="comma-separated gate names")
    m.add_argument("--resolutions", type=_positive, default=100_000)
    m.set_defaults(func=cmd_merge)

    k = sub.add_parser("parse-check", parents=[common], help="parse and validate a scenario")
    k.add_argument("scenario")
    k.set_defaults(func=cmd_parse_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = args.func(args)
    except CliError as exc:
        print(f"qparadox {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except StateError as exc:
        print(f"qparadox {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(render(data, args.format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
