"""Command-line front end.

Subcommands: moments | dist | sample | verify | optimize. Exit codes:
0 success, 1 usage/parse error, 2 invariant violation, 3 verification
failure. All randomized commands take --seed and are reproducible for a
fixed seed and worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .linalg import QubitSpectrum, eig2_normal
from .moments import GateSpec, gate_moments, kraus_avg_fidelity
from .optimize import Objective, OptimizeConfig, build_family, optimize
from .qubit_dist import normal_pdf, quadrature_moments
from .sampling import mc_histogram, mc_moment
from .serialize import (
    load_kraus,
    load_matrix,
    matrix_from_obj,
    write_density_csv,
    write_histogram_csv,
    write_trace_csv,
)
from .verify import run_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    command: str
    inputs: list[str]
    seed: int
    versions: str
    outputs: list[str]


def _load(path: str, loader):
    try:
        return loader(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 're,im', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise UsageError(f"bad complex literal {text!r}: {exc}") from exc


def _parse_subspace(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad subspace list {text!r}: {exc}") from exc


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_moments(args) -> int:
    target = _load(args.target, load_matrix)
    subspace = _parse_subspace(args.subspace) if args.subspace else None
    if args.kraus:
        if subspace is not None:
            raise UsageError("--subspace is not supported with a Kraus map")
        kmap = _load(args.kraus, load_kraus)
        try:
            mean = kraus_avg_fidelity(kmap, target)
        except ValueError as exc:
            raise InvariantViolation(
                f"{args.target} / {args.kraus}: {exc}"
            ) from exc
        _emit(
            {
                "n_eff": kmap.dim,
                "mean": mean,
                "method": "closed_form",
                "trace_preserving": kmap.trace_preserving,
            }
        )
        return EXIT_OK
    actual = _load(args.actual, load_matrix)
    try:
        spec = GateSpec(target=target, actual=actual, subspace=subspace)
    except ValueError as exc:
        raise InvariantViolation(f"target {args.target}: {exc}") from exc
    _emit(gate_moments(spec).as_dict())
    return EXIT_OK


def _cmd_dist(args) -> int:
    if args.matrix:
        m = _load(args.matrix, load_matrix)
        spectrum = eig2_normal(m)
    else:
        if not args.lambda1:
            raise UsageError("--lambda1 is required together with --lambda0")
        spectrum = QubitSpectrum.ordered(
            _parse_complex(args.lambda0), _parse_complex(args.lambda1)
        )
    dist = normal_pdf(spectrum)
    meta = dist.as_dict()
    meta["moments"] = quadrature_moments(dist).as_dict()
    write_density_csv(dist, args.grid, args.out)
    meta["csv"] = args.out
    _emit(meta)
    return EXIT_OK


def _cmd_sample(args) -> int:
    m = _load(args.matrix, load_matrix)
    value_range = None
    if m.shape[0] == 2:
        try:
            value_range = normal_pdf(eig2_normal(m)).support()
        except ValueError:
            value_range = None
    hist = mc_histogram(
        m, args.bins, args.samples, args.seed, workers=args.workers,
        value_range=value_range,
    )
    est = mc_moment(m, 1, args.samples, args.seed, workers=args.workers)
    csv_path = f"{args.out}.csv"
    json_path = f"{args.out}.json"
    manifest_path = f"{args.out}.manifest.json"
    write_histogram_csv(hist, csv_path)
    est_obj = asdict(est)
    Path(json_path).write_text(json.dumps(est_obj, indent=2), encoding="utf-8")
    manifest = RunManifest(
        command=" ".join(sys.argv) if sys.argv else "sample",
        inputs=[args.matrix],
        seed=args.seed,
        versions=f"gatefid {__version__}",
        outputs=[csv_path, json_path, manifest_path],
    )
    Path(manifest_path).write_text(
        json.dumps(asdict(manifest), indent=2), encoding="utf-8"
    )
    _emit(est_obj)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = run_checks(level=args.level, seed=args.seed)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2), encoding="utf-8")
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _cmd_optimize(args) -> int:
    with open(args.problem, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"cannot parse {args.problem}: {exc}") from exc
    try:
        family_name = obj["family"]
        target = _matrix_from_problem(obj["target"], args.problem)
        objective = Objective(
            kind=obj["objective"]["kind"], k=float(obj["objective"].get("k", 0.0))
        )
        config = OptimizeConfig(
            start=tuple(float(x) for x in obj["start"]),
            box=tuple((float(lo), float(hi)) for lo, hi in obj["box"]),
            max_evals=obj.get("max_evals"),
            x_tol=float(obj.get("x_tol", 1e-8)),
            f_tol=float(obj.get("f_tol", 1e-10)),
            record_trace=bool(args.trace_out),
        )
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed problem file {args.problem}: {exc}") from exc
    try:
        family = build_family(family_name, target, subspace=obj.get("subspace"))
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    result = optimize(family, objective, config)
    if args.trace_out:
        write_trace_csv(result.trace, args.trace_out)
    _emit(
        {
            "best_params": [float(x) for x in result.best_params],
            "best_value": result.best_value,
            "evaluations": result.evaluations,
            "converged": result.converged,
        }
    )
    return EXIT_OK


def _matrix_from_problem(obj, path: str) -> np.ndarray:
    try:
        return matrix_from_obj(obj)
    except ValueError as exc:
        raise UsageError(f"bad target matrix in {path}: {exc}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="gatefid", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="closed-form fidelity moments")
    p.add_argument("--target", required=True, help="target unitary (matrix JSON)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--actual", help="applied map (matrix JSON)")
    group.add_argument("--kraus", help="applied channel (Kraus JSON)")
    p.add_argument("--subspace", help="comma-separated basis indices")
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("dist", help="closed-form qubit fidelity distribution")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--matrix", help="2x2 normal comparison matrix (JSON)")
    group.add_argument("--lambda0", help="first eigenvalue as re,im")
    p.add_argument("--lambda1", help="second eigenvalue as re,im")
    p.add_argument("--grid", type=int, default=512, help="CSV grid size")
    p.add_argument("--out", default="dist_pdf.csv", help="density CSV path")
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("sample", help="Monte-Carlo fidelity histogram")
    p.add_argument("--matrix", required=True, help="comparison matrix (JSON)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("verify", help="cross-module consistency checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--seed", type=int, default=20260810)
    p.add_argument("--out", help="write the JSON report here as well")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("optimize", help="tune a gate family from a problem file")
    p.add_argument("problem", help="problem JSON path")
    p.add_argument("--trace-out", help="write the evaluation trace CSV here")
    p.set_defaults(func=_cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
