"""Command-line interface: ``elmap {fit,sweep,grid,metrics}``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bench import run_init_weight_grid, run_n_sweep
from .corpus import SHAPES, bundled_corpus, load_lasa, shape
from .initialization import InitMethod
from .metrics import (
    angular_dissimilarity,
    discrete_frechet,
    evaluate,
    frechet_curvature,
    total_jerk,
)
from .pipeline import reproduce
from .solver import SolverError
from .trajectory import DemonstrationSet, Trajectory, load_csv, resample
from .weights import WeightScheme, constraints_from_json

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BAD_CONFIG = 3
EXIT_SOLVER = 4


class CLIError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", message)


def _atomic_write(files: dict[Path, str]) -> None:
    """Write all files to temporaries first, then rename them into place."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def _emit(files: dict[Path, str], fallback: str) -> None:
    if files:
        _atomic_write(files)
    else:
        sys.stdout.write(fallback)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _dump(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty node-count list")
    return values


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite non-negative number, got {text!r}")
    return value


def _add_model_flags(p: argparse.ArgumentParser, n_type=_positive_int, n_default=100) -> None:
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, default=0.01, help="stretching stiffness")
    p.add_argument("--mu", type=_nonneg_float, default=0.001, help="bending stiffness")
    p.add_argument("--n", type=n_type, default=n_default, help="number of nodes")


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", default=[], help="demonstration CSV (repeatable; one corpus item each)")
    p.add_argument("--shape", action="append", default=[], choices=sorted(SHAPES), help="bundled shape (repeatable)")
    p.add_argument("--lasa", help="directory of LASA-style CSV exports, one subdirectory per shape")
    p.add_argument("--repeats", type=int, default=3, help="timing repetitions (median is reported)")
    p.add_argument("--out", help="output path prefix; writes <out>.csv and <out>.json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="elmap", description="Elastic-map trajectory reproduction")
    parser.add_argument("--version", action="version", version=f"elmap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit an elastic map to one or more demonstrations")
    p.add_argument("--input", action="append", default=[], help="demonstration CSV (repeatable)")
    p.add_argument("--shape", choices=sorted(SHAPES), help="use a bundled shape instead of --input")
    _add_model_flags(p)
    p.add_argument("--init", default="distance", help="naive | distance | dp")
    p.add_argument("--weighting", default="curvature", help="uniform | curvature | jerk")
    p.add_argument("--constraints", help="JSON list of {position|index, point, weight?}, or @file")
    p.add_argument("--tol", type=_nonneg_float, default=1e-8, help="convergence tolerance (relative to data extent)")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--resample", type=_positive_int, help="also emit the reproduction resampled to this many points")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("sweep", help="node-count sweep: fit time and Frechet versus N")
    _add_model_flags(p, n_type=_int_list, n_default=[5, 10, 25, 50, 100, 200])
    p.add_argument("--init", default="distance")
    p.add_argument("--weighting", default="curvature")
    _add_corpus_flags(p)

    p = sub.add_parser("grid", help="initialization x weighting benchmark")
    _add_model_flags(p)
    p.add_argument("--normalize", action="store_true", help="rescale each metric column to max 1")
    _add_corpus_flags(p)

    p = sub.add_parser("metrics", help="compare two trajectories")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--out")
    return parser


def _load(path: str) -> Trajectory:
    try:
        return load_csv(path)
    except (OSError, ValueError) as exc:
        raise CLIError(EXIT_BAD_INPUT, "bad_input", f"{path}: {exc}") from None


def _parse_choice(parse, value, flag):
    try:
        return parse(value)
    except ValueError as exc:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", f"{flag}: {exc}") from None


def _load_constraints(value: str | None):
    if not value:
        return []
    text = value
    if value.startswith("@"):
        try:
            text = Path(value[1:]).read_text()
        except OSError as exc:
            raise CLIError(EXIT_BAD_INPUT, "bad_input", f"constraints file: {exc}") from None
    try:
        return constraints_from_json(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", f"--constraints: {exc}") from None


def _corpus(args) -> dict[str, DemonstrationSet]:
    corpus: dict[str, DemonstrationSet] = {}
    for path in args.input:
        corpus[path] = DemonstrationSet((_load(path),))
    for name in args.shape:
        corpus[name] = DemonstrationSet((shape(name),))
    if args.lasa:
        try:
            corpus.update(load_lasa(args.lasa))
        except (OSError, ValueError) as exc:
            raise CLIError(EXIT_BAD_INPUT, "bad_input", f"--lasa: {exc}") from None
    return corpus or bundled_corpus()


def _prefix_files(out: str | None, suffixes: dict[str, str]) -> dict[Path, str]:
    if not out:
        return {}
    base = Path(out)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    return {base.parent / f"{base.name}{suffix}": text for suffix, text in suffixes.items()}


def cmd_fit(args) -> int:
    init = _parse_choice(InitMethod.parse, args.init, "--init")
    weighting = _parse_choice(WeightScheme.parse, args.weighting, "--weighting")
    if args.max_iters < 1:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", "--max-iters must be at least 1")
    if args.shape and args.input:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", "use either --shape or --input, not both")
    if args.shape:
        demos = DemonstrationSet((shape(args.shape),))
    elif args.input:
        trajs = [_load(p) for p in args.input]
        try:
            demos = DemonstrationSet.from_arrays(trajs)
        except ValueError as exc:
            raise CLIError(EXIT_BAD_INPUT, "bad_input", str(exc)) from None
    else:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", "fit needs --input or --shape")
    constraints = _load_constraints(args.constraints)
    config = {
        "command": "fit",
        "inputs": list(args.input),
        "shape": args.shape,
        "N": args.n,
        "lambda": args.lam,
        "mu": args.mu,
        "init": init.value,
        "weighting": weighting.value,
        "constraints": [c.to_json() for c in constraints],
        "tol": args.tol,
        "max_iters": args.max_iters,
        "format": args.format,
        "resample": args.resample,
    }
    M = demos.m * demos.T
    if args.n > M:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", f"--n {args.n} exceeds the {M} data points")
    try:
        rep = reproduce(
            demos,
            n_nodes=args.n,
            lam=args.lam,
            mu=args.mu,
            init=init,
            weighting=weighting,
            constraints=constraints,
            tol=args.tol,
            max_iter=args.max_iters,
        )
    except SolverError as exc:
        raise CLIError(EXIT_SOLVER, "solver_failure", str(exc)) from None
    except ValueError as exc:
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", str(exc)) from None

    reference = demos.mean()
    try:
        metrics = evaluate(rep.nodes, reference).to_json()
    except ValueError:
        metrics = _lenient_metrics(rep.nodes, reference.points)
    doc = {
        "config": config,
        "nodes": rep.nodes.tolist(),
        "report": rep.report.to_json(),
        "metrics": metrics,
    }
    if args.resample:
        doc["trajectory"] = resample(Trajectory(rep.nodes), args.resample).points.tolist()

    if args.format == "json":
        text = _dump(doc)
    else:
        header = ",".join(f"x{k}" for k in range(rep.nodes.shape[1]))
        text = header + "\n" + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in rep.nodes)
    files = {Path(args.out): text} if args.out else {}
    if args.out and args.format == "csv":
        # the CSV holds only nodes; config and reports go beside it
        files[Path(args.out).with_suffix(".json")] = _dump({k: v for k, v in doc.items() if k != "nodes"})
    _emit(files, text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    init = _parse_choice(InitMethod.parse, args.init, "--init")
    weighting = _parse_choice(WeightScheme.parse, args.weighting, "--weighting")
    if any(n < 2 for n in args.n) or any(b <= a for a, b in zip(args.n, args.n[1:])):
        raise CLIError(EXIT_BAD_CONFIG, "invalid_config", "--n must be strictly increasing values >= 2")
    corpus = _corpus(args)
    result = run_n_sweep(corpus, args.n, args.lam, args.mu, init, weighting, repeats=args.repeats)
    result.config["corpus"] = list(corpus)
    csv_text = result.to_csv()
    files = _prefix_files(
        args.out,
        {
            ".csv": csv_text,
            ".json": _dump(result.to_json()),
            "_time.csv": result.series_csv("time_s"),
            "_frechet.csv": result.series_csv("frechet"),
        },
    )
    _emit(files, csv_text)
    return EXIT_OK


def cmd_grid(args) -> int:
    corpus = _corpus(args)
    result = run_init_weight_grid(corpus, args.n, args.lam, args.mu, repeats=args.repeats)
    result.config["corpus"] = list(corpus)
    if args.normalize:
        result = result.normalize()
    csv_text = result.to_csv()
    files = _prefix_files(args.out, {".csv": csv_text, ".json": _dump(result.to_json())})
    _emit(files, csv_text)
    return EXIT_OK


def _lenient_metrics(P: np.ndarray, Q: np.ndarray) -> dict:
    """Every metric that is defined for the given lengths; the rest are null."""
    out = {}
    for name, fn in (
        ("frechet", lambda: discrete_frechet(P, Q)),
        ("frechet_curvature", lambda: frechet_curvature(P, Q)),
        ("angular", lambda: angular_dissimilarity(P, Q)),
        ("total_jerk", lambda: total_jerk(P)),
    ):
        try:
            out[name] = fn()
        except ValueError:
            out[name] = None
    out["compute_time"] = 0.0
    return out


def cmd_metrics(args) -> int:
    a, b = _load(args.path_a), _load(args.path_b)
    if a.dim != b.dim:
        raise CLIError(EXIT_BAD_INPUT, "bad_input", f"dimension mismatch: {a.dim} vs {b.dim}")
    doc = {
        "config": {"command": "metrics", "path_a": args.path_a, "path_b": args.path_b},
        "metrics": _lenient_metrics(a.points, b.points),
    }
    text = _dump(doc)
    _emit({Path(args.out): text} if args.out else {}, text)
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "sweep": cmd_sweep, "grid": cmd_grid, "metrics": cmd_metrics}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CLIError as exc:
        record = {"error": {"code": exc.code, "kind": exc.kind, "message": str(exc)}}
        sys.stderr.write(json.dumps(record) + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
