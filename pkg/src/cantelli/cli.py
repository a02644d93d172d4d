"""Command-line front end.

Instance files are JSON objects::

    {
      "sigma": [[1, 0], [0, 1]],          # full, lower-triangular rows, or a scalar s2 (s2 * I)
      "b": [1, 1],                         # vector, or a symmetric matrix for psd cones
      "cone": {"type": "orthant", "dim": 2},
      "options": {"tol": {"kkt_tol": 1e-9}, "seed": 0, "samples": 100000}
    }

Cone objects are ``{"type": "orthant"|"generators"|"inequalities"|"psd"|"soc",
"dim": n, "data": [[...], ...]}``; ``data`` lists generators or inequality
normals (rows), and for ``psd`` ``dim`` is the matrix order. Instead of
``b``/``cone`` an instance may give ``"rows": [[...], ...]`` (non-negative),
which asks for the bound on P(X >= 0, rows @ X >= 1).

Exit codes: 0 success, 2 vacuous bound, 3 failed Monte Carlo check,
1 I/O or unexpected error, 64 malformed input, 65 numerical precondition failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, bounds, linalg, stats
from . import montecarlo as mc
from .blocker import ConeSlice, blocker_of_polyhedron, feasibility
from .cones import Cone, PositiveSemidefinite, cone_from_json
from .config import DEFAULT, Tolerances
from .errors import BadAlpha, CantelliError, SchemaError
from .optimize import brute_force_search, minimize_over_region

EXIT_OK, EXIT_ERROR, EXIT_VACUOUS, EXIT_FAIL = 0, 1, 2, 3
EXIT_SCHEMA, EXIT_NUMERIC = 64, 65


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    sigma: np.ndarray
    b: np.ndarray | None
    cone: Cone | None
    rows: np.ndarray | None
    options: dict

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]


# ---------------------------------------------------------------- parsing


def _load_json(path: str):
    text = Path(path).read_text()
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def _numbers(obj, what: str) -> np.ndarray:
    try:
        a = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{what} must be numeric and rectangular") from None
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{what} has non-finite entries")
    return a


def parse_sigma(obj, dim: int | None, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Full matrix, ragged lower triangle, or scalar variance times the identity."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        if dim is None:
            raise SchemaError("scalar sigma needs a dimension from b, cone or rows")
        return float(obj) * np.eye(dim)
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError("sigma must be a number or a list of rows")
    lengths = [len(r) for r in obj]
    if lengths == list(range(1, len(obj) + 1)) and len(obj) > 1:
        S = linalg.from_lower_triangle([_numbers(r, "sigma").tolist() for r in obj])
    elif all(n == len(obj) for n in lengths):
        S = _numbers(obj, "sigma")
    else:
        raise SchemaError("sigma rows must be all full length or lower-triangular")
    try:
        return linalg.as_symmetric(S, tol.symmetry)
    except CantelliError as e:
        raise SchemaError(f"sigma: {e}") from None


def parse_instance(obj) -> ProblemInstance:
    if not isinstance(obj, dict):
        raise SchemaError("instance must be a JSON object")
    unknown = set(obj) - {"sigma", "b", "cone", "rows", "options"}
    if unknown:
        raise SchemaError(f"unknown instance keys {sorted(unknown)}")
    if "sigma" not in obj:
        raise SchemaError("instance needs 'sigma'")
    options = obj.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    if "rows" in obj:
        if "b" in obj or "cone" in obj:
            raise SchemaError("give either 'rows' or 'b'/'cone', not both")
        rows = _numbers(obj["rows"], "rows")
        if rows.ndim != 2 or rows.size == 0:
            raise SchemaError("rows must be a non-empty list of rows")
        sigma = parse_sigma(obj["sigma"], rows.shape[1])
        if sigma.shape[0] != rows.shape[1]:
            raise SchemaError(f"sigma order {sigma.shape[0]} does not match row width {rows.shape[1]}")
        return ProblemInstance(sigma, None, None, rows, options)
    if "b" not in obj:
        raise SchemaError("instance needs 'b' (or 'rows')")
    b = _numbers(obj["b"], "b")
    cone = cone_from_json(obj["cone"]) if "cone" in obj else None
    if b.ndim == 2:
        if cone is None:
            cone = PositiveSemidefinite(b.shape[0])
        if not isinstance(cone, PositiveSemidefinite):
            raise SchemaError("a matrix-valued b requires a psd cone")
        try:
            b = linalg.svec(linalg.as_symmetric(b))
        except CantelliError as e:
            raise SchemaError(f"b: {e}") from None
    elif b.ndim != 1 or b.size == 0:
        raise SchemaError("b must be a non-empty vector or a square matrix")
    if cone is None:
        raise SchemaError("vector b needs a 'cone'")
    if b.size != cone.dim:
        raise SchemaError(f"b has dimension {b.size}, cone has {cone.dim}")
    sigma = parse_sigma(obj["sigma"], cone.dim)
    if sigma.shape[0] != cone.dim:
        raise SchemaError(f"sigma order {sigma.shape[0]} does not match cone dimension {cone.dim}")
    return ProblemInstance(sigma, b, cone, None, options)


def _tolerances(inst_options: dict, overrides: list[str]) -> Tolerances:
    merged = dict(inst_options.get("tol", {}))
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise SchemaError(f"--tol expects KEY=VALUE, got {item!r}")
        merged[key.strip()] = value
    try:
        return DEFAULT.updated(merged)
    except (KeyError, ValueError) as e:
        raise SchemaError(f"bad tolerance override: {e}") from None


def _option(args, inst: ProblemInstance, name: str, default):
    value = getattr(args, name, None)
    if value is None:
        value = inst.options.get(name, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{name} must be an integer")
    return value


# ---------------------------------------------------------------- reporting


def _document(command: str, source: str, text: str, **sections) -> dict:
    doc = {
        "command": command,
        "input": {"path": source, "sha256": hashlib.sha256(text.encode()).hexdigest()},
        "version": __version__,
    }
    doc.update({k: v for k, v in sections.items() if v is not None})
    notes = list(doc.get("report", {}).get("notes", [])) + list(doc.get("stats", {}).get("notes", []))
    doc["notes"] = notes + sections.get("extra_notes", [])
    doc.pop("extra_notes", None)
    return doc


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(doc, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    for key, value in doc.items():
        if isinstance(value, dict):
            out.write(f"{key}:\n")
            for k, v in value.items():
                if k != "notes":
                    out.write(f"  {k}: {v}\n")
        elif key == "notes":
            for note in value:
                out.write(f"note: {note}\n")
        else:
            out.write(f"{key}: {value}\n")


def _bound_for(inst: ProblemInstance, cfg: Tolerances) -> bounds.BoundReport:
    if inst.rows is not None:
        return bounds.tail_bound_set(inst.sigma, inst.rows, cfg)
    closed = bool(inst.options.get("closed_form", True))
    return bounds.tail_bound_cone(inst.sigma, inst.b, inst.cone, cfg, use_closed_form=closed)


# ---------------------------------------------------------------- commands


def cmd_bound(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    inst = parse_instance(obj)
    cfg = _tolerances(inst.options, args.tol)
    report = _bound_for(inst, cfg)
    code = EXIT_OK if report.feasible else EXIT_VACUOUS
    return _document("bound", args.instance, text, report=report.to_json()), code


def cmd_validate(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    inst = parse_instance(obj)
    cfg = _tolerances(inst.options, args.tol)
    seed = _option(args, inst, "seed", 0)
    n = _option(args, inst, "samples", 100_000)
    if n < 1:
        raise SchemaError("samples must be positive")
    report = _bound_for(inst, cfg)
    X = mc.sample_gaussian(inst.sigma, n, seed)
    if inst.rows is not None:
        est = mc.estimate_set_tail(X, inst.rows, seed)
    else:
        est = mc.estimate_tail(X, inst.b, inst.cone, seed)
    extra = []
    if report.feasible:
        check = mc.check_bound(est, report.bound).value
        code = EXIT_OK if check == mc.Check.PASS.value else EXIT_FAIL
    else:
        check = None
        code = EXIT_VACUOUS
        extra.append("bound is vacuous; Monte Carlo check skipped")
    doc = _document("validate", args.instance, text, report=report.to_json(),
                    estimate=est.to_json(), extra_notes=extra)
    doc["check"] = check
    return doc, code


def cmd_test(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    if not isinstance(obj, dict) or not {"y", "mu", "sigma"} <= set(obj):
        raise SchemaError("test input needs 'y', 'mu' and 'sigma'")
    mu = _numbers(obj["mu"], "mu")
    y = _numbers(obj["y"], "y")
    if mu.ndim != 1 or y.shape != mu.shape:
        raise SchemaError("y and mu must be vectors of equal length")
    sigma = parse_sigma(obj["sigma"], mu.size)
    if sigma.shape[0] != mu.size:
        raise SchemaError(f"sigma order {sigma.shape[0]} does not match mean length {mu.size}")
    alpha = args.alpha if args.alpha is not None else obj.get("alpha", 0.05)
    cfg = stats.SignificanceConfig(float(alpha))
    rep = stats.test_large(y, mu, sigma, cfg)
    return _document("test", args.instance, text, stats=rep.to_json()), EXIT_OK


def _parse_matching(spec: str) -> list[tuple[int, int]]:
    pairs = []
    for item in spec.split(","):
        a, sep, c = item.strip().partition("-")
        try:
            pairs.append((int(a), int(c)))
        except ValueError:
            raise SchemaError(f"matching edge {item!r} must look like 'i-j'") from None
        if not sep:
            raise SchemaError(f"matching edge {item!r} must look like 'i-j'")
    return pairs


def cmd_graph(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise SchemaError("graph input needs 'n' and 'edges'")
    if not isinstance(obj["n"], int) or obj["n"] < 1:
        raise SchemaError("'n' must be a positive integer")
    try:
        edges = tuple((int(i), int(j)) for i, j in obj["edges"])
    except (TypeError, ValueError):
        raise SchemaError("edges must be pairs of vertex indices") from None
    if args.matching is not None:
        matching = _parse_matching(args.matching)
    elif "matching" in obj:
        matching = [tuple(e) for e in obj["matching"]]
    else:
        raise SchemaError("a perfect matching is required (--matching or 'matching' key)")
    sigma2 = args.sigma2 if args.sigma2 is not None else float(obj.get("sigma2", 1.0))
    report = bounds.graph_matching_bound(bounds.Graph(obj["n"], edges), sigma2, matching)
    return _document("graph", args.instance, text, report=report.to_json()), EXIT_OK


def cmd_blocker(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    inst = parse_instance(obj)
    cfg = _tolerances(inst.options, args.tol)
    if inst.rows is not None:
        region = blocker_of_polyhedron(inst.rows)
        return _document("blocker", args.instance, text,
                         region=dict(region.describe(), feasible=True)), EXIT_OK
    verdict = feasibility(inst.b, inst.cone, cfg.membership)
    desc = ConeSlice(inst.cone.dual(), inst.b).describe()
    desc["feasible"] = verdict.feasible
    desc["witness"] = None if verdict.witness is None else verdict.witness.tolist()
    return _document("blocker", args.instance, text, region=desc), EXIT_OK if verdict.feasible else EXIT_VACUOUS


def cmd_oracle(args) -> tuple[dict, int]:
    obj, text = _load_json(args.instance)
    inst = parse_instance(obj)
    cfg = _tolerances(inst.options, args.tol)
    seed = _option(args, inst, "seed", 0)
    budget = _option(args, inst, "samples", 100_000)
    if inst.rows is not None:
        region = blocker_of_polyhedron(inst.rows)
    else:
        if not feasibility(inst.b, inst.cone, cfg.membership).feasible:
            rep = bounds.vacuous_report("-b lies in C: the blocker is empty")
            return _document("oracle", args.instance, text, report=rep.to_json()), EXIT_VACUOUS
        region = ConeSlice(inst.cone.dual(), inst.b)
    opt = minimize_over_region(inst.sigma, region, cfg)
    brute = brute_force_search(inst.sigma, region, budget, seed)
    oracle = {
        "optimizer_bound": opt.bound,
        "brute_force_bound": brute.bound,
        "excess": brute.bound - opt.bound,
        "optimizer_u": opt.u_star.tolist(),
        "brute_force_u": brute.u_star.tolist(),
        "kkt_residual": opt.kkt_residual,
        "budget": budget,
        "seed": seed,
    }
    return _document("oracle", args.instance, text, oracle=oracle), EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cantelli", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help="override a numerical tolerance; repeatable")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, input_help="instance JSON file"):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("instance", help=input_help)
        sp.set_defaults(func=func)
        return sp

    add("bound", cmd_bound, "compute the sharp tail bound")
    v = add("validate", cmd_validate, "compare the bound with a Gaussian Monte Carlo estimate")
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int)
    t = add("test", cmd_test, "largeness test of an observation", "JSON file with y, mu, sigma")
    t.add_argument("--alpha", type=float)
    g = add("graph", cmd_graph, "bound for a graph incidence system", "edge-list JSON file")
    g.add_argument("--sigma2", type=float)
    g.add_argument("--matching", help="perfect matching as 'i-j,k-l,...' (0-based)")
    add("blocker", cmd_blocker, "describe the blocker region")
    o = add("oracle", cmd_oracle, "cross-check the optimizer with random search")
    o.add_argument("--samples", type=int)
    o.add_argument("--seed", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        doc, code = args.func(args)
    except (SchemaError, BadAlpha) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except CantelliError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    doc["wall_time"] = time.perf_counter() - start
    _emit(doc, args.format, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
