"""Command-line front end: JSON problem files in, JSON (or CSV) reports out.

Exit codes: 0 success, 2 input error, 3 numeric non-convergence,
4 violated exact identity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from dataclasses import replace
from fractions import Fraction
from importlib import resources

import jsonschema

from . import beta as beta_mod
from .invariants import IdentityViolation, report
from .lattice import IntersectionLattice, LatticeError, restricted_volume, volume, zariski
from .model import ModelError, build_model, divisorial_point, model_to_json
from .optimize import ConvergenceError, UnboundedError
from .plfun import VerticalDivisor, envelope, ma_envelope, mass_sum_check, orthogonality_defect
from .rational import fmt, to_fraction

logger = logging.getLogger("kstab")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IDENTITY = 0, 2, 3, 4

INPUT_SCHEMA = {
    "zariski": "lattice_input",
    "volume": "lattice_input",
    "restricted-volume": "restricted_input",
    "build-model": "model_script",
    "envelope": "divisor_input",
    "ma-measure": "divisor_input",
    "orthogonality": "divisor_input",
    "invariants": "divisor_input",
    "beta": "beta_input",
    "solve-ma": "solve_input",
    "stability-scan": "scan_input",
}


class InputError(ValueError):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("kstab").joinpath("schemas", name).read_text()
    return json.loads(text)


def _validator(schema_file: str, ref: str):
    doc = load_schema(schema_file)
    return jsonschema.Draft202012Validator({"$ref": f"#/$defs/{ref}", "$defs": doc["$defs"]})


def validate_input(command: str, doc) -> None:
    errors = sorted(_validator("input.schema.json", INPUT_SCHEMA[command]).iter_errors(doc), key=str)
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {e.message}")


def validate_output(command: str, doc) -> None:
    """Raise ``jsonschema.ValidationError`` if a report does not match its schema."""
    ref = "error" if isinstance(doc, dict) and "error" in doc else command
    _validator("output.schema.json", ref).validate(doc)


# -- command implementations -------------------------------------------------


def _lattice_and_class(doc):
    L = IntersectionLattice.from_json(doc["lattice"])
    u = [to_fraction(x) for x in doc["class"]]
    if len(u) != L.rank:
        raise InputError(f"class has length {len(u)}, lattice rank is {L.rank}")
    return L, u


def _curve_index(L, curve) -> int:
    if isinstance(curve, int):
        if not 0 <= curve < len(L.test_curves):
            raise InputError(f"test curve index {curve} out of range")
        return curve
    return L.curve_index(curve)


def cmd_zariski(doc, args):
    L, u = _lattice_and_class(doc)
    z = zariski(L, u)
    vol = volume(L, u)
    return {
        "is_pseff": z.is_pseff,
        "is_big": z.is_big,
        "positive": None if z.positive is None else z.positive.to_json(),
        "negative": [{"curve": L.test_curves[k][0], "index": k, "sigma": fmt(s)} for k, s in z.negative],
        "volume": fmt(vol),
        "diagnostic": z.diagnostic,
    }


def cmd_volume(doc, args):
    L, u = _lattice_and_class(doc)
    vol = volume(L, u)
    return {"volume": fmt(vol), "is_big": vol > 0}


def cmd_restricted_volume(doc, args):
    L, u = _lattice_and_class(doc)
    k = _curve_index(L, doc["curve"])
    return {"curve": L.test_curves[k][0], "restricted_volume": fmt(restricted_volume(L, u, k))}


def cmd_build_model(doc, args):
    model = build_model(doc)
    out = model_to_json(model)
    points = []
    for i in range(len(model.components)):
        p = divisorial_point(model, i)
        points.append(
            {
                "component": p.label,
                "center": p.center,
                "b": p.b,
                "m": fmt(p.m),
                "scaling": fmt(p.scaling),
                "log_disc_XP1": fmt(p.log_disc_XP1),
            }
        )
    out["points"] = points
    return out


def _divisor(doc) -> VerticalDivisor:
    model = build_model(doc["model"])
    return VerticalDivisor(model, doc["coeffs"])


def cmd_envelope(doc, args):
    env = envelope(_divisor(doc))
    return {
        "shift": env.shift,
        "values": [fmt(v) for v in env.values],
        "sigma": [fmt(s) for s in env.sigma],
        "sup": fmt(env.sup),
        "positive": env.positive.to_json(),
    }


def cmd_ma_measure(doc, args):
    mu = ma_envelope(_divisor(doc))
    out = mu.to_json()
    out["entropy"] = fmt(mu.entropy())
    return out


def cmd_orthogonality(doc, args):
    D = _divisor(doc)
    defect, mass = orthogonality_defect(D), mass_sum_check(D)
    if defect != 0 or mass != 0:
        raise IdentityViolation(f"orthogonality defect {defect}, mass-sum defect {mass}")
    return {"orthogonality_defect": fmt(defect), "mass_sum_defect": fmt(mass)}


def cmd_invariants(doc, args):
    return report(_divisor(doc)).to_json()


def _apply_tol(problem, tol):
    if tol is None:
        return problem
    return replace(problem, quad=replace(problem.quad, tol=tol), opt=replace(problem.opt, tol=tol))


def cmd_beta(doc, args):
    problem = _apply_tol(beta_mod.problem_from_json(doc), args.tol)
    return beta_mod.beta(problem).to_json()


def cmd_solve_ma(doc, args):
    model = build_model(doc["model"])
    opt = beta_mod.OptConfig(**doc.get("opt", {}))
    if args.tol is not None:
        opt = replace(opt, tol=args.tol)
    t_star, mu = beta_mod.solve_ma_divisorial(model, doc["xi"], opt)
    return {"t_star": [fmt(t) for t in t_star], "measure": mu.to_json()}


def random_grid(n_atoms: int, count: int, seed: int, denominator: int = 1000) -> list:
    """``count`` interior points of the simplex with rational coordinates."""
    rng = random.Random(seed)
    grid = []
    while len(grid) < count:
        cuts = sorted(rng.sample(range(1, denominator), n_atoms - 1)) if n_atoms > 1 else []
        edges = [0] + cuts + [denominator]
        grid.append([Fraction(b - a, denominator) for a, b in zip(edges, edges[1:])])
    return grid


def cmd_stability_scan(doc, args):
    pdoc = dict(doc["problem"])
    n = len(pdoc["valuations"])
    grid_doc = doc["grid"]
    if isinstance(grid_doc, dict):
        grid = random_grid(n, grid_doc["random"], args.seed, grid_doc.get("denominator", 1000))
    else:
        grid = [[to_fraction(x) for x in xi] for xi in grid_doc]
    if not grid:
        raise InputError("empty grid")
    if any(len(xi) != n for xi in grid):
        raise InputError(f"every grid point needs {n} masses")
    pdoc["xi"] = [fmt(x) for x in grid[0]]
    problem = _apply_tol(beta_mod.problem_from_json(pdoc), args.tol)
    return beta_mod.stability_scan(problem, grid)


COMMANDS = {
    "zariski": cmd_zariski,
    "volume": cmd_volume,
    "restricted-volume": cmd_restricted_volume,
    "build-model": cmd_build_model,
    "envelope": cmd_envelope,
    "ma-measure": cmd_ma_measure,
    "orthogonality": cmd_orthogonality,
    "invariants": cmd_invariants,
    "beta": cmd_beta,
    "solve-ma": cmd_solve_ma,
    "stability-scan": cmd_stability_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kstab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("input", help="JSON input file, or - for stdin")
    parser.add_argument("-o", "--output", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=int, default=0, help="seed for random scan grids")
    parser.add_argument("--tol", type=float, default=None, help="override quad/opt tolerances")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _scan_csv(scan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(scan.rows[0][0]) if scan.rows else (len(scan.failures[0][0]) if scan.failures else 0)
    w.writerow([f"xi_{i}" for i in range(n)] + ["beta", "energy", "ratio", "error"])
    for xi, b, e, r in scan.rows:
        w.writerow([fmt(x) for x in xi] + [f"{b:.12g}", f"{e:.12g}", f"{r:.12g}", ""])
    for xi, msg in scan.failures:
        w.writerow([fmt(x) for x in xi] + ["", "", "", msg])
    return buf.getvalue()


def _read_input(path: str):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    if not text.strip():
        raise InputError("input file is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    code, text = EXIT_OK, ""
    try:
        if args.format == "csv" and args.command != "stability-scan":
            raise InputError("CSV output is only available for stability-scan")
        doc = _read_input(args.input)
        validate_input(args.command, doc)
        result = COMMANDS[args.command](doc, args)
        if args.command == "stability-scan":
            text = _scan_csv(result) if args.format == "csv" else None
            result = result.to_json()
        validate_output(args.command, result)
        text = text or _dump(result)
    except IdentityViolation as exc:
        code, text = EXIT_IDENTITY, _dump({"error": {"kind": "identity", "detail": str(exc)}})
    except (ConvergenceError, UnboundedError, beta_mod.MeasureMismatchError) as exc:
        code, text = EXIT_NUMERIC, _dump({"error": {"kind": "numeric", "detail": str(exc)}})
    except (InputError, LatticeError, ModelError, beta_mod.NotBigError, ValueError, KeyError, TypeError) as exc:
        code, text = EXIT_INPUT, _dump({"error": {"kind": "input", "detail": str(exc)}})
    except ArithmeticError as exc:
        code, text = EXIT_NUMERIC, _dump({"error": {"kind": "numeric", "detail": str(exc)}})
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code:
        logger.error("%s failed with exit code %d", args.command, code)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
