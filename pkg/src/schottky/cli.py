"""Command-line front end: ``schottky <subcommand> --input spec.json ...``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

from .errors import ConvergenceError, ParseError, SchottkyError
from .groups import SchottkyGroupSpec, orbit_levels, spec_from_dict, validate_classical
from .hexagon import inequality_suite
from .measures import DEFAULT_MARGIN, bounds_report, dimension_bracket, pressure_exponent, sector_measures
from .moebius import INF, ORIGIN, MoebiusMap, loxodromic_data
from .periods import period_matrix
from .words import word_to_str

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3


def load_group_spec(path) -> SchottkyGroupSpec:
    """Read and validate a group-spec JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from exc
    return spec_from_dict(data)


def _reject_constant(name: str):
    raise ParseError(f"non-finite number {name} not allowed")


def _hash(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


# --- limit set ------------------------------------------------------------------


def limit_set_rows(spec: SchottkyGroupSpec, N: int) -> list:
    """(re, im, word) for the attracting fixed point of every reduced word of length 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    rows = []
    for n, (words, mats) in enumerate(orbit_levels(spec, N)):
        if n == 0:
            continue
        for w, m in zip(words, mats):
            p = loxodromic_data(MoebiusMap.from_matrix(m)).fixed_plus
            word = word_to_str(tuple(int(x) for x in w))
            if p is INF:
                rows.append(("inf", "inf", word))
            else:
                rows.append((repr(p.real), repr(p.imag), word))
    return rows


def emit_limit_set(spec: SchottkyGroupSpec, N: int, out) -> int:
    """Write the limit-set sample as CSV (re,im,word) to a path or stream; returns the row count."""
    rows = limit_set_rows(spec, N)
    text = _csv(["re", "im", "word"], rows)
    _write(text, out)
    return len(rows)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    elif hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text)


# --- subcommands -------------------------------------------------------------------


def _cmd_validate(spec, args) -> dict:
    result = {"genus": spec.genus, "classical_verified": spec.classical_verified}
    result["generators"] = []
    for gen in spec.generators:
        data = loxodromic_data(gen)
        result["generators"].append(
            {
                "multiplier": [data.multiplier.real, data.multiplier.imag],
                "translation_length": data.translation_length,
                "fixed_minus": _pt(data.fixed_minus),
                "fixed_plus": _pt(data.fixed_plus),
            }
        )
    if spec.pairings is not None:
        result["report"] = validate_classical(spec).to_dict()
    return result


def _pt(p):
    return "inf" if p is INF else [p.real, p.imag]


def _cmd_dimension(spec, args) -> dict:
    bracket = dimension_bracket(spec, args.max_word_len)
    return bracket.to_dict()


def _cmd_bounds(spec, args) -> dict:
    report = bounds_report(spec, args.max_word_len, args.depth, args.s_margin)
    return report.to_dict()


def _cmd_period(spec, args) -> dict:
    probe = _parse_probe(args.probe)
    pm = period_matrix(spec, args.max_word_len, probe)
    out = pm.to_dict()
    out["gate_upper"] = pm.gate_value
    out["symmetry_residual"] = pm.symmetry_residual()
    out["imaginary_part_positive_definite"] = pm.imaginary_part_positive()
    if pm.certificate is not None:
        out["certificate"] = pm.certificate.to_dict()
    return out


def _parse_probe(text: Optional[str]):
    if text is None:
        return None
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ParseError(f"bad probe point {text!r}; use e.g. 0.5+1j") from exc


def _atoms_csv(spec, args) -> str:
    s = pressure_exponent(spec, ORIGIN, args.max_word_len).exponent + args.s_margin
    levels = orbit_levels(spec, args.max_word_len)
    rows = []
    for m in sector_measures(spec, ORIGIN, s, args.max_word_len):
        lens, idx = m.words
        for p, wt, n, k in zip(m.points, m.weights, lens, idx):
            word = word_to_str(tuple(int(x) for x in levels[n][0][k]))
            rows.append((repr(p.real), repr(p.imag), repr(float(wt)), word))
    return _csv(["re", "im", "weight", "word"], rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schottky", description="Schottky group computations.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_input=True):
        p.add_argument("--input", required=needs_input, help="group-spec JSON file")
        p.add_argument("-N", "--max-word-len", type=int, default=8, dest="max_word_len")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
        return p

    common(sub.add_parser("validate", help="check the classical condition"))
    common(sub.add_parser("limit-set", help="CSV of attracting fixed points of words"))
    common(sub.add_parser("dimension", help="dimension bracket"))
    p = common(sub.add_parser("bounds", help="dimension bounds from the mean norm"))
    p.add_argument("--depth", type=int, default=2, help="Nielsen search depth")
    p.add_argument("--s-margin", type=float, default=DEFAULT_MARGIN, dest="s_margin")
    p.add_argument("--atoms", default=None, help="also write sector atoms as CSV to this path")
    p = common(sub.add_parser("period-matrix", help="Schottky period matrix"))
    p.add_argument("--probe", default=None, help="probe point for the tail certificate, e.g. 0.5+1j")
    p = common(sub.add_parser("inequality-suite", help="hexagon inequality checks as CSV"), needs_input=False)
    p.add_argument("--g-min", type=int, default=2, dest="g_min")
    p.add_argument("--g-max", type=int, default=100, dest="g_max")
    return parser


def _check_ranges(args) -> None:
    if args.max_word_len < 1 or args.max_word_len > 12:
        raise ParseError("--max-word-len must lie in [1, 12]")
    if getattr(args, "depth", 0) < 0 or getattr(args, "depth", 0) > 4:
        raise ParseError("--depth must lie in [0, 4]")
    if getattr(args, "s_margin", 1.0) <= 0:
        raise ParseError("--s-margin must be positive")


def dispatch(args) -> tuple:
    """Run one parsed request; returns (exit code, payload text)."""
    start = time.perf_counter()
    _check_ranges(args)
    if args.subcommand == "inequality-suite":
        report = inequality_suite(args.g_min, args.g_max)
        return EXIT_OK, report.to_csv()
    spec = load_group_spec(args.input)
    if args.subcommand == "limit-set":
        rows = limit_set_rows(spec, args.max_word_len)
        return EXIT_OK, _csv(["re", "im", "word"], rows)
    handlers = {
        "validate": _cmd_validate,
        "dimension": _cmd_dimension,
        "bounds": _cmd_bounds,
        "period-matrix": _cmd_period,
    }
    result = handlers[args.subcommand](spec, args)
    if args.subcommand == "bounds" and args.atoms:
        Path(args.atoms).write_text(_atoms_csv(spec, args))
    params = {"N": args.max_word_len, "seed": args.seed}
    for key in ("depth", "s_margin", "probe"):
        if hasattr(args, key):
            params[key] = getattr(args, key)
    report = {
        "subcommand": args.subcommand,
        "input_sha256": _hash(args.input),
        "parameters": params,
        "result": result,
        "wall_time": time.perf_counter() - start,
    }
    return EXIT_OK, json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, text = dispatch(args)
    except ConvergenceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SchottkyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        _write(text, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return code


if __name__ == "__main__":
    sys.exit(main())
