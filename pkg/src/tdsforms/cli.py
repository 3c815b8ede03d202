"""Command line entry point.

Exit codes: 0 success, 1 a verification case failed, 2 usage or schema
error, 3 domain error (the message names the error class).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .diffeology import _jsonable, joint_plaque_probe, weaker_condition_probe
from .errors import ParseError, SchemaError, TDSError
from .expr import SmoothMapSpec, as_rational
from .exterior import ExteriorForm
from .forms import DifferentialForm
from .spaces import get_fixture, space_from_json
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc


def parse_number(value):
    """Accept ints, ``"p/q"`` strings, ``{"num", "den"}`` objects and floats."""
    if isinstance(value, bool):
        raise SchemaError("booleans are not numbers")
    if isinstance(value, dict):
        try:
            return Fraction(int(value["num"]), int(value.get("den", 1)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational {value!r}") from exc
    if isinstance(value, float):
        return value
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad number {value!r}") from exc


def number_json(value):
    if isinstance(value, float):
        return value
    value = as_rational(value)
    return {"num": value.numerator, "den": value.denominator}


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


def load_form(data):
    """An exterior form (rational coefficients) or a differential form (expression coefficients)."""
    if not isinstance(data, dict) or "coeffs" not in data:
        raise SchemaError("form JSON needs 'coeffs'")
    if any(isinstance(c, dict) and "expr" in c for c in data["coeffs"]):
        return DifferentialForm.from_json(data)
    return ExteriorForm.from_json(data)


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, samples=args.samples)
    out = report.to_json()
    out["tolerance"] = args.tolerance
    if args.json:
        print(_dump(out))
    else:
        for case in out["cases"]:
            print(f"{case['status']:5} {case['id']}")
        s = out["summary"]
        print(f"{args.suite}: {s['pass']} passed, {s['fail']} failed, {s['error']} errors")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_eval(args) -> int:
    form = load_form(_load_json(args.form_file))
    data = _load_json(args.input_file)
    if not isinstance(data, dict) or "vectors" not in data:
        raise SchemaError("input JSON needs 'vectors'")
    try:
        vectors = [[parse_number(v) for v in vec] for vec in data["vectors"]]
    except TypeError as exc:
        raise SchemaError("'vectors' must be a list of lists") from exc
    if isinstance(form, DifferentialForm):
        if "point" not in data:
            raise SchemaError("a differential form needs a 'point'")
        at = form.at([parse_number(v) for v in data["point"]])
    else:
        at = form
    value = at.evaluate(*vectors)
    out = {"value": number_json(value), "degree": form.degree}
    if isinstance(value, float):
        out["tolerance"] = args.tolerance
    print(_dump(out) if args.json else str(value))
    return EXIT_OK


def _load_space(source: str):
    if Path(source).is_file():
        return space_from_json(_load_json(source))
    return get_fixture(source)


def cmd_probe(args) -> int:
    space = _load_space(args.space)
    plaques = [SmoothMapSpec.from_json(_load_json(p)) for p in args.plaque_files]
    if len(plaques) != 2:
        raise SchemaError("probe takes exactly two plaque files")
    if args.mode == "weaker":
        result = weaker_condition_probe(space, *plaques)
    else:
        result = joint_plaque_probe(space, *plaques, mode=args.mode)
    out = {"space": space.name, **result.to_json()}
    print(_dump(out) if args.json else ("found" if result.found else f"not found: {result.certificate['reason']}"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdsforms", description="Forms on diffeological spaces: checks and probes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action=argparse.BooleanOptionalAction, default=True, help="JSON output (default)")
        p.add_argument("--tolerance", type=float, default=1e-9, help="tolerance reported for black-box values")

    v = sub.add_parser("verify", help="run a seeded verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=64)
    common(v)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="evaluate a form on vectors")
    e.add_argument("form_file")
    e.add_argument("input_file")
    common(e)
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("probe", help="search for a joint plaque of two plaques")
    p.add_argument("space", help="fixture name (e.g. lines, euclidean:2) or a space JSON file")
    p.add_argument("plaque_files", nargs="+")
    p.add_argument("--mode", choices=("strong", "weak", "weaker"), default="strong")
    common(p)
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SchemaError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TDSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
