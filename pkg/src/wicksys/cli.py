"""Command-line front end.

Exit status: 0 on success, 2 for invalid input, 3 for mathematical errors
(non-invertible elements, singular pencils, divergent constants). Errors are
reported on stdout as ``{"error": {"kind": ..., "detail": ...}}``.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from wicksys import analysis, ring, statespace
from wicksys.errors import MathError, WickSysError
from wicksys.ringmatrix import SINGULAR_RTOL
from wicksys.serialization import (
    SchemaError,
    complex_matrix_to_csv,
    dumps,
    element_doc_from_dict,
    matrix_to_dict,
    series_to_dict,
    signal_from_dict,
    system_from_dict,
    system_to_dict,
    truncation_to_dict,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MATH = 3

_COMPLEX_RE = re.compile(r"^[0-9eE.+\-ij]+$")


class _ValidationError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (or ``a+bj``, ``bi``, ``a``) into a complex number."""
    s = text.strip().replace(" ", "")
    if not s or not _COMPLEX_RE.match(s):
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")
    s = s.replace("i", "j")
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_point(text: str) -> list[complex]:
    return [parse_complex(part) for part in text.split(",")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wicksys", description="Linear systems over the ring of Wick power series.")
    parser.add_argument(
        "--singular-rtol",
        type=float,
        default=SINGULAR_RTOL,
        help="relative smallest-singular-value threshold for inverting constant parts",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the Wick state recursion")
    p.add_argument("--system", required=True, type=Path)
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("markov", help="Markov parameters D, CB, CAB, ...")
    p.add_argument("--system", required=True, type=Path)
    p.add_argument("--n", required=True, type=int)

    p = sub.add_parser("tfeval", help="evaluate the transfer function at (zeta, z)")
    p.add_argument("--system", required=True, type=Path)
    p.add_argument("--zeta", required=True, type=parse_complex)
    p.add_argument("--z", required=True, type=parse_point)

    p = sub.add_parser("check", help="observability / controllability / minimality certificates")
    p.add_argument("which", choices=["obs", "ctrl", "rctrl", "minimal"])
    p.add_argument("--system", required=True, type=Path)

    p = sub.add_parser("norm", help="Kondratiev norm of a ring element")
    p.add_argument("--element", required=True, type=Path)
    p.add_argument("--k", required=True, type=float)

    p = sub.add_parser("vage", help="the constant A(k - l)")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--l", required=True, type=int)
    p.add_argument("--num-vars", type=int, help="restrict the sum to indices supported in z_1..z_m")

    p = sub.add_parser("kq", help="membership of z in K_q(delta)")
    p.add_argument("--z", required=True, type=parse_point)
    p.add_argument("--q", required=True, type=float)
    p.add_argument("--delta", required=True, type=float)

    p = sub.add_parser("realize", help="realization of inverse, product, sum or concatenation")
    p.add_argument("op", choices=["inverse", "cascade", "sum", "rows", "cols"])
    p.add_argument("--system", required=True, type=Path)
    p.add_argument("--system2", type=Path)
    p.add_argument("--out", type=Path)
    return parser


def _load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise _ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise _ValidationError(f"{path} is not valid JSON: {exc}") from None


def _load_system(path: Path) -> statespace.StateSpaceSystem:
    return system_from_dict(_load_json(path))


def _emit(text: str, out: Path | None, stdout) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_simulate(args, stdout):
    sys_ = _load_system(args.system)
    u = signal_from_dict(_load_json(args.input), sys_.spec)
    states, outputs = statespace.simulate(sys_, u, steps=args.steps)
    doc = {
        "truncation": truncation_to_dict(sys_.spec),
        "states": [matrix_to_dict(x) for x in states],
        "outputs": [matrix_to_dict(y) for y in outputs],
    }
    _emit(dumps(doc), args.out, stdout)


def _cmd_markov(args, stdout):
    if args.n < 0:
        raise _ValidationError("--n must be non-negative")
    series = statespace.markov(_load_system(args.system), args.n)
    _emit(dumps(series_to_dict(series)), None, stdout)


def _cmd_tfeval(args, stdout):
    value = statespace.tf_eval(_load_system(args.system), args.zeta, args.z)
    _emit(complex_matrix_to_csv(value), None, stdout)


def _cmd_check(args, stdout):
    s = _load_system(args.system)
    cert = {
        "obs": lambda: analysis.observability_certificate(s.C, s.A),
        "ctrl": lambda: analysis.controllability_certificate(s.A, s.B),
        "rctrl": lambda: analysis.r_controllability_certificate(s.A, s.B),
        "minimal": lambda: analysis.minimality_certificate(s),
    }[args.which]()
    _emit(dumps(cert.to_dict()), None, stdout)


def _cmd_norm(args, stdout):
    f = element_doc_from_dict(_load_json(args.element))
    _emit(dumps({"k": args.k, "norm": ring.norm_k(f, args.k)}), None, stdout)


def _cmd_vage(args, stdout):
    value = ring.vage_constant(args.k, args.l, args.num_vars)
    _emit(dumps({"k": args.k, "l": args.l, "value": value}), None, stdout)


def _cmd_kq(args, stdout):
    if args.delta <= 0:
        raise _ValidationError("--delta must be positive")
    res = ring.kq_membership(args.z, args.q, args.delta)
    divergent = math.isinf(res.total)
    doc = {"member": res.member, "sum": None if divergent else res.total, "divergent": divergent}
    _emit(dumps(doc), None, stdout)


def _cmd_realize(args, stdout):
    s1 = _load_system(args.system)
    if args.op == "inverse":
        out = statespace.realize_inverse(s1, args.singular_rtol)
    else:
        if args.system2 is None:
            raise _ValidationError(f"realize {args.op} needs --system2")
        s2 = _load_system(args.system2)
        if s2.spec != s1.spec:
            raise _ValidationError("both systems must share one truncation")
        op = {
            "cascade": statespace.realize_cascade,
            "sum": statespace.realize_sum,
            "rows": statespace.realize_concat_rows,
            "cols": statespace.realize_concat_cols,
        }[args.op]
        out = op(s1, s2)
    _emit(dumps(system_to_dict(out)), args.out, stdout)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "markov": _cmd_markov,
    "tfeval": _cmd_tfeval,
    "check": _cmd_check,
    "norm": _cmd_norm,
    "vage": _cmd_vage,
    "kq": _cmd_kq,
    "realize": _cmd_realize,
}


def _error(stdout, kind: str, detail: str) -> None:
    stdout.write(dumps({"error": {"kind": kind, "detail": detail}}) + "\n")


def run(argv: list[str] | None = None, stdout=None) -> int:
    """Parse ``argv``, run one command, and return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args, stdout)
    except MathError as exc:
        _error(stdout, exc.kind, str(exc))
        return EXIT_MATH
    except (_ValidationError, SchemaError, WickSysError, ValueError, TypeError, KeyError) as exc:
        _error(stdout, "ValidationError", str(exc))
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
