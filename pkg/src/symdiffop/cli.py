"""Command-line surface: operator files in, JSON (or text) reports out.

Operator files are line-oriented ``key = value`` with polynomial text
values, e.g.::

    form = divergence
    b0 = x^4
    b1 = x^2

Exit codes: 0 computed/pass, 1 check failed, 2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass

from . import conditions, pseudiff, quantize, spectral, structure
from .errors import ParseError
from .opalg import DivOp, RawOp, adjoint, is_symmetric
from .poly import Poly

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3


# ---------------------------------------------------------------------------
# operator files
# ---------------------------------------------------------------------------


@dataclass
class OperatorFile:
    form: str                      # "raw" | "divergence"
    coeffs: dict[int, Poly]
    family: bool = False
    source: str = ""

    def order(self) -> int:
        return max(self.coeffs, default=0)

    def to_operator(self):
        top = self.order()
        seq = [self.coeffs.get(k, Poly.zero()) for k in range(top + 1)]
        if self.form == "raw":
            return RawOp.from_coeffs(seq)
        return DivOp.from_coeffs(seq)

    def emit(self) -> str:
        lines = [f"form = {self.form}"]
        if self.family:
            lines.append("family = true")
        prefix = "a" if self.form == "raw" else "b"
        for k in sorted(self.coeffs):
            lines.append(f"{prefix}{k} = {self.coeffs[k]}")
        return "\n".join(lines) + "\n"


def parse_operator_file(text: str) -> OperatorFile:
    form = None
    family = False
    coeffs: dict[int, Poly] = {}
    prefix = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, 1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "form":
            if value not in ("raw", "divergence"):
                raise ParseError(f"unknown form {value!r}", lineno, 1)
            form = value
            prefix = "a" if value == "raw" else "b"
            continue
        if key == "family":
            family = value.lower() in ("true", "1", "yes")
            continue
        if prefix is None:
            raise ParseError("the 'form = raw|divergence' line must come first",
                             lineno, 1)
        if not key.startswith(prefix) or not key[len(prefix):].isdigit():
            raise ParseError(f"unknown key {key!r}", lineno, 1)
        index = int(key[len(prefix):])
        try:
            coeffs[index] = Poly.parse(value)
        except ParseError as exc:
            raise ParseError(f"in {key}: {exc}", lineno, 1) from exc
    if form is None:
        raise ParseError("missing 'form = raw|divergence' line", 1, 1)
    return OperatorFile(form=form, coeffs=coeffs, family=family, source=text)


def parse_classical_monomial(text: str) -> tuple[int, int]:
    """Monomial text like 'x^2 xi^2' -> exponent pair (a, b)."""
    a = b = 0
    for chunk in text.split():
        name, _, power = chunk.partition("^")
        exp = 1
        if power:
            if not power.isdigit():
                raise ParseError(f"bad exponent {power!r}", 1, 1)
            exp = int(power)
        if name == "x":
            a += exp
        elif name == "xi":
            b += exp
        else:
            raise ParseError(f"unknown indeterminate {name!r}", 1, 1)
    return a, b


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _digest(*texts: str) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode())
    return h.hexdigest()[:16]


def make_report(command: str, inputs: dict, results: dict, certification: str,
                tolerances: dict | None = None, seed: int | None = None) -> dict:
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "certification": certification,
    }
    if tolerances:
        report["tolerances"] = tolerances
    if seed is not None:
        report["seed"] = seed
    return report


def _coeff_table(coeffs, prefix: str) -> dict[str, str]:
    return {f"{prefix}{k}": str(c) for k, c in enumerate(coeffs)}


def _print(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    print(f"# {report['command']}")
    print(f"certification: {report['certification']}")
    for key, value in report["results"].items():
        if isinstance(value, dict):
            print(f"{key}:")
            for k2, v2 in value.items():
                print(f"  {k2} = {v2}")
        else:
            print(f"{key} = {value}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_adjoint(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, DivOp):
        op = structure.raw_from_divergence(op)
    adj = adjoint(op)
    report = make_report(
        "adjoint", {"digest": _digest(text)},
        {"coefficients": _coeff_table(adj.coeffs, "a")}, "exact",
    )
    return report, EXIT_OK


def _cmd_symmetric_check(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, DivOp):
        op = structure.raw_from_divergence(op)
    ok = is_symmetric(op)
    report = make_report(
        "symmetric-check", {"digest": _digest(text)}, {"symmetric": ok}, "exact",
    )
    return report, EXIT_OK if ok else EXIT_FAILED


def _cmd_to_divergence(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, DivOp):
        op = structure.raw_from_divergence(op)
    div = structure.divergence_from_raw(op)
    report = make_report(
        "to-divergence", {"digest": _digest(text)},
        {"coefficients": _coeff_table(div.coeffs, "b")}, "exact",
    )
    return report, EXIT_OK


def _cmd_to_raw(args) -> tuple[dict, int]:
    text = _read(args.operator)
    parsed = parse_operator_file(text)
    op = parsed.to_operator()
    if isinstance(op, RawOp):
        raw = op
    else:
        raw = structure.raw_from_divergence(op)
    report = make_report(
        "to-raw", {"digest": _digest(text)},
        {"coefficients": _coeff_table(raw.coeffs, "a")}, "exact",
    )
    return report, EXIT_OK


def _cmd_power(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    dec = structure.power_div_coeffs(op, args.n)
    results = {
        "B": _coeff_table(dec.B, "B"),
        "calB": _coeff_table(dec.calB, "calB"),
        "R": _coeff_table(dec.R, "R"),
    }
    report = make_report(
        "power", {"digest": _digest(text), "n": args.n}, results, "exact",
    )
    return report, EXIT_OK


def _cmd_scale_hbar(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    scaled = structure.scale_hbar(op)
    report = make_report(
        "scale-hbar", {"digest": _digest(text)},
        {"coefficients": _coeff_table(scaled.coeffs, "b")}, "exact",
    )
    return report, EXIT_OK


def _cmd_assumption1(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    rep = conditions.check_assumption1(op, args.eta, mode=args.mode)
    results = {
        "degree_chain_ok": rep.degree_chain_ok,
        "relaxed_chain_ok": rep.relaxed_chain_ok,
        "c_bm": rep.c_bm,
        "c_alpha": rep.c_alpha,
        "failures": rep.failures,
        "passed": rep.passed,
    }
    report = make_report(
        "assumption1", {"digest": _digest(text), "eta": args.eta, "mode": args.mode},
        results, rep.scope,
        tolerances={"constants_margin": conditions.MARGIN},
    )
    return report, EXIT_OK if rep.passed else EXIT_FAILED


def _cmd_positivity(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    grid = _float_list(args.hbar)
    rep = spectral.positivity_certificate(op, args.n, grid, args.dim)
    results = {
        "C_found": rep.c_found,
        "min_eigenvalues": {str(h): v for h, v in rep.min_eigenvalues.items()},
    }
    report = make_report(
        "positivity",
        {"digest": _digest(text), "n": args.n, "hbar": grid, "dim": args.dim},
        results, rep.scope, tolerances={"psd": spectral.PSD_TOL},
    )
    return report, EXIT_OK


def _cmd_compare(args) -> tuple[dict, int]:
    text_t = _read(args.operator_tilde)
    text = _read(args.operator)
    op_t = parse_operator_file(text_t).to_operator()
    op = parse_operator_file(text).to_operator()
    if isinstance(op_t, RawOp):
        op_t = structure.divergence_from_raw(op_t)
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    grid = _float_list(args.hbar)
    rep = spectral.comparison_certificate(op_t, op, args.n, grid, args.dim, args.c2)
    results = {
        "C1_found": rep.c1_found,
        "C2": rep.c2,
        "holds": rep.holds,
        "hypothesis": rep.hypothesis,
    }
    report = make_report(
        "compare",
        {"digest": _digest(text_t, text), "n": args.n, "hbar": grid,
         "dim": args.dim, "c2": args.c2},
        results, rep.scope,
        tolerances={"psd": spectral.PSD_TOL, "bisection": spectral.BISECT_RTOL},
    )
    return report, EXIT_OK if rep.holds else EXIT_FAILED


def _cmd_cert(args) -> tuple[dict, int]:
    text = _read(args.operator)
    op = parse_operator_file(text).to_operator()
    if isinstance(op, RawOp):
        op = structure.divergence_from_raw(op)
    schedule = _float_list(args.mu_schedule) if args.mu_schedule else \
        pseudiff.DEFAULT_MU_SCHEDULE
    c = "auto" if args.c == "auto" else float(args.c)
    rep = pseudiff.self_adjoint_certificate(
        op, args.n, c=c, mu_schedule=schedule, hbar=args.hbar,
        grid_points=args.grid,
    )
    results = {
        "mu_star": rep.mu_star,
        "c_used": rep.c_used,
        "norms": {str(mu): r.value for mu, r in rep.norms.items()},
    }
    report = make_report(
        "cert",
        {"digest": _digest(text), "n": args.n, "c": str(args.c),
         "mu_schedule": list(schedule)},
        results, rep.scope,
        tolerances={"norm_threshold": 1.0, "grid_points": args.grid},
    )
    return report, EXIT_OK if rep.conclusive else EXIT_INCONCLUSIVE


def _cmd_quantize(args) -> tuple[dict, int]:
    a, b = parse_classical_monomial(args.weyl)
    lifted = quantize.weyl_lift(a, b)
    fam = quantize.quantize_divergence(lifted)
    raw = quantize.quantize(lifted)
    results = {
        "monomial": {"x": a, "xi": b},
        "family": _coeff_table(fam.coeffs, "f"),
        "raw": _coeff_table(raw.coeffs, "a"),
    }
    report = make_report(
        "quantize", {"digest": _digest(args.weyl), "weyl": args.weyl},
        results, "exact",
    )
    return report, EXIT_OK


def _cmd_constants(args) -> tuple[dict, int]:
    tables = structure.structure_constants(args.m)
    results = {
        "K": {f"{r},{s}": v for (r, s), v in sorted(tables.K.items())},
        "C": {f"{n},{r},{s}": v for (n, r, s), v in sorted(tables.C.items())},
    }
    report = make_report("constants", {"m": args.m}, results, "exact")
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors (exit 3)
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0,
                        help="seed recorded in reports of randomized commands")
    parser = _Parser(
        prog="symdiffop",
        parents=[common],
        description="Structure transforms and certificates for symmetric "
                    "polynomial-coefficient differential operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def sub_cmd(name, handler):
        p = sub.add_parser(name, parents=[common])
        p.set_defaults(handler=handler)
        return p

    def op_cmd(name, handler):
        p = sub_cmd(name, handler)
        p.add_argument("operator", help="operator file")
        return p

    op_cmd("adjoint", _cmd_adjoint)
    op_cmd("symmetric-check", _cmd_symmetric_check)
    op_cmd("to-divergence", _cmd_to_divergence)
    op_cmd("to-raw", _cmd_to_raw)

    p = op_cmd("power", _cmd_power)
    p.add_argument("--n", type=int, required=True)

    op_cmd("scale-hbar", _cmd_scale_hbar)

    p = op_cmd("assumption1", _cmd_assumption1)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--mode", choices=("strict", "relaxed"), default="strict")

    p = op_cmd("positivity", _cmd_positivity)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--hbar", required=True, help="comma-separated grid")
    p.add_argument("--dim", type=int, default=64)

    p = sub_cmd("compare", _cmd_compare)
    p.add_argument("operator_tilde", help="dominated operator file")
    p.add_argument("operator", help="dominating operator file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--hbar", required=True, help="comma-separated grid")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--c2", type=float, default=1.0)

    p = op_cmd("cert", _cmd_cert)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", default="auto")
    p.add_argument("--mu-schedule", dest="mu_schedule", default="")
    p.add_argument("--hbar", type=float, default=None)
    p.add_argument("--grid", type=int, default=512)

    p = sub_cmd("quantize", _cmd_quantize)
    p.add_argument("--weyl", required=True,
                   help="classical monomial, e.g. 'x^2 xi^2'")

    p = sub_cmd("constants", _cmd_constants)
    p.add_argument("--m", type=int, required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.handler(args)
    except (ParseError, OSError, ValueError) as exc:
        print(json.dumps({
            "schema": SCHEMA_VERSION,
            "command": args.command,
            "error": str(exc),
        }, sort_keys=True))
        return EXIT_INPUT
    if getattr(args, "seed", None) is not None:
        report.setdefault("seed", args.seed)
    _print(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
