"""Exact rational polynomials in the commuting indeterminates x, xi and s.

Coefficients are `fractions.Fraction` throughout, so nothing here ever
rounds.  Values are immutable; every operation returns a new polynomial.
The degree of the zero polynomial is the sentinel ``NEG_INF``, which
compares below every integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .errors import ArityError, ParseError

Rational = Fraction

#: Degree of the zero polynomial; ordered below all integers.
NEG_INF = float("-inf")

VARS = ("x", "xi", "s")
_VAR_INDEX = {name: k for k, name in enumerate(VARS)}


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Poly:
    """Sparse polynomial over the rationals in x, xi and s."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int, int], Fraction] | None = None):
        clean: dict[tuple[int, int, int], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff:
                    ex = tuple(int(e) for e in exps)
                    if len(ex) != 3 or min(ex) < 0:
                        raise ValueError(f"bad exponent tuple {exps!r}")
                    clean[ex] = coeff
        self._terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0, 0): _as_fraction(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        exps = [0, 0, 0]
        exps[_VAR_INDEX[name]] = 1
        return cls({tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, coeff, x: int = 0, xi: int = 0, s: int = 0) -> "Poly":
        return cls({(x, xi, s): _as_fraction(coeff)})

    # -- inspection --------------------------------------------------------

    def items(self) -> Iterator[tuple[tuple[int, int, int], Fraction]]:
        return iter(self._terms.items())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def active_vars(self) -> tuple[str, ...]:
        active = [False, False, False]
        for exps in self._terms:
            for k in range(3):
                if exps[k]:
                    active[k] = True
        return tuple(v for v, a in zip(VARS, active) if a)

    def degree(self, var: str):
        """Degree in one indeterminate; NEG_INF for the zero polynomial."""
        k = _VAR_INDEX[var]
        if not self._terms:
            return NEG_INF
        return max(exps[k] for exps in self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0, 0, 0), Fraction(0))

    def coeff_of(self, var: str, power: int) -> "Poly":
        """Coefficient of var**power, a polynomial in the remaining vars."""
        k = _VAR_INDEX[var]
        out = {}
        for exps, c in self._terms.items():
            if exps[k] == power:
                reduced = list(exps)
                reduced[k] = 0
                out[tuple(reduced)] = c
        return Poly(out)

    def coeffs_in(self, var: str) -> dict[int, "Poly"]:
        """All coefficient polynomials, keyed by the power of var."""
        k = _VAR_INDEX[var]
        out: dict[int, dict] = {}
        for exps, c in self._terms.items():
            reduced = list(exps)
            reduced[k] = 0
            out.setdefault(exps[k], {})[tuple(reduced)] = c
        return {p: Poly(t) for p, t in out.items()}

    def leading_coeff(self, var: str) -> "Poly":
        d = self.degree(var)
        if d == NEG_INF:
            return Poly.zero()
        return self.coeff_of(var, d)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exps, c in other._terms.items():
            acc = out.get(exps, _F0) + c
            if acc:
                out[exps] = acc
            else:
                out.pop(exps, None)
        p = Poly.__new__(Poly)
        p._terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p._terms = {e: -c for e, c in self._terms.items()}
        return p

    def __sub__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[tuple[int, int, int], Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exps = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                acc = out.get(exps, _F0) + c1 * c2
                if acc:
                    out[exps] = acc
                else:
                    out.pop(exps, None)
        p = Poly.__new__(Poly)
        p._terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- calculus ------------------------------------------------------------

    def derive(self, var: str, times: int = 1) -> "Poly":
        """Exact partial derivative with respect to one indeterminate."""
        k = _VAR_INDEX[var]
        p = self
        for _ in range(times):
            out = {}
            for exps, c in p._terms.items():
                e = exps[k]
                if e:
                    reduced = list(exps)
                    reduced[k] = e - 1
                    out[tuple(reduced)] = c * e
            q = Poly.__new__(Poly)
            q._terms = out
            p = q
        return p

    # -- substitution and evaluation ------------------------------------------

    def substitute(self, rules: Mapping[str, "Poly"]) -> "Poly":
        """Compose with monomial rules var -> c * (monomial).

        Indeterminates without a rule are left unchanged.  Each rule value
        must be a single-term polynomial.
        """
        mono: list[tuple[Fraction, tuple[int, int, int]]] = []
        for k, v in enumerate(VARS):
            rule = rules.get(v)
            if rule is None:
                exps = [0, 0, 0]
                exps[k] = 1
                mono.append((Fraction(1), tuple(exps)))
            else:
                if len(rule._terms) != 1:
                    raise ValueError(f"rule for {v} must be a monomial, got {rule}")
                ((exps, c),) = rule._terms.items()
                mono.append((c, exps))
        out = Poly.zero()
        for exps, c in self._terms.items():
            coeff = c
            acc = [0, 0, 0]
            for k in range(3):
                e = exps[k]
                if e:
                    mc, mexps = mono[k]
                    coeff *= mc**e
                    for j in range(3):
                        acc[j] += e * mexps[j]
            out = out + Poly({tuple(acc): coeff})
        return out

    def substitute_values(self, **values) -> "Poly":
        """Exact partial evaluation: substitute rationals for some vars."""
        vals = {v: _as_fraction(c) for v, c in values.items()}
        out = Poly.zero()
        for exps, c in self._terms.items():
            coeff = c
            acc = [0, 0, 0]
            for k, v in enumerate(VARS):
                e = exps[k]
                if v in vals:
                    if e:
                        coeff *= vals[v] ** e
                else:
                    acc[k] = e
            if coeff:
                out = out + Poly({tuple(acc): coeff})
        return out

    def evaluate(self, **values) -> Fraction:
        """Exact full evaluation; raises ArityError on missing indeterminates."""
        missing = [v for v in self.active_vars() if v not in values]
        if missing:
            raise ArityError(f"missing value(s) for {', '.join(missing)}")
        total = Fraction(0)
        vals = [
            _as_fraction(values.get(v, 0)) for v in VARS
        ]
        for exps, c in self._terms.items():
            term = c
            for k in range(3):
                if exps[k]:
                    term *= vals[k] ** exps[k]
            total += term
        return total

    def eval_float(self, **values) -> float:
        missing = [v for v in self.active_vars() if v not in values]
        if missing:
            raise ArityError(f"missing value(s) for {', '.join(missing)}")
        total = 0.0
        vals = [float(values.get(v, 0.0)) for v in VARS]
        for exps, c in self._terms.items():
            term = float(c)
            for k in range(3):
                if exps[k]:
                    term *= vals[k] ** exps[k]
            total += term
        return total

    def x_coeffs_float(self, s: float | None = None) -> np.ndarray:
        """Ascending coefficients in x, with s evaluated numerically.

        Requires xi-free input; s must be supplied when present.
        """
        if self.degree("xi") not in (NEG_INF, 0):
            raise ArityError("polynomial depends on xi")
        d = self.degree("x")
        n = 0 if d == NEG_INF else int(d)
        out = np.zeros(n + 1)
        for power, cp in self.coeffs_in("x").items():
            if cp.degree("s") not in (NEG_INF, 0):
                if s is None:
                    raise ArityError("s unresolved; supply hbar")
                out[power] = cp.eval_float(s=s)
            else:
                out[power] = float(cp.constant_term)
        return out

    # -- text form ---------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        def key(item):
            exps, _ = item
            return (sum(exps), exps)
        parts = []
        for exps, c in sorted(self._terms.items(), key=key, reverse=True):
            factors = []
            for v, e in zip(VARS, exps):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = str(mag) + "*" + "*".join(factors)
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Poly({self})"

    @classmethod
    def parse(cls, text: str) -> "Poly":
        return _parse_poly(text)


def _coerce(value):
    if isinstance(value, Poly):
        return value
    if isinstance(value, (int, Fraction)):
        return Poly.const(value)
    return NotImplemented


_F0 = Fraction(0)

ZERO = Poly.zero()
ONE = Poly.const(1)
X = Poly.var("x")
XI = Poly.var("xi")
S = Poly.var("s")


# ---------------------------------------------------------------------------
# text grammar
#
#   expr   := ['+'|'-'] term { ('+'|'-') term }
#   term   := factor { '*' factor }
#   factor := INT [ '/' INT ] | VAR [ '^' INT ]
#
# Whitespace-insensitive; VAR is one of x, xi, s.
# ---------------------------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("num", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and text[j].isalpha():
                j += 1
            name = text[i:j]
            if name not in VARS:
                raise ParseError(f"unknown indeterminate {name!r}", line, col)
            tokens.append(("var", name, line, col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^":
            tokens.append((ch, ch, line, col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("end", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, msg):
        kind, _, line, col = self.peek()
        raise ParseError(msg, line, col)

    def parse_expr(self) -> Poly:
        sign = 1
        if self.peek()[0] in "+-":
            if self.next()[0] == "-":
                sign = -1
        total = sign * self.parse_term()
        while self.peek()[0] in "+-":
            op = self.next()[0]
            term = self.parse_term()
            total = total + term if op == "+" else total - term
        if self.peek()[0] != "end":
            self.error("trailing input")
        return total

    def parse_term(self) -> Poly:
        p = self.parse_factor()
        while self.peek()[0] == "*":
            self.next()
            p = p * self.parse_factor()
        return p

    def parse_factor(self) -> Poly:
        kind, value, _, _ = self.peek()
        if kind == "num":
            self.next()
            num = value
            if self.peek()[0] == "/":
                self.next()
                if self.peek()[0] != "num":
                    self.error("expected integer denominator")
                den = self.next()[1]
                if den == 0:
                    self.error("zero denominator")
                return Poly.const(Fraction(num, den))
            return Poly.const(num)
        if kind == "var":
            self.next()
            power = 1
            if self.peek()[0] == "^":
                self.next()
                if self.peek()[0] != "num":
                    self.error("expected integer exponent")
                power = self.next()[1]
            return Poly.var(value) ** power
        self.error("expected a coefficient or indeterminate")


def _parse_poly(text: str) -> Poly:
    return _Parser(_tokenize(text)).parse_expr()


# ---------------------------------------------------------------------------
# global minimum over the reals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalMin:
    value: float
    attained_at: float


def _x_float_coeffs(p: Poly) -> list[float]:
    d = p.degree("x")
    n = 0 if d == NEG_INF else int(d)
    out = [0.0] * (n + 1)
    for exps, c in p.items():
        out[exps[0]] = float(c)
    return out


def _horner(coeffs_desc: list[float], t: float) -> float:
    acc = 0.0
    for c in coeffs_desc:
        acc = acc * t + c
    return acc


def global_min(p: Poly) -> GlobalMin | None:
    """Minimum of a univariate real polynomial over the whole line.

    Returns None when the polynomial is unbounded below (odd degree or
    negative leading coefficient).  Roots of p' are found in double
    precision and polished by Newton iteration; the reported value is
    reliable to about 1e-9 at desk scale.
    """
    if any(v != "x" for v in p.active_vars()):
        raise ArityError("global_min expects a polynomial in x alone")
    d = p.degree("x")
    if d == NEG_INF or d == 0:
        return GlobalMin(float(p.constant_term), 0.0)
    lead = p.coeff_of("x", int(d)).constant_term
    if int(d) % 2 == 1 or lead < 0:
        return None

    asc = _x_float_coeffs(p)
    dasc = [asc[k] * k for k in range(1, len(asc))]
    d2asc = [dasc[k] * k for k in range(1, len(dasc))]
    desc = asc[::-1]
    d_desc = dasc[::-1]
    d2_desc = d2asc[::-1]

    roots = np.roots(d_desc)
    candidates = [0.0]
    for r in np.atleast_1d(roots):
        if abs(r.imag) < 1e-6 * (1.0 + abs(r)):
            t = float(r.real)
            for _ in range(4):
                f1 = _horner(d_desc, t)
                f2 = _horner(d2_desc, t)
                if abs(f2) < 1e-30:
                    break
                t -= f1 / f2
            candidates.append(t)
    best_t = min(candidates, key=lambda t: _horner(desc, t))
    return GlobalMin(_horner(desc, best_t), best_t)
