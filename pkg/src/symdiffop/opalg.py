"""Differential operators with polynomial coefficients.

A raw operator is an ordered coefficient list a_0..a_d for
sum_k a_k(x, s) d^k; a divergence operator stores b_0..b_m for
sum_l (-1)^l d^l b_l(x, s) d^l.  Coefficients are real rationals, so the
formal adjoint needs no conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .poly import Poly


def _trim(coeffs) -> tuple[Poly, ...]:
    out = [c if isinstance(c, Poly) else Poly.const(c) for c in coeffs]
    while len(out) > 1 and out[-1].is_zero:
        out.pop()
    if not out:
        out = [Poly.zero()]
    return tuple(out)


@dataclass(frozen=True)
class RawOp:
    """sum_k a_k d^k with polynomial coefficients in (x, s)."""

    coeffs: tuple[Poly, ...]

    @classmethod
    def from_coeffs(cls, coeffs) -> "RawOp":
        return cls(_trim(coeffs))

    @classmethod
    def identity(cls) -> "RawOp":
        return cls.from_coeffs([Poly.const(1)])

    @classmethod
    def derivative(cls, k: int = 1) -> "RawOp":
        return cls.from_coeffs([Poly.zero()] * k + [Poly.const(1)])

    @classmethod
    def multiplication(cls, p: Poly) -> "RawOp":
        return cls.from_coeffs([p])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> Poly:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Poly.zero()

    def apply(self, p: Poly) -> Poly:
        """Apply the operator to a polynomial (in x, possibly with s)."""
        out = Poly.zero()
        dp = p
        for k, a in enumerate(self.coeffs):
            if k:
                dp = dp.derive("x")
            if not a.is_zero:
                out = out + a * dp
        return out

    def at_hbar(self, hbar: float) -> "RawOp":
        """Substitute s = sqrt(hbar) (as the nearest double, held exactly)."""
        sval = Fraction(math.sqrt(hbar))
        return RawOp.from_coeffs([c.substitute_values(s=sval) for c in self.coeffs])

    def __add__(self, other: "RawOp") -> "RawOp":
        n = max(len(self.coeffs), len(other.coeffs))
        return RawOp.from_coeffs([self.coeff(k) + other.coeff(k) for k in range(n)])

    def __sub__(self, other: "RawOp") -> "RawOp":
        n = max(len(self.coeffs), len(other.coeffs))
        return RawOp.from_coeffs([self.coeff(k) - other.coeff(k) for k in range(n)])

    def scaled(self, c) -> "RawOp":
        return RawOp.from_coeffs([a * c for a in self.coeffs])

    def __str__(self) -> str:
        return " ; ".join(f"a{k} = {a}" for k, a in enumerate(self.coeffs))


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def adjoint(op: RawOp) -> RawOp:
    """Formal adjoint sum_k (-1)^k d^k M_{a_k}, expanded by the product rule."""
    d = op.order
    out = [Poly.zero() for _ in range(d + 1)]
    for k, a in enumerate(op.coeffs):
        if a.is_zero:
            continue
        sign = -1 if k % 2 else 1
        for r in range(k + 1):
            out[r] = out[r] + sign * _binom(k, r) * a.derive("x", k - r)
    return RawOp.from_coeffs(out)


def compose(left: RawOp, right: RawOp) -> RawOp:
    """Raw coefficients of left o right, by product-rule expansion."""
    out = [Poly.zero() for _ in range(left.order + right.order + 1)]
    for j, b in enumerate(right.coeffs):
        if b.is_zero:
            continue
        derivs = [b]
        for _ in range(left.order):
            derivs.append(derivs[-1].derive("x"))
        for k, a in enumerate(left.coeffs):
            if a.is_zero:
                continue
            for r in range(k + 1):
                c = _binom(k, r)
                out[r + j] = out[r + j] + c * a * derivs[k - r]
    return RawOp.from_coeffs(out)


def power(op: RawOp, n: int) -> RawOp:
    """n-fold composition; n = 0 gives the identity operator."""
    if n < 0:
        raise ValueError("negative operator power")
    result = RawOp.identity()
    for _ in range(n):
        result = compose(result, op)
    return result


def is_symmetric(op: RawOp) -> bool:
    return adjoint(op).coeffs == op.coeffs


@dataclass(frozen=True)
class DivOp:
    """sum_l (-1)^l d^l b_l d^l with polynomial coefficients in (x, s)."""

    coeffs: tuple[Poly, ...]

    @classmethod
    def from_coeffs(cls, coeffs) -> "DivOp":
        return cls(_trim(coeffs))

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, l: int) -> Poly:
        return self.coeffs[l] if 0 <= l < len(self.coeffs) else Poly.zero()

    def at_hbar(self, hbar: float) -> "DivOp":
        sval = Fraction(math.sqrt(hbar))
        return DivOp.from_coeffs([c.substitute_values(s=sval) for c in self.coeffs])

    def degrees_x(self) -> list:
        return [c.degree("x") for c in self.coeffs]

    def __str__(self) -> str:
        return " ; ".join(f"b{l} = {b}" for l, b in enumerate(self.coeffs))


def div_as_raw_by_composition(div: DivOp) -> RawOp:
    """Oracle expansion of a divergence operator through repeated composition.

    Independent of the binomial formula in the structure module; used to
    cross-check it.
    """
    total = RawOp.from_coeffs([Poly.zero()])
    for l, b in enumerate(div.coeffs):
        if b.is_zero:
            continue
        piece = compose(
            RawOp.derivative(l), compose(RawOp.multiplication(b), RawOp.derivative(l))
        )
        if l % 2:
            piece = piece.scaled(-1)
        total = total + piece
    return total
