"""Noncommutative polynomials in theta/theta* and their quantization.

Words quantize through theta -> (s/sqrt(2))(M_x + d) and
theta* -> (s/sqrt(2))(M_x - d) with hbar = s^2.  Coefficients live in the
exact ring Q(i, sqrt(2)), tracked as (a + b*sqrt(2)) with complex-rational
a and b, so the reality and sqrt(2)-cancellation claims are machine-checked
rather than assumed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import opalg, structure
from .errors import NonRealError, NormalizationError, SymmetryError
from .opalg import DivOp, RawOp
from .poly import Poly

THETA = 0
THETA_STAR = 1

Word = tuple[int, ...]

_F0 = Fraction(0)
_F1 = Fraction(1)


@dataclass(frozen=True)
class C2:
    """Element (ra + i*ia) + (rb + i*ib) * sqrt(2) of Q(i, sqrt(2))."""

    ra: Fraction = _F0
    ia: Fraction = _F0
    rb: Fraction = _F0
    ib: Fraction = _F0

    @classmethod
    def rational(cls, q) -> "C2":
        return cls(ra=Fraction(q))

    @classmethod
    def imaginary(cls, q) -> "C2":
        return cls(ia=Fraction(q))

    @classmethod
    def inv_sqrt2(cls) -> "C2":
        # 1/sqrt(2) = sqrt(2)/2
        return cls(rb=Fraction(1, 2))

    @property
    def is_zero(self) -> bool:
        return not (self.ra or self.ia or self.rb or self.ib)

    def __add__(self, other: "C2") -> "C2":
        return C2(self.ra + other.ra, self.ia + other.ia,
                  self.rb + other.rb, self.ib + other.ib)

    def __neg__(self) -> "C2":
        return C2(-self.ra, -self.ia, -self.rb, -self.ib)

    def __sub__(self, other: "C2") -> "C2":
        return self + (-other)

    def __mul__(self, other) -> "C2":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return C2(self.ra * q, self.ia * q, self.rb * q, self.ib * q)
        # (a1 + b1 r)(a2 + b2 r) = (a1 a2 + 2 b1 b2) + (a1 b2 + b1 a2) r,  r = sqrt(2)
        a1r, a1i, b1r, b1i = self.ra, self.ia, self.rb, self.ib
        a2r, a2i, b2r, b2i = other.ra, other.ia, other.rb, other.ib
        ar = a1r * a2r - a1i * a2i + 2 * (b1r * b2r - b1i * b2i)
        ai = a1r * a2i + a1i * a2r + 2 * (b1r * b2i + b1i * b2r)
        br = a1r * b2r - a1i * b2i + b1r * a2r - b1i * a2i
        bi = a1r * b2i + a1i * b2r + b1r * a2i + b1i * a2r
        return C2(ar, ai, br, bi)

    __rmul__ = __mul__

    def conj(self) -> "C2":
        return C2(self.ra, -self.ia, self.rb, -self.ib)

    def __str__(self) -> str:
        return f"({self.ra}+{self.ia}i) + ({self.rb}+{self.ib}i)*sqrt2"


class NcPoly:
    """Noncommutative polynomial in theta, theta* with C2 coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[Word, C2] | None = None):
        clean: dict[Word, C2] = {}
        if terms:
            for word, coeff in terms.items():
                if not coeff.is_zero:
                    clean[tuple(word)] = coeff
        self._terms = clean

    @classmethod
    def zero(cls) -> "NcPoly":
        return cls()

    @classmethod
    def const(cls, q) -> "NcPoly":
        return cls({(): C2.rational(q)})

    @classmethod
    def letter(cls, which: int) -> "NcPoly":
        return cls({(which,): C2.rational(1)})

    @classmethod
    def word(cls, letters: Word, coeff: C2 | int | Fraction = 1) -> "NcPoly":
        c = coeff if isinstance(coeff, C2) else C2.rational(coeff)
        return cls({tuple(letters): c})

    def items(self):
        return iter(self._terms.items())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, word: Word) -> C2:
        return self._terms.get(tuple(word), C2())

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def __add__(self, other: "NcPoly") -> "NcPoly":
        out = dict(self._terms)
        for w, c in other._terms.items():
            acc = out.get(w, C2()) + c
            if acc.is_zero:
                out.pop(w, None)
            else:
                out[w] = acc
        p = NcPoly.__new__(NcPoly)
        p._terms = out
        return p

    def __neg__(self) -> "NcPoly":
        p = NcPoly.__new__(NcPoly)
        p._terms = {w: -c for w, c in self._terms.items()}
        return p

    def __sub__(self, other: "NcPoly") -> "NcPoly":
        return self + (-other)

    def __mul__(self, other) -> "NcPoly":
        if isinstance(other, (int, Fraction, C2)):
            scalar = other if isinstance(other, C2) else C2.rational(other)
            p = NcPoly.__new__(NcPoly)
            p._terms = {
                w: c2 for w, c in self._terms.items()
                if not (c2 := c * scalar).is_zero
            }
            return p
        out: dict[Word, C2] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = w1 + w2
                acc = out.get(w, C2()) + c1 * c2
                if acc.is_zero:
                    out.pop(w, None)
                else:
                    out[w] = acc
        p = NcPoly.__new__(NcPoly)
        p._terms = out
        return p

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, NcPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = {THETA: "th", THETA_STAR: "th*"}
        parts = []
        for w, c in sorted(self._terms.items()):
            wtxt = " ".join(names[l] for l in w) or "1"
            parts.append(f"[{c}] {wtxt}")
        return "  +  ".join(parts)


def nc_star(h: NcPoly) -> NcPoly:
    """The involution: reverse each word, swap theta <-> theta*, conjugate."""
    out: dict[Word, C2] = {}
    for w, c in h.items():
        sw = tuple(1 - letter for letter in reversed(w))
        acc = out.get(sw, C2()) + c.conj()
        if acc.is_zero:
            out.pop(sw, None)
        else:
            out[sw] = acc
    p = NcPoly.__new__(NcPoly)
    p._terms = out
    return p


def is_star_symmetric(h: NcPoly) -> bool:
    return nc_star(h) == h


# position and momentum lifts: q = (th + th*)/sqrt2, p = (th - th*)/(i sqrt2)
_Q_HAT = NcPoly({(THETA,): C2.inv_sqrt2(), (THETA_STAR,): C2.inv_sqrt2()})
_P_HAT = NcPoly({
    # 1/(i sqrt2) = -i/sqrt2 = -i sqrt2/2
    (THETA,): C2(ib=Fraction(-1, 2)),
    (THETA_STAR,): C2(ib=Fraction(1, 2)),
})


def weyl_lift(a: int, b: int) -> NcPoly:
    """Symmetrized lift of the classical monomial x^a xi^b.

    Averages the products of a copies of q-hat and b copies of p-hat over
    all distinct orderings, weighting by multiplicity (equivalently 1/(a+b)!
    over all permutations).
    """
    if a < 0 or b < 0:
        raise ValueError("exponents must be non-negative")
    if a + b == 0:
        return NcPoly.const(1)
    letters = ["q"] * a + ["p"] * b
    total = NcPoly.zero()
    for arrangement in sorted(set(itertools.permutations(letters))):
        prod = NcPoly.const(1)
        for letter in arrangement:
            prod = prod * (_Q_HAT if letter == "q" else _P_HAT)
        total = total + prod
    weight = Fraction(math.factorial(a) * math.factorial(b), math.factorial(a + b))
    return total * weight


_ANNIHILATE = RawOp.from_coeffs([Poly.var("x"), Poly.const(1)])   # M_x + d
_CREATE = RawOp.from_coeffs([Poly.var("x"), Poly.const(-1)])      # M_x - d


def quantize(h: NcPoly) -> RawOp:
    """Substitute the hbar ladder operators and land in Q[x, s].

    Each length-k word contributes s^k (sqrt2)^-k times a product of
    (M_x +- d); the imaginary part and the sqrt(2)-odd part of the total
    must vanish identically, otherwise the input has no rational-coefficient
    quantization and an error is raised.
    """
    # four accumulators per derivative order: Q(i, sqrt2)-parts with Poly entries
    parts: dict[str, list[Poly]] = {p: [] for p in ("ra", "ia", "rb", "ib")}

    def _ensure(order):
        for lst in parts.values():
            while len(lst) <= order:
                lst.append(Poly.zero())

    for word, coeff in h.items():
        k = len(word)
        op = RawOp.identity()
        for letter in word:
            op = opalg.compose(op, _ANNIHILATE if letter == THETA else _CREATE)
        # fold in (sqrt2)^-k
        half, odd = divmod(k, 2)
        scale = Fraction(1, 2**half)
        c = coeff * (C2(rb=scale * Fraction(1, 2)) if odd else C2.rational(scale))
        sk = Poly.var("s") ** k
        _ensure(op.order)
        for t, a in enumerate(op.coeffs):
            if a.is_zero:
                continue
            contrib = sk * a
            for name in ("ra", "ia", "rb", "ib"):
                q = getattr(c, name)
                if q:
                    parts[name][t] = parts[name][t] + q * contrib

    if any(not p.is_zero for p in parts["ia"]) or any(
        not p.is_zero for p in parts["ib"]
    ):
        raise NonRealError("quantized operator has a residual imaginary part")
    if any(not p.is_zero for p in parts["rb"]):
        raise NormalizationError(
            "quantized operator has a residual half-integer power of sqrt(2)"
        )
    return RawOp.from_coeffs(parts["ra"] or [Poly.zero()])


def quantize_divergence(h: NcPoly) -> DivOp:
    """Divergence family of a star-symmetric H: the f_l with
    b_l = s^(2l) f_l(s, s x)."""
    if not is_star_symmetric(h):
        raise SymmetryError("H is not star-symmetric")
    raw = quantize(h)
    div = structure.divergence_from_raw(raw)
    fam = [structure.hbar_unscale(b, l) for l, b in enumerate(div.coeffs)]
    return DivOp.from_coeffs(fam)
