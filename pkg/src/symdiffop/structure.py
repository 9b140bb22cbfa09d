"""Structure transforms for symmetric operators and their powers.

Covers the raw <-> divergence conversion with its combinatorial K-tables,
the frozen-coefficient/remainder split of operator powers, and the
hbar-scaled versions of all of it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import opalg
from .errors import ConsistencyError, OrderError, SymmetryError
from .opalg import DivOp, RawOp
from .poly import Poly


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


# ---------------------------------------------------------------------------
# combinatorial tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureConstants:
    """C_n and K tables for half-order m.

    C_n(r, s) is the nested-binomial chain sum over r < k_1 < ... < k_{n-1} < s;
    K(r, s) = sum_{n=1}^{m-1} (-1)^n C_n(r, s).  Entries not stored are zero.
    """

    m: int
    C: dict[tuple[int, int, int], int]
    K: dict[tuple[int, int], int]

    def c(self, n: int, r: int, s: int) -> int:
        return self.C.get((n, r, s), 0)

    def k(self, r: int, s: int) -> int:
        return self.K.get((r, s), 0)


def _chain_sum(n: int, r: int, s: int) -> int:
    """Sum over strictly increasing chains r < k_1 < ... < k_{n-1} < s."""
    if n == 1:
        return _binom(s, 2 * r - s) if r < s else 0
    total = 0
    interior = range(r + 1, s)
    for ks in itertools.combinations(interior, n - 1):
        prev = r
        prod = 1
        for k in ks:
            prod *= _binom(k, 2 * prev - k)
            if prod == 0:
                break
            prev = k
        if prod:
            prod *= _binom(s, 2 * prev - s)
        total += prod
    return total


def _nilpotent_k_table(m: int) -> dict[tuple[int, int], int]:
    """K-table by inverting I + V for the nilpotent band matrix V.

    V[r, k] = binom(k, 2r - k) for r < k encodes the derivative-free part of
    the conversion matrix; (I + V)^-1 - I = sum_{n>=1} (-V)^n.  Exact integer
    matrix arithmetic.
    """
    size = m + 1
    V = [[_binom(k, 2 * r - k) if r < k else 0 for k in range(size)] for r in range(size)]
    acc = [[0] * size for _ in range(size)]
    poweR = [[int(r == k) for k in range(size)] for r in range(size)]
    for n in range(1, max(m, 1)):
        nxt = [[0] * size for _ in range(size)]
        for r in range(size):
            row = poweR[r]
            for t in range(size):
                vrt = row[t]
                if vrt:
                    vt = V[t]
                    for k in range(size):
                        if vt[k]:
                            nxt[r][k] += vrt * vt[k]
        poweR = nxt
        sign = -1 if n % 2 else 1
        for r in range(size):
            for k in range(size):
                acc[r][k] += sign * poweR[r][k]
    return {
        (r, k): acc[r][k] for r in range(size) for k in range(size) if acc[r][k]
    }


def structure_constants(m: int) -> StructureConstants:
    """Build the C_n/K tables, cross-checked against matrix inversion."""
    if m < 0:
        raise ValueError("m must be non-negative")
    C: dict[tuple[int, int, int], int] = {}
    K: dict[tuple[int, int], int] = {}
    for n in range(1, max(m, 1)):
        for r in range(m + 1):
            for s in range(m + 1):
                val = _chain_sum(n, r, s)
                if val:
                    C[(n, r, s)] = val
                    K[(r, s)] = K.get((r, s), 0) + (-1 if n % 2 else 1) * val
    K = {rs: v for rs, v in K.items() if v}
    if K != _nilpotent_k_table(m):
        raise ConsistencyError(
            f"K-table mismatch between chain sums and matrix inversion at m={m}"
        )
    return StructureConstants(m=m, C=C, K=K)


# ---------------------------------------------------------------------------
# raw <-> divergence
# ---------------------------------------------------------------------------


def raw_from_divergence(div: DivOp) -> RawOp:
    """a_k = sum_l binom(l, k-l) (-1)^l d^(2l-k) b_l."""
    m = div.m
    out = [Poly.zero() for _ in range(2 * m + 1)]
    for l, b in enumerate(div.coeffs):
        if b.is_zero:
            continue
        sign = -1 if l % 2 else 1
        for k in range(l, 2 * l + 1):
            c = _binom(l, k - l)
            if c:
                out[k] = out[k] + sign * c * b.derive("x", 2 * l - k)
    return RawOp.from_coeffs(out)


def divergence_from_raw(op: RawOp) -> DivOp:
    """Extract b_r from a symmetric raw operator via the K-table.

    (-1)^r b_r = a_{2r} + sum_{r<s<=m} K(r, s) d^(2(s-r)) a_{2s}.
    """
    if op.order % 2:
        raise OrderError("divergence form needs even order")
    if not opalg.is_symmetric(op):
        raise SymmetryError("operator is not symmetric; no divergence form")
    m = op.order // 2
    tables = structure_constants(m)
    out = []
    for r in range(m + 1):
        acc = op.coeff(2 * r)
        for s in range(r + 1, m + 1):
            k = tables.k(r, s)
            if k:
                acc = acc + k * op.coeff(2 * s).derive("x", 2 * (s - r))
        if r % 2:
            acc = -acc
        out.append(acc)
    return DivOp.from_coeffs(out)


# ---------------------------------------------------------------------------
# powers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerDecomposition:
    """Coefficient split of the n-th power of a divergence operator.

    A_k are raw coefficients, calB the frozen-coefficient products, T the
    raw remainders (A_k = (-1)^{k/2} calB_{k/2} [k even] + T_k), B the
    divergence coefficients and R = B - calB.  For the scaled variant the
    stored polynomials are the unscaled-argument family polynomials
    B_{l,hbar}(x) etc., with the (-hbar)^l d^l B(sqrt(hbar) .) d^l
    convention documented in `scaled_power_div`.
    """

    n: int
    calB: tuple[Poly, ...]
    A: tuple[Poly, ...] | None = None
    T: tuple[Poly, ...] | None = None
    B: tuple[Poly, ...] | None = None
    R: tuple[Poly, ...] | None = None


def _frozen_products(div: DivOp, n: int) -> tuple[Poly, ...]:
    """calB_l = sum over |j| = l of b_{j_1} ... b_{j_n}."""
    m = div.m
    out = [Poly.zero() for _ in range(m * n + 1)]
    for js in itertools.product(range(m + 1), repeat=n):
        prod = Poly.const(1)
        for j in js:
            prod = prod * div.coeff(j)
            if prod.is_zero:
                break
        if not prod.is_zero:
            out[sum(js)] = out[sum(js)] + prod
    return tuple(out)


def _word_applied_to_one(div: DivOp, q, ls, js) -> Poly:
    """Apply (d^{l_n} M_{b_{q_n}} d^{j_n}) ... (d^{l_1} M_{b_{q_1}} d^{j_1}) to 1.

    Index 1 is the rightmost (first-applied) factor; j_1 = 0 is assumed.
    """
    p = div.coeff(q[0]).derive("x", ls[0])
    for i in range(1, len(q)):
        if p.is_zero:
            return p
        p = (div.coeff(q[i]) * p.derive("x", js[i])).derive("x", ls[i])
    return p


def _raw_remainders(div: DivOp, n: int) -> tuple[Poly, ...]:
    """T_k by direct enumeration of the (q, l, j) multi-index words."""
    m = div.m
    out = [Poly.zero() for _ in range(2 * m * n + 1)]
    nonzero = [not div.coeff(q).is_zero for q in range(m + 1)]
    for q in itertools.product(range(m + 1), repeat=n):
        if not all(nonzero[qi] for qi in q):
            continue
        sq = sum(q)
        sign = -1 if sq % 2 else 1
        l_ranges = [range(qi + 1) for qi in q]
        j_ranges = [range(1)] + [range(qi + 1) for qi in q[1:]]
        for ls in itertools.product(*l_ranges):
            cl = 1
            for qi, li in zip(q, ls):
                cl *= _binom(qi, li)
            if cl == 0:
                continue
            for js in itertools.product(*j_ranges):
                weight = sum(ls) + sum(js)
                if weight == 0:
                    continue
                k = 2 * sq - weight
                cj = cl
                for qi, ji in zip(q, js):
                    cj *= _binom(qi, ji)
                if cj == 0:
                    continue
                word = _word_applied_to_one(div, q, ls, js)
                if not word.is_zero:
                    out[k] = out[k] + sign * cj * word
    return tuple(out)


def power_raw_coeffs(div: DivOp, n: int) -> PowerDecomposition:
    """A_k, calB_l and T_k of the n-th power, split as A = +-calB + T."""
    if n < 1:
        raise ValueError("n must be at least 1")
    calB = _frozen_products(div, n)
    T = _raw_remainders(div, n)
    A = []
    for k in range(2 * div.m * n + 1):
        a = T[k]
        if k % 2 == 0:
            sign = -1 if (k // 2) % 2 else 1
            a = a + sign * calB[k // 2]
        A.append(a)
    return PowerDecomposition(n=n, calB=calB, A=tuple(A), T=T)


def power_div_coeffs(div: DivOp, n: int) -> PowerDecomposition:
    """Divergence coefficients B_l of the n-th power and the split B = calB + R."""
    dec = power_raw_coeffs(div, n)
    mn = div.m * n
    tables = structure_constants(mn)
    A = dec.A
    B = []
    for l in range(mn + 1):
        acc = A[2 * l]
        for s in range(l + 1, mn + 1):
            k = tables.k(l, s)
            if k:
                acc = acc + k * A[2 * s].derive("x", 2 * (s - l))
        if l % 2:
            acc = -acc
        B.append(acc)
    R = tuple(B[l] - dec.calB[l] for l in range(mn + 1))
    return PowerDecomposition(n=n, calB=dec.calB, A=A, T=dec.T, B=tuple(B), R=R)


# ---------------------------------------------------------------------------
# hbar scaling
# ---------------------------------------------------------------------------

_S = Poly.var("s")
_SX = Poly.var("s") * Poly.var("x")


def scale_hbar(div: DivOp) -> DivOp:
    """Family coefficients of L_hbar: l-th coefficient s^(2l) b_l(s x, s).

    With hbar = s^2 this realizes sum_l (-hbar)^l d^l b_{l,hbar}(sqrt(hbar) .) d^l
    as a plain divergence operator in (x, s).
    """
    out = []
    for l, b in enumerate(div.coeffs):
        out.append((_S ** (2 * l)) * b.substitute({"x": _SX}))
    return DivOp.from_coeffs(out)


def hbar_unscale(p: Poly, l: int) -> Poly:
    """Invert q(x, s) = s^(2l) f(s x, s): recover f from q.

    Monomial-wise x^i s^j -> x^i s^(j - 2l - i); raises if q is not of the
    scaled shape.
    """
    out = {}
    for exps, c in p.items():
        ex, exi, es = exps
        if exi:
            raise ValueError("unexpected xi dependence")
        js = es - 2 * l - ex
        if js < 0:
            raise ValueError(
                f"polynomial is not s^{2 * l} * f(s*x, s): term x^{ex} s^{es}"
            )
        out[(ex, 0, js)] = c
    return Poly(out)


def scaled_power_div(div: DivOp, n: int) -> PowerDecomposition:
    """Family split B_{l,hbar} = calB_{l,hbar} + R_{l,hbar} of L_hbar^n.

    Input coefficients are the family polynomials b_{l,hbar}(x) as Polys in
    (x, s); the result stores the unscaled-argument polynomials, so that
    L_hbar^n = sum_l (-hbar)^l d^l B_{l,hbar}(sqrt(hbar) .) d^l.  The
    frozen part is computed twice (directly as products and by unscaling
    the composed power) and must agree.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    scaled = power_div_coeffs(scale_hbar(div), n)
    calB_direct = _frozen_products(div, n)
    B = tuple(hbar_unscale(b, l) for l, b in enumerate(scaled.B))
    calB_unscaled = tuple(hbar_unscale(b, l) for l, b in enumerate(scaled.calB))
    if calB_unscaled != calB_direct:
        raise ConsistencyError("scaled frozen coefficients disagree with products")
    R = tuple(B[l] - calB_direct[l] for l in range(len(B)))
    return PowerDecomposition(n=n, calB=calB_direct, B=B, R=R)


def split_top(div: DivOp) -> tuple[DivOp, DivOp]:
    """Split into the top-order piece (-1)^m d^m b_m d^m and the rest."""
    m = div.m
    if m == 0:
        return div, DivOp.from_coeffs([Poly.zero()])
    top = [Poly.zero()] * m + [div.coeffs[m]]
    rest = list(div.coeffs[:m])
    return DivOp.from_coeffs(top), DivOp.from_coeffs(rest)
