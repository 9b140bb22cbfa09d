"""Machine-checkable hypotheses on hbar-families of divergence operators.

Degree chains are decided exactly per grid point (values at s = sqrt(hbar)
are held as E + O*sqrt(hbar) with rational E, O); the positivity and
domination constants are certified on the sample grid only and every
report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegreeError, PositivityError
from .opalg import DivOp
from .poly import NEG_INF, Poly, global_min
from .structure import scaled_power_div

#: absolute slack added to every grid-certified constant
MARGIN = 1e-9

GRID_SAMPLES = 32


def hbar_grid(eta: float, samples: int = GRID_SAMPLES) -> list[Fraction]:
    """Geometric grid in (0, eta], endpoint-guarded, as exact rationals.

    Ratio 7/10 spans almost five decades over 32 samples; a near-zero
    guard point stands in for the open lower endpoint.
    """
    top = Fraction(eta)
    pts = [top * Fraction(7, 10) ** k for k in range(samples)]
    pts.append(top)
    pts.append(top / 10**9)
    return sorted(set(pts))


# -- exact evaluation at s = sqrt(hbar) --------------------------------------


def sqrt_eval(p: Poly, hbar: Fraction) -> tuple[Fraction, Fraction]:
    """Value of p (a polynomial in s alone) at s = sqrt(hbar), as E + O*sqrt(hbar)."""
    even = Fraction(0)
    odd = Fraction(0)
    for exps, c in p.items():
        ex, exi, es = exps
        if ex or exi:
            raise ValueError("sqrt_eval expects a polynomial in s alone")
        half, rem = divmod(es, 2)
        if rem:
            odd += c * hbar**half
        else:
            even += c * hbar**half
    return even, odd


def sqrt_sign(even: Fraction, odd: Fraction, hbar: Fraction) -> int:
    """Exact sign of E + O*sqrt(hbar)."""
    if not even and not odd:
        return 0
    if not odd:
        return 1 if even > 0 else -1
    if not even:
        return 1 if odd > 0 else -1
    d = even * even - hbar * odd * odd
    if d > 0:
        return 1 if even > 0 else -1
    if d < 0:
        return 1 if odd > 0 else -1
    # magnitudes tie: zero when signs oppose, else the common sign
    return 0 if (even > 0) != (odd > 0) else (1 if even > 0 else -1)


def _degree_x_at(poly: Poly, hbar: Fraction):
    """Exact x-degree of a family polynomial at a specific hbar."""
    best = NEG_INF
    for power, cp in poly.coeffs_in("x").items():
        if sqrt_sign(*sqrt_eval(cp, hbar), hbar) != 0 and power > best:
            best = power
    return best


# -- Assumption 1 ------------------------------------------------------------


@dataclass
class FamilyReport:
    eta: float
    degree_chain_ok: bool
    relaxed_chain_ok: bool
    c_bm: float
    c_alpha: float
    failures: list[str] = field(default_factory=list)
    scope: str = "grid-certified"

    @property
    def passed(self) -> bool:
        return not self.failures


def check_assumption1(family: DivOp, eta: float, mode: str = "strict") -> FamilyReport:
    """Check the degree-chain, even-degree and uniform-positivity hypotheses.

    mode selects which degree chain (strict: non-increasing; relaxed: may
    grow by two per step) counts toward pass/fail; both results are
    reported.  Failures are collected, never thrown.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if mode not in ("strict", "relaxed"):
        raise ValueError("mode must be 'strict' or 'relaxed'")
    grid = hbar_grid(eta)
    failures: list[str] = []

    # exact per-hbar degrees, checked for constancy and evenness
    degrees: list = []
    for l, b in enumerate(family.coeffs):
        degs = {(_degree_x_at(b, h)) for h in grid}
        if len(degs) > 1:
            failures.append(f"b_{l}: x-degree varies over the hbar grid: {sorted(degs)}")
        d = max(degs)
        degrees.append(d)
        if d != NEG_INF and int(d) % 2:
            failures.append(f"b_{l}: odd x-degree {int(d)}")

    strict_ok = True
    relaxed_ok = True
    for l in range(1, len(degrees)):
        lo, hi = degrees[l - 1], degrees[l]
        if hi == NEG_INF:
            continue
        if lo == NEG_INF or hi > lo:
            strict_ok = False
        if lo == NEG_INF or hi > lo + 2:
            relaxed_ok = False
    if not (strict_ok if mode == "strict" else relaxed_ok):
        failures.append(f"degree chain fails in {mode} mode")

    # c_bm: uniform positivity of the top coefficient
    c_bm = math.inf
    bm = family.coeffs[-1]
    for h in grid:
        p = bm.substitute_values(s=_sqrt_as_fraction(h))
        gm = global_min(p)
        if gm is None:
            c_bm = -math.inf
            failures.append(f"b_m unbounded below at hbar={float(h):g}")
            break
        c_bm = min(c_bm, gm.value)
    if c_bm <= 0:
        failures.append(f"c_bm = {c_bm:g} is not strictly positive")

    # c_alpha: uniform positivity of every leading coefficient
    c_alpha = math.inf
    for l, b in enumerate(family.coeffs):
        d = degrees[l]
        if d == NEG_INF:
            continue
        lead = b.coeff_of("x", int(d))
        for h in grid:
            even, odd = sqrt_eval(lead, h)
            value = float(even) + float(odd) * math.sqrt(float(h))
            c_alpha = min(c_alpha, value)
    if c_alpha <= 0:
        failures.append(f"c_alpha = {c_alpha:g} is not strictly positive")

    return FamilyReport(
        eta=eta,
        degree_chain_ok=strict_ok,
        relaxed_chain_ok=relaxed_ok,
        c_bm=c_bm if c_bm != math.inf else float("nan"),
        c_alpha=c_alpha if c_alpha != math.inf else float("nan"),
        failures=failures,
    )


def _sqrt_as_fraction(h: Fraction) -> Fraction:
    return Fraction(math.sqrt(float(h)))


def _sqrt_value(p_in_s: Poly, h: Fraction) -> float:
    even, odd = sqrt_eval(p_in_s, h)
    return float(even) + float(odd) * math.sqrt(float(h))


# -- polynomial domination ----------------------------------------------------


def _sup_upper(coeffs: np.ndarray) -> float:
    """Supremum over the reals of a polynomial, +inf unless it tends to -inf.

    Candidates are the real critical points plus a coarse guard grid.
    """
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if coeffs.size == 0:
        return 0.0
    if coeffs.size == 1:
        return float(coeffs[0])
    degree = coeffs.size - 1
    if degree % 2 or coeffs[-1] > 0:
        return math.inf
    desc = coeffs[::-1]
    deriv = np.polyder(desc)
    best = -math.inf
    for r in np.roots(deriv):
        if abs(r.imag) < 1e-6 * (1 + abs(r)):
            best = max(best, float(np.polyval(desc, r.real)))
    guard = np.linspace(-50.0, 50.0, 501)
    best = max(best, float(np.polyval(desc, guard).max()))
    return best


def _xcoeffs_at(p: Poly, h: Fraction) -> np.ndarray:
    return p.substitute_values(s=_sqrt_as_fraction(h)).x_coeffs_float()


@dataclass(frozen=True)
class DominateResult:
    mode: str
    factor: float          # epsilon (strict) or D (equal-degree)
    constant: float        # C_eps or E
    scope: str = "grid-certified"


def dominate(
    q: Poly,
    p: Poly,
    interval: tuple[float, float],
    mode: str = "strict",
    eps: float = 1.0,
) -> DominateResult:
    """Grid-certified constants with |q| <= factor * p + constant.

    strict mode keeps the requested epsilon and returns C_eps; equal-degree
    mode picks D from the leading-coefficient ratio and returns (D, E).
    The family parameter is hbar, sampled on a geometric grid over the
    interval.
    """
    dp = p.degree("x")
    dq = q.degree("x")
    if dp == NEG_INF or int(dp) % 2:
        raise DegreeError("p must have even x-degree")
    lo, hi = interval
    grid = [h for h in hbar_grid(hi) if float(h) >= lo] or [Fraction(hi)]
    lead_p = [_sqrt_value(p.coeff_of("x", int(dp)), h) for h in grid]
    if min(lead_p) <= 0:
        raise PositivityError("leading coefficient of p is not positive on the interval")

    if mode == "strict":
        if not (dq < dp):
            raise DegreeError("strict mode needs deg q < deg p")
        factor = eps
    elif mode == "equal-degree":
        if dq > dp:
            raise DegreeError("equal-degree mode needs deg q <= deg p")
        ratio = 0.0
        if dq == dp:
            for h, lp in zip(grid, lead_p):
                lq = abs(_sqrt_value(q.coeff_of("x", int(dq)), h))
                ratio = max(ratio, lq / lp)
        factor = ratio + MARGIN
    else:
        raise ValueError("mode must be 'strict' or 'equal-degree'")

    worst = -math.inf
    for h in grid:
        qa = _xcoeffs_at(q, h)
        pa = _xcoeffs_at(p, h)
        n = max(qa.size, pa.size)
        qa = np.pad(qa, (0, n - qa.size))
        pa = np.pad(pa, (0, n - pa.size))
        worst = max(worst, _sup_upper(qa - factor * pa), _sup_upper(-qa - factor * pa))
    constant = max(0.0, worst + MARGIN)
    return DominateResult(mode=mode, factor=factor, constant=constant)


def lower_order_bound(c: list, M: int, delta: float) -> float:
    """C with sum_{l<M} c_l w^l <= delta w^M + C for all w >= 0."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    coeffs = np.zeros(M + 1)
    for l, cl in enumerate(c[:M]):
        coeffs[l] = float(cl)
    coeffs[M] -= float(delta)
    # maximize over w >= 0 only
    desc = coeffs[::-1]
    deriv = np.polyder(desc)
    best = float(np.polyval(desc, 0.0))
    for r in np.roots(deriv) if deriv.size else []:
        if abs(r.imag) < 1e-6 * (1 + abs(r)) and r.real > 0:
            best = max(best, float(np.polyval(desc, r.real)))
    return max(0.0, best + MARGIN)


def remainder_margin(
    family: DivOp, n: int, eps: float = 0.5, eta: float = 1.0
) -> float:
    """Grid-certified C with |R_{l,hbar}| <= eps * calB_{l,hbar} + C for all l."""
    dec = scaled_power_div(family, n)
    worst = -math.inf
    grid = hbar_grid(eta)
    for l in range(len(dec.B)):
        R = dec.R[l]
        calB = dec.calB[l]
        if R.is_zero:
            continue
        for h in grid:
            ra = _xcoeffs_at(R, h)
            ba = _xcoeffs_at(calB, h)
            m = max(ra.size, ba.size)
            ra = np.pad(ra, (0, m - ra.size))
            ba = np.pad(ba, (0, m - ba.size))
            worst = max(worst, _sup_upper(ra - eps * ba), _sup_upper(-ra - eps * ba))
    if worst == -math.inf:
        return 0.0
    return max(0.0, worst + MARGIN)


def sandwich_constant(
    family: DivOp, n: int, eta: float = 1.0, eps: float = 0.5
) -> float:
    """Constant c making the frozen-coefficient operator sandwich the power.

    Follows the proof chain: the remainder margin C_eps feeds the scalar
    bound max_w(sum_{l<mn} C_eps w^l - delta w^mn) with
    delta = c_bm^n / 2, and twice that maximum bounds the quadratic-form
    error by half of <(calL + c) psi, psi>.
    """
    report = check_assumption1(family, eta)
    if not report.passed:
        raise PositivityError(f"family fails Assumption-1 checks: {report.failures}")
    c_eps = remainder_margin(family, n, eps=eps, eta=eta)
    mn = family.m * n
    if mn == 0:
        return 2.0 * c_eps
    delta = 0.5 * report.c_bm**n
    return 2.0 * lower_order_bound([c_eps] * mn, mn, delta)


@dataclass(frozen=True)
class DegreeReport:
    mode: str
    ok: bool
    per_l: tuple[bool, ...]


def degree_drop_check(div: DivOp, n: int, mode: str = "strict") -> DegreeReport:
    """Degree law for the remainder: deg R_l <= deg calB_l - 2 (strict)
    or <= deg calB_l (relaxed), degrees in x with -inf handled.  Strict
    mode also asserts deg B_l = deg calB_l."""
    from .structure import power_div_coeffs

    if mode not in ("strict", "relaxed"):
        raise ValueError("mode must be 'strict' or 'relaxed'")
    dec = power_div_coeffs(div, n)
    slack = -2 if mode == "strict" else 0
    flags = []
    for l in range(len(dec.B)):
        dr = dec.R[l].degree("x")
        db = dec.calB[l].degree("x")
        if dr == NEG_INF:
            ok = True
        elif db == NEG_INF:
            ok = False
        else:
            ok = dr <= db + slack
        if mode == "strict" and ok:
            ok = dec.B[l].degree("x") == db
        flags.append(ok)
    return DegreeReport(mode=mode, ok=all(flags), per_l=tuple(flags))
