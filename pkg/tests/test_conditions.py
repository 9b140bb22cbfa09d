import math
import random
from fractions import Fraction

import numpy as np
import pytest

from symdiffop import conditions
from symdiffop.conditions import (
    check_assumption1,
    degree_drop_check,
    dominate,
    hbar_grid,
    lower_order_bound,
    remainder_margin,
    sandwich_constant,
    sqrt_eval,
    sqrt_sign,
)
from symdiffop.errors import DegreeError, PositivityError
from symdiffop.opalg import DivOp
from symdiffop.poly import Poly

from conftest import random_divop

P = Poly.parse


# -- exact sqrt(hbar) arithmetic -------------------------------------------------


def test_sqrt_eval_splits_parity():
    p = P("s^3 - 2*s^2 + s - 5")
    even, odd = sqrt_eval(p, Fraction(1, 4))
    # s = 1/2: s^3 = h s, s^2 = h, s = s
    assert even == -2 * Fraction(1, 4) - 5
    assert odd == Fraction(1, 4) + 1


def test_sqrt_sign_cases():
    h = Fraction(2)
    assert sqrt_sign(Fraction(1), Fraction(0), h) == 1
    assert sqrt_sign(Fraction(0), Fraction(-1), h) == -1
    # 3 - 2*sqrt(2) > 0 but 2 - 2*sqrt(2) < 0
    assert sqrt_sign(Fraction(3), Fraction(-2), h) == 1
    assert sqrt_sign(Fraction(2), Fraction(-2), h) == -1
    # exact cancellation with rational sqrt: 2 - 2*sqrt(1) = 0
    assert sqrt_sign(Fraction(2), Fraction(-2), Fraction(1)) == 0


# -- Assumption 1 -----------------------------------------------------------------


def test_harmonic_family_passes(harmonic_family):
    rep = check_assumption1(harmonic_family, 1.0)
    assert rep.passed
    assert rep.degree_chain_ok and rep.relaxed_chain_ok
    assert rep.c_bm == pytest.approx(0.5, abs=1e-9)
    assert rep.c_alpha == pytest.approx(0.5, abs=1e-9)
    assert rep.scope == "grid-certified"


def test_odd_degree_fails():
    rep = check_assumption1(DivOp.from_coeffs([P("x^3")]), 1.0)
    assert not rep.passed
    assert any("odd" in f for f in rep.failures)


def test_strict_fails_relaxed_passes():
    fam = DivOp.from_coeffs([P("x^2+1"), P("x^4+1")])
    strict = check_assumption1(fam, 1.0, mode="strict")
    relaxed = check_assumption1(fam, 1.0, mode="relaxed")
    assert not strict.degree_chain_ok
    assert strict.relaxed_chain_ok and relaxed.relaxed_chain_ok
    assert not strict.passed
    assert relaxed.passed


def test_weyl_family_fails_uniform_positivity():
    # quantize_divergence(weyl_lift(2,2)) family: b1 = x^2 has infimum 0,
    # so the uniform positivity constant vanishes and the report must say so
    fam = DivOp.from_coeffs([P("-1/2*s^4"), P("x^2")])
    rep = check_assumption1(fam, 1.0, mode="relaxed")
    assert rep.relaxed_chain_ok
    assert rep.c_bm == pytest.approx(0.0, abs=1e-12)
    assert not rep.passed
    assert any("c_bm" in f for f in rep.failures)


def test_strict_implies_relaxed():
    rng = random.Random(101)
    for _ in range(30):
        fam = random_divop(rng, 2, 4, vars=("x", "s"))
        rep = check_assumption1(fam, 1.0)
        if rep.degree_chain_ok:
            assert rep.relaxed_chain_ok


# -- dominate ----------------------------------------------------------------------


def test_dominate_strict_zero_constant():
    res = dominate(P("x^2"), P("x^4+1"), (0.0, 1.0), "strict", eps=1.0)
    assert res.constant == pytest.approx(0.0, abs=1e-8)


def test_dominate_equal_degree():
    res = dominate(P("x^4"), P("x^4+1"), (0.0, 1.0), "equal-degree")
    assert res.factor == pytest.approx(1.0, abs=1e-8)
    assert res.constant == pytest.approx(0.0, abs=1e-8)


def test_dominate_strict_unit():
    res = dominate(P("1"), P("x^2"), (0.0, 1.0), "strict", eps=1.0)
    assert res.constant == pytest.approx(1.0, abs=1e-8)


def test_dominate_degree_precondition():
    with pytest.raises(DegreeError):
        dominate(P("x^4"), P("x^2"), (0.0, 1.0), "strict")
    with pytest.raises(DegreeError):
        dominate(P("x"), P("x^3"), (0.0, 1.0), "strict")


def test_dominate_positivity_precondition():
    with pytest.raises(PositivityError):
        dominate(P("x"), P("-x^2"), (0.0, 1.0), "strict")


def test_dominate_holds_on_fresh_grid():
    rng = random.Random(103)
    for _ in range(15):
        p = Poly.monomial(rng.randint(1, 3), x=4) + Poly.const(rng.randint(0, 3))
        q = Poly.monomial(rng.randint(-3, 3), x=rng.randint(0, 3))
        res = dominate(q, p, (0.0, 1.0), "strict", eps=0.5)
        for _ in range(200):
            x = rng.uniform(-30, 30)
            qq = abs(q.eval_float(x=x))
            pp = p.eval_float(x=x)
            assert qq <= 0.5 * pp + res.constant + 1e-7 * (1 + abs(pp))


# -- scalar bound ------------------------------------------------------------------


def test_lower_order_examples():
    assert lower_order_bound([1], 1, 1.0) == pytest.approx(1.0, abs=1e-8)
    assert lower_order_bound([0, 2], 2, 1.0) == pytest.approx(1.0, abs=1e-8)
    assert lower_order_bound([0], 3, 1.0) == pytest.approx(0.0, abs=1e-8)


def test_lower_order_grid_invariant():
    rng = random.Random(107)
    for _ in range(20):
        M = rng.randint(1, 4)
        cs = [rng.uniform(-3, 3) for _ in range(M)]
        delta = rng.uniform(0.1, 2.0)
        bound = lower_order_bound(cs, M, delta)
        w = np.linspace(0.0, 50.0, 10_000)
        lhs = sum(c * w**l for l, c in enumerate(cs))
        assert float((lhs - delta * w**M - bound).max()) <= 1e-9


# -- remainder margin ---------------------------------------------------------------


def test_remainder_margin_harmonic(harmonic_family):
    # R_{1,hbar} = 0 but R_{0,hbar} = -hbar^2/2, so the certified constant
    # is hbar^2/2 at the zero of calB_0, maximized at hbar = 1
    c = remainder_margin(harmonic_family, 2, eps=0.5)
    assert c == pytest.approx(0.5, abs=1e-6)


def test_remainder_margin_n1_vanishes(quartic_pair):
    assert remainder_margin(quartic_pair, 1, eps=0.5) == 0.0


def test_remainder_margin_finite():
    fam = DivOp.from_coeffs([P("x^4"), P("x^2+1")])
    c = remainder_margin(fam, 2, eps=0.5)
    assert 0.0 < c < 1e4


def test_remainder_margin_bounds_on_fresh_grid():
    from symdiffop.structure import scaled_power_div

    fam = DivOp.from_coeffs([P("x^4+1"), P("x^2+1")])
    c = remainder_margin(fam, 2, eps=0.5)
    dec = scaled_power_div(fam, 2)
    rng = random.Random(109)
    for _ in range(300):
        h = rng.uniform(1e-6, 1.0)
        x = rng.uniform(-20, 20)
        s = math.sqrt(h)
        for l in range(len(dec.B)):
            r = abs(dec.R[l].eval_float(x=x, s=s))
            cb = dec.calB[l].eval_float(x=x, s=s)
            assert r <= 0.5 * cb + c + 1e-6 * (1 + abs(cb))


def test_sandwich_constant_chain(quartic_pair):
    fam = DivOp.from_coeffs([P("x^4+1"), P("x^2+1")])
    c = sandwich_constant(fam, 2)
    # chain bound dominates the bare remainder margin
    assert c >= remainder_margin(fam, 2, eps=0.5)


# -- degree drop -------------------------------------------------------------------


def test_degree_drop_examples(quartic_pair):
    rep = degree_drop_check(quartic_pair, 2, "strict")
    assert rep.ok
    relaxed_fam = DivOp.from_coeffs([P("x^2+1"), P("x^4+1")])
    rep2 = degree_drop_check(relaxed_fam, 2, "relaxed")
    assert rep2.ok
    rep3 = degree_drop_check(DivOp.from_coeffs([P("2"), P("3")]), 3, "strict")
    assert rep3.ok


def test_hbar_grid_shape():
    grid = hbar_grid(1.0)
    assert all(0 < float(h) <= 1.0 for h in grid)
    assert Fraction(1) in grid
    assert min(float(h) for h in grid) < 1e-8
