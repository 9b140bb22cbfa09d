import random
from fractions import Fraction

import numpy as np
import pytest

from symdiffop import structure
from symdiffop.errors import ArityError, PositivityError
from symdiffop.opalg import DivOp, RawOp
from symdiffop.poly import Poly
from symdiffop.pseudiff import (
    RhoEvaluator,
    rho_l2_norm,
    rho_mu,
    self_adjoint_certificate,
    sigma_upper,
    symbol,
)

P = Poly.parse

NUMBER_FAMILY = DivOp.from_coeffs([P("1/2*x^2 - 1/2"), P("1/2")])
NUMBER_DEC = structure.power_raw_coeffs(NUMBER_FAMILY, 1)


# -- symbols -------------------------------------------------------------------


def test_symbol_minus_d2():
    s = symbol(RawOp.from_coeffs([P("0"), P("0"), P("-1")]))
    assert s.real == P("xi^2")
    assert s.imag.is_zero


def test_symbol_d():
    s = symbol(RawOp.derivative())
    assert s.real.is_zero
    assert s.imag == P("xi")


def test_symbol_number_operator():
    s = symbol(RawOp.from_coeffs([P("1/2*x^2 - 1/2"), P("0"), P("-1/2")]))
    assert s.real == P("1/2*xi^2 + 1/2*x^2 - 1/2")
    assert s.imag.is_zero


def test_symbol_requires_hbar_for_s():
    op = RawOp.from_coeffs([P("s^2*x")])
    with pytest.raises(ArityError):
        symbol(op)
    assert symbol(op, hbar=4.0).real == P("4*x")


def test_symbol_parity():
    # real part even in xi, imaginary part odd in xi, for any operator
    rng = random.Random(3)
    from conftest import random_poly

    for _ in range(10):
        op = RawOp.from_coeffs([random_poly(rng, 3) for _ in range(4)])
        s = symbol(op)
        for (ex, exi, es), _ in s.real.items():
            assert exi % 2 == 0
        for (ex, exi, es), _ in s.imag.items():
            assert exi % 2 == 1


# -- Sigma and the decomposition identities ---------------------------------------


def test_sigma_upper_quartic(quartic_pair):
    dec = structure.power_raw_coeffs(quartic_pair, 2)
    su = sigma_upper(dec)
    assert su.poly == P("x^8 + 2*x^6*xi^2 + x^4*xi^4")


def test_sigma_upper_constant_coefficients():
    dec = structure.power_raw_coeffs(DivOp.from_coeffs([P("2"), P("3")]), 2)
    su = sigma_upper(dec)
    raw = symbol(RawOp.from_coeffs(dec.A))
    assert raw.real == su.poly
    assert raw.imag.is_zero


def test_sigma_upper_n1(quartic_pair):
    dec = structure.power_raw_coeffs(quartic_pair, 1)
    assert sigma_upper(dec).poly == P("x^4 + x^2*xi^2")


def test_sigma_identity_random():
    rng = random.Random(5)
    from conftest import random_divop

    for _ in range(12):
        div = random_divop(rng, 2, 3)
        n = rng.randint(1, 2)
        sigma_upper(structure.power_raw_coeffs(div, n))  # raises on failure


# -- the Gamma recursion ------------------------------------------------------------


_FD_WEIGHTS = {
    1: {-1: Fraction(-1, 2), 1: Fraction(1, 2)},
    2: {-1: 1, 0: -2, 1: 1},
    3: {-2: Fraction(-1, 2), -1: 1, 1: -1, 2: Fraction(1, 2)},
    4: {-2: 1, -1: -4, 0: 6, 1: -4, 2: 1},
}


def _gamma_exact(sig, x: Fraction, xi: Fraction, c: Fraction,
                 mu: Fraction) -> tuple[Fraction, Fraction]:
    """Exact complex rational 1/(sigma + c + i mu)."""
    re = sig.real.evaluate(x=x, xi=xi) + c
    im = sig.imag.evaluate(x=x, xi=xi) + mu
    den = re * re + im * im
    return re / den, -im / den


def _fd_gamma(sig, j: int, x0: Fraction, xi: Fraction,
              c: Fraction, mu: Fraction, h: Fraction) -> complex:
    """Central difference of Gamma in x, in exact rational arithmetic."""
    re = Fraction(0)
    im = Fraction(0)
    for offset, w in _FD_WEIGHTS[j].items():
        gr, gi = _gamma_exact(sig, x0 + offset * h, xi, c, mu)
        re += w * gr
        im += w * gi
    scale = h**j
    return complex(float(re / scale), float(im / scale))


def test_gamma_recursion_vs_exact_differences():
    # number-operator instance at n = 2: operator order 4, so j runs to 4;
    # the FD oracle is exact rational, leaving pure O(h^2) truncation error
    dec = structure.power_raw_coeffs(NUMBER_FAMILY, 2)
    sig = symbol(RawOp.from_coeffs(dec.A))
    ev = RhoEvaluator(dec, 1.0)
    rng = random.Random(7)
    h = Fraction(1, 100_000)
    for _ in range(100):
        x = Fraction(rng.randint(-200, 200), 100)
        xi = Fraction(rng.randint(-200, 200), 100)
        mu = Fraction(rng.choice([0, 1, 3]))
        g = ev.gamma_derivatives(float(x), float(xi), float(mu))
        for j in range(1, 5):
            fd = _fd_gamma(sig, j, x, xi, Fraction(1), mu, h)
            err = abs(g[j] - fd)
            assert err <= 1e-6 * max(abs(g[j]), 1e-3)


def test_gamma_recursion_complex_symbol():
    # quartic at n = 1 carries an odd-xi symbol part (-2 x xi), exercising
    # the complex branch of the oracle
    dec = structure.power_raw_coeffs(DivOp.from_coeffs([P("x^4"), P("x^2")]), 1)
    sig = symbol(RawOp.from_coeffs(dec.A))
    assert sig.imag == P("-2*x*xi")
    ev = RhoEvaluator(dec, 2.0)
    h = Fraction(1, 100_000)
    for x, xi in [(Fraction(1, 2), Fraction(1)), (Fraction(-3, 4), Fraction(1, 3))]:
        g = ev.gamma_derivatives(float(x), float(xi), 1.0)
        for j in range(1, 3):
            fd = _fd_gamma(sig, j, x, xi, Fraction(2), Fraction(1), h)
            assert abs(g[j] - fd) <= 1e-6 * max(abs(g[j]), 1e-3)


# -- rho ------------------------------------------------------------------------------


def test_rho_constant_coefficients_vanishes():
    dec = structure.power_raw_coeffs(DivOp.from_coeffs([P("2"), P("3")]), 2)
    assert rho_mu(dec, 1.0, 0.3, 0.7, 5.0) == 0.0


def test_rho_number_plus_one_at_origin():
    # only the A_2 d_x^2 Gamma term survives: Gamma = 2, d^2 Gamma = -4
    val = rho_mu(NUMBER_DEC, 1.0, 0.0, 0.0, 0.0)
    assert val == pytest.approx(2.0 + 0.0j, abs=1e-12)


def test_rho_decays_in_mu():
    vals = [abs(rho_mu(NUMBER_DEC, 1.0, 1.0, 1.0, mu)) for mu in (0.0, 1e2, 1e4)]
    assert vals[1] < 1e-2 * vals[0]
    assert vals[2] < 1e-2 * vals[1]
    # both directions of the sweep
    assert abs(rho_mu(NUMBER_DEC, 1.0, 1.0, 1.0, -1e4)) < 1e-2 * vals[0]


def test_rho_positivity_guard():
    with pytest.raises(PositivityError):
        rho_mu(NUMBER_DEC, -10.0, 0.0, 0.0, 0.0)


# -- norms ----------------------------------------------------------------------------


def test_norm_constant_operator_zero():
    dec = structure.power_raw_coeffs(DivOp.from_coeffs([P("0"), P("1")]), 1)
    norm = rho_l2_norm(dec, 1.0, 0.0)
    assert norm.value == 0.0
    assert norm.tail_ok


def test_norm_decreases_with_mu():
    n0 = rho_l2_norm(NUMBER_DEC, 1.0, 0.0, grid_points=256)
    n100 = rho_l2_norm(NUMBER_DEC, 1.0, 100.0, grid_points=256)
    assert n100.value < n0.value


def test_norm_grid_stability():
    coarse = rho_l2_norm(NUMBER_DEC, 1.0, 0.0, box_radius=32.0, grid_points=256)
    fine = rho_l2_norm(NUMBER_DEC, 1.0, 0.0, box_radius=32.0, grid_points=512)
    assert abs(fine.value - coarse.value) < 0.01 * coarse.value
    assert fine.value <= coarse.value * 1.01


# -- certificate ----------------------------------------------------------------------


def test_certificate_laplacian():
    lap = DivOp.from_coeffs([P("0"), P("1")])
    rep = self_adjoint_certificate(lap, 1, c=1.0, grid_points=128)
    assert rep.mu_star == 0.0
    assert rep.norms[0.0].value == 0.0


def test_certificate_number_operator():
    rep = self_adjoint_certificate(NUMBER_FAMILY, 1, grid_points=256)
    assert rep.conclusive
    assert rep.mu_star is not None


def test_certificate_empty_schedule_inconclusive():
    rep = self_adjoint_certificate(NUMBER_FAMILY, 1, mu_schedule=(), grid_points=64)
    assert not rep.conclusive
    assert rep.scope == "inconclusive"


def test_certificate_hbar_resolution(harmonic_family):
    rep = self_adjoint_certificate(harmonic_family, 1, hbar=1.0, grid_points=128)
    assert rep.conclusive


def test_auto_shift_makes_symbol_positive():
    # once c exceeds the sampled minimum of Re sigma, the kappa > 0 guard
    # inside the evaluator holds across a wide box
    fam = DivOp.from_coeffs([P("x^4 - 3*x^2"), P("x^2 + 1")])
    rep = self_adjoint_certificate(fam, 1, grid_points=64, mu_schedule=(0.0,))
    ev = RhoEvaluator(structure.power_raw_coeffs(fam, 1), rep.c_used)
    axis = np.linspace(-40.0, 40.0, 101)
    ev.rho(axis[:, None], axis[None, :], 0.0)  # PositivityError if guard fires
    assert rep.norms
