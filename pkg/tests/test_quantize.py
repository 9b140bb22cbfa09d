import random
from fractions import Fraction

import pytest

from symdiffop import opalg, structure
from symdiffop.errors import NonRealError, NormalizationError, SymmetryError
from symdiffop.opalg import DivOp, RawOp
from symdiffop.poly import Poly
from symdiffop.quantize import (
    THETA,
    THETA_STAR,
    C2,
    NcPoly,
    is_star_symmetric,
    nc_star,
    quantize,
    quantize_divergence,
    weyl_lift,
)

P = Poly.parse


def word(*letters) -> NcPoly:
    return NcPoly.word(tuple(letters))


def random_even_real(rng: random.Random, max_half_deg=2) -> NcPoly:
    """Random real-coefficient NcPoly with even-length words only."""
    out = NcPoly.zero()
    for _ in range(rng.randint(1, 4)):
        length = 2 * rng.randint(0, max_half_deg)
        letters = tuple(rng.randint(0, 1) for _ in range(length))
        coeff = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
        out = out + NcPoly.word(letters, coeff)
    return out


# -- the involution -----------------------------------------------------------


def test_star_single_letter():
    assert nc_star(word(THETA)) == word(THETA_STAR)


def test_star_theta_thetastar_palindromic():
    # reverse (th, th*) -> (th*, th), swap letters -> (th, th*): fixed point
    assert nc_star(word(THETA, THETA_STAR)) == word(THETA, THETA_STAR)


def test_star_involution():
    rng = random.Random(3)
    for _ in range(30):
        h = random_even_real(rng)
        # sprinkle in complex coefficients and odd words too
        h = h + NcPoly.word((THETA,), C2.imaginary(rng.randint(-2, 2)))
        assert nc_star(nc_star(h)) == h


# -- the Weyl lift --------------------------------------------------------------


def test_weyl_lift_trivia():
    assert weyl_lift(0, 0) == NcPoly.const(1)
    q_hat = NcPoly({(THETA,): C2.inv_sqrt2(), (THETA_STAR,): C2.inv_sqrt2()})
    assert weyl_lift(1, 0) == q_hat


def test_weyl_lift_1_1_frozen():
    # (q p + p q)/2 expands to -i/2 theta theta + i/2 theta* theta*
    lifted = weyl_lift(1, 1)
    assert lifted.coeff((THETA, THETA)) == C2.imaginary(Fraction(-1, 2))
    assert lifted.coeff((THETA_STAR, THETA_STAR)) == C2.imaginary(Fraction(1, 2))
    assert lifted.coeff((THETA, THETA_STAR)).is_zero
    assert lifted.coeff((THETA_STAR, THETA)).is_zero


def test_weyl_lift_2_2_weight():
    # six arrangements averaged with weight 2!2!/4! = 1/6
    lifted = weyl_lift(2, 2)
    assert lifted.degree == 4
    # the fully raising word theta*^4 appears with coefficient 1/6 * 4 *
    # (1/sqrt2)^2 (i/sqrt2)^2 summed over arrangements; just pin reality:
    assert is_star_symmetric(lifted)


def test_weyl_lift_star_symmetric():
    for a in range(4):
        for b in range(4):
            assert is_star_symmetric(weyl_lift(a, b))


# -- quantization ----------------------------------------------------------------


def test_quantize_number_operator():
    h = word(THETA_STAR, THETA)
    assert quantize(h) == RawOp.from_coeffs(
        [P("1/2*s^2*x^2 - 1/2*s^2"), P("0"), P("-1/2*s^2")]
    )


def test_quantize_commutator():
    h = word(THETA, THETA_STAR) - word(THETA_STAR, THETA)
    assert quantize(h) == RawOp.from_coeffs([P("s^2")])


def test_quantize_weyl_2_2():
    # -hbar^2 d x^2 d - hbar^2/2 in raw form
    op = quantize(weyl_lift(2, 2))
    assert op == RawOp.from_coeffs([P("-1/2*s^4"), P("-2*s^4*x"), P("-s^4*x^2")])


def test_quantize_odd_word_rejected():
    with pytest.raises(NormalizationError):
        quantize(word(THETA))


def test_quantize_imaginary_rejected():
    h = (word(THETA, THETA_STAR) - word(THETA_STAR, THETA)) * C2.imaginary(1)
    with pytest.raises(NonRealError):
        quantize(h)


def test_quantize_star_is_adjoint():
    rng = random.Random(5)
    for _ in range(25):
        h = random_even_real(rng)
        assert quantize(nc_star(h)) == opalg.adjoint(quantize(h))


def test_quantize_degree_bound():
    rng = random.Random(7)
    for _ in range(25):
        h = random_even_real(rng)
        assert quantize(h).order <= h.degree or quantize(h).order == 0


# -- divergence families ------------------------------------------------------------


def test_quantize_divergence_weyl_2_2():
    fam = quantize_divergence(weyl_lift(2, 2))
    assert fam == DivOp.from_coeffs([P("-1/2*s^4"), P("x^2")])


def test_quantize_divergence_number():
    fam = quantize_divergence(word(THETA_STAR, THETA))
    assert fam == DivOp.from_coeffs([P("1/2*x^2 - 1/2*s^2"), P("1/2")])


def test_quantize_divergence_constant():
    assert quantize_divergence(NcPoly.const(1)) == DivOp.from_coeffs([P("1")])


def test_quantize_divergence_requires_symmetry():
    with pytest.raises(SymmetryError):
        quantize_divergence(word(THETA, THETA))


def test_family_reexpands_to_quantization():
    rng = random.Random(11)
    for _ in range(15):
        h = random_even_real(rng)
        h = h + nc_star(h)  # symmetrize
        fam = quantize_divergence(h)
        rebuilt = structure.raw_from_divergence(structure.scale_hbar(fam))
        assert rebuilt == quantize(h)
