import random
from fractions import Fraction

import pytest

from symdiffop.opalg import DivOp
from symdiffop.poly import Poly

P = Poly.parse


@pytest.fixture
def harmonic_family() -> DivOp:
    """Divergence family of the harmonic oscillator: L_hbar = hbar * N."""
    return DivOp.from_coeffs([P("1/2*x^2 - 1/2*s^2"), P("1/2")])


@pytest.fixture
def quartic_pair() -> DivOp:
    """The worked example b0 = x^4, b1 = x^2."""
    return DivOp.from_coeffs([P("x^4"), P("x^2")])


def random_poly(rng: random.Random, max_degree: int, vars=("x",),
                coeff_range: int = 4, allow_zero: bool = True) -> Poly:
    out = Poly.zero()
    for _ in range(rng.randint(0 if allow_zero else 1, max_degree + 1)):
        coeff = Fraction(rng.randint(-coeff_range, coeff_range),
                         rng.randint(1, 3))
        powers = {v: rng.randint(0, max_degree) for v in vars}
        out = out + Poly.monomial(coeff, **powers)
    return out


def random_divop(rng: random.Random, max_m: int, max_degree: int,
                 vars=("x",)) -> DivOp:
    m = rng.randint(0, max_m)
    coeffs = [random_poly(rng, max_degree, vars) for _ in range(m + 1)]
    if coeffs[-1].is_zero and m > 0:
        coeffs[-1] = Poly.monomial(1, **{vars[0]: rng.randint(0, max_degree)})
    return DivOp.from_coeffs(coeffs)
