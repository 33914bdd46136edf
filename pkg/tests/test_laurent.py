from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from hkwave.laurent import GaussRational, TrigLaurentPoly, solve_exact

fr = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 100)


@given(fr, fr, fr, fr)
def test_gauss_rational_matches_complex(a, b, c, d):
    x, y = GaussRational(a, b), GaussRational(c, d)
    zx, zy = complex(float(a), float(b)), complex(float(c), float(d))
    assert abs(complex(x * y) - zx * zy) < 1e-9 * (1 + abs(zx * zy))
    assert abs(complex(x + y) - (zx + zy)) < 1e-9 * (1 + abs(zx + zy))
    if y:
        assert (x / y) * y == x


def test_gauss_rational_exact_power():
    i = GaussRational(0, 1)
    assert i ** 4 == GaussRational(1)
    assert (GaussRational(1, 1) ** 2) == GaussRational(0, 2)


def test_solve_exact():
    sol = solve_exact([[2, -1], [-1, 2]], [Fraction(1), Fraction(0)])
    assert sol == [Fraction(2, 3), Fraction(1, 3)]


def test_laurent_product_and_evaluation():
    p = TrigLaurentPoly({(2,): 1, (-2,): 1})  # 2 cos(2 pi t)
    q = p * p
    t = np.array([[0.1], [0.37]])
    assert np.allclose(q.evaluate(t), p.evaluate(t) ** 2)
    assert (p - p).is_zero()
