import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homflow.diophantine import (
    HeuristicSearchWarning,
    LinearFormsPoint,
    QuadraticIrrational,
    bad_approx_margin,
    bad_approx_margin_exact,
    cf_oracle,
    max_condition,
    shell_minima,
    singular_profile,
    soa_statistic,
    sl2_products_exponents,
    sphere_margin_S1,
    vwa_check,
)

GOLDEN = QuadraticIrrational.golden()
GOLDEN_PT = LinearFormsPoint.scalar(GOLDEN.convergent(10**40))
LIOUVILLE = sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, 5))


def _brute_margin(x: Fraction, Q: int, qmin: int = 1) -> Fraction:
    return min(q * abs(q * x - round(q * x)) for q in range(qmin, Q + 1))


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=10**9), st.integers(1, 300))
def test_margin_matches_brute_force(x, Q):
    assert bad_approx_margin_exact(LinearFormsPoint.scalar(x), Q) == _brute_margin(x, Q)


def test_margin_two_dimensional_brute_force():
    A = ((Fraction(3, 7), Fraction(1, 11)), (Fraction(2, 13), Fraction(5, 17)))
    pt = LinearFormsPoint(((1, 0), (0, 1)), A, 0)
    Q = 12
    best = None
    for q in itertools.product(range(-Q, Q + 1), repeat=2):
        if q == (0, 0):
            continue
        v = [sum(A[i][j] * q[j] for j in range(2)) for i in range(2)]
        d = max(abs(c - round(c)) for c in v)
        val = d * max(map(abs, q))
        best = val if best is None else min(best, val)
    assert bad_approx_margin_exact(pt, Q) == best


def test_margin_examples():
    # the infimum includes q = 1 where ‖φ‖ = 0.381…; from q ≥ 10 on the tail value shows
    assert bad_approx_margin(GOLDEN_PT, 10**5) == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-9)
    assert bad_approx_margin(GOLDEN_PT, 10**5, qmin=10) >= 0.40
    assert bad_approx_margin(LinearFormsPoint.scalar(Fraction(1, 2)), 2) == 0.0
    zero = LinearFormsPoint(((1, 0), (0, 1)), ((0, 0), (0, 0)), 0)
    assert bad_approx_margin(zero, 3) == 0.0


def test_singular_profile():
    assert all(singular_profile(LinearFormsPoint.scalar(Fraction(3, 7)), [7, 8, 50, 1000], Fraction(1, 10)))
    assert not any(singular_profile(GOLDEN_PT, [10, 100, 1000, 10**4], Fraction(1, 10)))
    assert all(singular_profile(LinearFormsPoint.scalar(LIOUVILLE), [10, 100, 10**6], Fraction(1, 10)))


def test_soa():
    r = soa_statistic(LinearFormsPoint.scalar(Fraction(1, 3)), 20, Fraction(1, 20))
    assert r.fraction >= 0.9 and not r.partial
    assert soa_statistic(GOLDEN_PT, 20, Fraction(1, 20)).fraction == 0.0
    for s in (Fraction(2, 9), Fraction(7, 40), LIOUVILLE):
        assert 0 <= soa_statistic(LinearFormsPoint.scalar(s), 12, Fraction(1, 10)).fraction <= 1


def test_vwa():
    # the truncation agrees with 10^{-24}-scale accuracy, so q = 10^6 and 2·10^6 both qualify
    ok, wit = vwa_check(LinearFormsPoint.scalar(LIOUVILLE), 1, 2 * 10**6)
    assert ok and sorted(abs(w[0]) for w in wit) == [10**6, 2 * 10**6]
    assert not vwa_check(GOLDEN_PT, 1, 10**6)[0]
    with pytest.raises(ValueError):
        vwa_check(GOLDEN_PT, 0, 100)


@pytest.mark.xfail(strict=True, reason="q^0.1 stays below 1/(q‖qφ‖) ≈ 2.24 until q ≈ 3000, so finite windows find witnesses")
def test_vwa_golden_small_gamma():
    assert not vwa_check(GOLDEN_PT, Fraction(1, 10), 10**6)[0]


def test_lll_search_three_dimensional():
    A = tuple(tuple(Fraction(int(mpmath.floor(mpmath.sqrt(p) * 10**12)), 10**12) for p in row)
              for row in ((2, 3, 5), (7, 11, 13), (17, 19, 23)))
    pt = LinearFormsPoint(((1, 0, 0), (0, 1, 0), (0, 0, 1)), A, 0)
    with pytest.warns(HeuristicSearchWarning):
        sh = shell_minima(pt, 400, budget=10**5)
    assert not sh.exhaustive
    assert 0 < bad_approx_margin(pt, 30) < 1


def test_cf_oracle():
    cf = cf_oracle(GOLDEN)
    assert set(cf.partial_quotients) == {1}
    assert cf.liminf == pytest.approx(1 / math.sqrt(5), rel=1e-6)
    r = cf_oracle(Fraction(1, 3))
    assert r.rational and r.partial_quotients == [0, 3]
    assert cf_oracle(QuadraticIrrational(-1, 1, 2)).partial_quotients[:6] == [0, 2, 2, 2, 2, 2]
    with mpmath.workdps(60):
        pq = cf_oracle(mpmath.sqrt(7), depth=30).partial_quotients
    assert pq[:9] == [2, 1, 1, 1, 4, 1, 1, 1, 4]


def test_exponents():
    r = sl2_products_exponents([1, 1])
    assert (r.char, r.dimension_bound, r.beta_phi) == (0, Fraction(1, 2), Fraction(1, 2))
    r = sl2_products_exponents([1], [0])
    assert (r.delta_x, r.zeta_x) == (2, 4) and r.beta_prime < 0 and r.label == "no information"
    r = sl2_products_exponents([1, 1, 0])
    assert (r.char, r.dimension_bound) == (Fraction(1, 2), Fraction(3, 4))
    assert max_condition([1, 1, 0]) and not max_condition([1], [0])


def test_sphere_margin():
    assert sphere_margin_S1((Fraction(3, 5), Fraction(4, 5)), 100) == 0.0
    assert sphere_margin_S1((Fraction(1), Fraction(0)), 10) == 0.0
    m = sphere_margin_S1((math.cos(1), math.sin(1)), 10**4)
    assert 0 < m < 1
    with pytest.raises(ValueError):
        sphere_margin_S1((0.5, 0.5), 10)
