import math
from fractions import Fraction

import numpy as np
import pytest

from homflow.diophantine import QuadraticIrrational, cf_oracle
from homflow.flows import (
    AdmissibleCurve,
    _block,
    check_admissible,
    doa_statistic,
    flow_for,
    flow_point,
    growth_slope,
    heights_d2_batch,
    linear_curve,
    orbit_samples,
    standard_curve,
    tangent_residual,
)
from homflow.heights import HeightConfig
from homflow.linalg_exact import LatticeState, gauss_reduce
from homflow.sl2_rep import build_triple, standard_triple

FLOW = flow_for(standard_triple())
CURVE = standard_curve((-3.0, 3.0))
Z2 = LatticeState.standard(2)


def test_conjugation_identity():
    for tr in (standard_triple(), build_triple(2, [[1, 0], [0, 1]])):
        fl = flow_for(tr)
        for t, s in [(0.5, 1.0), (2.0, -0.3), (4.0, 0.01)]:
            assert fl.conjugation_error(t, s) < 1e-9


def test_admissibility():
    check_admissible(FLOW, CURVE)
    flat = AdmissibleCurve(lambda s: ((0, 0), (0, 0)), lambda s: ((0, 0), (0, 0)))
    with pytest.raises(ValueError):
        check_admissible(FLOW, flat)
    wrong = AdmissibleCurve(lambda s: ((0, 0), (Fraction(s), 0)), lambda s: ((0, 0), (1, 0)))
    with pytest.raises(ValueError):
        check_admissible(FLOW, wrong)


def test_flow_point_rational():
    assert flow_point(FLOW, CURVE, 0, 0.0, Z2).basis == Z2.basis
    p, q = 2, 7
    for t in (2.0, 6.0, 12.0):
        x = gauss_reduce(flow_point(FLOW, CURVE, Fraction(p, q), t, Z2))
        assert min(np.linalg.norm(x.embedded(), axis=0)) == pytest.approx(q * math.exp(-t), rel=1e-9)


def test_golden_orbit_bounded_by_cf():
    phi = QuadraticIrrational.golden()
    s = Fraction(phi.convergent(10**30)) - 1
    st = orbit_samples(FLOW, CURVE, s, Z2, HeightConfig(0.5), 30, 0.05)
    top = max(f for _, f in st.samples)
    # q‖qs‖ ≥ c for all q bounds the shortest vector below by √(2c)·… ; use the CF liminf oracle
    c = min(cf_oracle(phi).products)
    assert top <= 0.5 / math.sqrt(2 * c) * 1.01


def test_doa_rational_closed_form():
    # f = ε e^t / q once the rational takes over, so the excursion time is T − log(qM/ε)
    for p, q in [(1, 3), (2, 5), (5, 8)]:
        doa = doa_statistic(FLOW, CURVE, Fraction(p, q), Z2, 1e3, 50, 0.05)
        assert doa == pytest.approx(1 - math.log(q * 1e3 / 0.5) / 50, abs=2e-3)


def test_doa_monotone_in_M():
    vals = [doa_statistic(FLOW, CURVE, Fraction(1, 3), Z2, M, 30, 0.05) for M in (1, 10, 100, 1000)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_golden_doa_zero():
    s = QuadraticIrrational.golden().convergent(10**30) - 1
    assert doa_statistic(FLOW, CURVE, s, Z2, 1e3, 50, 0.05) == 0.0


def test_growth_slopes():
    s = QuadraticIrrational.golden().convergent(10**30) - 1
    assert growth_slope(FLOW, CURVE, s, Z2, 50, dt=0.05) < 0.1
    # log f / t → 1 for rationals (f = εe^t/q); that is α(1)/2 for α(t) = 2t
    assert growth_slope(FLOW, CURVE, Fraction(1, 3), Z2, 50, dt=0.05) == pytest.approx(1.0, abs=0.05)
    # ℤ² itself is not fixed: e₂ shrinks like e^{−t}, so log f/t = 1 + log(ε)/t, largest at t = T
    st = orbit_samples(FLOW, linear_curve(1, [[1]], [[0]]), 0, Z2, HeightConfig(0.5), 20, 0.1)
    assert st.growth_slope() == pytest.approx(1 + math.log(0.5) / 20, abs=1e-9)


def test_tangent_residual():
    assert tangent_residual(FLOW, CURVE, Fraction(1, 3), 1, 1.0, 0.7) == 0.0
    tr4 = build_triple(2, [[1, 0], [0, 1]])
    fl4 = flow_for(tr4)

    def phi(s):
        s = Fraction(s)
        return _block(2, ((s, s * s), (Fraction(0), Fraction(0))))

    def dphi(s):
        return _block(2, ((Fraction(1), 2 * Fraction(s)), (Fraction(0), Fraction(0))))

    quad = AdmissibleCurve(phi, dphi, (-1.0, 1.0), 1.0)
    for r in (0.25, 0.5, 1.0):
        assert tangent_residual(fl4, quad, 0, 1, 1.0, r) == pytest.approx(r * r, rel=1e-9)
    with pytest.raises(ValueError):
        tangent_residual(FLOW, CURVE, 0, 0, 1.0, 0.5)


def test_batch_heights_match_exact():
    B = gauss_reduce(flow_point(FLOW, CURVE, Fraction(3, 11), 0.0, Z2)).embedded()
    r = np.linspace(-0.5, 0.5, 41)
    got = heights_d2_batch(B, r, 4.0, 1.0, 0.5)
    from homflow.heights import f_eps

    for ri, g in zip(r, got):
        x = flow_point(FLOW, CURVE, Fraction(3, 11) + Fraction(float(ri)), 4.0, Z2)
        assert g == pytest.approx(f_eps(x, standard_triple(), HeightConfig(0.5)).value, rel=1e-9)
