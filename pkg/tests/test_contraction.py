import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate

from homflow.contraction import (
    EMPTY_SET,
    ch_decay_slope,
    cgood_check,
    cover_Zx,
    cover_sweep,
    cusp_point,
    dimension_estimate,
    box_count_slope,
    integer_base,
    measure_Bx,
    partition,
    partitions_refine,
    rho_k,
    shrinking_average,
    sublevel_measure,
    t_for_base,
    verify_ch,
    verify_rep_contraction,
    window_average,
)
from homflow.flows import flow_for, heights_d2_batch, reduced_float_basis, standard_curve
from homflow.heights import HeightConfig, f_eps
from homflow.linalg_exact import LatticeState
from homflow.sl2_rep import decompose, standard_triple

FLOW = flow_for(standard_triple())
CFG = HeightConfig(0.5, 0.4)
Z2 = LatticeState.standard(2)


def test_rep_contraction_closed_forms():
    dec = decompose(standard_triple(), 1)
    for t in (1.0, 2.0, 4.0):
        r = verify_rep_contraction(dec, [1.0, 0.0], t, 0.5)
        assert r.ratio == pytest.approx(1.0, rel=1e-12)
        r = verify_rep_contraction(dec, [0.0, 1.0], t, 0.5)
        with mpmath.workdps(30):
            ref = 0.5 * mpmath.quad(lambda s: (s * s * mpmath.e ** (2 * t) + mpmath.e ** (-2 * t)) ** -0.25, [-1, 0, 1])
        assert r.lhs == pytest.approx(float(ref), rel=1e-9)
        assert not r.flagged


def test_rep_contraction_rejects_invariant_vectors():
    from homflow.sl2_rep import build_triple

    dec = decompose(build_triple(2, [[1, 0], [0, 1]]), 2)
    with pytest.raises(ValueError):
        verify_rep_contraction(dec, [0, 1, 0, 0, 1, 0], 1.0, 0.5)  # e13 + e24 is trivial


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_window_average_against_quadpack():
    x = cusp_point(2, 5, 3.0)
    B = reduced_float_basis(x)
    for t, p in [(1.0, 0.8), (2.5, 0.8), (0.5, 0.4)]:
        got, change, flagged = window_average(B, 1.0, t, 0.5, p, -1.0, 1.0)
        fn = lambda r: float(heights_d2_batch(B, np.array([r]), t, 1.0, 0.5)[0]) ** p
        ref = 0.5 * integrate.quad(fn, -1, 1, limit=800, points=[0.0])[0]
        assert got == pytest.approx(ref, rel=2e-3)
        assert not flagged


def test_verify_ch_deep_cusp_contracts():
    x = cusp_point(1, 1, 14.0)
    h = f_eps(x, standard_triple(), CFG).value ** (CFG.beta * 2)
    r = verify_ch(FLOW, standard_curve(), CFG, x, 0, 3.0)
    assert r.height == pytest.approx(h)
    assert r.lhs < r.height


def test_ch_decay_slope():
    slope = ch_decay_slope(FLOW, standard_curve(), CFG, cusp_point(1, 1, 10.0), 0, [2, 3, 4, 5, 6])
    assert slope <= -CFG.beta + 0.1


def test_verify_ch_rejects_constant_curve():
    from homflow.flows import AdmissibleCurve

    flat = AdmissibleCurve(lambda s: ((0, 0), (0, 0)), lambda s: ((0, 0), (0, 0)))
    with pytest.raises(ValueError):
        verify_ch(FLOW, flat, CFG, Z2, 0, 1.0)


def test_cgood_examples():
    r = cgood_check([0, 1], (-1, 1), 1)
    assert r.violations == 0 and r.measures[0] == pytest.approx(1.0)  # ε = sup/2 = 1/2 → 2ε
    assert all(m == pytest.approx(2 * e) for m, e in zip(r.measures, r.levels))
    r = cgood_check([0, 0, 1], (-1, 1), 2)
    assert all(m == pytest.approx(2 * math.sqrt(e)) for m, e in zip(r.measures, r.levels))
    assert r.C == pytest.approx(4 * math.sqrt(3))
    r = cgood_check([3.0], (0, 1), 1)
    assert r.violations == 0 and all(m == 0 for m in r.measures)


def test_sublevel_measure_against_grid():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = np.polynomial.Polynomial(rng.standard_normal(4))
        xs = np.linspace(-1, 1, 400001)
        eps = float(np.abs(p(xs)).max()) * 0.1
        grid = float(np.mean(np.abs(p(xs)) < eps)) * 2
        assert sublevel_measure(p, -1, 1, eps) == pytest.approx(grid, abs=2e-4)


def test_rho_underestimates():
    # x^k/… Chebyshev polynomials reach sup 1 with leading coefficient 2^{k−1}
    for k in range(1, 6):
        assert 0 < rho_k(k) <= 1 / 2 ** (k - 1) + 1e-9


def test_partitions():
    assert partitions_refine((0, 1), 2, 6)
    assert partition((0, 1), 3, 1) == [0, Fraction(1, 3), Fraction(2, 3), 1]
    t = t_for_base(FLOW, 2)
    assert integer_base(FLOW, t) == 2
    with pytest.raises(ValueError):
        integer_base(FLOW, 0.3)


def test_measure_empty_and_grid_check():
    curve = standard_curve((0.0, 1.0))
    t = t_for_base(FLOW, 2)
    r = measure_Bx(FLOW, curve, CFG, Z2, 1e9, t, 2, 1, 64)
    assert r.total == 0.0
    with pytest.raises(ValueError):
        measure_Bx(FLOW, curve, CFG, Z2, 1.0, t, 2, 3, 8)


def test_cover_counts():
    curve = standard_curve((0.0, 1.0))
    t = t_for_base(FLOW, 2)
    assert cover_Zx(FLOW, curve, CFG, Z2, 1e9, 6, t, 1.0).count == 0
    counts = [r.count for r in (cover_Zx(FLOW, curve, CFG, Z2, M, 8, t, 0.9) for M in (0.3, 0.6, 0.9, 1.2))]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    reps = cover_sweep(FLOW, curve, CFG, Z2, 1e9, [4, 5, 6], t, 0.9)
    assert dimension_estimate(reps) == EMPTY_SET


def test_box_count_slope():
    mask = np.zeros(2**12, dtype=bool)
    mask[1234] = True
    assert box_count_slope(mask, 2, range(3, 11)) == pytest.approx(0.0)
    assert box_count_slope(np.ones(2**12, dtype=bool), 2, range(3, 11)) == pytest.approx(1.0, abs=0.05)


def test_shrinking():
    curve = standard_curve((-3.0, 3.0))
    rep = shrinking_average(FLOW, curve, CFG, Z2, 0.0, [0, 1, 2], Fraction(1, 3))
    assert all(math.isfinite(a) for a in rep.averages)
    with pytest.raises(ValueError):
        shrinking_average(FLOW, curve, CFG, Z2, 0.2, [0, 1], Fraction(3))
    with pytest.raises(ValueError):
        shrinking_average(FLOW, curve, CFG, Z2, 0.5, [0, 1], Fraction(0))
