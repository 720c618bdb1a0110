"""One check per acceptance criterion; each prints a PASS/FAIL line."""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import sympy
from sympy.combinatorics import Permutation

from conftest import ACCEPTANCE_LINES
from homflow.cli import RUNNERS, _planar, resolve
from homflow.contraction import measure_Bx_profile, t_for_base
from homflow.diophantine import (
    LinearFormsPoint,
    QuadraticIrrational,
    bad_approx_margin,
    max_condition,
    sl2_products_exponents,
)
from homflow.flows import doa_statistic, orbit_samples, standard_curve
from homflow.heights import HeightConfig
from homflow.sl2_rep import build_triple, decompose, delta_i


def _report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def _runner(exp: str, seed: int = 0, **kw):
    c = resolve(exp, {}, {k: str(v) for k, v in kw.items()})
    return RUNNERS[exp](c, np.random.default_rng(seed))


def test_criterion_1_rep_contraction():
    start = time.time()
    fails = []
    for d, deg in [("2", 1), ("4", 1), ("4", 2)]:
        for beta in (0.3, 0.6, 0.9):
            r = _runner("rep-contraction", d=d, degree=deg, beta=beta, samples=50, times="1,2,3,4,5,6")
            if not r.passed:
                fails.append(f"d={d} deg={deg} beta={beta}: {r.summary['slope']:.3f} > {r.summary['threshold']:.3f}")
    elapsed = time.time() - start
    ok = not fails and elapsed < 120
    _report(1, ok, "; ".join(fails) or f"all 9 cases within threshold ({elapsed:.0f}s)")
    assert ok, fails


def test_criterion_2_cgood():
    start = time.time()
    r = _runner("cgood", count=1000, levels=20, degrees="1,2,3,4,5")
    elapsed = time.time() - start
    ok = r.passed and r.summary["polynomials"] == 5000 and elapsed < 60
    _report(2, ok, f"{r.summary['violations']} violations over {r.summary['polynomials']} polynomials ({elapsed:.0f}s)")
    assert ok


def _tensor_wedge_matrix(X, i):
    """Action of X on ⋀^i inside the antisymmetric tensors; columns indexed by i-subsets."""
    d = len(X)
    X = sympy.Matrix(X)
    big = sum((sympy.kronecker_product(*[X if k == j else sympy.eye(d) for k in range(i)]) for j in range(i)),
              sympy.zeros(d**i))
    subs = list(itertools.combinations(range(d), i))

    def alt(s):
        v = sympy.zeros(d**i, 1)
        for perm in itertools.permutations(range(i)):
            sign = Permutation(list(perm)).signature()
            idx = 0
            for p in perm:
                idx = idx * d + s[p]
            v[idx] += sign
        return v

    basis = sympy.Matrix.hstack(*[alt(s) for s in subs])
    # coordinates of big·basis in the basis of alternating tensors, read from sorted index positions
    rows = [sum(s[k] * d ** (i - 1 - k) for k in range(i)) for s in subs]
    return (big * basis).extract(rows, list(range(len(subs))))


def _eigen_oracle(tr, i):
    H = _tensor_wedge_matrix(tr.H0, i)
    E = _tensor_wedge_matrix(tr.Zplus, i)
    out = {}
    for w, mult, vecs in H.eigenvects():
        k = mult - (E * sympy.Matrix.hstack(*vecs)).rank()
        if k and w >= 0:
            out[int(w)] = k
    return out


def _grassmann_rank(d, i):
    """Rank of X ↦ X·(e1∧…∧ei) over gl_d, by Plücker minors of perturbed frames."""
    base = np.eye(d)[:, :i]
    subs = list(itertools.combinations(range(d), i))
    rows = []
    for a, b in itertools.product(range(d), range(d)):
        X = np.zeros((d, d))
        X[a, b] = 1
        V = X @ base
        col = []
        for s in subs:
            tot = 0.0
            for j in range(i):
                M = base[list(s), :].copy()
                M[:, j] = V[list(s), j]
                tot += np.linalg.det(M)
            col.append(round(tot))
        rows.append(col)
    return int(np.linalg.matrix_rank(np.array(rows, dtype=float)))


def test_criterion_3_isotypic():
    tr = build_triple(2, [[1, 0], [0, 1]])
    dec = decompose(tr, 2)
    lib = {lam: (iso.multiplicity, iso.rank) for lam, iso in dec.isotypic.items()}
    oracle = _eigen_oracle(tr, 2)
    ok_decomp = lib == {0: (3, 3), 2: (1, 3)} and oracle == {lam: m for lam, (m, _) in lib.items()}
    bad = [(d, i) for d in range(2, 9) for i in range(1, d)
           if not (delta_i(d, i) == i * (d - i) == _grassmann_rank(d, i) - 1)]
    ok = ok_decomp and not bad
    _report(3, ok, f"decomposition {lib}, oracle {oracle}; delta table mismatches {bad}")
    assert ok


def test_criterion_4_dani():
    start = time.time()
    flow, curve, h, x = _planar(0.5)
    Qmax, eps = 10**4, 0.5
    omega = QuadraticIrrational.golden().convergent(10**30) - 1
    # even cells hold the rational j/64, odd cells the quadratic irrational (j + ω)/64
    grid = [Fraction(j, 64) if j % 2 == 0 else (j + omega) / 64 for j in range(64)]
    cutoff = 1 / Qmax
    disagree = []
    for s in grid:
        oracle_bad = bad_approx_margin(LinearFormsPoint.scalar(s), Qmax) >= cutoff
        top = max(f for _, f in orbit_samples(flow, curve, s, x, h, 30, 0.05).samples)
        bounded = top <= eps / math.sqrt(2 * cutoff)
        if oracle_bad != bounded:
            disagree.append(float(s))
    rationals = [Fraction(p, q) for p, q in [(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (2, 5), (3, 7), (5, 8)]]
    doas = [doa_statistic(flow, curve, s, x, 1e3, 50, 0.05, cfg=HeightConfig(eps)) for s in rationals]
    elapsed = time.time() - start
    ok = not disagree and min(doas) >= 0.9 and elapsed < 300
    _report(4, ok, f"{len(disagree)} disagreements on 64 points; rational doa min {min(doas):.3f} "
                   f"max {max(doas):.3f} (needs >= 0.9) ({elapsed:.0f}s)")
    assert not disagree
    assert min(doas) >= 0.9


def test_criterion_5_dimension():
    start = time.time()
    r = _runner("dimension", base=2, N="11,12,13,14,15,16,17", M=0.9)
    alpha_top = max(row[1] for row in r.rows)
    elapsed = time.time() - start
    ok = r.passed and alpha_top >= 11.5 and elapsed < 600
    _report(5, ok, f"box-count slope {r.summary['slope']:.3f} (<= 0.65), alpha(Nt) up to {alpha_top:.2f} ({elapsed:.0f}s)")
    assert ok


def test_criterion_6_measure_decay():
    flow, _, h, x = _planar(0.5, 0.4)
    curve = standard_curve((0.0, 1.0))
    t = t_for_base(flow, 2)
    target = 0.2 * flow.alpha(t)
    lines, ok = [], True
    for M in (1.0, 1.5, 2.0, 3.0):
        prof = measure_Bx_profile(flow, curve, h, x, M, t, 10, 5, 1 << 20)
        rate = prof.decay_rate()
        good = prof.nonincreasing() and rate >= target
        ok &= good
        lines.append(f"M={M}: rate {rate:.3f}{'' if good else ' (bad)'}")
    _report(6, ok, f"target rate {target:.3f}; " + ", ".join(lines))
    assert ok


def test_criterion_7_schmidt_game():
    start = time.time()
    rnd = _runner("game", seed=1, games=100, bob="random", rounds=15)
    adv = _runner("game", seed=2, games=10, bob="adversarial", rounds=15)
    elapsed = time.time() - start
    fit = rnd.summary["fitted"]
    ok = rnd.passed and adv.passed and rnd.summary["a"] >= fit["a_star"] and elapsed < 300
    _report(7, ok, f"random {rnd.summary['certified']}/100, adversarial {adv.summary['certified']}/10, "
                   f"a={rnd.summary['a']:.3g} >= a*={fit['a_star']:.3g}, M={rnd.summary['M']:.3g} ({elapsed:.0f}s)")
    assert ok


def test_criterion_8_shrinking():
    r = _runner("shrinking", delta=0.2, beta=0.4, t_max=12, max_ratio=10)
    ratio = r.summary["sup_over_initial"]
    _report(8, r.passed, f"sup/initial average {ratio:.3f} (<= 10)")
    assert r.passed


def test_criterion_9_exponents():
    checked, bad = 0, []
    for r in range(0, 9):
        for s in range(0, (8 - r) // 2 + 1):
            if r + s == 0:
                continue
            for bits in itertools.product((False, True), repeat=r + s):
                real, cplx = bits[:r], bits[r:]
                if not any(bits):
                    continue
                rep = sl2_products_exponents(real, cplx)
                checked += 1
                if (rep.dimension_bound < 1) != max_condition(real, cplx):
                    bad.append((real, cplx))
    ce = sl2_products_exponents([True], [False])
    ok = not bad and ce.label == "no information" and not ce.informative
    _report(9, ok, f"{checked} patterns, {len(bad)} mismatches; r=1 s=1 real-active pattern: {ce.label!r}")
    assert ok
