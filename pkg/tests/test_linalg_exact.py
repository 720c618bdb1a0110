import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homflow.linalg_exact import (
    DiagonalFrame,
    LatticeState,
    det,
    enumerate_primitive_monomials,
    gauss_reduce,
    hnf,
    is_decomposable,
    lll_reduce,
    lovasz_holds,
    same_lattice,
    scaled_float,
    short_vectors,
    wedge,
)


def _contains(basis, v):
    """v in the integer span of the columns of basis (exact solve)."""
    B = np.array(basis, dtype=object)
    sol = np.linalg.solve(np.array(basis, dtype=float), np.array(v, dtype=float))
    c = [round(x) for x in sol]
    return all(sum(B[i][j] * c[j] for j in range(len(c))) == v[i] for i in range(len(v)))


def test_hnf_examples():
    assert hnf([[1, 0], [0, 1]]) == ((1, 0), (0, 1))
    assert hnf([[0, 1], [1, 0]]) == ((1, 0), (0, 1))
    h = hnf([[2, 1], [0, 1]])
    assert same_lattice(h, [[2, 1], [0, 1]])
    cols_h = list(zip(*h))
    cols_b = list(zip(*[[2, 1], [0, 1]]))
    assert all(_contains([[2, 1], [0, 1]], list(c)) for c in cols_h)
    assert all(_contains(h, list(c)) for c in cols_b)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=9, max_size=9))
def test_hnf_is_canonical(entries):
    m = [entries[0:3], entries[3:6], entries[6:9]]
    if det(m) == 0:
        return
    u = [[1, 2, 0], [0, 1, -3], [0, 0, 1]]  # unimodular change of basis
    mu = [[sum(m[i][k] * u[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert hnf(m) == hnf(mu)


def test_lll_examples():
    red = lll_reduce([[1, 100], [0, 1]])
    first = [red[0][0], red[1][0]]
    assert math.hypot(*first) == 1.0
    assert lovasz_holds(red)
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = np.eye(3, dtype=int)
        for _ in range(6):
            i, j = rng.choice(3, 2, replace=False)
            a[:, i] += int(rng.integers(-4, 5)) * a[:, j]
        r = lll_reduce(a.tolist())
        assert abs(det(r)) == 1
        assert same_lattice(r, a.tolist())


def test_wedge_examples():
    e = [[Fraction(int(i == j)) for i in range(4)] for j in range(4)]
    w = wedge([e[0], e[1]])
    assert w.coords[w.subsets(4, 2).index((0, 1))] == 1 and sum(abs(c) for c in w.coords) == 1
    assert wedge([e[0], e[0]]).is_zero()
    s = [a + b for a, b in zip(e[0], e[1])]
    assert wedge([s, e[1]]) == w


def test_decomposable_plucker():
    assert is_decomposable([1, 0, 0, 0, 0, 0], 4, 2)
    assert not is_decomposable([1, 0, 0, 0, 0, 1], 4, 2)  # e12 + e34


def test_enumerate_examples():
    z2 = LatticeState.standard(2)
    assert len(enumerate_primitive_monomials(z2, 1, 1.4)) == 2
    z4 = LatticeState.standard(4)
    got = enumerate_primitive_monomials(z4, 2, 1.1)
    assert len(got) == 6
    assert sorted(tuple(abs(c) for c in pm.wedge.coords) for pm in got) == sorted(
        tuple(int(i == j) for i in range(6)) for j in range(6))
    x = LatticeState(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), math.log(4), DiagonalFrame((1, -1)))
    got = enumerate_primitive_monomials(x, 1, 0.5)
    assert len(got) == 1 and abs(got[0].norm - 0.25) < 1e-12


def test_enumerate_against_brute_force_z4():
    # every integer 2-subgroup with generator entries in [−2, 2] and wedge norm ≤ 1.5
    z4 = LatticeState.standard(4)
    found = {tuple(pm.wedge.coords) for pm in enumerate_primitive_monomials(z4, 2, 1.5)}
    found |= {tuple(-c for c in w) for w in found}
    vecs = np.array([v for v in itertools.product(range(-2, 3), repeat=4) if any(v)])
    i, j = np.triu_indices(len(vecs), 1)
    U, V = vecs[i], vecs[j]
    W = np.stack([U[:, a] * V[:, b] - U[:, b] * V[:, a] for a, b in itertools.combinations(range(4), 2)], axis=1)
    keep = (np.abs(W).sum(axis=1) > 0) & ((W * W).sum(axis=1) <= 2.25)
    W = W[keep]
    brute = {tuple(int(c) for c in w) for w in W if math.gcd(*map(int, w)) == 1}
    assert brute
    assert brute <= found


def test_gauss_reduce_flowed():
    x = LatticeState(((Fraction(1), Fraction(1, 3)), (Fraction(0), Fraction(1))), 6.0, DiagonalFrame((1, -1)))
    E = gauss_reduce(x).embedded()
    assert min(np.linalg.norm(E, axis=0)) == pytest.approx(3 * math.exp(-6.0), rel=1e-12)


def test_short_vectors_z2():
    got = short_vectors(np.eye(2), 1.5)
    assert sorted(map(lambda c: tuple(abs(a) for a in c), got)) == [(0, 1), (1, 0), (1, 1), (1, 1)]


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6), st.floats(-1500, 1500))
def test_scaled_float_matches_mpmath(q, s):
    import mpmath

    got = scaled_float(q, s)
    with mpmath.workdps(50):
        ref = mpmath.mpf(q.numerator) / q.denominator * mpmath.e ** s
    if q == 0:
        assert got == 0.0
    elif abs(ref) > 1e300 or abs(ref) < 1e-300:
        return
    else:
        assert got == pytest.approx(float(ref), rel=1e-12)


def test_unimodular_check():
    with pytest.raises(ValueError):
        LatticeState.from_matrix([[2, 0], [0, 1]])
    with pytest.raises(ValueError):
        LatticeState.from_matrix([[1, 0], [0, 1]], t=1.0)
