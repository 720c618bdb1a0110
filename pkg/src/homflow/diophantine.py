"""Number-theoretic classifiers for points on the line s ↦ sY + Z.

All distances use the sup norm. Search loops run in exact integer
arithmetic: the matrix A = sY + Z is written as M/D with an integer matrix
M, so the distance of Aq to ℤⁿ is max_i min(r_i, D − r_i)/D with
r = Mq mod D.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from .linalg_exact import Matrix, _exact_dot, _lll, as_matrix, det, frac

DEFAULT_BUDGET = 1 << 22


class HeuristicSearchWarning(UserWarning):
    """Raised (as a warning) when a search is not exhaustive."""


@dataclass(frozen=True)
class LinearFormsPoint:
    Y: Matrix
    Z: Matrix
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "Y", as_matrix(self.Y))
        object.__setattr__(self, "Z", as_matrix(self.Z))
        object.__setattr__(self, "s", frac(self.s))
        if len(self.Y) != len(self.Z) or any(len(r) != len(self.Y) for r in self.Y + self.Z):
            raise ValueError("Y and Z must be square of the same size")
        if det(self.Y) == 0:
            raise ValueError("Y must be invertible")

    @classmethod
    def scalar(cls, value) -> "LinearFormsPoint":
        """n = 1 point whose matrix equals ``value`` (Y = 1, Z = 0)."""
        return cls(((1,),), ((0,),), frac(value))

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def matrix(self) -> Matrix:
        return tuple(tuple(self.s * y + z for y, z in zip(ry, rz)) for ry, rz in zip(self.Y, self.Z))

    def integer_form(self) -> tuple[list[list[int]], int]:
        """(M, D) with matrix = M/D."""
        A = self.matrix
        D = 1
        for row in A:
            for v in row:
                D = D * v.denominator // math.gcd(D, v.denominator)
        return [[int(v * D) for v in row] for row in A], D


# ---------------------------------------------------------------------------
# shell search


@dataclass
class ShellMinima:
    """Minimal distance numerator on each sup-norm shell ‖q‖∞ = h, h = 1..H."""

    D: int
    minima: list[int]
    argmin: list[tuple[int, ...]]
    exhaustive: bool = True

    @property
    def H(self) -> int:
        return len(self.minima)

    def dist(self, h: int) -> Fraction:
        return Fraction(self.minima[h - 1], self.D)


def _shell_vectors(n: int, h: int):
    """Integer vectors with ‖q‖∞ = h, one of each ±q pair."""
    if n == 1:
        yield (h,)
        return
    rng = range(-h, h + 1)
    for q in product(rng, repeat=n):
        if max(abs(c) for c in q) != h:
            continue
        first = next(c for c in q if c)
        if first > 0:
            yield q


def _dist_num(M: list[list[int]], D: int, q: Sequence[int]) -> int:
    worst = 0
    for row in M:
        r = sum(a * b for a, b in zip(row, q)) % D
        worst = max(worst, min(r, D - r))
    return worst


def _shells_exhaustive(M, D, H) -> ShellMinima:
    n = len(M)
    mins, args = [], []
    if n == 1:
        a = M[0][0] % D
        r = 0
        for h in range(1, H + 1):
            r += a
            if r >= D:
                r -= D
            mins.append(min(r, D - r))
            args.append((h,))
        return ShellMinima(D, mins, args)
    for h in range(1, H + 1):
        best, arg = None, None
        for q in _shell_vectors(n, h):
            v = _dist_num(M, D, q)
            if best is None or v < best:
                best, arg = v, q
        mins.append(best)
        args.append(arg)
    return ShellMinima(D, mins, args)


def _shells_lll(M, D, H) -> ShellMinima:
    """Candidate q from LLL-reduced bases of {(C(p − Aq), q)} over a range of C."""
    n = len(M)
    A = [[Fraction(v, D) for v in row] for row in M]
    best: dict[int, tuple[int, tuple[int, ...]]] = {}
    top = max(1, int(math.log2(max(H, 2)) * (n + 1) / n) + 2)
    for k in range(top + 1):
        C = Fraction(2) ** k
        vecs = []
        for j in range(n):
            vecs.append(tuple(C if i == j else Fraction(0) for i in range(n)) + (Fraction(0),) * n)
        for j in range(n):
            vecs.append(tuple(-C * A[i][j] for i in range(n)) + tuple(Fraction(int(i == j)) for i in range(n)))
        red, _ = _lll(vecs, list, _exact_dot, Fraction(99, 100))
        for v in red:
            q = tuple(int(c) for c in v[n:])
            h = max(abs(c) for c in q)
            if h == 0 or h > H:
                continue
            d = _dist_num(M, D, q)
            if h not in best or d < best[h][0]:
                best[h] = (d, q)
    mins, args = [], []
    for h in range(1, H + 1):
        d, q = best.get(h, (D, None))  # D/D = 1 exceeds every real distance
        mins.append(d)
        args.append(q)
    return ShellMinima(D, mins, args, exhaustive=False)


def shell_minima(pt: LinearFormsPoint, H: int, budget: int = DEFAULT_BUDGET) -> ShellMinima:
    M, D = pt.integer_form()
    n = pt.n
    if n >= 3 and (2 * H + 1) ** n // 2 > budget:
        warnings.warn("search over q is LLL-assisted, not exhaustive", HeuristicSearchWarning, stacklevel=2)
        return _shells_lll(M, D, H)
    if (2 * H + 1) ** n // 2 > budget * 4 and n >= 2:
        raise ValueError("exhaustive search too large for this budget")
    return _shells_exhaustive(M, D, H)


# ---------------------------------------------------------------------------
# classifiers


def bad_approx_margin(pt: LinearFormsPoint, Qmax: int, qmin: int = 1) -> float:
    """min over qmin ≤ ‖q‖∞ ≤ Qmax of dist(Aq, ℤⁿ)·‖q‖∞.

    ``qmin > 1`` drops the first few shells, which estimates the liminf
    rather than the infimum.
    """
    return float(bad_approx_margin_exact(pt, Qmax, qmin))


def bad_approx_margin_exact(pt: LinearFormsPoint, Qmax: int, qmin: int = 1) -> Fraction:
    if Qmax < 1 or not 1 <= qmin <= Qmax:
        raise ValueError("need 1 <= qmin <= Qmax")
    sh = shell_minima(pt, Qmax)
    best = min(h * m for h, m in enumerate(sh.minima, start=1) if h >= qmin)
    return Fraction(best, sh.D)


def singular_profile(pt: LinearFormsPoint, N_list: Sequence[int], eps) -> list[bool]:
    """For each N: is dist(Aq, ℤⁿ) ≤ ε/N solvable with 0 < ‖q‖∞ ≤ N?"""
    if any(N < 1 for N in N_list):
        raise ValueError("each N must be at least 1")
    eps = frac(eps)
    sh = shell_minima(pt, max(N_list))
    prefix = list(np.minimum.accumulate(np.array(sh.minima, dtype=object))) if sh.minima else []
    return [prefix[N - 1] * N <= eps * sh.D for N in N_list]


@dataclass(frozen=True)
class SoaResult:
    fraction: float
    levels: int
    partial: bool

    def __float__(self) -> float:
        return self.fraction


def soa_statistic(pt: LinearFormsPoint, N: int, eps, budget: int = DEFAULT_BUDGET) -> SoaResult:
    """Fraction of ℓ ∈ {1..N} with dist(Aq, ℤⁿ) < ε2^{−ℓ} for some 0 < ‖q‖∞ ≤ 2^ℓ.

    Levels whose search range exceeds the budget are dropped and the
    result is marked partial.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    eps = frac(eps)
    n = pt.n
    L = N
    while L > 0 and (2 ** (L + 1) + 1) ** n // 2 > budget:
        L -= 1
    if L == 0:
        return SoaResult(0.0, 0, True)
    sh = shell_minima(pt, 2 ** L, budget)
    hits = 0
    running = None
    for h, m in enumerate(sh.minima, start=1):
        running = m if running is None else min(running, m)
        if h & (h - 1) == 0:
            ell = h.bit_length() - 1
            if ell >= 1 and running * 2 ** ell < eps * sh.D:
                hits += 1
    return SoaResult(hits / L, L, L < N)


def vwa_check(pt: LinearFormsPoint, gamma, Qmax: int, qmin: int | None = None) -> tuple[bool, list[tuple[int, ...]]]:
    """Witnesses q with dist(Aq, ℤⁿ) < ‖q‖∞^{−1−γ}; true when at least two exist.

    Only shells qmin ≤ ‖q‖∞ ≤ Qmax count (default qmin = ⌈√Qmax⌉): tiny q
    satisfy the inequality for every point and say nothing about the tail.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    qmin = math.isqrt(Qmax - 1) + 1 if qmin is None else qmin
    sh = shell_minima(pt, Qmax)
    expo = 1 + frac(gamma) if isinstance(gamma, (int, Fraction)) else None
    logD = math.log(sh.D)
    wit = []
    for h, m in enumerate(sh.minima, start=1):
        if h < qmin:
            continue
        if m == 0:
            wit.append(sh.argmin[h - 1])
            continue
        if expo is not None and expo.denominator == 1:
            ok = m * h ** int(expo) < sh.D
        else:
            ok = math.log(m) - logD + (1 + float(gamma)) * math.log(h) < 0
        if ok:
            wit.append(sh.argmin[h - 1])
    return len(wit) >= 2, wit


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class QuadraticIrrational:
    """(P + √D)/Q with D > 0 not a perfect square."""

    P: int
    Q: int
    D: int

    def __post_init__(self):
        if self.Q == 0:
            raise ValueError("Q must be nonzero")
        if self.D <= 0 or math.isqrt(self.D) ** 2 == self.D:
            raise ValueError("D must be a positive non-square")

    @classmethod
    def golden(cls) -> "QuadraticIrrational":
        return cls(1, 2, 5)

    def mp(self, dps: int = 60):
        with mpmath.workdps(dps):
            return (self.P + mpmath.sqrt(self.D)) / self.Q

    def __float__(self) -> float:
        return (self.P + math.sqrt(self.D)) / self.Q

    def partial_quotients(self, depth: int) -> list[int]:
        P, Q, D = self.P, self.Q, self.D
        if (D - P * P) % Q:
            P, Q, D = P * abs(Q), Q * abs(Q), D * Q * Q
        r = math.isqrt(D)
        out = []
        for _ in range(depth):
            if Q > 0:
                a = (P + r) // Q
            else:
                a = -((P + r) // (-Q)) - 1
            out.append(a)
            P = a * Q - P
            Q = (D - P * P) // Q
        return out

    def convergent(self, min_denominator: int) -> Fraction:
        """A convergent with denominator at least ``min_denominator``."""
        h0, h1, k0, k1 = 0, 1, 1, 0
        depth = 8
        while True:
            h0, h1, k0, k1 = 0, 1, 1, 0
            for a in self.partial_quotients(depth):
                h0, h1 = h1, a * h1 + h0
                k0, k1 = k1, a * k1 + k0
                if k1 >= min_denominator:
                    return Fraction(h1, k1)
            depth *= 2


def _pq_fraction(x: Fraction, depth: int) -> tuple[list[int], bool]:
    out = []
    p, q = x.numerator, x.denominator
    while q and len(out) < depth:
        a = p // q
        out.append(a)
        p, q = q, p - a * q
    return out, q == 0


@dataclass
class CFResult:
    partial_quotients: list[int]
    liminf: float
    rational: bool
    products: list[float] = field(default_factory=list)


def cf_oracle(x, depth: int = 200) -> CFResult:
    """Partial quotients and the tail minimum of q_k‖q_k x‖ over convergents.

    Accepts Fraction/int (exact, may terminate), QuadraticIrrational (exact
    periodic expansion) or a float/mpf (expanded at its working precision).
    """
    if depth > 10**4:
        raise ValueError("depth must be at most 10^4")
    if isinstance(x, QuadraticIrrational):
        pq = x.partial_quotients(depth)
        rational = False
    else:
        if isinstance(x, (int, Fraction)):
            fx = Fraction(x)
        elif isinstance(x, mpmath.mpf):
            man, ex = x.man_exp
            fx = Fraction(int(man)) * Fraction(2) ** int(ex)
        else:
            fx = Fraction(float(x))
        pq, rational = _pq_fraction(fx, depth)
    if rational:
        return CFResult(pq, 0.0, True, [0.0])
    # q_k‖q_k x‖ = q_k / (q_{k+1} + q_k·[0; a_{k+2}, a_{k+3}, …])
    prods = []
    qs = [1]
    q_prev, q_cur = 0, 1
    for a in pq[1:]:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        qs.append(q_cur)
    # products whose tail has fewer than 16 terms are dominated by truncation
    last = len(qs) - 2 - 16 if len(qs) > 40 else len(qs) - 2
    with mpmath.workdps(40):
        for k in range(last):
            tail = mpmath.mpf(0)
            for a in reversed(pq[k + 2:]):
                tail = 1 / (a + tail)
            prods.append(float(qs[k] / (qs[k + 1] + qs[k] * tail)))
    half = prods[len(prods) // 2:] or prods
    return CFResult(pq, min(half) if half else 0.0, False, prods)


# ---------------------------------------------------------------------------
# exponents for products of SL(2)


@dataclass(frozen=True)
class ExponentReport:
    real: tuple[bool, ...]
    complex: tuple[bool, ...]
    char: Fraction
    delta_x: int
    zeta_x: int
    beta_prime: Fraction
    beta_phi: Fraction
    dimension_bound: Fraction

    @property
    def informative(self) -> bool:
        return self.dimension_bound < 1

    @property
    def label(self) -> str:
        return "bound" if self.informative else "no information"


def sl2_products_exponents(real: Sequence[bool], complex_: Sequence[bool] = (), beta=Fraction(1, 2)) -> ExponentReport:
    """Exponents for a curve whose derivative has the given active coordinates."""
    real, complex_ = tuple(map(bool, real)), tuple(map(bool, complex_))
    if not real and not complex_:
        raise ValueError("pattern is empty")
    active = sum(real) + 2 * sum(complex_)
    if active == 0:
        raise ValueError("all-zero pattern: the curve is constant")
    inactive = (len(real) - sum(real)) + 2 * (len(complex_) - sum(complex_))
    char = Fraction(inactive, active)
    delta_x = 2 * sum(real) + 4 * sum(complex_)
    zeta_x = 2 * (len(real) - sum(real)) + 4 * (len(complex_) - sum(complex_))
    beta = frac(beta)
    return ExponentReport(real, complex_, char, delta_x, zeta_x,
                          beta * (1 - Fraction(zeta_x, delta_x)),
                          (1 - char) / 2, Fraction(1, 2) + char / 2)


def products_bound(factors: Sequence[tuple[Sequence[bool], Sequence[bool]]]) -> Fraction:
    """1/2 + max_k char_k / 2 over several factors."""
    return max(sl2_products_exponents(r, c).dimension_bound for r, c in factors)


def max_condition(real: Sequence[bool], complex_: Sequence[bool] = ()) -> bool:
    """Active real count plus twice the active complex count exceeds (r + 2s)/2."""
    return 2 * (sum(map(bool, real)) + 2 * sum(map(bool, complex_))) > len(real) + 2 * len(complex_)


# ---------------------------------------------------------------------------
# the circle


def sphere_margin_S1(x: Sequence, Qmax: int) -> float:
    """min over rational points p/q on S¹ with q ≤ Qmax of ‖x − p/q‖∞·q."""
    x0, x1 = x
    if abs(float(x0) ** 2 + float(x1) ** 2 - 1) > 1e-12:
        raise ValueError("x must lie on the unit circle")
    exact = isinstance(x0, (int, Fraction)) and isinstance(x1, (int, Fraction))
    R = math.isqrt(Qmax)
    m, k = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1), indexing="ij")
    m, k = m.ravel(), k.ravel()
    q = m * m + k * k
    keep = (q > 0) & (q <= 2 * Qmax)
    m, k, q = m[keep], k[keep], q[keep]
    a, b = m * m - k * k, 2 * m * k
    g = np.gcd(np.gcd(np.abs(a), np.abs(b)), q)
    a, b, q = a // g, b // g, q // g
    keep = q <= Qmax
    a, b, q = a[keep], b[keep], q[keep]
    if exact:
        X0, X1 = Fraction(x0), Fraction(x1)
        hit = [(int(u), int(v), int(w)) for u, v, w in zip(a, b, q)
               if Fraction(int(u), int(w)) == X0 and Fraction(int(v), int(w)) == X1]
        if hit:
            return 0.0
    err = np.maximum(np.abs(float(x0) * q - a), np.abs(float(x1) * q - b))
    return float(err.min())
