"""Exact lattice arithmetic: bases, reduction, exterior powers, primitive sublattices.

Bases are stored column-wise as row-major tuples of ``Fraction``.  Real
embeddings are computed on demand from the exact coordinates, which keeps
orbit lattices representable at large flow times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

Matrix = tuple[tuple[Fraction, ...], ...]

DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """Enumeration hit its candidate budget before finishing."""

    def __init__(self, message: str, partial: object = None):
        super().__init__(message)
        self.partial = partial


class FlowOverflowError(OverflowError):
    """The flow factor left double range; extended precision is needed."""


# ---------------------------------------------------------------------------
# rational matrix helpers


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


def as_matrix(m) -> Matrix:
    return tuple(tuple(frac(v) for v in row) for row in m)


def identity(d: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def transpose(m: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def mat_vec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def columns(m: Sequence[Sequence]) -> list[tuple]:
    return [tuple(c) for c in zip(*m)]


def from_columns(cols: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(r) for r in zip(*cols))


def to_float(m: Sequence[Sequence]) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in m], dtype=float)


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    a = [[frac(v) for v in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m or not m[0]:
        return 0
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel of ``m`` over the rationals."""
    if not m:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    a, pivots = rref(m)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -a[r][f]
        basis.append(tuple(v))
    return basis


def det(m: Sequence[Sequence]) -> Fraction:
    a = [[frac(v) for v in row] for row in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            out = -out
        out *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return out


def inverse(m: Sequence[Sequence]) -> Matrix:
    n = len(m)
    aug = [list(map(frac, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    a, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in a)


def _minor(m: Sequence[Sequence], rows: Sequence[int], cols: Sequence[int]):
    sub = [[m[r][c] for c in cols] for r in rows]
    if all(isinstance(v, (int, Fraction)) for row in sub for v in row):
        return det(sub)
    return float(np.linalg.det(np.array(sub, dtype=float))) if sub else 1.0


def compound(m: Sequence[Sequence], i: int):
    """Matrix of the induced map on the i-th exterior power (sorted-subset basis)."""
    d = len(m)
    subs = list(combinations(range(d), i))
    return tuple(tuple(_minor(m, r, c) for c in subs) for r in subs)


def lie_derivation(x: Sequence[Sequence], i: int) -> Matrix:
    """Matrix of the Lie-algebra action X(v1∧..∧vi) = Σ v1∧..X vj..∧vi."""
    d = len(x)
    subs = list(combinations(range(d), i))
    index = {s: k for k, s in enumerate(subs)}
    out = [[Fraction(0)] * len(subs) for _ in subs]
    for col, s in enumerate(subs):
        for pos, j in enumerate(s):
            for k in range(d):
                coef = frac(x[k][j])
                if coef == 0:
                    continue
                if k != j and k in s:
                    continue
                new = list(s)
                new[pos] = k
                order = sorted(range(i), key=lambda q: new[q])
                sign = _perm_sign(order)
                out[index[tuple(sorted(new))]][col] += sign * coef
    return tuple(tuple(r) for r in out)


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = list(order)
    for a in range(len(seen)):
        for b in range(a + 1, len(seen)):
            if seen[a] > seen[b]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# integer normal forms


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _column_echelon(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Column Hermite form: returns (H, U, rank) with m·U = H, U unimodular.

    Pivots move down and right; entries left of a pivot are reduced into
    [0, pivot).  Columns past ``rank`` are zero and the matching columns of U
    span the integer kernel.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    h = [[int(v) for v in row] for row in m]
    u = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def combine(c, j, x, y, p, q):
        # col_c <- x col_c + y col_j ; col_j <- p col_c + q col_j
        for mat in (h, u):
            for row in mat:
                a, b = row[c], row[j]
                row[c], row[j] = x * a + y * b, p * a + q * b

    c = 0
    for r in range(rows):
        if c == cols:
            break
        for j in range(c + 1, cols):
            b = h[r][j]
            if b == 0:
                continue
            a = h[r][c]
            g, x, y = _xgcd(a, b)
            combine(c, j, x, y, -b // g, a // g)
        piv = h[r][c]
        if piv == 0:
            continue
        if piv < 0:
            for mat in (h, u):
                for row in mat:
                    row[c] = -row[c]
            piv = -piv
        for j in range(c):
            q = h[r][j] // piv
            if q:
                for mat in (h, u):
                    for row in mat:
                        row[j] -= q * row[c]
        c += 1
    return h, u, c


def _as_int_matrix(basis) -> list[list[int]]:
    out = []
    for row in basis:
        r = []
        for v in row:
            f = frac(v)
            if f.denominator != 1:
                raise ValueError("integer matrix required")
            r.append(f.numerator)
        out.append(r)
    return out


def hnf(basis) -> tuple[tuple[int, ...], ...]:
    """Column-style Hermite normal form of an integer basis (same lattice)."""
    m = _as_int_matrix(basis)
    h, _, r = _column_echelon(m)
    if r < len(m[0]):
        raise ValueError("rank-deficient basis")
    return tuple(tuple(row) for row in h)


def integer_kernel(m: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """A basis of {z ∈ ℤ^n : m z = 0}."""
    m = _as_int_matrix(m)
    n = len(m[0])
    _, u, r = _column_echelon(m)
    return [tuple(u[i][j] for i in range(n)) for j in range(r, n)]


def same_lattice(a, b) -> bool:
    """Exact check that two integer bases generate the same lattice."""
    return hnf(a) == hnf(b)


# ---------------------------------------------------------------------------
# LLL


def _gso(e: list, dot: Callable) -> tuple[list[list], list]:
    n = len(e)
    mu = [[0] * n for _ in range(n)]
    bstar: list = []
    bnorm: list = []
    for k in range(n):
        v = e[k]
        for j in range(k):
            mu[k][j] = dot(e[k], bstar[j]) / bnorm[j]
            v = v - mu[k][j] * bstar[j] if not isinstance(v, list) else [a - mu[k][j] * b for a, b in zip(v, bstar[j])]
        bstar.append(v)
        bnorm.append(dot(v, v))
    return mu, bnorm


def _round(x) -> int:
    return math.floor(x + Fraction(1, 2)) if isinstance(x, Fraction) else int(math.floor(x + 0.5))


def _lll(vectors: list, emb: Callable, dot: Callable, delta: float, coeffs: list | None = None,
         max_iter: int = 200_000) -> tuple[list, list]:
    """LLL over exact vectors whose inner product is computed on ``emb`` images.

    ``coeffs`` (optional) is a parallel list of integer coefficient vectors
    updated with the same unimodular column operations.
    """
    b = list(vectors)
    e = [emb(v) for v in b]
    cf = [list(c) for c in coeffs] if coeffs is not None else None
    n = len(b)
    k = 1
    it = 0
    while k < n:
        it += 1
        if it > max_iter:
            raise RuntimeError("LLL did not converge")
        mu, bn = _gso(e, dot)
        changed = False
        for j in range(k - 1, -1, -1):
            q = _round(mu[k][j])
            if q:
                b[k] = tuple(x - q * y for x, y in zip(b[k], b[j]))
                if cf is not None:
                    cf[k] = [x - q * y for x, y in zip(cf[k], cf[j])]
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
                mu[k][j] -= q
                changed = True
        if changed:
            e[k] = emb(b[k])
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            e[k], e[k - 1] = e[k - 1], e[k]
            if cf is not None:
                cf[k], cf[k - 1] = cf[k - 1], cf[k]
            k = max(k - 1, 1)
    return b, (cf if cf is not None else [])


def _exact_dot(u, v):
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def lll_reduce(basis, delta: float = 0.99) -> tuple[tuple[int, ...], ...]:
    """Exact LLL reduction of an integer basis given by columns."""
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    m = _as_int_matrix(basis)
    if rank(m) < len(m[0]):
        raise ValueError("columns must be independent")
    cols = [tuple(Fraction(v) for v in c) for c in columns(m)]
    red, _ = _lll(cols, lambda v: list(v), _exact_dot, Fraction(delta).limit_denominator(10**6))
    return tuple(tuple(int(v) for v in row) for row in from_columns(red))


def lovasz_holds(basis, delta: float = 0.99) -> bool:
    cols = [[frac(v) for v in c] for c in columns(basis)]
    mu, bn = _gso(cols, _exact_dot)
    dl = Fraction(delta).limit_denominator(10**6)
    for k in range(1, len(cols)):
        if any(abs(mu[k][j]) > Fraction(1, 2) for j in range(k)):
            return False
        if bn[k] < (dl - mu[k][k - 1] ** 2) * bn[k - 1]:
            return False
    return True


# ---------------------------------------------------------------------------
# exterior algebra


@dataclass(frozen=True)
class Multivector:
    """Element of ⋀^degree ℝ^dim in the sorted-subset basis."""

    dim: int
    degree: int
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != math.comb(self.dim, self.degree):
            raise ValueError("coordinate count does not match binomial(dim, degree)")

    @staticmethod
    def subsets(dim: int, degree: int) -> list[tuple[int, ...]]:
        return list(combinations(range(dim), degree))

    def array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords], dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def scaled(self, c) -> "Multivector":
        return Multivector(self.dim, self.degree, tuple(c * v for v in self.coords))

    def __add__(self, other: "Multivector") -> "Multivector":
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise ValueError("shape mismatch")
        return Multivector(self.dim, self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Multivector":
        return self.scaled(-1)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    @classmethod
    def basis_vector(cls, dim: int, subset: Iterable[int]) -> "Multivector":
        s = tuple(sorted(subset))
        subs = cls.subsets(dim, len(s))
        return cls(dim, len(s), tuple(Fraction(int(x == s)) for x in subs))


def wedge(vectors: Sequence[Sequence]) -> Multivector:
    """Exterior product of vectors in ℝ^d (exact for integer/rational input)."""
    if not vectors:
        raise ValueError("need at least one vector")
    d = len(vectors[0])
    if any(len(v) != d for v in vectors):
        raise ValueError("dimension mismatch")
    i = len(vectors)
    if i > d:
        raise ValueError("more vectors than the dimension")
    exact = all(isinstance(x, (int, Fraction, np.integer)) for v in vectors for x in v)
    m = [[frac(v[r]) if exact else float(v[r]) for v in vectors] for r in range(d)]
    coords = tuple(_minor(m, rows, range(i)) for rows in combinations(range(d), i))
    return Multivector(d, i, coords)


def wedge_with_map(a: Sequence[int], d: int, i: int) -> list[list[int]]:
    """Integer matrix of z ↦ z ∧ a from ℝ^d to ⋀^{i+1}ℝ^d."""
    subs = list(combinations(range(d), i))
    target = {s: k for k, s in enumerate(combinations(range(d), i + 1))}
    out = [[0] * d for _ in target]
    for coef, s in zip(a, subs):
        if coef == 0:
            continue
        for k in range(d):
            if k in s:
                continue
            sign = -1 if sum(1 for j in s if j < k) % 2 else 1
            out[target[tuple(sorted(s + (k,)))]][k] += sign * int(coef)
    return out


def is_decomposable(a: Sequence[int], d: int, i: int) -> bool:
    if i <= 1 or i >= d - 1:
        return any(a)
    return rank(wedge_with_map(a, d, i)) == d - i


# ---------------------------------------------------------------------------
# embeddings under a diagonalizable flow


_LOG2E = 1.0 / math.log(2.0)


def scaled_float(q: Fraction, log_scale: float) -> float:
    """q·e^{log_scale} as a float, robust to huge or tiny numerators."""
    if q == 0:
        return 0.0
    try:
        base = float(q)
        if base != 0.0 and abs(log_scale) < 700.0:
            return base * math.exp(log_scale)
    except OverflowError:
        pass
    n, d = q.numerator, q.denominator
    shift = 64 - (n.bit_length() - d.bit_length())
    m = (n << shift) // d if shift >= 0 else n // (d << -shift)
    e2 = -shift + log_scale * _LOG2E
    ie = math.floor(e2)
    try:
        return math.ldexp(float(m) * 2.0 ** (e2 - ie), ie)
    except OverflowError:
        return math.copysign(math.inf, n)


@dataclass(frozen=True)
class DiagonalFrame:
    """Eigenframe of H0: H0 = P·diag(weights)·P⁻¹ (P None means identity)."""

    weights: tuple[int, ...]
    P: Matrix | None = None
    Pinv: Matrix | None = None

    @property
    def dim(self) -> int:
        return len(self.weights)

    def power(self, i: int) -> "DiagonalFrame":
        return _frame_power(self, i)

    def embed(self, v: Sequence[Fraction], t: float) -> np.ndarray:
        y = v if self.P is None else mat_vec(self.Pinv, v)
        c = np.array([scaled_float(frac(a), t * w) for a, w in zip(y, self.weights)])
        if not np.all(np.isfinite(c)):
            raise FlowOverflowError("flowed coordinates overflow double precision; use smaller t")
        return c if self.P is None else _float_P(self) @ c


@lru_cache(maxsize=256)
def _frame_power(frame: DiagonalFrame, i: int) -> DiagonalFrame:
    subs = list(combinations(range(frame.dim), i))
    weights = tuple(sum(frame.weights[j] for j in s) for s in subs)
    if frame.P is None:
        return DiagonalFrame(weights)
    return DiagonalFrame(weights, as_matrix(compound(frame.P, i)), as_matrix(compound(frame.Pinv, i)))


@lru_cache(maxsize=256)
def _float_P(frame: DiagonalFrame) -> np.ndarray:
    return to_float(frame.P)


def standard_frame(d: int) -> DiagonalFrame:
    return DiagonalFrame(tuple(0 for _ in range(d)))


# ---------------------------------------------------------------------------
# lattice states


@dataclass(frozen=True)
class LatticeState:
    """The lattice exp(t·H0)·B ℤ^d with B exact; the flow is applied analytically."""

    basis: Matrix
    t: float = 0.0
    frame: DiagonalFrame | None = None
    _checked: bool = field(default=True, compare=False, repr=False)

    @classmethod
    def from_matrix(cls, m, t: float = 0.0, frame: DiagonalFrame | None = None) -> "LatticeState":
        b = as_matrix(m)
        if len(b) != len(b[0]):
            raise ValueError("basis must be square")
        if abs(det(b)) != 1:
            raise ValueError("basis is not unimodular")
        if t != 0.0 and frame is None:
            raise ValueError("a frame is required for t != 0")
        return cls(b, float(t), frame)

    @classmethod
    def standard(cls, d: int) -> "LatticeState":
        return cls(identity(d))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return columns(self.basis)

    def embed(self, v: Sequence[Fraction]) -> np.ndarray:
        if self.frame is None or self.t == 0.0:
            return np.array([float(a) for a in v])
        return self.frame.embed(v, self.t)

    def embedded(self) -> np.ndarray:
        return np.column_stack([self.embed(c) for c in self.columns()])

    def with_columns(self, cols: Sequence[Sequence[Fraction]]) -> "LatticeState":
        return LatticeState(from_columns(cols), self.t, self.frame)

    def flowed(self, dt: float, frame: DiagonalFrame | None = None) -> "LatticeState":
        fr = frame or self.frame
        if fr is None:
            raise ValueError("a frame is required to flow")
        return LatticeState(self.basis, self.t + dt, fr)

    def left_multiply(self, m) -> "LatticeState":
        """Lattice m·x for an exact matrix m acting before the flow."""
        return LatticeState(mat_mul(as_matrix(m), self.basis), self.t, self.frame)


def gauss_reduce(x: LatticeState, max_iter: int = 10_000) -> LatticeState:
    """Lagrange–Gauss reduction of a planar lattice in its embedded metric."""
    if x.dim != 2:
        raise ValueError("gauss_reduce needs d = 2")
    b1, b2 = x.columns()
    e1, e2 = x.embed(b1), x.embed(b2)
    n1, n2 = float(e1 @ e1), float(e2 @ e2)
    if n2 < n1:
        b1, b2, e1, e2, n1, n2 = b2, b1, e2, e1, n2, n1
    for _ in range(max_iter):
        mu = _round(float(e1 @ e2) / n1)
        if mu == 0:
            break
        c = tuple(p - mu * q for p, q in zip(b2, b1))
        ec = x.embed(c)
        nc = float(ec @ ec)
        if nc >= n2:
            break
        b2, e2, n2 = c, ec, nc
        if n2 < n1:
            b1, b2, e1, e2, n1, n2 = b2, b1, e2, e1, n2, n1
    else:
        raise RuntimeError("Gauss reduction did not converge")
    return x.with_columns([b1, b2])


def reduce_lattice(x: LatticeState, delta: float = 0.99) -> LatticeState:
    """Reduced basis of the same lattice in the embedded metric."""
    if x.dim == 2:
        return gauss_reduce(x)
    red, _ = _lll(x.columns(), x.embed, lambda u, v: float(np.dot(u, v)), delta)
    return x.with_columns(red)


# ---------------------------------------------------------------------------
# short vectors and primitive monomials


def short_vectors(E: np.ndarray, radius: float, budget: int = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """Integer x ≠ 0 (one of ±x) with ‖E x‖ ≤ radius, by Fincke–Pohst search."""
    n = E.shape[1]
    _, R = np.linalg.qr(E)
    r2max = radius * radius * (1 + 1e-9) + 1e-300
    out: list[tuple[int, ...]] = []
    x = [0] * n
    nodes = 0

    def rec(i: int, rem: float):
        nonlocal nodes
        rii = R[i, i]
        c = -sum(R[i, j] * x[j] for j in range(i + 1, n)) / rii
        w = math.sqrt(max(rem, 0.0)) / abs(rii)
        lo, hi = math.ceil(c - w - 1e-12), math.floor(c + w + 1e-12)
        for v in range(lo, hi + 1):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"short-vector search exceeded budget {budget}", partial=list(out))
            x[i] = v
            s = R[i, i] * v + sum(R[i, j] * x[j] for j in range(i + 1, n))
            left = rem - s * s
            if left < -1e-12 * r2max:
                continue
            if i == 0:
                if any(x):
                    first = next(a for a in reversed(x) if a)
                    if first > 0:
                        out.append(tuple(x))
            else:
                rec(i - 1, left)
        x[i] = 0

    rec(n - 1, r2max)
    return out


@dataclass(frozen=True)
class PrimitiveMonomial:
    """Wedge of a basis of a primitive rank-i subgroup of the lattice."""

    generators: tuple[tuple[Fraction, ...], ...]
    wedge: Multivector
    norm: float
    hnf_coords: tuple[tuple[int, ...], ...] = ()

    @property
    def degree(self) -> int:
        return len(self.generators)


class WedgeLattice:
    """The lattice ⋀^i x, LLL-reduced in its embedded metric, ready for search."""

    def __init__(self, x: LatticeState, i: int, reduced: LatticeState | None = None):
        d = x.dim
        if not 0 < i < d:
            raise ValueError("degree must satisfy 0 < i < d")
        self.x = x
        self.i = i
        self.d = d
        self.xr = reduced if reduced is not None else reduce_lattice(x)
        cols = self.xr.columns()
        subs = list(combinations(range(d), i))
        self.plucker = [wedge([cols[j] for j in s]).coords for s in subs]
        frame_i = x.frame.power(i) if x.frame is not None else None
        t = x.t

        def emb(v):
            if frame_i is None or t == 0.0:
                return np.array([float(a) for a in v])
            return frame_i.embed(v, t)

        self.embed = emb
        unit = [[int(r == c) for c in range(len(subs))] for r in range(len(subs))]
        red, cf = _lll(self.plucker, emb, lambda u, v: float(np.dot(u, v)), 0.99, coeffs=unit)
        self.basis = red
        self.coeffs = cf
        self.E = np.column_stack([emb(v) for v in red])

    def search(self, radius: float, budget: int = DEFAULT_BUDGET) -> list[tuple[tuple[int, ...], tuple[Fraction, ...], float]]:
        """Primitive decomposable vectors of norm ≤ radius.

        Returns (coefficients in the reduced-basis wedge coordinates, exact
        standard coordinates, embedded norm).
        """
        found = []
        for c in short_vectors(self.E, radius, budget):
            a = [sum(cj * col[k] for cj, col in zip(c, self.coeffs)) for k in range(len(self.plucker))]
            if math.gcd(*a) != 1 or not is_decomposable(a, self.d, self.i):
                continue
            w = tuple(sum((cj * v[k] for cj, v in zip(c, self.basis)), Fraction(0)) for k in range(len(self.plucker)))
            found.append((tuple(a), w, float(np.linalg.norm(self.embed(w)))))
        return found

    def generators(self, a: Sequence[int]) -> list[tuple[Fraction, ...]]:
        """Exact generators (standard coordinates) of the subgroup with wedge coords a."""
        if self.i == 1:
            ker = [tuple(int(v) for v in a)]
        else:
            ker = [tuple(k) for k in integer_kernel(wedge_with_map(a, self.d, self.i))]
        cols = self.xr.columns()
        return [tuple(sum((kk * c[r] for kk, c in zip(k, cols)), Fraction(0)) for r in range(self.d)) for k in ker]


def enumerate_primitive_monomials(x: LatticeState, i: int, norm_bound: float,
                                  budget: int = DEFAULT_BUDGET) -> list[PrimitiveMonomial]:
    """All primitive rank-i subgroups with embedded wedge norm ≤ norm_bound, once each up to sign."""
    if norm_bound <= 0:
        raise ValueError("norm_bound must be positive")
    wl = WedgeLattice(x, i)
    binv = inverse(x.basis)
    out = []
    for a, w, nrm in wl.search(norm_bound, budget):
        gens = wl.generators(a)
        coords = _as_int_matrix(mat_mul(binv, from_columns(gens)))
        h = hnf(coords)
        gens_std = columns(mat_mul(x.basis, h))
        mv = wedge(gens_std)
        out.append(PrimitiveMonomial(tuple(gens_std), mv, nrm, h))
    out.sort(key=lambda pm: tuple(v for row in pm.hnf_coords for v in row))
    return out
