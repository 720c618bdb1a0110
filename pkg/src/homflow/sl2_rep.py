"""sl2-triples inside sl(d) and isotypic decompositions of exterior powers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .linalg_exact import (
    DiagonalFrame,
    Matrix,
    Multivector,
    as_matrix,
    compound,
    from_columns,
    identity,
    inverse,
    lie_derivation,
    mat_mul,
    mat_vec,
    nullspace,
    rank,
    to_float,
)


def _sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))


def _scale(c, a: Matrix) -> Matrix:
    return tuple(tuple(c * x for x in r) for r in a)


def bracket(a: Matrix, b: Matrix) -> Matrix:
    return _sub(mat_mul(a, b), mat_mul(b, a))


@dataclass(frozen=True)
class Sl2Triple:
    H0: Matrix
    Zplus: Matrix
    Zminus: Matrix

    @property
    def dim(self) -> int:
        return len(self.H0)

    def check(self) -> None:
        if bracket(self.H0, self.Zplus) != _scale(2, self.Zplus):
            raise ValueError("[H0, Zplus] != 2 Zplus")
        if bracket(self.H0, self.Zminus) != _scale(-2, self.Zminus):
            raise ValueError("[H0, Zminus] != -2 Zminus")
        if bracket(self.Zplus, self.Zminus) != self.H0:
            raise ValueError("[Zplus, Zminus] != H0")

    @property
    def frame(self) -> DiagonalFrame:
        return _eigenframe(self.H0)

    @property
    def alpha_H0(self) -> int:
        """Eigenvalue of ad(H0) on Zplus; 2 for every normalized triple."""
        return 2


def build_triple(n: int | None = None, Y=None, *, explicit: tuple | None = None) -> Sl2Triple:
    """Block triple for linear forms (n, Y) or a validated explicit (H0, Zplus, Zminus)."""
    if explicit is not None:
        tr = Sl2Triple(*(as_matrix(m) for m in explicit))
        tr.check()
        return tr
    if n is None:
        raise ValueError("give n and Y, or an explicit triple")
    Ym = as_matrix(Y if Y is not None else identity(n))
    if len(Ym) != n:
        raise ValueError("Y must be n×n")
    Yinv = inverse(Ym)  # raises on singular Y
    d = 2 * n
    z = Fraction(0)
    H0 = tuple(tuple(Fraction((1 if i < n else -1) * int(i == j)) for j in range(d)) for i in range(d))
    Zp = tuple(tuple(Ym[i][j - n] if i < n <= j else z for j in range(d)) for i in range(d))
    Zm = tuple(tuple(Yinv[i - n][j] if j < n <= i else z for j in range(d)) for i in range(d))
    tr = Sl2Triple(H0, Zp, Zm)
    tr.check()
    return tr


def standard_triple() -> Sl2Triple:
    return build_triple(1, [[1]])


def _integer_eigenvalues(m: Matrix) -> list[int]:
    d = len(m)
    bound = int(max(sum(abs(v) for v in row) for row in m)) + 1
    out = []
    for mu in range(-bound, bound + 1):
        shifted = tuple(tuple(m[i][j] - (mu if i == j else 0) for j in range(d)) for i in range(d))
        mult = d - rank(shifted)
        out.extend([mu] * mult)
    if len(out) != d:
        raise ValueError("H0 is not diagonalizable with integer eigenvalues")
    return out


@lru_cache(maxsize=64)
def _eigenframe(H0: Matrix) -> DiagonalFrame:
    d = len(H0)
    if all(H0[i][j] == 0 for i in range(d) for j in range(d) if i != j):
        w = tuple(int(H0[i][i]) for i in range(d))
        if all(H0[i][i] == w[i] for i in range(d)):
            return DiagonalFrame(w)
    vecs, weights = [], []
    for mu in sorted(set(_integer_eigenvalues(H0)), reverse=True):
        shifted = tuple(tuple(H0[i][j] - (mu if i == j else 0) for j in range(d)) for i in range(d))
        for v in nullspace(shifted):
            vecs.append(v)
            weights.append(mu)
    P = from_columns(vecs)
    return DiagonalFrame(tuple(weights), P, inverse(P))


# ---------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class Isotypic:
    projector: Matrix
    multiplicity: int
    delta: int

    @property
    def rank(self) -> int:
        return self.multiplicity * (self.delta + 1)


@dataclass(frozen=True)
class RepDecomposition:
    dim: int
    degree: int
    weight_spaces: dict
    isotypic: dict
    top_projector: Matrix
    H: Matrix
    E: Matrix
    F: Matrix

    @property
    def dim_total(self) -> int:
        return math.comb(self.dim, self.degree)

    @property
    def top_weight(self) -> int:
        return max(self.isotypic)

    @property
    def nonzero(self) -> list[int]:
        return sorted(lam for lam in self.isotypic if lam != 0)

    def project(self, lam: int, v: Sequence) -> tuple:
        return mat_vec(self.isotypic[lam].projector, v)

    def float_projector(self, lam: int) -> np.ndarray:
        return _float_cache(self, lam)


@lru_cache(maxsize=512)
def _float_cache(dec: RepDecomposition, lam: int) -> np.ndarray:
    return to_float(dec.top_projector if lam is None else dec.isotypic[lam].projector)


# dicts are unhashable; hash decompositions by identity
RepDecomposition.__hash__ = object.__hash__  # type: ignore[assignment]
RepDecomposition.__eq__ = lambda a, b: a is b  # type: ignore[assignment]


@lru_cache(maxsize=64)
def decompose(triple: Sl2Triple, i: int) -> RepDecomposition:
    d = triple.dim
    if not 0 <= i <= d:
        raise ValueError("degree out of range")
    H = lie_derivation(triple.H0, i)
    E = lie_derivation(triple.Zplus, i)
    F = lie_derivation(triple.Zminus, i)
    n = len(H)
    frame_i = triple.frame.power(i)
    weight_spaces: dict[int, list[tuple]] = {}
    for mu in sorted(set(frame_i.weights), reverse=True):
        shifted = tuple(tuple(H[r][c] - (mu if r == c else 0) for c in range(n)) for r in range(n))
        weight_spaces[mu] = nullspace(shifted)
    comps: dict[int, tuple[list[tuple], int]] = {}
    for lam, space in weight_spaces.items():
        if lam < 0 or not space:
            continue
        # highest-weight vectors: kernel of E restricted to the weight space
        S = from_columns(space)
        coeffs = nullspace(mat_mul(E, S))
        if not coeffs:
            continue
        hw = [mat_vec(S, c) for c in coeffs]
        span = []
        for v in hw:
            w = v
            for _ in range(lam + 1):
                span.append(w)
                w = mat_vec(F, w)
        comps[lam] = (span, len(hw))
    order = sorted(comps)
    full = [v for lam in order for v in comps[lam][0]]
    if len(full) != n or rank(from_columns(full)) != n:
        raise ArithmeticError("isotypic spans do not fill the exterior power")
    B = from_columns(full)
    Binv = inverse(B)
    iso = {}
    start = 0
    for lam in order:
        k = len(comps[lam][0])
        sel = tuple(tuple(Fraction(int(r == c and start <= r < start + k)) for c in range(n)) for r in range(n))
        iso[lam] = Isotypic(mat_mul(mat_mul(B, sel), Binv), comps[lam][1], lam)
        start += k
    top = max(frame_i.weights)
    top_space = weight_spaces[top]
    rest = [v for mu, sp in weight_spaces.items() if mu != top for v in sp]
    W = from_columns(top_space + rest)
    k = len(top_space)
    sel = tuple(tuple(Fraction(int(r == c and r < k)) for c in range(n)) for r in range(n))
    top_proj = mat_mul(mat_mul(W, sel), inverse(W))
    return RepDecomposition(d, i, weight_spaces, iso, top_proj, H, E, F)


def delta_i(d: int, i: int) -> int:
    return i * (d - i)


# ---------------------------------------------------------------------------
# group elements


@dataclass(frozen=True)
class GroupElement:
    kind: str
    param: object
    image: np.ndarray


def _nilpotent_exp(N: np.ndarray, s: float) -> np.ndarray:
    out = np.eye(N.shape[0])
    term = np.eye(N.shape[0])
    for k in range(1, N.shape[0] + 1):
        term = term @ N * (s / k)
        if not term.any():
            break
        out = out + term
    return out


def g_t(triple: Sl2Triple, t: float) -> GroupElement:
    fr = triple.frame
    D = np.diag(np.exp(t * np.array(fr.weights, dtype=float)))
    img = D if fr.P is None else to_float(fr.P) @ D @ to_float(fr.Pinv)
    return GroupElement("g_t", t, img)


def u_s(triple: Sl2Triple, s: float) -> GroupElement:
    return GroupElement("u_s", s, _nilpotent_exp(to_float(triple.Zplus), float(s)))


def general(triple: Sl2Triple, g2) -> GroupElement:
    """Image of an element of SL(2,ℝ) through the representation of the triple.

    Uses g = k(θ)·diag(a, 1/a)·n(x) (Iwasawa) with k(θ) = exp(θ(F − E)).
    """
    g = np.array(g2, dtype=float)
    if abs(np.linalg.det(g) - 1) > 1e-9:
        raise ValueError("element must have determinant 1")
    q, r = np.linalg.qr(g)
    sgn = np.diag(np.sign(np.diag(r)))
    q, r = q @ sgn, sgn @ r
    if np.linalg.det(q) < 0:  # cannot happen for det g = 1 with positive diag r
        raise ValueError("unexpected orientation")
    theta = math.atan2(q[1, 0], q[0, 0])
    a = r[0, 0]
    x = r[0, 1] / a
    Ef, Ff, Hf = to_float(triple.Zplus), to_float(triple.Zminus), to_float(triple.H0)
    img = expm(theta * (Ff - Ef)) @ expm(math.log(a) * Hf) @ _nilpotent_exp(Ef, x)
    return GroupElement("general", tuple(map(tuple, g)), img)


def act(g: GroupElement, v: Multivector, i: int | None = None) -> Multivector:
    """⋀^i ρ(g) applied to v (float result)."""
    i = v.degree if i is None else i
    if i != v.degree:
        raise ValueError("degree mismatch")
    M = np.array(compound(g.image.tolist(), i), dtype=float)
    return Multivector(v.dim, i, tuple(M @ v.array()))


def exterior_image(g: GroupElement, i: int) -> np.ndarray:
    return np.array(compound(g.image.tolist(), i), dtype=float)


def highest_weight_floor(decomp: RepDecomposition, v: Multivector, t: float) -> float:
    """e^{λ_max t}·‖π_+(v)‖, a lower bound for ‖g_t v‖ when H0 is diagonal."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    top = max(decomp.weight_spaces)
    p = _float_cache(decomp, None) @ v.array()
    return math.exp(top * t) * float(np.linalg.norm(p))
