"""Height functions φ_ε on multivectors and f_ε on lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .linalg_exact import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    DiagonalFrame,
    FlowOverflowError,
    LatticeState,
    Matrix,
    Multivector,
    PrimitiveMonomial,
    WedgeLattice,
    as_matrix,
    columns,
    frac,
    gauss_reduce,
    identity,
    lie_derivation,
    mat_mul,
    reduce_lattice,
    short_vectors,
    to_float,
    wedge,
)
from .sl2_rep import RepDecomposition, Sl2Triple, decompose, delta_i


@dataclass(frozen=True)
class HeightConfig:
    epsilon: float = 0.5
    beta: float = 0.4
    norm: str = "euclidean"
    initial_bound: float | None = None
    growth: float = 2.0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.norm != "euclidean":
            raise ValueError("only the euclidean norm is supported")
        if self.growth <= 1:
            raise ValueError("growth factor must exceed 1")

    @staticmethod
    def delta_table(d: int) -> dict[int, int]:
        return {i: delta_i(d, i) for i in range(d + 1)}


@dataclass(frozen=True, order=False)
class HeightValue:
    value: float
    witness: PrimitiveMonomial | None = None
    attained_lambda: int | None = None

    def __float__(self) -> float:
        return self.value

    def __lt__(self, other) -> bool:
        return self.value < float(other)

    def __le__(self, other) -> bool:
        return self.value <= float(other)

    def __gt__(self, other) -> bool:
        return self.value > float(other)

    def __ge__(self, other) -> bool:
        return self.value >= float(other)

    def power(self, p: float) -> float:
        return math.inf if math.isinf(self.value) else self.value ** p


# ---------------------------------------------------------------------------
# φ_ε


def _norm_flowed(dec: RepDecomposition, w: Sequence, lam: int, t: float, frame) -> float:
    p = dec.project(lam, w)
    if frame is None or t == 0.0:
        return float(np.linalg.norm([float(a) for a in p]))
    return float(np.linalg.norm(frame.power(dec.degree).embed(p, t)))


def _phi_core(dec: RepDecomposition, w: Sequence, eps: float, t: float = 0.0, frame=None) -> tuple[float, int | None]:
    di = delta_i(dec.dim, dec.degree)
    if 0 in dec.isotypic:
        p0 = dec.project(0, w)
        if float(np.linalg.norm([float(a) for a in p0])) >= eps**di:
            return 0.0, None
    best, arg = math.inf, None
    for lam in dec.nonzero:
        nrm = _norm_flowed(dec, w, lam, t, frame)
        if nrm == 0.0:
            continue
        val = eps ** (di / lam) * nrm ** (-1.0 / lam)
        if val < best:
            best, arg = val, lam
    return best, arg


def phi_eps(decomp: RepDecomposition, v: Multivector, cfg: HeightConfig, t: float = 0.0, frame=None) -> HeightValue:
    """φ_ε(g_t v); ``frame`` is the triple's eigenframe (needed only when t ≠ 0)."""
    if not 0 < v.degree < v.dim:
        raise ValueError("φ_ε is defined for degrees 0 < i < d")
    if v.degree != decomp.degree:
        raise ValueError("degree mismatch")
    if v.is_zero():
        raise ValueError("v must be nonzero")
    val, lam = _phi_core(decomp, v.coords, cfg.epsilon, t, frame)
    return HeightValue(val, None, lam)


def dominance_bound(dec: RepDecomposition, eps: float, radius: float) -> float:
    """Upper bound for φ_ε(v) over all v with ‖v‖ > radius.

    If φ_ε(v) > 0 then ‖π₀v‖ < ε^{δ_i}, and ‖v‖ ≤ ‖π₀v‖ + Σ_λ‖π_λv‖ forces
    max_λ ‖π_λ v‖ ≥ (‖v‖ − ε^{δ_i})/m with m nonzero components.
    """
    di = delta_i(dec.dim, dec.degree)
    lams = dec.nonzero
    r = (radius - (eps**di if 0 in dec.isotypic else 0.0)) / len(lams)
    if r <= 0:
        return math.inf
    return max(eps ** (di / lam) * r ** (-1.0 / lam) for lam in lams)


# ---------------------------------------------------------------------------
# f_ε


def _is_standard_plane(triple: Sl2Triple) -> bool:
    return triple.dim == 2


def _f_d2(x: LatticeState, eps: float) -> tuple[HeightValue, LatticeState]:
    xr = gauss_reduce(x)
    b1 = xr.columns()[0]
    nrm = float(np.linalg.norm(xr.embed(b1)))
    mono = PrimitiveMonomial((b1,), wedge([b1]), nrm)
    return HeightValue(eps / nrm, mono, 1), xr


def f_eps_with_basis(x: LatticeState, triple: Sl2Triple, cfg: HeightConfig,
                     reduced: LatticeState | None = None) -> tuple[HeightValue, LatticeState]:
    """f_ε(x) together with a reduced basis of x (reusable as a warm start)."""
    if x.dim != triple.dim:
        raise ValueError("lattice and triple dimensions differ")
    eps = cfg.epsilon
    if _is_standard_plane(triple):
        return _f_d2(reduced if reduced is not None else x, eps)
    xr = reduced if reduced is not None else reduce_lattice(x)
    d = x.dim
    frame = triple.frame
    xs = LatticeState(xr.basis, x.t, frame if x.t != 0.0 else x.frame)
    state = {}
    best = HeightValue(0.0)
    best_i = None
    for i in range(1, d):
        dec = decompose(triple, i)
        wl = WedgeLattice(xs, i, reduced=xs)
        r0 = cfg.initial_bound or 1.5 * float(np.linalg.norm(wl.E[:, 0]))
        state[i] = [dec, wl, r0, None]
    spent = 0

    def scan(i: int):
        nonlocal best, best_i, spent
        dec, wl, radius, _ = state[i]
        try:
            found = wl.search(radius, cfg.budget - spent)
        except BudgetExceeded as exc:
            raise BudgetExceeded(f"f_eps enumeration budget exceeded in degree {i}", partial=best) from exc
        spent += len(found) + 1
        for a, w, _nrm in found:
            val, lam = _phi_core(dec, w, eps, xs.t, frame)
            if val > best.value:
                best = HeightValue(val, None, lam)
                best_i = (i, a, _nrm)

    for i in state:
        scan(i)
    while True:
        pending = [i for i in state if dominance_bound(state[i][0], eps, state[i][2]) > best.value]
        if not pending or math.isinf(best.value):
            break
        for i in pending:
            state[i][2] *= cfg.growth
            scan(i)
    if best_i is not None:
        i, a, nrm = best_i
        gens = state[i][1].generators(a)
        best = HeightValue(best.value, PrimitiveMonomial(tuple(gens), wedge(gens), nrm), best.attained_lambda)
    return best, xs


def f_eps(x: LatticeState, triple: Sl2Triple, cfg: HeightConfig) -> HeightValue:
    """Max of φ_ε over the x-integral monomials of every degree 0 < i < d."""
    return f_eps_with_basis(x, triple, cfg)[0]


def calibrate_epsilon(x: LatticeState, triple: Sl2Triple, cfg: HeightConfig, max_halvings: int = 20) -> HeightConfig:
    """Halve ε until f_ε(x) is finite."""
    c = cfg
    for _ in range(max_halvings + 1):
        if math.isfinite(f_eps(x, triple, c).value):
            return c
        c = HeightConfig(c.epsilon / 2, c.beta, c.norm, c.initial_bound, c.growth, c.budget)
    raise ValueError("f_eps stays infinite after the allowed number of halvings")


# ---------------------------------------------------------------------------
# log-Lipschitz data


def kappa(triple: Sl2Triple) -> float:
    """max 1/δ_λ over the nonzero weights present in ⋀^i, 0 < i < d."""
    lams = [lam for i in range(1, triple.dim) for lam in decompose(triple, i).nonzero]
    return 1.0 / min(lams)


@lru_cache(maxsize=64)
def _nilpotent_powers(Y: Matrix, d: int) -> tuple[tuple[float, ...], ...]:
    out = []
    for i in range(1, d):
        N = to_float(lie_derivation(Y, i))
        norms = []
        P = np.eye(N.shape[0])
        for _ in range(N.shape[0] + 1):
            P = P @ N
            nrm = float(np.linalg.norm(P, 2)) if P.any() else 0.0
            norms.append(nrm * (1 + 1e-9))
            if nrm == 0.0:
                break
        out.append(tuple(norms))
    return tuple(out)


def unipotent_omega(Y, h: float) -> float:
    """Bound for ‖ρ(u(hY))^{±1}‖ on ⊕_{0<i<d} ⋀^i."""
    Ym = as_matrix(Y)
    best = 1.0
    for norms in _nilpotent_powers(Ym, len(Ym)):
        s, fact = 1.0, 1.0
        for k, nk in enumerate(norms, start=1):
            fact *= k
            s += abs(h) ** k * nk / fact
        best = max(best, s)
    return best


# ---------------------------------------------------------------------------
# unipotent translates


def nilpotent_exp_exact(Y: Matrix, c: Fraction) -> Matrix:
    d = len(Y)
    out = [list(r) for r in identity(d)]
    term = identity(d)
    for k in range(1, d + 1):
        term = tuple(tuple(v * c / k for v in row) for row in mat_mul(term, Y))
        if all(v == 0 for row in term for v in row):
            break
        out = [[a + b for a, b in zip(r, s)] for r, s in zip(out, term)]
    return tuple(tuple(r) for r in out)


def unipotent_translate(x: LatticeState, Y, s, alpha_rate: float = 2.0) -> LatticeState:
    """The lattice u(sY)·x for x = g_t B, kept in the form g_t·(exact basis)."""
    Ym = as_matrix(Y)
    if x.t == 0.0:
        c = frac(s)
    else:
        if alpha_rate * x.t > 700:
            raise FlowOverflowError("conjugation factor leaves double range")
        c = frac(s) * Fraction(math.exp(-alpha_rate * x.t))
    return LatticeState(mat_mul(nilpotent_exp_exact(Ym, c), x.basis), x.t, x.frame)


# ---------------------------------------------------------------------------
# Assumption ∗ components


@dataclass(frozen=True)
class ComponentCount:
    count: int
    intervals: tuple[tuple[float, float], ...]
    degree_bound: int
    witnesses: int = 0

    def __int__(self) -> int:
        return self.count


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def box_vectors_d2(x: LatticeState, X: float, rho: float,
                   budget: int = DEFAULT_BUDGET) -> list[tuple[float, float]]:
    """Embedded primitive vectors v of a planar lattice with |v₁| ≤ X and |v₂| ≤ ρ (one of ±v).

    diag(1/X, 1/ρ) equals a flow by τ = ½log(ρ/X) up to a scalar, so the
    box is searched on the exactly reduced lattice at time t + τ; this
    stays well conditioned however thin the box is.
    """
    frame = x.frame if x.frame is not None else DiagonalFrame((1, -1))
    if frame.P is not None or frame.weights != (1, -1):
        raise ValueError("diagonal frame required")
    tau = 0.5 * math.log(rho / X)
    red = gauss_reduce(LatticeState(x.basis, x.t + tau, frame))
    S = red.embedded() / math.sqrt(X * rho)
    home = LatticeState(red.basis, x.t, frame)
    out = []
    for c in short_vectors(S, math.sqrt(2.0), budget):
        if math.gcd(*c) != 1:
            continue
        v = home.embed(tuple(c[0] * a + c[1] * b for a, b in zip(*home.columns())))
        if abs(v[0]) <= X * (1 + 1e-12) and abs(v[1]) <= rho * (1 + 1e-12):
            out.append((float(v[0]), float(v[1])))
    return out


def high_set_d2(x: LatticeState, y: float, T: float, M: float, eps: float,
                budget: int = DEFAULT_BUDGET) -> tuple[list[tuple[float, float]], int]:
    """Exact {|s| ≤ T : f_ε(u(s·yE₁₂)x) > M} for planar lattices with diagonal H0.

    f_ε > M iff some primitive v has ‖u_s v‖ < ρ = ε/M; such v satisfy
    |v₂| < ρ and |v₁| < ρ(1 + T|y|), a box searched by Fincke–Pohst.
    """
    if x.frame is not None and x.frame.P is not None:
        raise ValueError("diagonal frame required")
    rho = eps / M
    out = []
    witnesses = 0
    for v1, v2 in box_vectors_d2(x, rho * (1 + T * abs(y)), rho, budget):
        if abs(v2) >= rho:
            continue
        if v2 == 0.0 or y == 0.0:
            if abs(v1) < rho:
                out.append((-T, T))
                witnesses += 1
            continue
        half = math.sqrt(rho * rho - v2 * v2) / abs(y * v2)
        center = -v1 / (y * v2)
        a, b = max(center - half, -T), min(center + half, T)
        if a < b:
            out.append((a, b))
            witnesses += 1
    return _merge(out), witnesses


def count_components_above(triple: Sl2Triple, x: LatticeState, Y, T: float, M: float,
                           cfg: HeightConfig, grid: int = 2**12, rel_tol: float = 1e-9) -> ComponentCount:
    """Connected components of {|s| ≤ T : f_ε(u(sY)x) > M}."""
    if T <= 0 or M <= 0:
        raise ValueError("T and M must be positive")
    Ym = as_matrix(Y)
    d = triple.dim
    fr = triple.frame
    if d == 2 and fr.P is None and Ym[1][0] == 0 and Ym[0][0] == 0 and Ym[1][1] == 0:
        xs = LatticeState(x.basis, x.t, fr)
        ivs, nw = high_set_d2(xs, float(Ym[0][1]), T, M, cfg.epsilon, cfg.budget)
        return ComponentCount(len(ivs), tuple(ivs), 2, nw)
    return _count_generic(triple, x, Ym, T, M, cfg, grid, rel_tol)


def _count_generic(triple, x, Ym, T, M, cfg, grid, rel_tol) -> ComponentCount:
    k = kappa(triple)
    tol = rel_tol * T

    def f_at(s: float) -> float:
        return f_eps(unipotent_translate(x, Ym, s, triple.alpha_H0), triple, cfg).value

    labels: list[tuple[float, float, str]] = []

    def certify(a: float, b: float, fm: float | None = None):
        m = 0.5 * (a + b)
        fm = f_at(m) if fm is None else fm
        om = unipotent_omega(Ym, 0.5 * (b - a)) ** k
        if fm * om <= M:
            labels.append((a, b, "low"))
        elif fm / om > M:
            labels.append((a, b, "high"))
        elif b - a < tol:
            labels.append((a, b, "?"))
        else:
            certify(a, m)
            certify(m, b)

    edges = np.linspace(-T, T, grid + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        certify(float(a), float(b))
    labels.sort()
    comps: list[list[float]] = []
    ambiguous = []
    prev = "low"
    for idx, (a, b, lab) in enumerate(labels):
        if lab == "?":
            nxt = next((l for _, _, l in labels[idx + 1:] if l != "?"), "low")
            if prev == nxt:
                ambiguous.append((a, b))
                continue
            lab = "high"  # a crossing sliver is attributed to the high side
        if lab == "high":
            if comps and prev == "high":
                comps[-1][1] = b
            else:
                comps.append([a, b])
        prev = lab
    if ambiguous:
        raise ArithmeticError(f"unresolved crossings at intervals {ambiguous}")
    ivs = tuple((a, b) for a, b in comps)
    deg = 2 * max(decompose(triple, i).top_weight for i in range(1, triple.dim))
    return ComponentCount(len(ivs), ivs, deg, len(ivs))
