"""Numerical checks of the contraction inequalities and covering bounds.

Heights entering the integral inequalities are powers h = f_ε^p of the
height of the heights module, with p = β·α(1): f_ε itself changes like
e^{±t} along g_t, so h changes like e^{±βα(t)}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.linalg import expm

from .flows import AdmissibleCurve, FlowSpec, flow_point, heights_d2_batch, reduced_float_basis
from .heights import HeightConfig, f_eps, unipotent_translate
from .linalg_exact import DiagonalFrame, LatticeState, Multivector, frac, gauss_reduce, to_float
from .sl2_rep import RepDecomposition

REL_TOL = 1e-3
EMPTY_SET = "empty set"


@dataclass
class CHReport:
    t: float
    beta: float
    lhs: float
    decay_term: float
    additive_term: float = 0.0
    height: float | None = None
    ratio: float | None = None
    c_tilde: float | None = None
    b_tilde: float | None = None
    max_violation: float | None = None
    refinement_change: float = 0.0
    flagged: bool = False


# ---------------------------------------------------------------------------
# linear representations


def _top_component(decomp: RepDecomposition, w: np.ndarray) -> tuple[int, float]:
    for lam in reversed(decomp.nonzero):
        nrm = float(np.linalg.norm(decomp.float_projector(lam) @ w))
        if nrm > 1e-14 * max(1.0, float(np.linalg.norm(w))):
            return lam, nrm
    raise ValueError("w has no component in a nontrivial isotypic summand")


def _orbit_poly(decomp: RepDecomposition, w: np.ndarray, t: float) -> np.ndarray:
    """Coefficients (lowest first) of s ↦ ‖g_t u_s w‖² as a polynomial."""
    E = to_float(decomp.E)
    H = to_float(decomp.H)
    if np.count_nonzero(H - np.diag(np.diag(H))):
        G = expm(t * H)
    else:
        G = np.diag(np.exp(t * np.diag(H)))
    terms, v = [], w.astype(float)
    for k in range(E.shape[0] + 1):
        terms.append(G @ v / math.factorial(k))
        v = E @ v
        if not v.any():
            break
    deg = len(terms) - 1
    out = np.zeros(2 * deg + 1)
    for j, a in enumerate(terms):
        for l, b in enumerate(terms):
            out[j + l] += float(a @ b)
    return out


def _quad_pieces(fn: Callable[[float], float], edges: Sequence[float]) -> float:
    """Sum of QUADPACK integrals over consecutive edges.

    Roundoff warnings are silenced; callers compare against a refined
    partition and flag disagreements instead.
    """
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                total += integrate.quad(fn, a, b, limit=400, epsabs=0.0, epsrel=1e-9)[0]
    return total


def verify_rep_contraction(decomp: RepDecomposition, w, t: float, beta: float) -> CHReport:
    """½∫₋₁¹‖g_t u_s w‖^{−β/δ_λ} ds against e^{−βt}‖π_λ w‖^{−β/δ_λ}.

    λ is the largest weight with π_λ(w) ≠ 0 and δ_λ = λ, so the decay
    factor e^{−βα(H₀)t/2} equals e^{−βt}.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    wv = np.array(w.coords if isinstance(w, Multivector) else w, dtype=float)
    lam, pnorm = _top_component(decomp, wv)
    expo = -beta / lam / 2.0
    poly = np.polynomial.Polynomial(_orbit_poly(decomp, wv, t))
    crit = [float(r.real) for r in poly.deriv().roots() if abs(r.imag) < 1e-9 and -1 < r.real < 1]
    minima = sorted(set(crit))
    if any(poly(c) <= 0.0 for c in minima):
        raise ArithmeticError("integrand is infinite on the segment")

    def fn(s: float) -> float:
        return max(poly(s), 1e-300) ** expo

    edges = [-1.0] + minima + [1.0]
    lhs = 0.5 * _quad_pieces(fn, edges)
    fine = sorted(set(edges + [0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])]))
    lhs2 = 0.5 * _quad_pieces(fn, fine)
    change = abs(lhs2 - lhs) / abs(lhs2)
    decay = math.exp(-beta * t) * pnorm ** (-beta / lam)
    return CHReport(t, beta, lhs, decay, ratio=lhs / decay, refinement_change=change,
                    flagged=change >= REL_TOL)


def fitted_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)[0])


# ---------------------------------------------------------------------------
# planar heights along segments


def _batch_heights(B: np.ndarray, r: np.ndarray, t: float, y: float, eps: float, chunk: int = 1 << 19) -> np.ndarray:
    out = np.empty_like(r)
    for i in range(0, r.size, chunk):
        out[i:i + chunk] = heights_d2_batch(B, r[i:i + chunk], t, y, eps)
    return out


def window_average(B: np.ndarray, y: float, t: float, eps: float, power: float, lo: float, hi: float,
                   max_points: int = 1 << 22, tol: float = REL_TOL) -> tuple[float, float, bool]:
    """(1/(hi−lo))∫ f_ε^power(g_t u(r y) Λ) dr for the planar lattice with float basis B.

    Midpoint rule, doubled until the relative change drops below ``tol``.
    The starting resolution puts four points in every bump of width
    e^{−2t}/|y| when that fits in ``max_points``. Returns (average,
    last relative change, flagged).
    """
    width = hi - lo
    want = 4.0 * width * abs(y) * math.exp(2 * t)
    n = 1 << 12
    while n < want and 2 * n <= max_points // 2:
        n *= 2

    def avg(k: int) -> float:
        r = lo + (np.arange(k) + 0.5) * (width / k)
        return float(np.mean(_batch_heights(B, r, t, y, eps) ** power))

    a1 = avg(n)
    while True:
        a2 = avg(2 * n)
        change = abs(a2 - a1) / abs(a2)
        n *= 2
        if change < tol or 2 * n > max_points:
            return a2, change, change >= tol
        a1 = a2


def _integrand_generic(flow: FlowSpec, Y, x: LatticeState, t: float, cfg: HeightConfig, power: float):
    def fn(r: float) -> float:
        xr = unipotent_translate(x, Y, Fraction(r), flow.alpha_rate)
        return f_eps(xr.flowed(t), flow.triple, cfg).value ** power

    return fn


def ch_power(flow: FlowSpec, beta: float) -> float:
    return beta * flow.alpha(1.0)


def verify_ch(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x: LatticeState, s, t: float,
              beta: float | None = None) -> CHReport:
    """½∫₋₁¹ h(g_t u(rφ̇(s))x) dr with h = f_ε^p, p = β·α(1)."""
    beta = cfg.beta if beta is None else beta
    Y = curve.phi_dot(frac(s))
    if all(v == 0 for row in Y for v in row):
        raise ValueError("φ̇(s) vanishes; the curve is not admissible here")
    p = ch_power(flow, beta)
    h0 = f_eps(x, flow.triple, cfg).value
    if math.isinf(h0):
        raise ValueError("f_ε(x) is infinite")
    hx = h0**p
    if flow.dim == 2 and flow.triple.frame.P is None and Y[0][0] == Y[1][1] == Y[1][0] == 0:
        B = reduced_float_basis(x)
        lhs, change, flag = window_average(B, float(Y[0][1]), t, cfg.epsilon, p, -1.0, 1.0)
    else:
        fn = _integrand_generic(flow, Y, x, t, cfg, p)
        lhs = 0.5 * _quad_pieces(fn, [-1.0, 0.0, 1.0])
        lhs2 = 0.5 * _quad_pieces(fn, [-1.0, -0.5, 0.0, 0.5, 1.0])
        change = abs(lhs2 - lhs) / abs(lhs2)
        flag = change >= REL_TOL
    if math.isinf(lhs):
        raise ValueError("f_ε is infinite on the integration segment")
    decay = math.exp(-beta * flow.alpha(t)) * hx
    return CHReport(t, beta, lhs, decay, height=hx, ratio=lhs / decay, refinement_change=change, flagged=flag)


def cusp_point(p: int, q: int, k: float, frame=None) -> LatticeState:
    """g_k u_{p/q} ℤ², whose shortest vector has length q e^{−k}."""
    frame = DiagonalFrame((1, -1)) if frame is None else frame
    return LatticeState(((Fraction(1), Fraction(p, q)), (Fraction(0), Fraction(1))), float(k), frame)


@dataclass
class CHFit:
    t: float
    beta: float
    c_tilde: float
    b_tilde: float
    M_thresh: float
    max_violation: float
    reports: list[CHReport] = field(default_factory=list)


def fit_ch(high: Sequence[CHReport], low: Sequence[CHReport], rounds: int = 2) -> CHFit:
    """Fit c̃ on the high family above M_thresh = b̃e^{βα(t)}/c̃, then b̃ on the rest.

    The fit is iterated ``rounds`` times; the violation is ≤ 0 by construction
    and is returned as a sanity check.
    """
    allr = list(high) + list(low)
    t, beta = allr[0].t, allr[0].beta
    growth = allr[0].height / allr[0].decay_term  # e^{βα(t)}
    thresh = 0.0
    c = b = 0.0
    for _ in range(rounds):
        used = [r for r in high if r.height > thresh] or list(high)
        c = max(r.lhs / r.decay_term * 1.0 for r in used)
        ids = {id(r) for r in used}
        rest = [r for r in allr if id(r) not in ids]
        b = max([r.lhs for r in low] + [max(r.lhs - c * r.decay_term, 0.0) for r in rest])
        thresh = b * growth / c
    viol = max(r.lhs - c * r.decay_term - b for r in allr)
    for r in allr:
        r.c_tilde, r.b_tilde, r.additive_term, r.max_violation = c, b, b, viol
    return CHFit(t, beta, c, b, thresh, viol, allr)


def ch_decay_slope(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x: LatticeState, s,
                   t_list: Sequence[float], beta: float | None = None) -> float:
    """Slope of log(lhs/h(x)) against α(t); −β for a point high in the cusp."""
    reps = [verify_ch(flow, curve, cfg, x, s, t, beta) for t in t_list]
    return fitted_slope([flow.alpha(r.t) for r in reps], [math.log(r.lhs / r.height) for r in reps])


# ---------------------------------------------------------------------------
# (C, α)-good polynomials


@dataclass
class CGoodReport:
    k: int
    C: float
    alpha: float
    sup: float
    levels: list[float]
    measures: list[float]
    bounds: list[float]
    violations: int
    rho_ok: bool

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _real_roots_in(poly: np.polynomial.Polynomial, a: float, b: float) -> list[float]:
    if poly.degree() < 1:
        return []
    out = []
    for r in poly.roots():
        if abs(r.imag) > 1e-7 * max(1.0, abs(r)):
            continue
        x = float(r.real)
        if a - 1e-9 <= x <= b + 1e-9:
            out.append(min(max(x, a), b))
    return _polish(poly, out, a, b)


def _polish(poly, roots, a, b):
    """Refine roots by bisection on a sign change when one brackets them."""
    out = []
    for x in roots:
        h = 1e-9 * max(1.0, b - a)
        lo, hi = max(a, x - h), min(b, x + h)
        flo, fhi = poly(lo), poly(hi)
        if flo * fhi < 0:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = poly(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            x = 0.5 * (lo + hi)
        out.append(x)
    return out


def sup_abs(poly: np.polynomial.Polynomial, a: float, b: float) -> float:
    pts = [a, b] + _real_roots_in(poly.deriv(), a, b)
    return max(abs(float(poly(x))) for x in pts)


def sublevel_measure(poly: np.polynomial.Polynomial, a: float, b: float, eps: float) -> float:
    """|{x ∈ [a, b] : |poly(x)| < eps}| from the roots of poly ∓ eps."""
    cuts = sorted(set([a, b] + _real_roots_in(poly - eps, a, b) + _real_roots_in(poly + eps, a, b)))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo and abs(poly(0.5 * (lo + hi))) < eps:
            total += hi - lo
    return total


@lru_cache(maxsize=16)
def rho_k(k: int, samples: int = 4000, seed: int = 0) -> float:
    """Estimate of min over max|cᵢ| = 1 of sup_{[−1,1]} |Σ cᵢxⁱ| (degree ≤ k)."""
    rng = np.random.default_rng(seed)
    xs = np.cos(np.linspace(0, math.pi, 257))
    V = np.vander(xs, k + 1, increasing=True)

    def obj(c):
        m = np.max(np.abs(c))
        return np.max(np.abs(V @ c)) / m if m > 0 else math.inf

    C = rng.uniform(-1, 1, size=(samples, k + 1))
    C[np.arange(samples), rng.integers(0, k + 1, samples)] = rng.choice([-1.0, 1.0], samples)
    vals = np.max(np.abs(C @ V.T), axis=1) / np.max(np.abs(C), axis=1)
    # Chebyshev polynomials are natural near-minimizers; seed with them too
    seeds = [np.pad(np.polynomial.chebyshev.cheb2poly([0] * j + [1]), (0, k - j)) for j in range(1, k + 1)]
    best = min([float(vals.min())] + [obj(c) for c in seeds])
    for c0 in seeds + [C[i] for i in np.argsort(vals)[:20]]:
        res = optimize.minimize(obj, c0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = min(best, float(res.fun))
    return float(best)


def cgood_check(coeffs: Sequence[float], interval: tuple[float, float], k: int, levels: int = 20) -> CGoodReport:
    """Sublevel bound |{|f| < ε}| ≤ 2k(k+1)^{1/k}(ε/sup|f|)^{1/k}|B| on dyadic ε."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    poly = poly.trim()
    if not poly.coef.any():
        raise ValueError("zero polynomial")
    if poly.degree() > k:
        raise ValueError("degree exceeds k")
    a, b = map(float, interval)
    C = 2 * k * (k + 1) ** (1.0 / k)
    alpha = 1.0 / k
    sup = sup_abs(poly, a, b)
    eps_list = [sup * 2.0**-j for j in range(1, levels + 1)]
    meas = [sublevel_measure(poly, a, b, e) for e in eps_list]
    bounds = [C * (e / sup) ** alpha * (b - a) for e in eps_list]
    viol = sum(1 for m, bd in zip(meas, bounds) if m > bd * (1 + 1e-9))
    # lower sup estimate in the coordinate u ∈ [−1, 1] of the interval
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    q = poly(np.polynomial.Polynomial([mid, half]))
    cq = np.pad(q.coef, (0, k + 1 - len(q.coef)))
    rho_ok = sup >= rho_k(k) * (1 - 1e-6) * float(np.max(np.abs(cq)))
    return CGoodReport(k, C, alpha, sup, eps_list, meas, bounds, viol, rho_ok)


# ---------------------------------------------------------------------------
# partitions and grids


def partition(domain: tuple, base: int, level: int) -> list[Fraction]:
    """Boundaries of the partition of ``domain`` into base^level equal cells."""
    a, b = frac(domain[0]), frac(domain[1])
    n = base**level
    return [a + (b - a) * Fraction(j, n) for j in range(n + 1)]


def partitions_refine(domain: tuple, base: int, levels: int) -> bool:
    """Every cell boundary at level k is a boundary at level k + 1."""
    prev = set(partition(domain, base, 0))
    for lv in range(1, levels + 1):
        cur = set(partition(domain, base, lv))
        if not prev <= cur:
            return False
        prev = cur
    return True


def integer_base(flow: FlowSpec, t: float) -> int:
    """e^{α(t)} as an integer; raises unless it is one."""
    v = math.exp(flow.alpha(t))
    n = round(v)
    if n < 2 or abs(v - n) > 1e-9 * n:
        raise ValueError("e^{α(t)} must be an integer ≥ 2")
    return n


def t_for_base(flow: FlowSpec, base: int) -> float:
    return math.log(base) / flow.alpha(1.0)


@dataclass
class GridSweep:
    """Heights f_ε(g_{jt}u(φ(s))x) for s on the cell midpoints of a rational grid."""

    domain: tuple[Fraction, Fraction]
    points: int
    times: list[float]
    values: np.ndarray  # shape (len(times), points)

    @property
    def spacing(self) -> Fraction:
        return (self.domain[1] - self.domain[0]) / self.points

    def cell_index(self, base: int, level: int) -> np.ndarray:
        per = self.points // base**level
        return np.arange(self.points) // per


def _check_planar(flow: FlowSpec, curve: AdmissibleCurve):
    if flow.dim != 2 or curve.direction is None:
        raise ValueError("grid sweeps need the planar flow and an affine curve")


def sweep_heights(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x: LatticeState,
                  times: Sequence[float], points: int) -> GridSweep:
    """Evaluate f_ε along the orbit for every grid point; φ(s) = φ(a) + (s − a)φ̇."""
    _check_planar(flow, curve)
    a, b = frac(curve.domain[0]), frac(curve.domain[1])
    y = float(curve.direction[0][1])
    base_pt = flow_point(flow, curve, a, 0.0, x)
    B = gauss_reduce(base_pt).embedded()
    h = (b - a) / points
    r = (np.arange(points) + 0.5) * float(h)
    vals = np.vstack([_batch_heights(B, r, t, y, cfg.epsilon) for t in times])
    return GridSweep((a, b), points, list(times), vals)


def _grid_points(base: int, level: int, per_cell: int) -> int:
    return base**level * per_cell


@dataclass
class BxReport:
    M: float
    t: float
    m: int
    n: int
    total: float
    per_cell: dict[int, float]


def measure_Bx(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x: LatticeState, M: float,
               t: float, m: int, n: int, grid: int) -> BxReport:
    """|B_x(M, t, m; n)|: f < M at time mt and f ≥ M at times (m + l)t, l = 1..n.

    ``grid`` is the number of grid points; the spacing must be at most
    e^{−α((m+n)t)}/4 times the domain length. The measure is reported per
    cell of the partition at level m.
    """
    base = integer_base(flow, t)
    need = 4 * base ** (m + n)
    if grid < need:
        raise ValueError(f"grid too coarse: need at least {need} points")
    per = base**m
    grid = -(-grid // per) * per
    sw = sweep_heights(flow, curve, cfg, x, [j * t for j in range(m, m + n + 1)], grid)
    return _bx_from_sweep(sw, M, t, m, n, base)


def _bx_from_sweep(sw: GridSweep, M: float, t: float, m: int, n: int, base: int) -> BxReport:
    v = sw.values
    mask = v[0] < M
    for l in range(1, n + 1):
        mask &= v[l] >= M
    cells = sw.cell_index(base, m)
    h = float(sw.spacing)
    per_cell: dict[int, float] = {}
    for c, cnt in zip(*np.unique(cells[mask], return_counts=True)):
        per_cell[int(c)] = float(cnt) * h
    return BxReport(M, t, m, n, float(mask.sum()) * h, per_cell)


@dataclass
class BxProfile:
    reports: list[BxReport]

    @property
    def measures(self) -> list[float]:
        return [r.total for r in self.reports]

    def nonincreasing(self) -> bool:
        ms = self.measures
        return all(b <= a for a, b in zip(ms[:-1], ms[1:]))

    def decay_rate(self) -> float:
        """−slope of log|B(n)| against n (per step of length t)."""
        pts = [(r.n, math.log(r.total)) for r in self.reports if r.total > 0]
        if len(pts) < 2:
            return math.inf
        return -fitted_slope(*zip(*pts))


def measure_Bx_profile(flow, curve, cfg, x, M: float, t: float, m: int, n_max: int, grid: int) -> BxProfile:
    base = integer_base(flow, t)
    need = 4 * base ** (m + n_max)
    if grid < need:
        raise ValueError(f"grid too coarse: need at least {need} points")
    sw = sweep_heights(flow, curve, cfg, x, [j * t for j in range(m, m + n_max + 1)], grid)
    return BxProfile([_bx_from_sweep(sw, M, t, m, n, base) for n in range(1, n_max + 1)])


def chebyshev_ok(values: np.ndarray, cells: np.ndarray, M: float, power: float) -> bool:
    """Per cell: |{h > M^p}|/|J| ≤ mean(h)/M^p on the sampled grid."""
    h = values**power
    thr = M**power
    for c in np.unique(cells):
        sel = h[cells == c]
        if np.mean(sel > thr) > np.mean(sel) / thr * (1 + 1e-12):
            return False
    return True


# ---------------------------------------------------------------------------
# covering counts


@dataclass
class CoverReport:
    N: int
    t: float
    delta: float
    M: float
    interval_width: float
    count: int
    alpha_Nt: float
    bound: float | None = None
    C3: float | None = None


def _zx_mask(values: np.ndarray, M: float, delta: float) -> np.ndarray:
    N = values.shape[0]
    return (values > M).sum(axis=0) > delta * N


def cover_Zx(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x: LatticeState, M: float,
             N: int, t: float, delta: float, grid: int | None = None) -> CoverReport:
    """Cells of width e^{−α(Nt)} meeting Z_x(M, N, t, δ) on the grid."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    base = integer_base(flow, t)
    need = 4 * base**N
    grid = need if grid is None else grid
    if grid < need:
        raise ValueError(f"grid too coarse: need at least {need} points")
    grid = -(-grid // base**N) * base**N
    sw = sweep_heights(flow, curve, cfg, x, [l * t for l in range(1, N + 1)], grid)
    return _cover_from_sweep(sw, M, N, t, delta, base, flow)


def _cover_from_sweep(sw: GridSweep, M, N, t, delta, base, flow) -> CoverReport:
    mask = _zx_mask(sw.values[:N], M, delta)
    cells = sw.cell_index(base, N)
    count = int(np.unique(cells[mask]).size)
    width = float(sw.domain[1] - sw.domain[0]) / base**N
    return CoverReport(N, t, delta, M, width, count, flow.alpha(N * t))


def cover_sweep(flow, curve, cfg, x, M: float, N_list: Sequence[int], t: float, delta: float,
                per_cell: int = 4) -> list[CoverReport]:
    """Cover reports for several N from one sweep at the finest resolution."""
    base = integer_base(flow, t)
    Nmax = max(N_list)
    sw = sweep_heights(flow, curve, cfg, x, [l * t for l in range(1, Nmax + 1)], per_cell * base**Nmax)
    out = []
    for N in N_list:
        sub = GridSweep(sw.domain, sw.points, sw.times[:N], sw.values[:N])
        out.append(_cover_from_sweep(sub, M, N, t, delta, base, flow))
    return out


def fit_cover_constant(reports: Sequence[CoverReport], beta: float) -> float:
    """Smallest C₃ with count ≤ C₃^N e^{(1−δβ)α(Nt)} for every report; fills ``bound``."""
    c3 = 1.0
    for r in reports:
        if r.count:
            c3 = max(c3, (r.count / math.exp((1 - r.delta * beta) * r.alpha_Nt)) ** (1.0 / r.N))
    for r in reports:
        r.C3 = c3
        r.bound = c3**r.N * math.exp((1 - r.delta * beta) * r.alpha_Nt)
    return c3


def dimension_estimate(reports: Sequence[CoverReport]):
    """Least-squares slope of log(count) against α(Nt); EMPTY_SET if nothing is covered."""
    if len(reports) < 3:
        raise ValueError("need at least three reports")
    Ns = [r.N for r in reports]
    if Ns != sorted(Ns) or len(set(Ns)) != len(Ns):
        raise ValueError("reports must have increasing N")
    pts = [(r.alpha_Nt, math.log(r.count)) for r in reports if r.count > 0]
    if not pts:
        return EMPTY_SET
    if len(pts) < 2:
        return 0.0
    return fitted_slope(*zip(*pts))


def box_count_slope(mask: np.ndarray, base: int, levels: Sequence[int]) -> float:
    """Box-counting slope of a grid set at cell sizes base^{−level}; log base e."""
    n = mask.size
    counts = []
    for lv in levels:
        per = n // base**lv
        idx = np.nonzero(mask)[0] // per
        counts.append(np.unique(idx).size)
    pts = [(lv * math.log(base), math.log(c)) for lv, c in zip(levels, counts) if c > 0]
    return fitted_slope(*zip(*pts))


# ---------------------------------------------------------------------------
# shrinking segments


@dataclass
class ShrinkingReport:
    t_list: list[float]
    averages: list[float]
    flagged: list[bool]

    @property
    def sup(self) -> float:
        return max(self.averages)


def shrinking_average(flow: FlowSpec, curve: AdmissibleCurve, cfg: HeightConfig, x0: LatticeState, delta: float,
                      t_list: Sequence[float], s0, power: float | None = None) -> ShrinkingReport:
    """Averages of h = f_ε^p over s ∈ s0 + [−e^{−δα(t)}, e^{−δα(t)}] at time t."""
    if not 0 <= delta < cfg.beta:
        raise ValueError("need 0 <= delta < beta")
    _check_planar(flow, curve)
    s0 = frac(s0)
    p = ch_power(flow, cfg.beta) if power is None else power
    y = float(curve.direction[0][1])
    B = gauss_reduce(flow_point(flow, curve, s0, 0.0, x0)).embedded()
    avgs, flags = [], []
    for t in t_list:
        half = math.exp(-delta * flow.alpha(t))
        if not (curve.contains(float(s0) - half) and curve.contains(float(s0) + half)):
            raise ValueError("shrinking window leaves the curve domain")
        a, _, flag = window_average(B, y, t, cfg.epsilon, p, -half, half)
        if math.isinf(a):
            raise ValueError("f_ε is infinite in the window")
        avgs.append(a)
        flags.append(flag)
    return ShrinkingReport(list(t_list), avgs, flags)
