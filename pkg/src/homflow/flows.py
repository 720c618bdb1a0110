"""Diagonal flows, admissible curves and orbit statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .heights import HeightConfig, f_eps_with_basis, nilpotent_exp_exact
from .linalg_exact import (
    FlowOverflowError,
    LatticeState,
    Matrix,
    as_matrix,
    det,
    frac,
    mat_mul,
    to_float,
)
from .sl2_rep import Sl2Triple, bracket, g_t, u_s


@dataclass(frozen=True)
class FlowSpec:
    triple: Sl2Triple
    alpha_rate: float = 2.0

    @property
    def H0(self) -> Matrix:
        return self.triple.H0

    @property
    def dim(self) -> int:
        return self.triple.dim

    def alpha(self, t: float) -> float:
        return self.alpha_rate * t

    def conjugation_error(self, t: float, s: float) -> float:
        """‖g_t u_s g_{−t} − u_{s e^{α(t)}}‖ (the defining identity of α)."""
        lhs = g_t(self.triple, t).image @ u_s(self.triple, s).image @ g_t(self.triple, -t).image
        rhs = u_s(self.triple, s * math.exp(self.alpha(t))).image
        return float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))


def flow_for(triple: Sl2Triple) -> FlowSpec:
    return FlowSpec(triple, float(triple.alpha_H0))


@dataclass(frozen=True)
class AdmissibleCurve:
    """s ↦ φ(s) in the Zplus eigenspace, with derivative and Hölder exponent.

    ``direction`` is set for affine curves φ(s) = sY + Z; it lets callers use
    the exact identity u(φ(s)) = u((s − s₀)Y)·u(φ(s₀)).
    """

    phi: Callable[[object], Matrix]
    phi_dot: Callable[[object], Matrix]
    domain: tuple[float, float] = (-1.0, 1.0)
    holder_gamma: float = 1.0
    direction: Matrix | None = None

    def contains(self, s) -> bool:
        return self.domain[0] <= s <= self.domain[1]


def _block(n: int, A: Matrix) -> Matrix:
    d = 2 * n
    z = Fraction(0)
    return tuple(tuple(A[i][j - n] if i < n <= j else z for j in range(d)) for i in range(d))


def linear_curve(n: int, Y, Z=None, domain=(-1.0, 1.0)) -> AdmissibleCurve:
    """φ(s) = [[0, sY + Z], [0, 0]] for square systems of linear forms."""
    Ym = as_matrix(Y)
    Zm = as_matrix(Z) if Z is not None else tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))

    def phi(s):
        c = frac(s)
        return _block(n, tuple(tuple(c * y + z for y, z in zip(ry, rz)) for ry, rz in zip(Ym, Zm)))

    D = _block(n, Ym)
    return AdmissibleCurve(phi, lambda s: D, domain, 1.0, D)


def standard_curve(domain=(-1.0, 1.0)) -> AdmissibleCurve:
    return linear_curve(1, [[1]], [[0]], domain)


def check_admissible(flow: FlowSpec, curve: AdmissibleCurve, samples: int = 16) -> None:
    a, b = curve.domain
    pts = [Fraction(a) + (Fraction(b) - Fraction(a)) * k / (samples - 1) for k in range(samples)]
    vals = [curve.phi(s) for s in pts]
    for m in vals:
        rate = Fraction(flow.alpha_rate).limit_denominator(10**6)
        if bracket(flow.H0, m) != tuple(tuple(rate * frac(v) for v in row) for row in m):
            raise ValueError("curve leaves the expanding eigenspace")
    for m1 in vals[::3]:
        for m2 in vals[1::3]:
            if any(v != 0 for row in bracket(m1, m2) for v in row):
                raise ValueError("curve image does not commute")
    for s in pts:
        if all(v == 0 for row in curve.phi_dot(s) for v in row):
            raise ValueError("derivative of φ vanishes")


def flow_point(flow: FlowSpec, curve: AdmissibleCurve, s, t: float, x0: LatticeState) -> LatticeState:
    """exp(tH0)·exp(φ(s))·x0, stored as exact basis plus flow time."""
    if not curve.contains(s):
        raise ValueError("s outside the curve domain")
    if x0.t != 0.0:
        raise ValueError("base point must be an unflowed rational lattice")
    top = max(abs(w) for w in flow.triple.frame.weights)
    if t * top > 700:
        raise FlowOverflowError("e^{α(t)} exceeds double range; use extended precision")
    B = mat_mul(nilpotent_exp_exact(curve.phi(frac(s)), Fraction(1)), x0.basis)
    return LatticeState(B, float(t), flow.triple.frame)


class OrbitTracker:
    """Heights along t ↦ g_t u(φ(s)) x0 with warm-started reduction."""

    def __init__(self, flow: FlowSpec, curve: AdmissibleCurve, s, x0: LatticeState, cfg: HeightConfig):
        self.flow = flow
        self.cfg = cfg
        self.state = flow_point(flow, curve, s, 0.0, x0)

    def height(self, t: float) -> float:
        top = max(abs(w) for w in self.flow.triple.frame.weights)
        if t * top > 700:
            raise FlowOverflowError("e^{α(t)} exceeds double range; use extended precision")
        x = LatticeState(self.state.basis, float(t), self.flow.triple.frame)
        hv, red = f_eps_with_basis(x, self.flow.triple, self.cfg, reduced=x)
        self.state = red
        return hv.value


@dataclass
class OrbitStats:
    samples: list[tuple[float, float]] = field(default_factory=list)

    def doa_fraction(self, M: float) -> float:
        return sum(1 for _, f in self.samples if f > M) / len(self.samples)

    def growth_slope(self) -> float:
        T = self.samples[-1][0]
        vals = [math.log(f) / t for t, f in self.samples if t >= T / 2 and t > 0]
        if any(math.isinf(v) for v in vals):
            raise ValueError("f = ∞ along the orbit")
        return max(vals)


def orbit_samples(flow, curve, s, x0, cfg: HeightConfig, T: float, dt: float | None = None) -> OrbitStats:
    dt = T / 1000 if dt is None else dt
    n = int(round(T / dt))
    tr = OrbitTracker(flow, curve, s, x0, cfg)
    return OrbitStats([(k * dt, tr.height(k * dt)) for k in range(n + 1)])


def doa_statistic(flow, curve, s, x0, M: float, T: float, dt: float | None = None,
                  cfg: HeightConfig | None = None) -> float:
    """Fraction of sample times in {0, dt, …, T} with f_ε > M."""
    dt = T / 1000 if dt is None else dt
    if dt > T / 100:
        raise ValueError("dt must be at most T/100")
    return orbit_samples(flow, curve, s, x0, cfg or HeightConfig(), T, dt).doa_fraction(M)


def growth_slope(flow, curve, s, x0, T: float, cfg: HeightConfig | None = None, dt: float | None = None) -> float:
    """max over t ∈ [T/2, T] of log f_ε(g_t u(φ(s)) x0)/t."""
    if T < 10:
        raise ValueError("T must be at least 10")
    return orbit_samples(flow, curve, s, x0, cfg or HeightConfig(), T, dt).growth_slope()


def _matrix_norm(m: Matrix) -> float:
    return math.sqrt(sum(float(v) ** 2 for row in m for v in row))


def tangent_residual(flow: FlowSpec, curve: AdmissibleCurve, s, n: int, t: float, r: float) -> float:
    """‖φ(s + h) − φ(s) − hφ̇(s)‖·e^{(1+γ)α(nt)} with h = r e^{−α(nt)}."""
    gamma = curve.holder_gamma
    if flow.alpha(n) < 1.0 / gamma:
        raise ValueError("need α(n) ≥ 1/γ")
    a = flow.alpha(n * t)
    h = frac(r) * Fraction(math.exp(-a))
    s = frac(s)
    if not curve.contains(s + h):
        raise ValueError("s + r e^{−α(nt)} leaves the domain")
    p1, p0, dp = curve.phi(s + h), curve.phi(s), curve.phi_dot(s)
    diff = tuple(tuple(frac(x) - frac(y) - h * frac(z) for x, y, z in zip(r1, r0, rd)) for r1, r0, rd in zip(p1, p0, dp))
    return _matrix_norm(diff) * math.exp((1 + gamma) * a)


# ---------------------------------------------------------------------------
# vectorized planar heights


def heights_d2_batch(B: np.ndarray, r: np.ndarray, t: float, y: float, eps: float,
                     max_iter: int = 400) -> np.ndarray:
    """f_ε(g_t u(r·yE₁₂) Λ) for Λ spanned by the columns of the float matrix B.

    Vectorized Lagrange reduction in double precision; accurate while
    e^{2t}·(entry size)² stays well below 10¹⁶.
    """
    r = np.asarray(r, dtype=float)
    et, emt = math.exp(t), math.exp(-t)
    u1 = et * (B[0, 0] + r * y * B[1, 0])
    u2 = np.full_like(r, emt * B[1, 0])
    v1 = et * (B[0, 1] + r * y * B[1, 1])
    v2 = np.full_like(r, emt * B[1, 1])
    for _ in range(max_iter):
        nu = u1 * u1 + u2 * u2
        nv = v1 * v1 + v2 * v2
        sw = nv < nu
        if sw.any():
            u1, v1 = np.where(sw, v1, u1), np.where(sw, u1, v1)
            u2, v2 = np.where(sw, v2, u2), np.where(sw, u2, v2)
            nu = np.where(sw, nv, nu)
        mu = np.floor((u1 * v1 + u2 * v2) / nu + 0.5)
        w1 = v1 - mu * u1
        w2 = v2 - mu * u2
        # accept only strict progress; float noise can otherwise make μ cycle
        step = (mu != 0) & (w1 * w1 + w2 * w2 < (v1 * v1 + v2 * v2) * (1 - 1e-12))
        if not step.any():
            break
        v1 = np.where(step, w1, v1)
        v2 = np.where(step, w2, v2)
    else:
        raise RuntimeError("batch reduction did not converge")
    return eps / np.sqrt(np.minimum(u1 * u1 + u2 * u2, v1 * v1 + v2 * v2))


def reduced_float_basis(x: LatticeState) -> np.ndarray:
    """Embedded float basis of a reduced representative of a planar lattice."""
    from .linalg_exact import gauss_reduce

    return gauss_reduce(x).embedded()
