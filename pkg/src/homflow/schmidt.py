"""The (a, b)-modified Schmidt game on an interval, with Alice's height-avoiding strategy.

All contraction factors e^{σa}, e^{σb}, e^{σt₀} are integers, so every
interval of a game is an exact rational interval. Heights are f_ε of the
heights module; the threshold M of the game is on that scale.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .diophantine import cf_oracle
from .flows import AdmissibleCurve, FlowSpec
from .heights import HeightConfig, box_vectors_d2, f_eps_with_basis, high_set_d2, nilpotent_exp_exact
from .linalg_exact import (
    BudgetExceeded,
    LatticeState,
    frac,
    gauss_reduce,
    mat_mul,
    reduce_lattice,
)

FREE_ROUNDS_GAMMA1 = 2  # ⌊1/γ + 1⌋ for γ = 1
CANDIDATES = 1 << 8
HIGH_SET_LIMIT = 10**5


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GameConfig:
    I0: tuple[Fraction, Fraction]
    sigma: float
    A: int  # e^{σa}
    B: int  # e^{σb}
    T0: int  # e^{σt₀}
    M: float
    rounds: int = 15

    def __post_init__(self):
        object.__setattr__(self, "I0", (frac(self.I0[0]), frac(self.I0[1])))
        if not self.I0[0] < self.I0[1]:
            raise ValueError("I0 must be a nondegenerate interval")
        if min(self.A, self.B, self.T0) < 2:
            raise ValueError("contraction factors must be integers ≥ 2")
        if self.rounds < 1 or self.M <= 0 or self.sigma <= 0:
            raise ValueError("rounds, M and sigma must be positive")

    @classmethod
    def from_times(cls, I0, sigma: float, a: float, b: float, t0: float, M: float, rounds: int = 15) -> "GameConfig":
        """Round e^{σa}, e^{σb}, e^{σt₀} up to integers (so a, b, t₀ only grow)."""
        up = lambda v: max(2, math.ceil(math.exp(sigma * v) - 1e-9))
        return cls(I0, sigma, up(a), up(b), up(t0), M, rounds)

    @property
    def a(self) -> float:
        return math.log(self.A) / self.sigma

    @property
    def b(self) -> float:
        return math.log(self.B) / self.sigma

    @property
    def t0(self) -> float:
        return math.log(self.T0) / self.sigma

    @property
    def length(self) -> Fraction:
        return self.I0[1] - self.I0[0]

    def t_k(self, k: int) -> float:
        return self.t0 + (k - 1) * (self.a + self.b)

    def s_k(self, k: int) -> float:
        return self.t_k(k) + self.a

    def scale_t(self, k: int) -> int:
        """e^{σt_k} exactly."""
        return self.T0 * (self.A * self.B) ** (k - 1)

    def diam_B(self, k: int) -> Fraction:
        return self.length / self.scale_t(k)

    def diam_A(self, k: int) -> Fraction:
        return self.length / (self.scale_t(k) * self.A)


def a_star(c_tilde: float, beta: float, sigma: float, C1: float = 1.0, CO: float = 1.0, N: int = 1) -> float:
    """Smallest a with α(a) ≥ 20 log(2c̃C₁C_O²)/β + log(10(N + 1))."""
    return (20 * math.log(2 * c_tilde * C1 * CO**2) / beta + math.log(10 * (N + 1))) / sigma


def m1_planar(eps: float, T: float, y: float) -> float:
    """Above this f-threshold the high set of |s| ≤ T has at most one component.

    Two independent primitive vectors u, v shorter than ρ along the segment
    would give |det(u, v)| = 1 ≤ 2ρ²(T|y| + 1); so ρ² < 1/(2(T|y| + 1)) forces
    all short vectors onto one line, and one line yields one interval.
    """
    return eps * math.sqrt(2 * (T * abs(y) + 1))


# ---------------------------------------------------------------------------
# interval state


@dataclass
class Round:
    k: int
    B: tuple[Fraction, Fraction]
    A: tuple[Fraction, Fraction]
    t_next: float
    sup_height: float
    stuck: bool
    free: bool
    bob_offset: Fraction
    center_height: float = math.nan  # f at the centre of B_k, time t_k


@dataclass
class GameState:
    cfg: GameConfig
    rounds: list[Round] = field(default_factory=list)
    player: str = "bob"
    B: tuple[Fraction, Fraction] | None = None
    A: tuple[Fraction, Fraction] | None = None

    @property
    def k(self) -> int:
        return len(self.rounds) + 1

    def history(self) -> list[tuple[Fraction, Fraction]]:
        out = []
        for r in self.rounds:
            out += [r.B, r.A]
        return out


def _check_nested(inner, outer):
    if not (outer[0] <= inner[0] and inner[1] <= outer[1]):
        raise AssertionError("intervals are not nested")


# ---------------------------------------------------------------------------
# Bob


class Bob:
    """Picks the offset u ∈ [0, 1] of B_{k+1} inside A_k (0 = flush left)."""

    def offset(self, lo: Fraction, hi: Fraction, width: Fraction) -> Fraction:
        raise NotImplementedError


class RandomBob(Bob):
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def offset(self, lo, hi, width):
        return Fraction(int(self.rng.integers(0, 1 << 32)), 1 << 32)


def smallest_denominator(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with least denominator in the open interval (lo, hi) (Stern–Brocot)."""
    if not lo < hi:
        raise ValueError("empty interval")
    fl = math.floor(lo)
    if fl + 1 < hi:
        return Fraction(fl + 1)
    # descend the Stern–Brocot tree inside (fl, fl + 1)
    a, b, c, d = fl, 1, fl + 1, 1  # left a/b, right c/d
    while True:
        m = Fraction(a + c, b + d)
        if m <= lo:
            # move right as far as possible in one jump
            k = 1
            # largest k with (a + k c)/(b + k d) <= lo
            num, den = lo.numerator, lo.denominator
            # (a + k c) den <= num (b + k d)  <=>  k (c den − num d) <= num b − a den
            step = c * den - num * d
            k = max(1, (num * b - a * den) // step) if step > 0 else 1
            a, b = a + k * c, b + k * d
        elif m >= hi:
            num, den = hi.numerator, hi.denominator
            # (k a + c) den >= num (k b + d)  <=>  k (num b − a den) <= c den − num d
            step = num * b - a * den
            k = max(1, (c * den - num * d) // step) if step > 0 else 1
            c, d = k * a + c, k * b + d
        else:
            return m


class AdversarialBob(Bob):
    """Centres B_{k+1} on the smallest-denominator rational in A_k when possible."""

    def offset(self, lo, hi, width):
        p = smallest_denominator(lo, hi)
        room = hi - lo - width
        if room <= 0:
            return Fraction(0)
        u = (p - width / 2 - lo) / room
        return min(max(u, Fraction(0)), Fraction(1))


class ScriptedBob(Bob):
    def __init__(self, offsets: Iterable):
        self.offsets = [frac(u) for u in offsets]
        self.i = 0

    def offset(self, lo, hi, width):
        if self.i >= len(self.offsets):
            raise IndexError("script exhausted")
        u = self.offsets[self.i]
        self.i += 1
        if not 0 <= u <= 1:
            raise ValueError("scripted offset outside [0, 1]")
        return u


def make_bob(kind: str, seed: int = 0, script: Sequence | None = None) -> Bob:
    if kind == "random":
        return RandomBob(seed)
    if kind == "adversarial":
        return AdversarialBob()
    if kind == "scripted":
        return ScriptedBob(script or [])
    raise ValueError(f"unknown Bob strategy {kind!r}")


def bob_move(state: GameState, bob: Bob) -> tuple[Fraction, Fraction]:
    cfg = state.cfg
    k = state.k
    outer = cfg.I0 if k == 1 else state.A
    width = cfg.diam_B(k)
    u = bob.offset(outer[0], outer[1], width)
    lo = outer[0] + u * (outer[1] - outer[0] - width)
    B = (lo, lo + width)
    _check_nested(B, outer)
    state.B = B
    state.player = "alice"
    state._last_offset = u  # type: ignore[attr-defined]
    return B


# ---------------------------------------------------------------------------
# planar height certificates


def min_length_on_segment(x: LatticeState, y: float, T: float, budget: int = 10**6) -> float:
    """min over |r| ≤ T of λ₁(u(r·yE₁₂)x) for a planar lattice."""
    E = gauss_reduce(x).embedded()
    rho = float(np.linalg.norm(E[:, 0]))
    best = rho
    for v1, v2 in box_vectors_d2(x, rho * (1 + T * abs(y)), rho, budget):
        r = 0.0 if y == 0.0 or v2 == 0.0 else min(max(-v1 / (y * v2), -T), T)
        best = min(best, math.hypot(v1 + r * y * v2, v2))
    return best


def sup_height_d2(x: LatticeState, y: float, T: float, eps: float) -> float:
    """sup over |r| ≤ T of f_ε(u(r·yE₁₂)x), exactly up to rounding."""
    return eps / min_length_on_segment(x, y, T)


# ---------------------------------------------------------------------------
# warm-started lattice states along the play


class OrbitCursor:
    """Reduced bases of g_t u(φ(s))x, warm-started from an anchor (s_a, t_a).

    Queries shear the anchor's exact basis by s − s_a (affine curves commute)
    and then flow forward in steps, reducing after each one. Moving the anchor
    to a time where e^{α(t_a)}|s − s_a| is O(1) keeps every step well conditioned.
    """

    def __init__(self, flow: FlowSpec, curve: AdmissibleCurve, x: LatticeState, s, step: float = 20.0):
        if curve.direction is None:
            raise ValueError("the game engine needs an affine curve")
        if x.t != 0.0:
            raise ValueError("base point must be unflowed")
        self.flow, self.curve, self.step = flow, curve, step
        self.frame = flow.triple.frame
        self.s = frac(s)
        base = LatticeState(mat_mul(nilpotent_exp_exact(curve.phi(self.s), Fraction(1)), x.basis), 0.0, self.frame)
        self.anchor = self._reduce(base)

    def _reduce(self, st: LatticeState) -> LatticeState:
        return gauss_reduce(st) if st.dim == 2 else reduce_lattice(st)

    def at(self, s, t: float) -> LatticeState:
        """Reduced g_t u(φ(s))x for t at or after the anchor time."""
        s = frac(s)
        cur = self.anchor
        if t < cur.t:
            raise ValueError("query time precedes the anchor")
        if s != self.s:
            shear = nilpotent_exp_exact(self.curve.direction, s - self.s)
            cur = self._reduce(LatticeState(mat_mul(shear, cur.basis), cur.t, self.frame))
        while cur.t < t:
            cur = self._reduce(LatticeState(cur.basis, min(t, cur.t + self.step), self.frame))
        return cur

    def move(self, s, t: float) -> LatticeState:
        self.anchor = self.at(s, t)
        self.s = frac(s)
        return self.anchor


# ---------------------------------------------------------------------------
# Alice


def _gaps(high: list[tuple[float, float]], T: float) -> list[tuple[float, float]]:
    out, cur = [], -T
    for a, b in high:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < T:
        out.append((cur, T))
    return out


@dataclass
class AliceChoice:
    A: tuple[Fraction, Fraction]
    sup_height: float
    stuck: bool
    free: bool


def alice_move(state: GameState, flow: FlowSpec, curve: AdmissibleCurve, cfg_h: HeightConfig,
               cursor: OrbitCursor, free_rounds: int = FREE_ROUNDS_GAMMA1) -> AliceChoice:
    """Choose A_k ⊂ B_k so that f_ε(g_{t_{k+1}}u(φ(s))x) ≤ M on A_k when possible."""
    g = state.cfg
    k = state.k
    B = state.B
    wA = g.diam_A(k)
    scale = g.scale_t(k + 1)  # e^{α(t_{k+1})}
    t_next = g.t_k(k + 1)
    y = float(curve.direction[0][1]) if flow.dim == 2 else None
    center = (B[0] + B[1]) / 2
    TB = float((B[1] - B[0]) * scale / 2)
    TA = float(wA * scale / 2)

    def sup_at(lo: Fraction) -> float:
        c = lo + wA / 2
        return _sup_on(flow, cursor, c, t_next, y, TA, cfg_h)

    def clamp(lo: Fraction) -> Fraction:
        return min(max(lo, B[0]), B[1] - wA)

    if k <= free_rounds:
        lo = center - wA / 2
        return AliceChoice((lo, lo + wA), sup_at(lo), False, True)

    chosen = None
    if flow.dim == 2:
        rho = cfg_h.epsilon / g.M
        if 4 * rho * rho * (1 + TB * abs(y)) + 4 <= HIGH_SET_LIMIT:
            xc = cursor.at(center, t_next)
            try:
                high, _ = high_set_d2(xc, y, TB, g.M, cfg_h.epsilon, budget=10 * HIGH_SET_LIMIT)
            except BudgetExceeded:
                high = None
            if high is not None:
                gaps = [gp for gp in _gaps(high, TB) if gp[1] - gp[0] >= 2 * TA]
                if gaps:
                    longest = max(b - a for a, b in gaps)
                    a0, b0 = next(gp for gp in gaps if gp[1] - gp[0] == longest)
                    mid = Fraction(0.5 * (a0 + b0))
                    chosen = clamp(center + mid / scale - wA / 2)
    cands = []
    if chosen is not None:
        cands.append(chosen)
    room = B[1] - B[0] - wA
    cands += [B[0] + room * Fraction(j, CANDIDATES) for j in range(CANDIDATES + 1)]
    best_lo, best_val = None, math.inf
    for lo in cands:
        v = sup_at(lo)
        if v <= g.M:
            return AliceChoice((lo, lo + wA), v, False, False)
        if v < best_val:
            best_lo, best_val = lo, v
    return AliceChoice((best_lo, best_lo + wA), best_val, True, False)


def _sup_on(flow: FlowSpec, cursor: OrbitCursor, c: Fraction, t: float, y: float | None, TA: float,
            cfg_h: HeightConfig, samples: int = 17) -> float:
    xc = cursor.at(c, t)
    if flow.dim == 2:
        return sup_height_d2(xc, y, TA, cfg_h.epsilon)
    # generic dimension: sampled maximum along the segment (not a certificate)
    best = 0.0
    for r in np.linspace(-TA, TA, samples):
        sh = nilpotent_exp_exact(cursor.curve.direction, Fraction(float(r)) / Fraction(math.exp(flow.alpha(t))))
        st = LatticeState(mat_mul(sh, xc.basis), xc.t, xc.frame)
        best = max(best, f_eps_with_basis(st, flow.triple, cfg_h)[0].value)
    return best


# ---------------------------------------------------------------------------
# play


@dataclass
class Transcript:
    config: GameConfig
    rounds: list[Round]
    certificate: bool
    first_violation: int | None
    limit_point: Fraction
    stuck_events: int
    max_partial_quotient: int | None = None
    limit_orbit_max: float | None = None

    def to_json(self) -> str:
        c = self.config
        doc = {
            "config": {"I0": [str(c.I0[0]), str(c.I0[1])], "sigma": c.sigma, "e_sigma_a": c.A, "e_sigma_b": c.B,
                       "e_sigma_t0": c.T0, "a": c.a, "b": c.b, "t0": c.t0, "M": c.M, "rounds": c.rounds},
            "rounds": [{"k": r.k, "B": [str(r.B[0]), str(r.B[1])], "A": [str(r.A[0]), str(r.A[1])],
                        "t_next": r.t_next, "sup_height": r.sup_height, "stuck": r.stuck, "free": r.free,
                        "bob_offset": str(r.bob_offset), "center_height": r.center_height} for r in self.rounds],
            "certificate": self.certificate,
            "first_violation": self.first_violation,
            "limit_point": str(self.limit_point),
            "stuck_events": self.stuck_events,
            "max_partial_quotient": self.max_partial_quotient,
            "limit_orbit_max": self.limit_orbit_max,
        }
        return json.dumps(doc, indent=1)

    @property
    def bob_offsets(self) -> list[Fraction]:
        return [r.bob_offset for r in self.rounds]


def play(cfg: GameConfig, flow: FlowSpec, curve: AdmissibleCurve, cfg_h: HeightConfig, x: LatticeState,
         bob: Bob, a_star_value: float | None = None, check_limit: bool = False) -> Transcript:
    if a_star_value is not None and cfg.a < a_star_value:
        warnings.warn(f"a = {cfg.a:.4g} is below the fitted a* = {a_star_value:.4g}", RuntimeWarning, stacklevel=2)
    if not (curve.contains(float(cfg.I0[0])) and curve.contains(float(cfg.I0[1]))):
        raise ValueError("I0 must lie in the curve domain")
    state = GameState(cfg)
    cursor = OrbitCursor(flow, curve, x, (cfg.I0[0] + cfg.I0[1]) / 2)
    viol = None
    for k in range(1, cfg.rounds + 1):
        B = bob_move(state, bob)
        anchor = cursor.move((B[0] + B[1]) / 2, cfg.t_k(k))
        hc = f_eps_with_basis(anchor, flow.triple, cfg_h, reduced=anchor)[0].value
        ch = alice_move(state, flow, curve, cfg_h, cursor)
        _check_nested(ch.A, B)
        if ch.A[1] - ch.A[0] != cfg.diam_A(k) or B[1] - B[0] != cfg.diam_B(k):
            raise AssertionError("diameter law violated")
        state.A = ch.A
        state.player = "bob"
        state.rounds.append(Round(k, B, ch.A, cfg.t_k(k + 1), ch.sup_height, ch.stuck, ch.free,
                                  state._last_offset, hc))  # type: ignore[attr-defined]
        if ch.sup_height > cfg.M and viol is None:
            viol = k
    last = state.rounds[-1].B
    limit = (last[0] + last[1]) / 2
    tr = Transcript(cfg, state.rounds, viol is None, viol, limit, sum(r.stuck for r in state.rounds))
    first = min(FREE_ROUNDS_GAMMA1 + 2, cfg.rounds)
    if flow.dim == 2:
        qmin = math.isqrt(cfg.scale_t(first))
        qmax = math.isqrt(cfg.scale_t(cfg.rounds))
        tr.max_partial_quotient = limit_partial_quotient_bound(limit, qmin, qmax)
    if check_limit:
        tr.limit_orbit_max = limit_orbit_max(flow, curve, cfg_h, x, limit, cfg.t_k(first), cfg.t_k(cfg.rounds))
    return tr


def replay(transcript: Transcript, flow, curve, cfg_h, x) -> Transcript:
    return play(transcript.config, flow, curve, cfg_h, x, ScriptedBob(transcript.bob_offsets))


def limit_partial_quotient_bound(s: Fraction, qmin: int, qmax: int) -> int:
    """Largest a_{j+1} of s over convergent denominators qmin ≤ q_j ≤ qmax.

    Before the controlled rounds Alice plays blind, and past the last round the
    limit point is only known to the width of B_K, so only this window is meaningful.
    """
    cf = cf_oracle(s, depth=10**4)
    q0, q1, best = 0, 1, 0
    for a in cf.partial_quotients[1:]:
        if q1 > qmax:
            break
        if q1 >= qmin:
            best = max(best, a)
        q0, q1 = q1, a * q1 + q0
    return best


def limit_orbit_max(flow: FlowSpec, curve: AdmissibleCurve, cfg_h: HeightConfig, x: LatticeState, s: Fraction,
                    T0: float, T: float, dt: float = 0.25) -> float:
    """max of f_ε(g_t u(φ(s))x) over t ∈ [T0, T] sampled every dt."""
    cur = OrbitCursor(flow, curve, x, s)
    best = 0.0
    for j in range(int((T - T0) / dt) + 1):
        st = cur.move(s, T0 + j * dt)
        best = max(best, f_eps_with_basis(st, flow.triple, cfg_h, reduced=st)[0].value)
    return best


# ---------------------------------------------------------------------------
# fitted constants


@dataclass
class GameConstants:
    c_tilde: float
    b_tilde: float
    C1: float
    CO: float
    N: int
    beta: float
    a_star: float
    M0: float
    M1: float
    M: float  # f_ε scale
    M_h: float  # scale of the contraction height f_ε^p
    power: float


def fitted_M(flow: FlowSpec, curve: AdmissibleCurve, cfg_h: HeightConfig, x: LatticeState, game: GameConfig,
             c_tilde: float, b_tilde: float, C1: float = 1.0, CO: float = 1.0, N: int = 1,
             gamma: float = 1.0) -> GameConstants:
    """M = 40b̃C₁C_O² + M₀ + M₁ on the contraction-height scale, returned on both scales.

    M₀ is the exact sup over s ∈ I0 of f_ε at times t₀ + j(a + b), 1 ≤ j ≤ ⌊1/γ⌋ + 1.
    """
    if flow.dim != 2:
        raise NotImplementedError("exact M₀ is implemented for the planar case")
    p = cfg_h.beta * flow.alpha(1.0)
    y = float(curve.direction[0][1])
    center = (game.I0[0] + game.I0[1]) / 2
    cur = OrbitCursor(flow, curve, x, center)
    M0 = 0.0
    for j in range(1, int(1 / gamma) + 2):
        t = game.t0 + j * (game.a + game.b)
        xc = cur.at(center, t)
        half = float(game.length / 2) * math.exp(flow.alpha(t))
        M0 = max(M0, sup_height_d2(xc, y, half, cfg_h.epsilon))
    T = math.exp(flow.alpha(game.a + game.b)) * float(game.length) / 2
    M1 = m1_planar(cfg_h.epsilon, T, y)
    M_h = 40 * b_tilde * C1 * CO**2 + M0**p + M1**p
    astar = a_star(c_tilde, cfg_h.beta, flow.alpha(1.0), C1, CO, N)
    return GameConstants(c_tilde, b_tilde, C1, CO, N, cfg_h.beta, astar, M0, M1, M_h ** (1 / p), M_h, p)


def fit_planar_constants(flow: FlowSpec, curve: AdmissibleCurve, cfg_h: HeightConfig,
                         t_list: Sequence[float] = (2, 3, 4, 5, 6), depths: Sequence[float] = (1, 2, 3, 4),
                         denominators: Sequence[int] = (1, 2, 3)) -> tuple[float, float, list]:
    """(c̃, b̃, fits): c̃ is the largest fitted constant over ``t_list``, b̃ the one at its last time.

    The high family are cusp points g_k u_{p/q}ℤ² with k = t + depth, so they
    stay in the cusp for the whole window; the low family are the same
    rationals at k ≤ 1, which sit in the compact part.
    """
    from .contraction import cusp_point, fit_ch, verify_ch

    fits = []
    for t in t_list:
        high = [verify_ch(flow, curve, cfg_h, cusp_point(1, q, t + k), 0, t) for q in denominators for k in depths]
        low = [verify_ch(flow, curve, cfg_h, cusp_point(1, q, k), 0, t) for q in denominators for k in (0.0, 0.5, 1.0)]
        fits.append(fit_ch(high, low))
    return max(f.c_tilde for f in fits), fits[-1].b_tilde, fits
