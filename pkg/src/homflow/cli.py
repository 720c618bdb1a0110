"""Batch driver: ``homflow <experiment> [--config FILE] [--key value ...]``.

Each run writes ``data.csv``, ``summary.json`` and ``report.txt`` into the
output directory. Files are staged in a temporary directory and moved into
place only after the experiment succeeds.

Exit codes: 0 success, 1 runtime error, 2 experiment check failed, 64 bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

log = logging.getLogger("homflow")

EXIT_OK, EXIT_ERROR, EXIT_CHECK, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


def _version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# typed parameters


def _rational(text: str) -> Fraction:
    return Fraction(text.strip())


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _rational_list(text: str) -> list[Fraction]:
    return [Fraction(v.strip()) for v in str(text).split(",") if v.strip()]


def _bits(text: str) -> list[bool]:
    t = str(text).strip()
    if t in ("", "-"):
        return []
    out = []
    for v in t.split(","):
        if v.strip() not in ("0", "1"):
            raise ValueError(f"pattern entries must be 0 or 1, got {v!r}")
        out.append(v.strip() == "1")
    return out


def _choice(*opts: str) -> Callable[[str], str]:
    def conv(text: str) -> str:
        if text not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}")
        return text

    conv.__name__ = "one of " + "/".join(opts)
    return conv


def _opt_float(text: str) -> float | None:
    return None if str(text).strip().lower() in ("", "auto", "none") else float(text)


@dataclass(frozen=True)
class Param:
    name: str
    conv: Callable[[str], Any]
    default: str
    help: str = ""


COMMON = [
    Param("seed", int, "0", "seed of the single random generator"),
    Param("out", str, "", "output directory (default homflow-out/<experiment>)"),
]

EXPERIMENTS: dict[str, tuple[list[Param], str]] = {
    "heights": ([
        Param("d", _choice("2", "4"), "2"), Param("s", _rational, "1/3"),
        Param("t_max", float, "8"), Param("steps", int, "80"), Param("eps", float, "0.5"),
    ], "f_eps along g_t u(phi(s))x0"),
    "orbit": ([
        Param("s", _rational, "1/3"), Param("T", float, "50"), Param("M", float, "1000"),
        Param("dt", float, "0.05"), Param("eps", float, "0.5"), Param("min_doa", float, "0"),
    ], "divergence-on-average statistic and growth slope"),
    "ch-verify": ([
        Param("beta", float, "0.4"), Param("eps", float, "0.5"), Param("q", int, "1"),
        Param("depths", _float_list, "6,8,10"), Param("times", _float_list, "2,3,4,5,6"),
        Param("max_slope_excess", float, "0.1"),
    ], "contraction inequality at cusp points of the planar family"),
    "rep-contraction": ([
        Param("d", _choice("2", "4"), "2"), Param("degree", int, "1"), Param("beta", float, "0.3"),
        Param("samples", int, "50"), Param("times", _float_list, "1,2,3,4,5,6"),
    ], "decay of averaged norms in a linear representation"),
    "cgood": ([
        Param("degrees", _int_list, "1,2,3,4,5"), Param("count", int, "200"), Param("levels", int, "20"),
    ], "(C, alpha)-good sublevel inequality on random polynomials"),
    "covering": ([
        Param("base", int, "2"), Param("N", _int_list, "11,12,13,14,15,16,17"), Param("M", float, "0.9"),
        Param("delta", float, "0.9"), Param("beta", float, "0.4"), Param("eps", float, "0.5"),
        Param("per_cell", int, "4"),
    ], "covering counts of the finite-time divergent set"),
    "dimension": ([
        Param("base", int, "2"), Param("N", _int_list, "11,12,13,14,15,16,17"), Param("M", float, "0.9"),
        Param("delta", float, "0.9"), Param("eps", float, "0.5"), Param("max_slope", float, "0.65"),
    ], "box-count slope of the finite-time divergent set"),
    "game": ([
        Param("d", _choice("2"), "2"), Param("rounds", int, "15"),
        Param("bob", _choice("random", "adversarial", "scripted"), "random"),
        Param("script", _rational_list, ""), Param("games", int, "1"),
        Param("M", _opt_float, "auto"), Param("a", _opt_float, "auto"), Param("b", float, "1"),
        Param("t0", float, "3"), Param("I0", _rational_list, "0,1"), Param("beta", float, "0.4"),
        Param("eps", float, "0.5"), Param("check_limit", int, "0"),
    ], "modified Schmidt game on the planar family"),
    "shrinking": ([
        Param("delta", float, "0.2"), Param("beta", float, "0.4"), Param("eps", float, "0.5"),
        Param("s0", _rational, "1/3"), Param("t_max", int, "12"), Param("max_ratio", float, "10"),
    ], "window averages over shrinking segments"),
    "dioph": ([
        Param("n", _choice("1"), "1"), Param("grid", int, "64"), Param("qmax", int, "10000"),
        Param("qmin", int, "10"),
    ], "badly-approximable margins on a seeded grid of the line"),
    "exponents": ([
        Param("real", _bits, "1,1"), Param("complex", _bits, "-"), Param("beta", _rational, "1/2"),
    ], "exponent calculator for products of SL(2) factors"),
}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        if not k:
            raise UsageError(f"{path}:{no}: empty key")
        out[k.replace("-", "_")] = v
    return out


def resolve(experiment: str, file_values: dict[str, str], flag_values: dict[str, str]) -> dict[str, Any]:
    """Defaults, then the config file, then flags; every value converted and checked."""
    params = {p.name: p for p in EXPERIMENTS[experiment][0] + COMMON}
    for src in (file_values, flag_values):
        unknown = sorted(set(src) - set(params))
        if unknown:
            raise UsageError(f"unknown key(s) for {experiment}: {', '.join(unknown)}")
    raw = {n: p.default for n, p in params.items()}
    raw.update(file_values)
    raw.update(flag_values)
    out = {}
    for n, text in raw.items():
        try:
            out[n] = params[n].conv(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad value for {n}: {text!r} ({exc})") from exc
    if not out["out"]:
        out["out"] = os.path.join("homflow-out", experiment)
    return out


# ---------------------------------------------------------------------------
# results and artifacts


@dataclass
class Result:
    header: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any]
    passed: bool = True
    extra: dict[str, str] | None = None  # further files: name -> text


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v: Any) -> Any:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_artifacts(out_dir: str, experiment: str, cfg: dict, res: Result) -> None:
    parent = os.path.dirname(os.path.abspath(out_dir))
    os.makedirs(parent, exist_ok=True)
    stage = tempfile.mkdtemp(prefix=".homflow-", dir=parent)
    try:
        files = {
            "data.csv": csv_text(res.header, res.rows),
            "summary.json": json.dumps(_jsonable({
                "experiment": experiment, "version": _version(), "config": cfg,
                "passed": res.passed, "summary": res.summary,
            }), indent=2, sort_keys=True) + "\n",
            "report.txt": _report(experiment, cfg, res),
        }
        files.update(res.extra or {})
        for name, text in files.items():
            with open(os.path.join(stage, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        os.makedirs(out_dir, exist_ok=True)
        for name in files:
            os.replace(os.path.join(stage, name), os.path.join(out_dir, name))
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def _report(experiment: str, cfg: dict, res: Result) -> str:
    lines = [f"homflow {_version()} - {experiment}", f"seed: {cfg['seed']}", "", "configuration:"]
    lines += [f"  {k} = {_jsonable(v)}" for k, v in sorted(cfg.items())]
    lines += ["", "summary:"]
    lines += [f"  {k}: {_jsonable(v)}" for k, v in res.summary.items()]
    lines += ["", f"check: {'PASS' if res.passed else 'FAIL'}", f"rows: {len(res.rows)}", ""]
    return "\n".join(lines)


def workers() -> int:
    try:
        return max(1, int(os.environ.get("HOMFLOW_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn: Callable, items: list) -> list:
    """Map over independent points, in worker processes when HOMFLOW_THREADS > 1."""
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# experiments


def _planar(eps: float = 0.5, beta: float = 0.4, domain=(-3.0, 3.0)):
    from .flows import flow_for, standard_curve
    from .heights import HeightConfig
    from .linalg_exact import LatticeState
    from .sl2_rep import standard_triple

    return flow_for(standard_triple()), standard_curve(domain), HeightConfig(eps, beta), LatticeState.standard(2)


def run_heights(c: dict, rng) -> Result:
    from .flows import linear_curve, orbit_samples

    flow, curve, h, x = _planar(c["eps"])
    if c["d"] == "4":
        from .flows import flow_for
        from .linalg_exact import LatticeState
        from .sl2_rep import build_triple

        flow = flow_for(build_triple(2, [[1, 0], [0, 1]]))
        curve = linear_curve(2, [[1, 0], [0, 1]], domain=(-3.0, 3.0))
        x = LatticeState.standard(4)
    st = orbit_samples(flow, curve, c["s"], x, h, c["t_max"], c["t_max"] / c["steps"])
    rows = [[t, f] for t, f in st.samples]
    return Result(["t", "f_eps"], rows, {"max_f": max(f for _, f in st.samples)})


def run_orbit(c: dict, rng) -> Result:
    from .flows import orbit_samples

    flow, curve, h, x = _planar(c["eps"])
    if c["dt"] > c["T"] / 100:
        raise UsageError("dt must be at most T/100")
    st = orbit_samples(flow, curve, c["s"], x, h, c["T"], c["dt"])
    doa = st.doa_fraction(c["M"])
    slope = st.growth_slope() if c["T"] >= 10 else math.nan
    return Result(["t", "f_eps"], [list(p) for p in st.samples], {"doa": doa, "growth_slope": slope},
                  passed=doa >= c["min_doa"])


def run_ch_verify(c: dict, rng) -> Result:
    from .contraction import ch_decay_slope, cusp_point, verify_ch

    flow, curve, h, _ = _planar(c["eps"], c["beta"])
    rows, slopes = [], []
    for k in c["depths"]:
        x = cusp_point(1, c["q"], k)
        for t in c["times"]:
            r = verify_ch(flow, curve, h, x, 0, t)
            rows.append([k, t, r.lhs, r.decay_term, r.height, r.ratio, r.flagged])
        slopes.append(ch_decay_slope(flow, curve, h, x, 0, c["times"]))
    worst = max(slopes)
    return Result(["depth", "t", "lhs", "decay_term", "height", "ratio", "flagged"], rows,
                  {"decay_slopes": slopes, "worst_slope": worst, "target": -c["beta"]},
                  passed=worst <= -c["beta"] + c["max_slope_excess"])


def run_rep_contraction(c: dict, rng) -> Result:
    from .contraction import fitted_slope, verify_rep_contraction
    from .sl2_rep import build_triple, decompose, standard_triple

    tri = standard_triple() if c["d"] == "2" else build_triple(2, [[1, 0], [0, 1]])
    d = int(c["d"])
    if not 0 < c["degree"] < d:
        raise UsageError("degree must lie strictly between 0 and d")
    dec = decompose(tri, c["degree"])
    dim = math.comb(d, c["degree"])
    ws = [rng.standard_normal(dim) for _ in range(c["samples"])]
    rows, means = [], []
    for t in c["times"]:
        reps = [verify_rep_contraction(dec, w, t, c["beta"]) for w in ws]
        m = float(np.mean([r.lhs for r in reps]))
        means.append(m)
        rows.append([t, m, max(r.ratio for r in reps), sum(r.flagged for r in reps)])
    slope = fitted_slope(list(c["times"]), [math.log(m) for m in means])
    alpha = float(tri.alpha_H0)
    bound = -c["beta"] * alpha / 2 * (1 - 0.05)
    return Result(["t", "mean_lhs", "max_ratio", "flagged"], rows,
                  {"slope": slope, "threshold": bound}, passed=slope <= bound)


def run_cgood(c: dict, rng) -> Result:
    from .contraction import cgood_check

    rows, viol = [], 0
    for k in c["degrees"]:
        for j in range(c["count"]):
            a = float(rng.uniform(-2, 2))
            b = a + float(rng.uniform(0.1, 3))
            coeffs = rng.standard_normal(k + 1)
            r = cgood_check(coeffs, (a, b), k, c["levels"])
            viol += r.violations + (not r.rho_ok)
            worst = max(m / bd for m, bd in zip(r.measures, r.bounds))
            rows.append([k, j, a, b, worst, r.violations, r.rho_ok])
    return Result(["degree", "index", "lo", "hi", "worst_ratio", "violations", "rho_ok"], rows,
                  {"violations": viol, "polynomials": len(rows)}, passed=viol == 0)


def _cover(c: dict):
    from .contraction import cover_sweep, t_for_base

    flow, _, h, x = _planar(c["eps"])
    from .flows import standard_curve

    curve = standard_curve((0.0, 1.0))
    t = t_for_base(flow, c["base"])
    return flow, cover_sweep(flow, curve, h, x, c["M"], sorted(c["N"]), t, c["delta"], c.get("per_cell", 4))


def run_covering(c: dict, rng) -> Result:
    from .contraction import fit_cover_constant

    _, reps = _cover(c)
    C3 = fit_cover_constant(reps, c["beta"])
    rows = [[r.N, r.alpha_Nt, r.count, r.bound] for r in reps]
    return Result(["N", "alpha_Nt", "count", "bound"], rows, {"C3": C3})


def run_dimension(c: dict, rng) -> Result:
    from .contraction import EMPTY_SET, dimension_estimate

    _, reps = _cover(c)
    est = dimension_estimate(reps)
    rows = [[r.N, r.alpha_Nt, r.count] for r in reps]
    ok = est != EMPTY_SET and est <= c["max_slope"]
    return Result(["N", "alpha_Nt", "count"], rows, {"slope": est}, passed=ok)


def _game_one(args):
    cfg, seed, kind, script, check_limit, eps, beta = args
    from . import schmidt

    flow, curve, h, x = _planar(eps, beta)
    bob = schmidt.make_bob(kind, seed, script)
    return schmidt.play(cfg, flow, curve, h, x, bob, check_limit=bool(check_limit))


def run_game(c: dict, rng) -> Result:
    import warnings

    from . import schmidt

    flow, curve, h, x = _planar(c["eps"], c["beta"])
    if len(c["I0"]) != 2:
        raise UsageError("I0 needs two endpoints")
    lo, hi = c["I0"]
    sigma = flow.alpha(1.0)
    c_t, b_t, _ = schmidt.fit_planar_constants(flow, curve, h)
    ast = schmidt.a_star(c_t, h.beta, sigma)
    a = ast if c["a"] is None else c["a"]
    if a < ast:
        warnings.warn(f"a = {a:.4g} is below the fitted a* = {ast:.4g}", RuntimeWarning)
    probe = schmidt.GameConfig.from_times((lo, hi), sigma, a, c["b"], c["t0"], 1.0, c["rounds"])
    consts = schmidt.fitted_M(flow, curve, h, x, probe, c_t, b_t)
    M = consts.M if c["M"] is None else c["M"]
    cfg = schmidt.GameConfig(probe.I0, sigma, probe.A, probe.B, probe.T0, M, c["rounds"])
    seeds = [int(v) for v in rng.integers(0, 2**63 - 1, size=c["games"])]
    trs = pmap(_game_one, [(cfg, s, c["bob"], c["script"], c["check_limit"], c["eps"], c["beta"]) for s in seeds])
    rows = []
    for g, tr in enumerate(trs):
        for r in tr.rounds:
            rows.append([g, r.k, str(r.B[0]), str(r.A[0]), r.t_next, r.sup_height, r.center_height, r.stuck, r.free])
    wins = sum(tr.certificate for tr in trs)
    summary = {
        "fitted": {"c_tilde": c_t, "b_tilde": b_t, "a_star": ast, "M0": consts.M0, "M1": consts.M1,
                   "M_fitted": consts.M, "labels": "fitted constants, not proven ones"},
        "a": cfg.a, "b": cfg.b, "t0": cfg.t0, "M": M, "games": len(trs), "certified": wins,
        "stuck_events": sum(tr.stuck_events for tr in trs),
        "max_partial_quotient": max((tr.max_partial_quotient or 0) for tr in trs),
    }
    extra = {"transcript.json": trs[0].to_json() + "\n"} if len(trs) == 1 else {
        f"transcript-{g:03d}.json": tr.to_json() + "\n" for g, tr in enumerate(trs)}
    return Result(["game", "k", "B_lo", "A_lo", "t_next", "sup_height", "center_height", "stuck", "free"], rows,
                  summary, passed=wins == len(trs), extra=extra)


def run_shrinking(c: dict, rng) -> Result:
    from .contraction import shrinking_average

    flow, curve, h, x = _planar(c["eps"], c["beta"])
    ts = list(range(c["t_max"] + 1))
    rep = shrinking_average(flow, curve, h, x, c["delta"], ts, c["s0"])
    ratio = rep.sup / rep.averages[0]
    rows = [[t, a, f] for t, a, f in zip(ts, rep.averages, rep.flagged)]
    return Result(["t", "average", "flagged"], rows, {"sup_over_initial": ratio}, passed=ratio <= c["max_ratio"])


def _dioph_point(args):
    s, qmax, qmin = args
    from .diophantine import LinearFormsPoint, bad_approx_margin

    return bad_approx_margin(LinearFormsPoint.scalar(s), qmax, qmin)


def run_dioph(c: dict, rng) -> Result:
    g = c["grid"]
    # cell j gets a seeded rational offset with a large denominator
    pts = [Fraction(j, g) + Fraction(int(rng.integers(1, 2**40)), g * 2**40) for j in range(g)]
    margins = pmap(_dioph_point, [(s, c["qmax"], c["qmin"]) for s in pts])
    rows = [[str(s), float(s), m] for s, m in zip(pts, margins)]
    return Result(["s", "s_float", "margin"], rows, {"min_margin": min(margins), "max_margin": max(margins)})


def run_exponents(c: dict, rng) -> Result:
    from .diophantine import max_condition, sl2_products_exponents

    try:
        r = sl2_products_exponents(c["real"], c["complex"], c["beta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    s = {"char": r.char, "delta_x": r.delta_x, "zeta_x": r.zeta_x, "beta_prime": r.beta_prime,
         "beta_phi": r.beta_phi, "dimension_bound": r.dimension_bound, "label": r.label,
         "max_condition": max_condition(c["real"], c["complex"])}
    return Result(["quantity", "value"], [[k, str(v)] for k, v in s.items()], s)


RUNNERS = {
    "heights": run_heights, "orbit": run_orbit, "ch-verify": run_ch_verify,
    "rep-contraction": run_rep_contraction, "cgood": run_cgood, "covering": run_covering,
    "dimension": run_dimension, "game": run_game, "shrinking": run_shrinking,
    "dioph": run_dioph, "exponents": run_exponents,
}


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="homflow", description="Experiments on diagonal flows and lattice heights.")
    ap.add_argument("--version", action="version", version=f"homflow {_version()}")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name, (params, helptext) in EXPERIMENTS.items():
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="flat key = value file; flags override it")
        for p in params + COMMON:
            sp.add_argument("--" + p.name.replace("_", "-"), dest=p.name, default=None,
                            help=f"{p.help} (default {p.default or 'empty'})".strip())
    return ap


def run(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        ns = build_parser().parse_args(argv)
        file_values = parse_config_file(ns.config) if ns.config else {}
        flags = {k: v for k, v in vars(ns).items() if k not in ("experiment", "config") and v is not None}
        cfg = resolve(ns.experiment, file_values, flags)
    except UsageError as exc:
        print(f"homflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("experiment %s, seed %d", ns.experiment, cfg["seed"])
    rng = np.random.default_rng(cfg["seed"])
    try:
        res = RUNNERS[ns.experiment](cfg, rng)
    except UsageError as exc:
        print(f"homflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # budget, overflow and numerical failures
        print(f"homflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_artifacts(cfg["out"], ns.experiment, cfg, res)
    log.info("wrote %s (%s)", cfg["out"], "pass" if res.passed else "check failed")
    return EXIT_OK if res.passed else EXIT_CHECK


def main() -> None:
    sys.exit(run())
