"""Reproduction checks for the worked illustrations and the structural claims.

Each ``check_*`` function returns a :class:`Check` carrying measured and
expected values; trees can be swapped in to confirm that corrupted inputs
fail.  ``run_all`` drives the suite for the CLI and the test-suite.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import trees
from .dynamics import SimConfig, choice_mass, integrate, mean_field_rhs, one_step_increments, simulate_batch
from .equilibrium import enumerate_pure_VE, find_all, mixed_limit_solve, reduce_1d
from .stability import (
    finite_difference_jacobian,
    jacobian,
    report,
    row_sum_defect,
    sample_box,
)
from .linalg import eigenvalues
from .tree import ReducedTree, payoff_box, reduce, shift_unary_payoffs

SQRT3 = math.sqrt(3.0)
MIXED_LOW = 1.0 - 1.0 / SQRT3
MIXED_HIGH = 2.0 + 1.0 / SQRT3


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        got = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        want = ", ".join(f"{k}={_short(v)}" for k, v in self.expected.items())
        return f"[{status}] {self.number:2d} {self.name}: {got} | expected {want} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": bool(self.passed),
            "measured": _jsonable(self.measured),
            "expected": _jsonable(self.expected),
        }


def _short(x) -> str:
    if isinstance(x, float):
        return f"{x:.4g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_short(y) for y in x) + "]"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, Fraction)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _nearest(points, target) -> tuple[int, float]:
    d = [float(np.max(np.abs(np.asarray(p) - target))) for p in points]
    i = int(np.argmin(d))
    return i, d[i]


def _match_targets(eqs, targets, tol) -> tuple[bool, list[float]]:
    """One equilibrium per target within ``tol`` and no spare equilibria."""
    if len(eqs) != len(targets):
        return False, []
    dists = []
    used = set()
    for tgt in targets:
        i, d = _nearest([e.v_star for e in eqs], np.asarray(tgt, dtype=float))
        dists.append(d)
        used.add(i)
    return len(used) == len(targets) and max(dists) < tol, dists


def _timed(fn: Callable[..., Check]) -> Callable[..., Check]:
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        c = fn(*args, **kwargs)
        c.seconds = time.perf_counter() - t0
        return c

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------


@_timed
def check_reduction(raw=None) -> Check:
    raw = trees.fruit_raw_tree() if raw is None else raw
    t = reduce(raw)
    a = t.find_state(["apples", "citrus"])
    c = t.find_state(["citrus"])
    got = {}
    ok = a is not None and c is not None
    if ok:
        sa, sc = t.states[a], t.states[c]
        got = {
            "p_both": float(sa.prob),
            "p_citrus": float(sc.prob),
            "apples": float(sa.payoffs["apples"]),
            "citrus_both": float(sa.payoffs["citrus"]),
            "citrus_only": float(sc.payoffs["citrus"]),
        }
        want = [2 / 3, 1 / 3, 2.0, 3.0, 2.0]
        ok = t.m == 2 and all(abs(g - w) < 1e-12 for g, w in zip(got.values(), want))
    return Check(1, "reduction exactness", ok, got,
                 {"p": "(2/3, 1/3)", "payoffs": "apples 2, citrus 3 | citrus 2", "tol": 1e-12})


@_timed
def check_multiplicity(t: ReducedTree | None = None) -> Check:
    t = trees.multiplicity_tree() if t is None else t
    targets = [(0.0, 0.5), (MIXED_LOW, MIXED_LOW), (1.0, 0.0)]
    eq50 = find_all(t, 50.0)
    ok50, d50 = _match_targets(eq50, targets, 0.05)
    eq1k = find_all(t, 1e3)
    ok1k, d1k = _match_targets(eq1k, targets, 0.005)
    verdicts = []
    if ok50:
        for tgt in targets:
            i, _ = _nearest([e.v_star for e in eq50], np.asarray(tgt))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                verdicts.append(report(eq50[i].v_star, t, 50.0).verdict)
    ok_stab = verdicts == ["stable", "unstable", "stable"]
    return Check(
        2, "multiplicity (three equilibria)", ok50 and ok1k and ok_stab,
        {"count_50": len(eq50), "dist_50": max(d50, default=math.nan), "count_1000": len(eq1k),
         "dist_1000": max(d1k, default=math.nan), "verdicts": verdicts},
        {"count": 3, "dist_50": "< 0.05", "dist_1000": "< 0.005", "verdicts": ["stable", "unstable", "stable"]},
    )


@_timed
def check_unique_mixed(t: ReducedTree | None = None, seeds: int = 100, horizon: int = 100_000) -> Check:
    t = trees.unique_mixed_tree() if t is None else t
    beta = 50.0
    limit = np.array([MIXED_HIGH, MIXED_HIGH])
    eqs = find_all(t, beta)
    ok_count = len(eqs) == 1
    dist = float(np.max(np.abs(eqs[0].v_star - limit))) if eqs else math.inf
    target = eqs[0].v_star
    # 20 starts spread over the payoff box: its vertices plus a seeded fill
    lo, hi = payoff_box(t)
    rng = np.random.default_rng(20)
    corners = [np.array([a, b]) for a in (lo[0], hi[0]) for b in (lo[1], hi[1])]
    starts = corners + list(lo + (hi - lo) * rng.random((16, 2)))
    ode_err = max(float(np.max(np.abs(integrate(x, t, beta, 50.0).final - target))) for x in starts)
    cfg = SimConfig(beta=beta, horizon=horizon, step_rule="harmonic", seed=0)
    V = simulate_batch(np.zeros(t.n), cfg, t, seeds)
    sim_err = float(np.mean(np.max(np.abs(V - target), axis=1)))
    sim_err_limit = float(np.mean(np.max(np.abs(V - limit), axis=1)))
    ok = ok_count and dist < 0.05 and ode_err < 1e-3 and sim_err < 0.05
    return Check(
        3, "unique mixed equilibrium, global convergence", ok,
        {"count": len(eqs), "dist": dist, "ode_err": ode_err, "sim_err": sim_err, "sim_err_vs_limit": sim_err_limit},
        {"count": 1, "dist": "< 0.05", "ode_err": "< 1e-3", "sim_err": "< 0.05"},
    )


@_timed
def check_unique_pure(t: ReducedTree | None = None) -> Check:
    t = trees.unique_pure_tree() if t is None else t
    eqs = find_all(t, 50.0)
    dist = float(np.max(np.abs(eqs[0].v_star - np.array([1.5, 0.0])))) if eqs else math.inf
    verdict = report(eqs[0].v_star, t, 50.0).verdict if len(eqs) == 1 else "n/a"
    ok = len(eqs) == 1 and dist < 0.05 and verdict == "stable"
    return Check(4, "unique pure equilibrium", ok, {"count": len(eqs), "dist": dist, "verdict": verdict},
                 {"count": 1, "dist": "< 0.05", "verdict": "stable"})


@_timed
def check_mixed_limits(low: ReducedTree | None = None, high: ReducedTree | None = None) -> Check:
    low = trees.multiplicity_tree() if low is None else low
    high = trees.unique_mixed_tree() if high is None else high
    a = mixed_limit_solve(low)
    b = mixed_limit_solve(high)
    errs = [abs(a.q - (2 - SQRT3)), abs(a.valuation - MIXED_LOW), abs(b.q - (SQRT3 - 1)), abs(b.valuation - MIXED_HIGH)]
    return Check(5, "closed-form mixed limits", max(errs) < 1e-12,
                 {"q_low": a.q, "v_low": a.valuation, "q_high": b.q, "v_high": b.valuation, "max_err": max(errs)},
                 {"q_low": 2 - SQRT3, "v_low": MIXED_LOW, "q_high": SQRT3 - 1, "v_high": MIXED_HIGH, "tol": 1e-12})


@_timed
def check_pure_jacobian_limit(tree_list: list[ReducedTree] | None = None, beta: float = 200.0) -> Check:
    tree_list = [trees.multiplicity_tree(), trees.unique_pure_tree()] if tree_list is None else tree_list
    worst = 0.0
    count = 0
    for t in tree_list:
        for e in find_all(t, beta):
            if not e.is_strict_pure:
                continue
            count += 1
            worst = max(worst, max(abs(z + 1) for z in eigenvalues(jacobian(e.v_star, t, beta))))
    return Check(6, "strict pure Jacobian near -I", count == 3 and worst < 0.05,
                 {"pure_equilibria": count, "max_abs_lambda_plus_1": worst},
                 {"pure_equilibria": 3, "max_abs_lambda_plus_1": "< 0.05"})


@_timed
def check_cooperative(extra: int = 20, points: int = 100, seed: int = 7) -> Check:
    rng = np.random.default_rng(seed)
    # z=+100 trees at beta=5: larger beta*range underflows the choice
    # probabilities and the off-diagonal entries become exact zeros
    cases = [(trees.unique_mixed_tree(), 50.0)]
    cases += [(trees.random_full_support_tree(rng, 3, z=100.0), 5.0) for _ in range(extra)]
    min_off = math.inf
    max_abscissa = -math.inf
    for t, beta in cases:
        off = ~np.eye(t.n, dtype=bool)
        for v in sample_box(t, points, rng):
            J = jacobian(v, t, beta)
            min_off = min(min_off, float(J[off].min()))
            max_abscissa = max(max_abscissa, max(z.real for z in eigenvalues(J)))
    ok = min_off > 0 and max_abscissa <= -1 + 1e-9
    return Check(7, "cooperative field with large unary payoffs", ok,
                 {"trees": len(cases), "min_offdiag": min_off, "max_abscissa": max_abscissa},
                 {"min_offdiag": "> 0", "max_abscissa": "<= -1 + 1e-9"})


@_timed
def check_pure_count(n_trees: int = 5, seed: int = 11) -> Check:
    rng = np.random.default_rng(seed)
    counts, worst = [], 0.0
    for _ in range(n_trees):
        t = shift_unary_payoffs(trees.full_support_tree(rng, 3), -100)
        ves = [ve for ve in enumerate_pure_VE(t) if ve.strict]
        counts.append(len(ves))
        eqs = find_all(t, 1e3)
        for ve in ves:
            worst = max(worst, _nearest([e.v_star for e in eqs], ve.valuations)[1])
    ok = all(c == 6 for c in counts) and worst < 0.02
    return Check(8, "n! strict pure equilibria", ok, {"counts": counts, "max_dist_to_solved": worst},
                 {"counts": "6 each", "max_dist_to_solved": "< 0.02"})


def _random_case(rng: np.random.Generator):
    kind = rng.integers(3)
    n = int(rng.integers(2, 5))
    if kind == 0:
        t = trees.random_full_support_tree(rng, n)
    elif kind == 1:
        t = trees.random_sparse_tree(rng, n)
    else:
        t = trees.random_two_class_tree(rng, payoff_scale=3.0)
    beta = float(10 ** rng.uniform(-1, 2))
    v = sample_box(t, 1, rng)[0]
    return t, v, beta


@_timed
def check_jacobian(cases: int = 200, seed: int = 3) -> Check:
    rng = np.random.default_rng(seed)
    worst_rel, worst_rows, cover = 0.0, 0.0, True
    for _ in range(cases):
        t, v, beta = _random_case(rng)
        J = jacobian(v, t, beta)
        Jfd = finite_difference_jacobian(v, t, beta)
        worst_rel = max(worst_rel, float(np.max(np.abs(J - Jfd)) / max(1.0, float(np.max(np.abs(J))))))
        worst_rows = max(worst_rows, row_sum_defect(J))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cover = cover and report(v, t, beta).discs_cover_spectrum
    ok = worst_rel < 1e-5 and worst_rows < 1e-9 and cover
    return Check(9, "Jacobian correctness", ok,
                 {"max_rel_err": worst_rel, "max_row_sum_defect": worst_rows, "gershgorin_cover": cover},
                 {"max_rel_err": "< 1e-5", "max_row_sum_defect": "< 1e-9", "gershgorin_cover": True})


def _zscore(diff: float, se: float, rounding: float = 1e-12) -> float:
    # deterministic increments (a class offered in one state) have se ~ 0
    if abs(diff) <= rounding:
        return 0.0
    return abs(diff) / se if se > 0 else math.inf


@_timed
def check_mean_field(states: int = 10, draws: int = 100_000, seed: int = 5) -> Check:
    """Sampled one-step increments against the mean-field drift.

    Conditional on class ``s`` being chosen its mean increment is
    ``alpha * (g_s - v_s)``; unconditionally it is that times the choice
    mass ``D_s``.  Both are compared within three standard errors.
    """
    rng = np.random.default_rng(seed)
    worst_cond, worst_uncond = 0.0, 0.0
    for i in range(states):
        if i % 2 == 0:
            t = trees.random_full_support_tree(rng, int(rng.integers(2, 5)))
            source, mode = t, "reduced"
        else:
            source, mode = trees.fruit_raw_tree(), "raw"
            t = reduce(source)
        beta = float(rng.uniform(0.5, 10))
        v = sample_box(t, 1, rng)[0]
        k = int(rng.integers(0, 1000))
        cfg = SimConfig(beta=beta, horizon=1, step_rule="harmonic", mode=mode)
        alpha = cfg.step_size(k)
        inc, chosen = one_step_increments(v, k, cfg, source, draws, rng)
        drift = mean_field_rhs(v, t, beta)
        mass = choice_mass(v, t, beta)
        for s in range(t.n):
            sel = inc[chosen == s, s]
            if sel.size > 1:
                se = sel.std(ddof=1) / math.sqrt(sel.size)
                worst_cond = max(worst_cond, _zscore(sel.mean() - alpha * drift[s], se))
            col = inc[:, s]
            se = col.std(ddof=1) / math.sqrt(draws)
            worst_uncond = max(worst_uncond, _zscore(col.mean() - alpha * mass[s] * drift[s], se))
    ok = worst_cond < 3 and worst_uncond < 3
    return Check(10, "mean-field drift of one step", ok,
                 {"max_z_conditional": worst_cond, "max_z_unconditional": worst_uncond},
                 {"max_z": "< 3 standard errors"})


@_timed
def check_one_dim(n_trees: int = 50, seed: int = 9, beta: float = 50.0) -> Check:
    rng = np.random.default_rng(seed)
    worst, mismatched = 0.0, 0
    for _ in range(n_trees):
        t = trees.random_two_class_tree(rng)
        f = reduce_1d(t, beta)
        roots = sorted(f.roots())
        eqs = sorted(find_all(t, beta), key=lambda e: e.v_star[0] - e.v_star[1])
        diffs = [e.v_star[0] - e.v_star[1] for e in eqs]
        if len(roots) != len(diffs):
            mismatched += 1
            continue
        worst = max([worst] + [abs(a - b) for a, b in zip(roots, diffs)])
        for x, e in zip(roots, eqs):
            if f.stability(x) != report(e.v_star, t, beta).verdict:
                mismatched += 1
    ok = mismatched == 0 and worst < 1e-6
    return Check(11, "one-dimensional reduction", ok, {"trees": n_trees, "mismatched": mismatched, "max_root_err": worst},
                 {"mismatched": 0, "max_root_err": "< 1e-6"})


CHECKS = [
    check_reduction,
    check_multiplicity,
    check_unique_mixed,
    check_unique_pure,
    check_mixed_limits,
    check_pure_jacobian_limit,
    check_cooperative,
    check_pure_count,
    check_jacobian,
    check_mean_field,
    check_one_dim,
]


def mutated_trees(name: str) -> dict:
    """Tree overrides for the corruption test; only ``z2=5`` is defined."""
    if name == "z2=5":
        bad = trees.two_class_tree(5, 0)
        return {"check_unique_pure": {"t": bad}, "check_pure_jacobian_limit": {"tree_list": [trees.multiplicity_tree(), bad]}}
    raise ValueError(f"unknown mutation {name!r}")


def run_all(overrides: dict | None = None, only: list[int] | None = None, echo: Callable[[str], None] | None = None):
    overrides = overrides or {}
    out = []
    for i, fn in enumerate(CHECKS, start=1):
        if only and i not in only:
            continue
        try:
            c = fn(**overrides.get(fn.__name__, {}))
        except Exception as exc:
            c = Check(i, fn.__name__.removeprefix("check_"), False, {"error": f"{type(exc).__name__}: {exc}"}, {})
        out.append(c)
        if echo:
            echo(c.line())
    return out
