"""Smooth valuation equilibria and their high-sensitivity limits.

Fixed points of ``g`` are found with a globalised Newton iteration (Picard
fallback), collected by multistart, followed along increasing ``beta`` and
compared with the pure equilibria obtained combinatorially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .dynamics import g_map, mean_field_rhs
from .stability import jacobian
from .tree import ReducedTree, payoff_box

DEFAULT_TOL = 1e-12
MAX_ITER = 100_000
DEDUP_TOL = 1e-6
TIE_REL = 1e-6
# mixing probabilities down to 1e-6 still count as indifference at finite beta
TIE_LOGIT = math.log(1e6)
MAX_ENUM_CLASSES = 10
EPS = float(np.finfo(float).eps)
ULP_STEPS = 16
PICARD_DAMPING = 0.5
PICARD_RUN = 20
STALL_WINDOW = 10
# beta * payoff range at which g is still a contraction, and the continuation schedule
HOMOTOPY_START = 0.1
HOMOTOPY_RATIO = 1.2
HOMOTOPY_ITER = 2_000


class SolverError(ArithmeticError):
    def __init__(self, msg: str, best: np.ndarray, residual: float):
        super().__init__(msg)
        self.best = best
        self.residual = residual


class NoMixedEquilibrium(ValueError):
    pass


class ConstructionError(ValueError):
    pass


def payoff_range(t: ReducedTree) -> float:
    vals = t.payoff_matrix[t.mask]
    return float(vals.max() - vals.min())


def tie_tolerance(t: ReducedTree, beta: float, rel: float = TIE_REL) -> float:
    """Valuation gap below which two classes count as indifferent.

    The larger of ``rel * payoff range`` and ``log(1e6) / beta``: at finite
    ``beta`` a mixed equilibrium sits ``O(1/beta)`` away from exact ties.
    """
    base = rel * max(payoff_range(t), 1e-300)
    if beta == 0:
        return math.inf
    return max(base, TIE_LOGIT / beta) if math.isfinite(beta) else base


def indifference_groups(v: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(-v, kind="stable")
    groups = [[int(order[0])]]
    for a, b in zip(order, order[1:]):
        if v[a] - v[b] <= tol:
            groups[-1].append(int(b))
        else:
            groups.append([int(b)])
    return groups


def limit_policy(v: np.ndarray, t: ReducedTree, groups: list[list[int]]) -> np.ndarray:
    """Uniform choice over each state's top indifference group."""
    rank = np.empty(t.n, dtype=int)
    for r, grp in enumerate(groups):
        rank[grp] = r
    out = np.zeros((t.m, t.n))
    for i in range(t.m):
        avail = np.flatnonzero(t.mask[i])
        best = rank[avail].min()
        top = avail[rank[avail] == best]
        out[i, top] = 1.0 / len(top)
    return out


@dataclass
class Equilibrium:
    v_star: np.ndarray
    beta: float
    residual: float
    classification: str
    indifference_groups: list[list[str]]
    limit_policy: np.ndarray
    classes: tuple[str, ...]
    iterations: int = 0

    @property
    def is_strict_pure(self) -> bool:
        return self.classification == "strict-pure"

    def to_dict(self, t: ReducedTree) -> dict:
        pol = []
        for i in range(t.m):
            pol.append(
                {
                    "state": [c for c in t.classes if c in t.states[i].classes],
                    "probs": {t.classes[j]: float(self.limit_policy[i, j]) for j in np.flatnonzero(t.mask[i])},
                }
            )
        return {
            "beta": self.beta,
            "v_star": [float(x) for x in self.v_star],
            "residual": self.residual,
            "classification": self.classification,
            "indifference_groups": self.indifference_groups,
            "limit_policy": pol,
        }


def make_equilibrium(v, t: ReducedTree, beta: float, iterations: int = 0, tie_rel: float = TIE_REL) -> Equilibrium:
    v = np.asarray(v, dtype=float)
    res = float(np.max(np.abs(mean_field_rhs(v, t, beta))))
    groups = indifference_groups(v, tie_tolerance(t, beta, tie_rel))
    pol = limit_policy(v, t, groups)
    pure = bool(np.all(pol[t.mask] % 1.0 == 0.0))
    return Equilibrium(
        v_star=v,
        beta=beta,
        residual=res,
        classification="strict-pure" if pure else "mixed",
        indifference_groups=[[t.classes[i] for i in grp] for grp in groups],
        limit_policy=pol,
        classes=t.classes,
        iterations=iterations,
    )


def _inflated_box(t: ReducedTree, frac: float = 0.1):
    lo, hi = payoff_box(t)
    pad = frac * np.maximum(hi - lo, max(payoff_range(t), 1.0))
    return lo - pad, hi + pad


def _fraction_inside(v, d, lo, hi) -> float:
    s = 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        up = np.where(d > 0, (hi - v) / d, np.inf)
        down = np.where(d < 0, (lo - v) / d, np.inf)
    s = min(s, float(up.min()), float(down.min()))
    return max(s, 0.0)


def residual_floor(t: ReducedTree, beta: float) -> float:
    """Rounding noise in ``g(v) - v``: softmax logits of size ``beta * |v|``
    lose ``eps * beta * |v|`` relative accuracy, scaled by the payoffs."""
    scale = max(1.0, float(np.max(np.abs(t.payoff_matrix))))
    return ULP_STEPS * EPS * max(1.0, beta * scale) * scale


def solve_fixed_point(v0, t: ReducedTree, beta: float, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                      tie_rel: float = TIE_REL, homotopy: bool = True) -> Equilibrium:
    """Newton on ``g(v) - v`` with box clipping, line search and Picard fallback.

    Converged means sup-norm residual below ``tol``, or a point Newton can
    no longer improve whose residual is within the rounding noise of ``F``
    (see :func:`residual_floor`); with large ``beta`` and payoffs that noise
    can exceed ``tol``.

    If that fails and ``homotopy`` is set, the branch through the unique
    small-``beta`` equilibrium is followed up to ``beta`` instead.  This
    reaches roots the flow circles around (Picard cannot) at the price of
    possibly landing away from ``v0``.
    Raises :class:`SolverError` (carrying the best iterate) otherwise.
    """
    if not math.isfinite(beta):
        raise ValueError("solve_fixed_point needs a finite beta")
    try:
        return _newton_picard(v0, t, beta, tol, max_iter, tie_rel)
    except SolverError as exc:
        first = exc
    start = HOMOTOPY_START / max(payoff_range(t), 1e-300)
    if not homotopy or beta <= start:
        raise first
    x = np.asarray(v0, dtype=float)
    b = start
    while True:
        try:
            eq = _newton_picard(x, t, b, tol, min(max_iter, HOMOTOPY_ITER), tie_rel)
        except SolverError:
            raise first from None
        if b >= beta:
            eq.iterations = max_iter
            return eq
        x = eq.v_star
        b = min(beta, b * HOMOTOPY_RATIO)


def _newton_picard(v0, t: ReducedTree, beta: float, tol: float, max_iter: int, tie_rel: float) -> Equilibrium:
    lo, hi = _inflated_box(t)
    v = np.clip(np.asarray(v0, dtype=float), lo, hi)
    F = mean_field_rhs(v, t, beta)
    res = float(np.max(np.abs(F)))
    best_v, best_res = v.copy(), res
    floor = residual_floor(t, beta)
    picard_left = 0
    history: list[float] = []
    for it in range(max_iter):
        if res < tol:
            return make_equilibrium(v, t, beta, it, tie_rel)
        step = None
        if picard_left == 0:
            try:
                d = np.linalg.solve(jacobian(v, t, beta), -F)
                if np.all(np.isfinite(d)):
                    step = d
                    if np.max(np.abs(d)) <= ULP_STEPS * EPS * max(1.0, float(np.max(np.abs(v)))):
                        return make_equilibrium(v, t, beta, it, tie_rel)
            except np.linalg.LinAlgError:
                pass
        moved = False
        if step is not None:
            s = _fraction_inside(v, step, lo, hi)
            norm0 = float(np.dot(F, F))
            for _ in range(40):
                if s <= 0:
                    break
                cand = v + s * step
                Fc = mean_field_rhs(cand, t, beta)
                rc = float(np.max(np.abs(Fc)))
                if rc < tol or float(np.dot(Fc, Fc)) < (1.0 - 1e-4 * s) * norm0:
                    v, F, res = cand, Fc, rc
                    moved = True
                    break
                s *= 0.5
            if not moved:
                if res <= floor:
                    return make_equilibrium(v, t, beta, it, tie_rel)
                # Newton is stuck near a non-root minimum of |F|; let the flow carry v away
                picard_left = PICARD_RUN
        if moved:
            history.append(res)
            if len(history) > STALL_WINDOW and res > 0.9 * history[-1 - STALL_WINDOW]:
                # Newton creeps along a valley of |F| without reaching a root
                picard_left = PICARD_RUN
                history.clear()
        if not moved:
            v = v + PICARD_DAMPING * F
            F = mean_field_rhs(v, t, beta)
            res = float(np.max(np.abs(F)))
            picard_left = max(picard_left - 1, 0)
        if res < best_res:
            best_v, best_res = v.copy(), res
    if res < tol:
        return make_equilibrium(v, t, beta, max_iter, tie_rel)
    raise SolverError(f"no convergence in {max_iter} iterations (best residual {best_res:.3g})", best_v, best_res)


def multistart_points(t: ReducedTree, m: int = 64, seed: int = 0, diagonal: int | None = None) -> np.ndarray:
    """Box vertices, the centre, ``m`` random interior points and tie variants.

    The tie variants replace a pair of coordinates of each random point by
    their mean, and a set of points runs along the box diagonal.  Mixed
    equilibria sit close to such ties at large ``beta``.
    """
    lo, hi = payoff_box(t)
    n = t.n
    pts = [np.array(c) for c in product(*zip(lo, hi))] if n <= 10 else []
    pts.append(0.5 * (lo + hi))
    rng = np.random.default_rng(seed)
    rand = lo + (hi - lo) * rng.random((m, n))
    pts.extend(rand)
    for x in rand:
        for a in range(n):
            for b in range(a + 1, n):
                y = x.copy()
                y[a] = y[b] = 0.5 * (x[a] + x[b])
                pts.append(y)
    k = m // 4 if diagonal is None else diagonal
    for c in np.linspace(lo.min(), hi.max(), k + 2)[1:-1]:
        pts.append(np.full(n, c))
    return np.array(pts)


def dedupe(eqs: Iterable[Equilibrium], tol: float = DEDUP_TOL) -> list[Equilibrium]:
    out: list[Equilibrium] = []
    for e in eqs:
        if all(np.max(np.abs(e.v_star - o.v_star)) >= tol for o in out):
            out.append(e)
    out.sort(key=lambda e: tuple(e.v_star))
    return out


def find_all(t: ReducedTree, beta: float, m: int = 64, seed: int = 0, tol: float = DEFAULT_TOL,
             max_iter: int = 2_000, extra_starts: Sequence | None = None, workers: int = 1) -> list[Equilibrium]:
    """All equilibria reached from a multistart set, deduplicated and sorted."""
    starts = list(multistart_points(t, m, seed))
    if extra_starts is not None:
        starts.extend(np.asarray(x, dtype=float) for x in extra_starts)

    def run(x):
        try:
            return solve_fixed_point(x, t, beta, tol, max_iter, homotopy=False)
        except SolverError as exc:
            return exc

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(x) for x in starts]
    found = [r for r in results if isinstance(r, Equilibrium)]
    if not found:
        errs = [r for r in results if isinstance(r, SolverError)]
        best = min(errs, key=lambda e: e.residual)
        raise SolverError(f"all {len(starts)} starts failed", best.best, best.residual)
    return dedupe(found)


# ---------------------------------------------------------------- continuation


@dataclass
class ContinuationPath:
    points: list[tuple[float, Equilibrium]] = field(default_factory=list)
    termination: str = "completed"
    error: str | None = None

    @property
    def betas(self) -> list[float]:
        return [b for b, _ in self.points]

    @property
    def final(self) -> Equilibrium:
        return self.points[-1][1]

    @property
    def limit_label(self) -> str:
        return self.final.classification

    def to_list(self, t: ReducedTree) -> list[dict]:
        return [e.to_dict(t) for _, e in self.points]


def geometric_betas(start: float = 1.0, stop: float = 1e4, ratio: float = 1.5) -> list[float]:
    out = [start]
    while out[-1] * ratio < stop * (1 + 1e-12):
        out.append(out[-1] * ratio)
    if out[-1] < stop:
        out.append(stop)
    return out


def beta_sweep(t: ReducedTree, betas: Sequence[float], seeds: Sequence, tol: float = DEFAULT_TOL,
               jump_factor: float = 10.0, window: int = 5) -> list[ContinuationPath]:
    """Follow equilibria along an increasing ``beta`` schedule.

    Each seed is solved at ``betas[0]`` and then warm-started at every
    subsequent value.  A path stops on solver failure or when a step is more
    than ``jump_factor`` times the median of the last ``window`` steps.
    """
    betas = [float(b) for b in betas]
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("beta schedule must be strictly increasing")
    floor = 1e-6 * max(payoff_range(t), 1.0)
    paths = []
    for seed in seeds:
        x = seed.v_star if isinstance(seed, Equilibrium) else np.asarray(seed, dtype=float)
        path = ContinuationPath()
        steps: list[float] = []
        for b in betas:
            try:
                eq = solve_fixed_point(x, t, b, tol, homotopy=False)
            except SolverError as exc:
                path.termination = "solver-failure"
                path.error = f"beta={b:g}: {exc}"
                break
            if path.points:
                dist = float(np.max(np.abs(eq.v_star - path.points[-1][1].v_star)))
                if len(steps) >= 3:
                    med = float(np.median(steps[-window:]))
                    if dist > jump_factor * med and dist > floor:
                        path.termination = "jump"
                        path.error = f"beta={b:g}: step {dist:.3g} vs trailing median {med:.3g}"
                        break
                steps.append(dist)
            path.points.append((b, eq))
            x = eq.v_star
        paths.append(path)
    return paths


# ------------------------------------------------------- two-class mixed limit


@dataclass(frozen=True)
class MixedLimit:
    q: float
    valuation: float
    classes: tuple[str, str]

    @property
    def probabilities(self) -> dict[str, float]:
        return {self.classes[0]: self.q, self.classes[1]: 1.0 - self.q}


def _two_class_parts(t: ReducedTree):
    if t.n != 2:
        raise ValueError("two-class trees only")
    a, b = t.classes
    ib = t.find_state([a, b])
    if ib is None:
        raise NoMixedEquilibrium("no state offers both classes")
    ia, jb = t.find_state([a]), t.find_state([b])
    pa = float(t.states[ia].prob) if ia is not None else 0.0
    ua = float(t.states[ia].payoffs[a]) if ia is not None else 0.0
    pb = float(t.states[jb].prob) if jb is not None else 0.0
    ub = float(t.states[jb].payoffs[b]) if jb is not None else 0.0
    pab = float(t.states[ib].prob)
    uab = float(t.states[ib].payoffs[a])
    uba = float(t.states[ib].payoffs[b])
    return pa, ua, pb, ub, pab, uab, uba


def _consistent(p_own, u_own, p_bin, u_bin, share):
    den = p_own + p_bin * share
    if den == 0.0:
        return u_bin
    return (p_own * u_own + p_bin * share * u_bin) / den


def mixed_limit_solve(t: ReducedTree, tol: float = 1e-14) -> MixedLimit:
    """Indifference point of a two-class tree mixing at its binary state.

    ``q`` is the probability of the first class at the binary state; both
    consistent valuations coincide there.
    """
    pa, ua, pb, ub, pab, uab, uba = _two_class_parts(t)

    def gap(q):
        return _consistent(pa, ua, pab, uab, q) - _consistent(pb, ub, pab, uba, 1.0 - q)

    lo, hi = 0.0, 1.0
    flo, fhi = gap(lo), gap(hi)
    if flo == 0.0:
        hi = lo
    elif fhi == 0.0:
        lo = hi
    elif (flo > 0) == (fhi > 0):
        raise NoMixedEquilibrium("consistent valuations never cross on [0, 1]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = gap(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    va = _consistent(pa, ua, pab, uab, q)
    vb = _consistent(pb, ub, pab, uba, 1.0 - q)
    return MixedLimit(q, 0.5 * (va + vb), (t.classes[0], t.classes[1]))


# ------------------------------------------------------------ pure equilibria


@dataclass(frozen=True)
class PureVE:
    order: tuple[str, ...]
    valuations: np.ndarray
    strict: bool
    choices: dict[str, str]
    margin: float

    def __eq__(self, other):
        return (
            isinstance(other, PureVE)
            and self.choices == other.choices
            and np.array_equal(self.valuations, other.valuations)
        )

    def __hash__(self):
        return hash(tuple(sorted(self.choices.items())))


class _PureCalc:
    """Consistent valuations of a class given the set of classes ranked above it."""

    def __init__(self, t: ReducedTree):
        self.t = t
        self.bits = (t.mask.astype(np.int64) << np.arange(t.n)).sum(axis=1)
        self.memo: dict[tuple[int, int], float] = {}

    def value(self, s: int, higher: int) -> float:
        key = (s, higher)
        if key not in self.memo:
            t = self.t
            sel = t.mask[:, s] & ((self.bits & higher) == 0)
            w = t.probs[sel]
            self.memo[key] = float(np.dot(w, t.payoff_matrix[sel, s]) / w.sum()) if w.size else math.nan
        return self.memo[key]

    def build(self, order: Sequence[int], eps: float) -> PureVE | None:
        """Valuations and choices induced by ``order`` (highest first), or None."""
        t = self.t
        v = np.empty(t.n)
        higher = 0
        for s in order:
            v[s] = self.value(s, higher)
            higher |= 1 << s
        if np.any(np.isnan(v)):
            return None
        pos = {s: r for r, s in enumerate(order)}
        margin = math.inf
        choices = {}
        for i in range(t.m):
            avail = np.flatnonzero(t.mask[i])
            c = min(avail, key=pos.__getitem__)
            choices[t.state_label(i)] = t.classes[c]
            others = [k for k in avail if k != c]
            if others:
                margin = min(margin, float(v[c] - v[others].max()))
        if margin <= 0:
            return None
        ranked = tuple(t.classes[i] for i in np.argsort(-v, kind="stable"))
        return PureVE(ranked, v, margin >= eps, choices, margin)


def enumerate_pure_VE(t: ReducedTree, eps_tie: float | None = None) -> list[PureVE]:
    """All pure valuation equilibria (each valuation vector once).

    Depth-first over rankings, highest class first; a branch is cut as soon
    as a placed class would beat the class chosen at some shared state.
    """
    if t.n > MAX_ENUM_CLASSES:
        raise ValueError(
            f"{t.n} classes: enumerating {t.n}! rankings is refused above {MAX_ENUM_CLASSES}; "
            "use find_all at large beta instead"
        )
    eps = TIE_REL * payoff_range(t) if eps_tie is None else eps_tie
    calc = _PureCalc(t)
    found: dict[tuple, PureVE] = {}
    mask = t.mask

    def dfs(order: list[int], higher: int, vals: dict[int, float]):
        if len(order) == t.n:
            ve = calc.build(order, eps)
            if ve is not None:
                found.setdefault(tuple(sorted(ve.choices.items())), ve)
            return
        for s in range(t.n):
            if higher >> s & 1:
                continue
            vs = calc.value(s, higher)
            if math.isnan(vs):
                continue
            ok = True
            for i in np.flatnonzero(mask[:, s] & ((calc.bits & higher) != 0)):
                c = next(k for k in order if mask[i, k])
                if not vals[c] > vs:
                    ok = False
                    break
            if ok:
                vals[s] = vs
                order.append(s)
                dfs(order, higher | (1 << s), vals)
                order.pop()
                del vals[s]

    dfs([], 0, {})
    return sorted(found.values(), key=lambda ve: tuple(ve.valuations))


def construct_strict_pure_VE(t: ReducedTree, eps_tie: float | None = None) -> PureVE:
    """Greedy ranking: repeatedly put on top the class whose unary state carries
    the smallest share of its remaining probability mass.

    Ties go to the earlier class.  Raises :class:`ConstructionError` when
    the resulting ranking does not confirm itself strictly.
    """
    idx = [t.find_state([c]) for c in t.classes]
    if any(i is None for i in idx):
        raise ValueError("every single-class state must have positive probability")
    eps = TIE_REL * payoff_range(t) if eps_tie is None else eps_tie
    calc = _PureCalc(t)
    remaining = list(range(t.n))
    order = []
    while remaining:
        rem_bits = sum(1 << s for s in remaining)
        inside = (calc.bits & ~rem_bits) == 0

        def ratio(s):
            return float(t.probs[idx[s]]) / float(t.probs[t.mask[:, s] & inside].sum())

        top = min(remaining, key=lambda s: (ratio(s), s))
        order.append(top)
        remaining.remove(top)
    ve = calc.build(order, eps)
    if ve is None or not ve.strict:
        raise ConstructionError(
            "greedy ranking is not self-confirming; unary payoffs are not low enough for a strict pure equilibrium"
        )
    return ve


# ------------------------------------------------------- one-dimensional field


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class OneDimField:
    """``x = v_i - v_j`` for the unary/unary/binary two-class tree."""

    p_ii: float
    p_jj: float
    p_ij: float
    u_ii: float
    u_jj: float
    u_ij: float
    u_ji: float
    beta: float

    def sigma(self, x: float) -> float:
        return _logistic(self.beta * x)

    def g_pair(self, x: float) -> tuple[float, float]:
        s = self.sigma(x)
        gi = (self.p_ii * self.u_ii + self.p_ij * s * self.u_ij) / (self.p_ii + self.p_ij * s)
        gj = (self.p_jj * self.u_jj + self.p_ij * (1 - s) * self.u_ji) / (self.p_jj + self.p_ij * (1 - s))
        return gi, gj

    def f(self, x: float) -> float:
        gi, gj = self.g_pair(x)
        return gi - gj - x

    def fprime(self, x: float) -> float:
        s = self.sigma(x)
        ds = self.beta * s * (1 - s)
        a = self.p_ii * (self.u_ij - self.u_ii) / (self.p_ii + self.p_ij * s) ** 2
        b = self.p_jj * (self.u_ji - self.u_jj) / (self.p_jj + self.p_ij * (1 - s)) ** 2
        return self.p_ij * ds * (a + b) - 1.0

    @property
    def bounds(self) -> tuple[float, float]:
        """Interval containing every value of ``g_i - g_j``."""
        li, hi_ = sorted((self.u_ii, self.u_ij))
        lj, hj = sorted((self.u_jj, self.u_ji))
        return li - hj, hi_ - lj

    def roots(self, grid: int = 1024, tol: float = 1e-13) -> list[float]:
        lo, hi = self.bounds
        xs = np.linspace(lo - 1.0, hi + 1.0, grid)
        fs = [self.f(x) for x in xs]
        out = []
        for a, b, fa, fb in zip(xs, xs[1:], fs, fs[1:]):
            if fa == 0.0:
                out.append(float(a))
                continue
            if (fa > 0) == (fb > 0) or fb == 0.0:
                continue
            while b - a > tol:
                mid = 0.5 * (a + b)
                if mid in (a, b):
                    break
                fm = self.f(mid)
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            out.append(0.5 * (a + b))
        if fs[-1] == 0.0:
            out.append(float(xs[-1]))
        return out

    def stability(self, x: float) -> str:
        d = self.fprime(x)
        return "stable" if d < 0 else "unstable" if d > 0 else "marginal"

    def lift(self, x: float) -> np.ndarray:
        """The two-class equilibrium whose difference is the root ``x``."""
        return np.array(self.g_pair(x))


def reduce_1d(t: ReducedTree, beta: float) -> OneDimField:
    if t.n != 2:
        raise ValueError("the one-dimensional reduction needs exactly two classes")
    i, j = t.classes
    si, sj, sij = t.find_state([i]), t.find_state([j]), t.find_state([i, j])
    if None in (si, sj, sij) or t.m != 3:
        raise ValueError("expected exactly the states {i}, {j} and {i, j}")
    S = t.states
    return OneDimField(
        p_ii=float(S[si].prob),
        p_jj=float(S[sj].prob),
        p_ij=float(S[sij].prob),
        u_ii=float(S[si].payoffs[i]),
        u_jj=float(S[sj].payoffs[j]),
        u_ij=float(S[sij].payoffs[i]),
        u_ji=float(S[sij].payoffs[j]),
        beta=float(beta),
    )


def beta_zero_equilibrium(t: ReducedTree) -> np.ndarray:
    """The unique equilibrium at ``beta = 0`` (uniform choice everywhere)."""
    return g_map(np.zeros(t.n), t, 0.0)
