"""Analytic Jacobian of the mean-field field and local stability reports."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import class_weights, g_map, mean_field_rhs, policy
from .linalg import eigenvalues
from .tree import ReducedTree, payoff_box

MARGINAL_BAND = 1e-8
EDGE_THRESHOLD = 1e-12
COVER_TOL = 1e-8


def jacobian(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Partial derivatives ``d f_s / d v_k`` of ``f = g - v``.

    With ``w`` the normalised state weights of class ``s`` and ``d = pi - g_s``,
    ``J_sk = -beta * sum_w w * d * sigma^k`` off the diagonal and
    ``J_ss = beta * sum_w w * (1 - sigma^s) * d - 1``.
    """
    if math.isinf(beta):
        raise ValueError("jacobian needs a finite beta")
    v = np.asarray(v, dtype=float)
    sigma = policy(v, t, beta)
    w = class_weights(v, t, beta)
    g = (w * t.payoff_matrix).sum(axis=0)
    wd = np.where(t.mask, w * (t.payoff_matrix - g[None, :]), 0.0)
    J = -beta * (wd.T @ sigma)
    J[np.diag_indices_from(J)] += beta * wd.sum(axis=0) - 1.0
    return J


def finite_difference_jacobian(v, t: ReducedTree, beta: float, h: float = 1e-6) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.size
    J = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (mean_field_rhs(v + e, t, beta) - mean_field_rhs(v - e, t, beta)) / (2 * h)
    return J


def row_sum_defect(J) -> float:
    J = np.asarray(J, dtype=float)
    return float(np.max(np.abs(J.sum(axis=1) + 1.0)))


def gershgorin_discs(J) -> list[tuple[float, float]]:
    J = np.asarray(J, dtype=float)
    radii = np.abs(J).sum(axis=1) - np.abs(np.diag(J))
    return [(float(c), float(r)) for c, r in zip(np.diag(J), radii)]


def discs_cover(eigs, discs, tol: float = COVER_TOL) -> bool:
    scale = max(1.0, max(abs(c) + r for c, r in discs))
    for lam in eigs:
        gap = min(abs(lam - c) - r for c, r in discs)
        if gap > tol * scale:
            return False
    return True


def strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]

    def reach(a):
        seen = {0}
        todo = [0]
        while todo:
            i = todo.pop()
            for j in np.flatnonzero(a[i]):
                if j not in seen:
                    seen.add(int(j))
                    todo.append(int(j))
        return len(seen) == n

    return reach(adj) and reach(adj.T)


@dataclass(frozen=True)
class StabilityReport:
    point: np.ndarray
    beta: float
    jacobian: np.ndarray
    eigenvalues: list[complex]
    spectral_abscissa: float
    verdict: str
    gershgorin: list[tuple[float, float]]
    discs_cover_spectrum: bool
    cooperative: bool
    irreducible: bool
    row_sum_defect: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "spectral_abscissa": self.spectral_abscissa,
            "verdict": self.verdict,
            "gershgorin": [{"center": c, "radius": r} for c, r in self.gershgorin],
            "cooperative": self.cooperative,
            "irreducible": self.irreducible,
            "row_sum_defect": self.row_sum_defect,
        }


def classify(abscissa: float, band: float = MARGINAL_BAND) -> str:
    if abscissa < -band:
        return "stable"
    if abscissa > band:
        return "unstable"
    return "marginal"


def report(v, t: ReducedTree, beta: float, residual_warn: float = 1e-8) -> StabilityReport:
    v = np.asarray(v, dtype=float)
    res = float(np.max(np.abs(mean_field_rhs(v, t, beta))))
    if res > residual_warn:
        warnings.warn(f"stability report at a non-equilibrium point (residual {res:.3g})", RuntimeWarning, stacklevel=2)
    J = jacobian(v, t, beta)
    eigs = eigenvalues(J)
    abscissa = max(z.real for z in eigs)
    discs = gershgorin_discs(J)
    off = ~np.eye(t.n, dtype=bool)
    return StabilityReport(
        point=v,
        beta=beta,
        jacobian=J,
        eigenvalues=eigs,
        spectral_abscissa=abscissa,
        verdict=classify(abscissa),
        gershgorin=discs,
        discs_cover_spectrum=discs_cover(eigs, discs),
        cooperative=bool(np.all(J[off] > 0)),
        irreducible=strongly_connected((np.abs(J) > EDGE_THRESHOLD) & off),
        row_sum_defect=row_sum_defect(J),
    )


def sample_box(t: ReducedTree, count: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = payoff_box(t)
    return lo + (hi - lo) * rng.random((count, t.n))


def scaled_offdiagonal(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Off-diagonal Jacobian entries, each divided by its largest term.

    Signs match :func:`jacobian` but survive when the choice probabilities
    in the products underflow (large ``beta`` times payoff spread).  The
    diagonal is set to ``nan``.
    """
    v = np.asarray(v, dtype=float)
    logits = np.where(t.mask, beta * v[None, :], -np.inf)
    lse = logits.max(axis=1) + np.log(np.exp(logits - logits.max(axis=1, keepdims=True)).sum(axis=1))
    with np.errstate(divide="ignore"):
        log_sigma = logits - lse[:, None]
        log_w = np.where(t.mask, (np.log(t.probs) - lse)[:, None], -np.inf)
    log_w = log_w - np.logaddexp.reduce(log_w, axis=0)
    g = (np.exp(log_w) * t.payoff_matrix).sum(axis=0)
    gap = np.where(t.mask, g[None, :] - t.payoff_matrix, 0.0)
    # terms[w, s, k] = W_ws sigma^k_w (g_s - pi_ws)
    logs = log_w[:, :, None] + log_sigma[:, None, :]
    top = np.where(gap[:, :, None] != 0, logs, -np.inf).max(axis=0)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        terms = np.where(gap[:, :, None] != 0, np.exp(logs - top[None, :, :]), 0.0) * gap[:, :, None]
    out = terms.sum(axis=0) * (beta > 0)
    np.fill_diagonal(out, np.nan)
    return out


def cooperativity_probe(t: ReducedTree, beta: float, count: int = 100, seed: int = 0) -> float:
    """Smallest rescaled off-diagonal entry over random points of the payoff box.

    Positive means every sampled off-diagonal Jacobian entry is positive:
    empirical evidence that the field is cooperative on the box at this
    ``beta``.  Entries are rescaled as in :func:`scaled_offdiagonal`.
    """
    rng = np.random.default_rng(seed)
    if t.n < 2:
        return math.inf
    return float(min(np.nanmin(scaled_offdiagonal(v, t, beta)) for v in sample_box(t, count, rng)))


def unary_shift_threshold(t: ReducedTree, beta: float, z_max: float = 1e3, count: int = 100, seed: int = 0,
                          rel_tol: float = 1e-3) -> float:
    """Bisection estimate of the smallest unary shift making the probe positive.

    Returns ``inf`` if even ``z_max`` does not make every sampled
    off-diagonal entry positive.
    """
    from .tree import shift_unary_payoffs

    def ok(z):
        return cooperativity_probe(shift_unary_payoffs(t, z), beta, count, seed) > 0

    if ok(0.0):
        return 0.0
    if not ok(z_max):
        return math.inf
    lo, hi = 0.0, z_max
    while hi - lo > rel_tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi
