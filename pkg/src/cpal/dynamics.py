"""Logit choice, the stochastic learning process and its mean-field ODE."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .tree import RawTree, ReducedTree, reduce

INF_BETA = math.inf


class IntegrationError(ArithmeticError):
    pass


def _masked_logits(v: np.ndarray, t: ReducedTree, beta: float) -> np.ndarray:
    scaled = beta * np.asarray(v, dtype=float) if beta != 0 else np.zeros(t.n)
    return np.where(t.mask, scaled[None, :], -np.inf)


def _log_partition(logits: np.ndarray) -> np.ndarray:
    top = logits.max(axis=1)
    return top + np.log(np.exp(logits - top[:, None]).sum(axis=1))


def policy(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Choice probabilities as an (m, n) matrix; rows are states.

    Entries for classes not offered in a state are zero.  ``beta=inf`` gives
    the limit policy: uniform over the exact argmax classes.
    """
    v = np.asarray(v, dtype=float)
    if math.isinf(beta):
        vals = np.where(t.mask, v[None, :], -np.inf)
        best = vals == vals.max(axis=1, keepdims=True)
        return best / best.sum(axis=1, keepdims=True)
    logits = _masked_logits(v, t, beta)
    w = np.exp(logits - logits.max(axis=1, keepdims=True))
    return w / w.sum(axis=1, keepdims=True)


def class_weights(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Normalised weights ``p(w) sigma^s_w / D_s`` as an (m, n) matrix.

    Computed in the log domain so that a class whose choice probabilities all
    underflow still gets a well defined distribution over its states.
    """
    logits = _masked_logits(v, t, beta)
    logw = np.log(t.probs) - _log_partition(logits)
    a = np.where(t.mask, logw[:, None], -np.inf)
    a = np.exp(a - a.max(axis=0, keepdims=True))
    return a / a.sum(axis=0, keepdims=True)


def g_map(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Expected payoff of each class under the logit policy at ``v``."""
    w = class_weights(v, t, beta)
    return (w * t.payoff_matrix).sum(axis=0)


def mean_field_rhs(v, t: ReducedTree, beta: float) -> np.ndarray:
    return g_map(v, t, beta) - np.asarray(v, dtype=float)


def choice_mass(v, t: ReducedTree, beta: float) -> np.ndarray:
    """Per-class probability of being chosen in one round, ``D_s``."""
    return (t.probs[:, None] * policy(v, t, beta)).sum(axis=0)


# ------------------------------------------------------------ discrete process

StepRule = Literal["harmonic", "constant", "power"]


@dataclass(frozen=True)
class SimConfig:
    beta: float
    horizon: int
    step_rule: StepRule = "harmonic"
    alpha: float = 0.1
    gamma: float = 1.0
    seed: int = 0
    record_every: int = 1
    mode: Literal["reduced", "raw"] = "reduced"

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be finite and >= 0")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.step_rule == "constant" and not 0 < self.alpha < 1:
            raise ValueError("constant step size must lie in (0, 1)")
        if self.step_rule == "power" and not 0.5 < self.gamma <= 1:
            raise ValueError("power exponent must lie in (0.5, 1]")
        if self.step_rule not in ("harmonic", "constant", "power"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.mode not in ("reduced", "raw"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def step_size(self, k: int) -> float:
        if self.step_rule == "harmonic":
            return 1.0 / (k + 1)
        if self.step_rule == "constant":
            return self.alpha
        return (k + 1.0) ** (-self.gamma)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for trajectory ``index`` of a run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True)
class Event:
    k: int
    omega: str
    chosen: str
    payoff: float
    alpha: float


@dataclass
class Trajectory:
    classes: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray
    events: list[Event] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"v_{c}" for c in self.classes])
            for t, row in zip(self.times, self.values):
                w.writerow([_fmt(t)] + [_fmt(x) for x in row])

    def events_to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "omega", "chosen", "payoff", "alpha"])
            for e in self.events:
                w.writerow([e.k, e.omega, e.chosen, _fmt(e.payoff), _fmt(e.alpha)])


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


class _Sampler:
    """Vectorised one-step kernel shared by single runs and batches.

    Each step consumes three uniforms per trajectory: nature's draw, the
    class draw and (raw mode only) the alternative draw.
    """

    def __init__(self, tree: ReducedTree | RawTree, mode: str):
        if mode == "raw":
            if not isinstance(tree, RawTree):
                raise TypeError("raw mode needs the raw tree")
            self.raw = tree
            self.tree = reduce(tree)
        else:
            self.raw = None
            self.tree = tree if isinstance(tree, ReducedTree) else reduce(tree)
        t = self.tree
        self.cum_p = np.cumsum(t.probs)
        if self.raw is not None:
            raw = self.raw
            self.cum_f = np.cumsum([float(s.prob) for s in raw.states])
            self.psi_to_omega = np.array([t.find_state(s.class_set) for s in raw.states])
            per = [[[float(a.payoff) for a in s.alternatives if a.cls == c] for c in t.classes] for s in raw.states]
            width = max(len(x) for row in per for x in row) or 1
            self.counts = np.array([[len(x) for x in row] for row in per])
            self.alt_payoffs = np.zeros((len(per), t.n, width))
            for i, row in enumerate(per):
                for j, xs in enumerate(row):
                    self.alt_payoffs[i, j, : len(xs)] = xs

    @staticmethod
    def _pick(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(cum, u * cum[-1], side="right")
        return np.minimum(idx, len(cum) - 1)

    def advance(self, V: np.ndarray, alpha: float, beta: float, U: np.ndarray):
        """Apply one update to every row of ``V`` (modified in place)."""
        t = self.tree
        rows = np.arange(V.shape[0])
        if self.raw is None:
            omega = self._pick(self.cum_p, U[:, 0])
        else:
            psi = self._pick(self.cum_f, U[:, 0])
            omega = self.psi_to_omega[psi]
        mask = t.mask[omega]
        logits = np.where(mask, beta * V if beta != 0 else 0.0, -np.inf)
        w = np.exp(logits - logits.max(axis=1, keepdims=True))
        cum = np.cumsum(w, axis=1)
        above = cum > (U[:, 1] * cum[:, -1])[:, None]
        s = above.argmax(axis=1)
        # u * total rounding up to total: fall back to the last class with weight
        none = ~above.any(axis=1)
        if none.any():
            s[none] = (t.n - 1) - (w[none, ::-1] > 0).argmax(axis=1)
        if self.raw is None:
            payoff = t.payoff_matrix[omega, s]
        else:
            cnt = self.counts[psi, s]
            j = np.minimum((U[:, 2] * cnt).astype(int), cnt - 1)
            payoff = self.alt_payoffs[psi, s, j]
        V[rows, s] = (1.0 - alpha) * V[rows, s] + alpha * payoff
        return omega, s, payoff


def step(v, k: int, cfg: SimConfig, t: ReducedTree | RawTree, rng: np.random.Generator):
    """One round of choice and update.  Returns ``(new_v, event)``."""
    sampler = _Sampler(t, cfg.mode)
    V = np.array(v, dtype=float, ndmin=2).copy()
    alpha = cfg.step_size(k)
    omega, s, payoff = sampler.advance(V, alpha, cfg.beta, rng.random((1, 3)))
    tree = sampler.tree
    ev = Event(k, tree.state_label(int(omega[0])), tree.classes[int(s[0])], float(payoff[0]), alpha)
    return V[0], ev


def one_step_increments(v, k: int, cfg: SimConfig, t: ReducedTree | RawTree, draws: int,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Independent one-step increments from the same state ``v``.

    Returns ``(increments, chosen)`` with shapes ``(draws, n)`` and ``(draws,)``.
    """
    sampler = _Sampler(t, cfg.mode)
    v = np.asarray(v, dtype=float)
    V = np.tile(v, (draws, 1))
    _, s, _ = sampler.advance(V, cfg.step_size(k), cfg.beta, rng.random((draws, 3)))
    return V - v, s


_CHUNK = 8192


def simulate_batch(v0, cfg: SimConfig, t: ReducedTree | RawTree, runs: int | Sequence[int]) -> np.ndarray:
    """Terminal valuations of several independent runs, shape ``(runs, n)``.

    Run ``i`` uses the stream ``(cfg.seed, i)`` and reproduces
    ``simulate(..., index=i).final`` exactly.
    """
    idx = list(range(runs)) if isinstance(runs, int) else list(runs)
    sampler = _Sampler(t, cfg.mode)
    V = np.tile(np.asarray(v0, dtype=float), (len(idx), 1))
    gens = [stream(cfg.seed, i) for i in idx]
    k = 0
    while k < cfg.horizon:
        size = min(_CHUNK, cfg.horizon - k)
        U = np.stack([g.random((size, 3)) for g in gens], axis=1)
        for j in range(size):
            sampler.advance(V, cfg.step_size(k), cfg.beta, U[j])
            k += 1
    return V


def simulate(v0, cfg: SimConfig, t: ReducedTree | RawTree, index: int = 0) -> Trajectory:
    """Run the learning process for ``cfg.horizon`` rounds.

    Snapshots are kept at every ``record_every``-th round (plus the start and
    the end); the event log is thinned with the same stride.
    """
    sampler = _Sampler(t, cfg.mode)
    tree = sampler.tree
    gen = stream(cfg.seed, index)
    V = np.array(v0, dtype=float, ndmin=2).copy()
    times, snaps, events = [0], [V[0].copy()], []
    k = 0
    while k < cfg.horizon:
        size = min(_CHUNK, cfg.horizon - k)
        U = gen.random((size, 3))
        for j in range(size):
            alpha = cfg.step_size(k)
            omega, s, payoff = sampler.advance(V, alpha, cfg.beta, U[j : j + 1])
            k += 1
            if k % cfg.record_every == 0 or k == cfg.horizon:
                times.append(k)
                snaps.append(V[0].copy())
            if (k - 1) % cfg.record_every == 0:
                events.append(
                    Event(k - 1, tree.state_label(int(omega[0])), tree.classes[int(s[0])], float(payoff[0]), alpha)
                )
    return Trajectory(tree.classes, np.array(times), np.array(snaps), events)


# ------------------------------------------------------------------ mean field


def rk4_step(fun, y: np.ndarray, h: float) -> np.ndarray:
    k1 = fun(y)
    k2 = fun(y + 0.5 * h * k1)
    k3 = fun(y + 0.5 * h * k2)
    k4 = fun(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(v0, t: ReducedTree, beta: float, t_end: float, h: float = 0.01) -> Trajectory:
    """Fixed-step RK4 for ``v' = g(v) - v``; the last step is shortened to land on ``t_end``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    if not t_end >= 0:
        raise ValueError("t_end must be >= 0")
    y = np.asarray(v0, dtype=float).copy()
    fun = lambda x: mean_field_rhs(x, t, beta)  # noqa: E731
    n_full = int(math.floor(t_end / h + 1e-9))
    times, snaps = [0.0], [y.copy()]
    for i in range(n_full):
        y = rk4_step(fun, y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={(i + 1) * h}")
        times.append((i + 1) * h)
        snaps.append(y.copy())
    rest = t_end - n_full * h
    if rest > 1e-12 * max(1.0, t_end):
        y = rk4_step(fun, y, rest)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={t_end}")
        times.append(t_end)
        snaps.append(y.copy())
    elif times[-1] != t_end and n_full:
        times[-1] = t_end
    return Trajectory(t.classes, np.array(times), np.array(snaps))
