"""Built-in trees (the worked illustrations) and random tree generators."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from .tree import Alternative, RawState, RawTree, ReducedState, ReducedTree, shift_unary_payoffs

THIRD = Fraction(1, 3)


def fruit_raw_tree() -> RawTree:
    """Three equiprobable fruit choices; lemons and limes look alike."""
    return RawTree(
        ("apples", "citrus"),
        (
            RawState("psi1", THIRD, (Alternative("apples", "apples", 3), Alternative("limes", "citrus", 2))),
            RawState("psi2", THIRD, (Alternative("lemons", "citrus", 3), Alternative("limes", "citrus", 1))),
            RawState("psi3", THIRD, (Alternative("lemons", "citrus", 4), Alternative("apples", "apples", 1))),
        ),
    )


def two_class_tree(z2=0, z3=0) -> ReducedTree:
    """Binary node L=2 / R=1 plus unary nodes paying ``z2`` (L) and ``z3`` (R).

    Each node has probability 1/3.  ``z2=z3=0`` has three equilibria,
    ``z2=z3=3`` a unique mixed one and ``z2=1, z3=0`` a unique pure one.
    """
    return ReducedTree(
        ("L", "R"),
        (
            ReducedState({"L", "R"}, THIRD, {"L": 2, "R": 1}),
            ReducedState({"L"}, THIRD, {"L": z2}),
            ReducedState({"R"}, THIRD, {"R": z3}),
        ),
    )


def multiplicity_tree() -> ReducedTree:
    return two_class_tree(0, 0)


def unique_mixed_tree() -> ReducedTree:
    return two_class_tree(3, 3)


def unique_pure_tree() -> ReducedTree:
    return two_class_tree(1, 0)


def class_names(n: int) -> tuple[str, ...]:
    return tuple(f"c{i}" for i in range(n))


def all_subsets(classes) -> list[frozenset[str]]:
    return [frozenset(s) for r in range(1, len(classes) + 1) for s in combinations(classes, r)]


def full_support_tree(payoff_rng: np.random.Generator, n: int, probs=None, low=0.0, high=1.0) -> ReducedTree:
    """Tree over every non-empty subset of ``n`` classes.

    ``probs`` defaults to uniform.  Payoffs are uniform on ``[low, high)``.
    """
    classes = class_names(n)
    subsets = all_subsets(classes)
    if probs is None:
        probs = [Fraction(1, len(subsets))] * len(subsets)
    states = [
        ReducedState(s, p, {c: float(payoff_rng.uniform(low, high)) for c in classes if c in s})
        for s, p in zip(subsets, probs)
    ]
    return ReducedTree(classes, tuple(states))


def random_full_support_tree(rng: np.random.Generator, n: int, z: float = 0.0, uniform_p: bool = False) -> ReducedTree:
    """Random probabilities bounded away from zero, payoffs in [0, 1), unary shift ``z``."""
    k = 2**n - 1
    if uniform_p:
        probs = None
    else:
        w = rng.uniform(0.5, 1.5, size=k)
        probs = list(w / w.sum())
        probs[-1] = 1.0 - float(np.sum(probs[:-1]))
    t = full_support_tree(rng, n, probs)
    return shift_unary_payoffs(t, z) if z else t


def random_two_class_tree(rng: np.random.Generator, payoff_scale: float = 1.0) -> ReducedTree:
    """Unary/unary/binary two-class tree with random probabilities and payoffs."""
    w = rng.uniform(0.2, 1.0, size=3)
    p = w / w.sum()
    u = rng.uniform(-payoff_scale, payoff_scale, size=4)
    return ReducedTree(
        ("i", "j"),
        (
            ReducedState({"i"}, float(p[0]), {"i": float(u[0])}),
            ReducedState({"j"}, float(p[1]), {"j": float(u[1])}),
            ReducedState({"i", "j"}, 1.0 - float(p[0]) - float(p[1]), {"i": float(u[2]), "j": float(u[3])}),
        ),
    )


def random_sparse_tree(rng: np.random.Generator, n: int, n_states: int | None = None) -> ReducedTree:
    """Random subset family covering every class, random probs and payoffs."""
    classes = class_names(n)
    subsets = all_subsets(classes)
    if n_states is None:
        n_states = int(rng.integers(n, len(subsets) + 1))
    while True:
        idx = rng.choice(len(subsets), size=min(n_states, len(subsets)), replace=False)
        chosen = [subsets[i] for i in sorted(idx)]
        if set().union(*chosen) == set(classes):
            break
    w = rng.uniform(0.2, 1.0, size=len(chosen))
    probs = list(w / w.sum())
    probs[-1] = 1.0 - float(np.sum(probs[:-1]))
    states = [
        ReducedState(s, p, {c: float(rng.uniform(-2, 2)) for c in classes if c in s}) for s, p in zip(chosen, probs)
    ]
    return ReducedTree(classes, tuple(states))
