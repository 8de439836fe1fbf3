"""Decision trees, the similarity reduction and the JSON tree format.

A raw tree lists nature's states, each with its own alternatives.  Every
alternative belongs to a similarity class.  Reducing a raw tree merges the
states that offer the same set of classes and averages payoffs, first
uniformly within a class and then over the merged states weighted by their
probabilities.

Probabilities and payoffs keep whatever numeric type they were given in
(``int``, ``float`` or :class:`fractions.Fraction`), so rational inputs such
as ``"1/3"`` are reduced exactly.  Numerical code reads the float arrays
exposed by :class:`ReducedTree`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from numbers import Rational
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

PROB_SUM_TOL = 1e-12
# rationals with larger denominators are written back as floats
_MAX_WRITTEN_DENOMINATOR = 10**9


class TreeValidationError(ValueError):
    """Raised when a tree violates a structural invariant."""


class GenericityWarning(UserWarning):
    """Payoffs that can produce exact valuation ties."""


def parse_number(value: Any, what: str = "value") -> Number:
    """Parse a JSON number or an ``"a/b"`` rational string."""
    if isinstance(value, bool):
        raise TreeValidationError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise TreeValidationError(f"{what}: non-finite number {value!r}")
        return value
    if isinstance(value, str):
        try:
            out = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise TreeValidationError(f"{what}: cannot parse {value!r}") from exc
        return out.numerator if out.denominator == 1 else out
    raise TreeValidationError(f"{what}: expected a number, got {value!r}")


def format_number(x: Number) -> Any:
    """Inverse of :func:`parse_number` for JSON output."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        if x.denominator <= _MAX_WRITTEN_DENOMINATOR:
            return f"{x.numerator}/{x.denominator}"
        return float(x)
    return x


def _is_exact(x: Number) -> bool:
    return isinstance(x, Rational)


def _total(xs: Sequence[Number]) -> Number:
    if all(_is_exact(x) for x in xs):
        return sum(xs, Fraction(0))
    return math.fsum(float(x) for x in xs)


def _simplify(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def _mean(xs: Sequence[Number]) -> Number:
    tot = _total(xs)
    if isinstance(tot, Fraction):
        return _simplify(tot / len(xs))
    return tot / len(xs)


def _check_prob_sum(probs: Sequence[Number]) -> None:
    tot = _total(probs)
    if abs(float(tot) - 1.0) > PROB_SUM_TOL:
        raise TreeValidationError(f"state probabilities sum to {float(tot)!r}, not 1")


@dataclass(frozen=True)
class Alternative:
    id: str
    cls: str
    payoff: Number


@dataclass(frozen=True)
class RawState:
    id: str
    prob: Number
    alternatives: tuple[Alternative, ...]

    @property
    def class_set(self) -> frozenset[str]:
        return frozenset(a.cls for a in self.alternatives)


@dataclass(frozen=True)
class RawTree:
    classes: tuple[str, ...]
    states: tuple[RawState, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "states", tuple(self.states))
        validate_raw(self)

    @cached_property
    def class_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}


def validate_raw(raw: RawTree) -> None:
    if len(set(raw.classes)) != len(raw.classes):
        raise TreeValidationError("duplicate class identifiers")
    if not raw.states:
        raise TreeValidationError("tree has no states")
    known = set(raw.classes)
    hit: set[str] = set()
    state_ids: set[str] = set()
    for st in raw.states:
        if st.id in state_ids:
            raise TreeValidationError(f"duplicate state id {st.id!r}")
        state_ids.add(st.id)
        if not float(st.prob) > 0:
            raise TreeValidationError(f"state {st.id!r}: probability must be > 0")
        if float(st.prob) > 1:
            raise TreeValidationError(f"state {st.id!r}: probability exceeds 1")
        if not st.alternatives:
            raise TreeValidationError(f"state {st.id!r}: empty alternative set")
        seen: set[str] = set()
        for alt in st.alternatives:
            if alt.id in seen:
                raise TreeValidationError(
                    f"state {st.id!r}: duplicate alternative {alt.id!r}"
                )
            seen.add(alt.id)
            if alt.cls not in known:
                raise TreeValidationError(
                    f"state {st.id!r}: alternative {alt.id!r} maps to unknown class {alt.cls!r}"
                )
            hit.add(alt.cls)
    missing = [c for c in raw.classes if c not in hit]
    if missing:
        raise TreeValidationError(f"classes with no alternative: {missing}")
    _check_prob_sum([st.prob for st in raw.states])


@dataclass(frozen=True)
class ReducedState:
    """One node of the reduced tree: a set of classes offered together."""

    classes: frozenset[str]
    prob: Number
    payoffs: Mapping[str, Number]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", frozenset(self.classes))
        object.__setattr__(self, "payoffs", dict(self.payoffs))

    def __hash__(self) -> int:
        return hash((self.classes, self.prob, tuple(sorted(self.payoffs.items()))))


@dataclass(frozen=True)
class ReducedTree:
    """Reduced decision problem over subsets of similarity classes.

    All vectors are indexed by ``classes`` order; matrices over states are
    indexed by ``states`` order.
    """

    classes: tuple[str, ...]
    states: tuple[ReducedState, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "states", tuple(self.states))
        validate_reduced(self)

    @property
    def n(self) -> int:
        return len(self.classes)

    @property
    def m(self) -> int:
        return len(self.states)

    @cached_property
    def class_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean (m, n) incidence of classes in states."""
        out = np.zeros((self.m, self.n), dtype=bool)
        for i, st in enumerate(self.states):
            for c in st.classes:
                out[i, self.class_index[c]] = True
        out.setflags(write=False)
        return out

    @cached_property
    def probs(self) -> np.ndarray:
        out = np.array([float(st.prob) for st in self.states])
        out.setflags(write=False)
        return out

    @cached_property
    def payoff_matrix(self) -> np.ndarray:
        """(m, n) payoffs, zero where a class is not offered."""
        out = np.zeros((self.m, self.n))
        for i, st in enumerate(self.states):
            for c, x in st.payoffs.items():
                out[i, self.class_index[c]] = float(x)
        out.setflags(write=False)
        return out

    @cached_property
    def sizes(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def state_label(self, i: int) -> str:
        return "|".join(c for c in self.classes if c in self.states[i].classes)

    def find_state(self, classes: Sequence[str]) -> int | None:
        key = frozenset(classes)
        for i, st in enumerate(self.states):
            if st.classes == key:
                return i
        return None


def validate_reduced(t: ReducedTree) -> None:
    if len(set(t.classes)) != len(t.classes):
        raise TreeValidationError("duplicate class identifiers")
    if not t.classes:
        raise TreeValidationError("tree has no classes")
    if not t.states:
        raise TreeValidationError("tree has no states")
    known = set(t.classes)
    seen: set[frozenset[str]] = set()
    hit: set[str] = set()
    for st in t.states:
        label = sorted(st.classes)
        if not st.classes:
            raise TreeValidationError("empty class subset in reduced tree")
        if not st.classes <= known:
            raise TreeValidationError(f"state {label}: unknown classes {sorted(st.classes - known)}")
        if st.classes in seen:
            raise TreeValidationError(f"state {label} appears twice")
        seen.add(st.classes)
        if not float(st.prob) > 0:
            raise TreeValidationError(f"state {label}: probability must be > 0")
        if set(st.payoffs) != set(st.classes):
            raise TreeValidationError(f"state {label}: payoffs must cover exactly its classes")
        for c, x in st.payoffs.items():
            if not math.isfinite(float(x)):
                raise TreeValidationError(f"state {label}: non-finite payoff for {c!r}")
        hit |= st.classes
    missing = [c for c in t.classes if c not in hit]
    if missing:
        raise TreeValidationError(f"classes never offered: {missing}")
    _check_prob_sum([st.prob for st in t.states])


def check_genericity(t: ReducedTree) -> list[str]:
    """Warn about payoff ties inside a state; returns the messages."""
    msgs = []
    for i, st in enumerate(t.states):
        vals = sorted(st.payoffs.items(), key=lambda kv: float(kv[1]))
        for (a, x), (b, y) in zip(vals, vals[1:]):
            if float(x) == float(y):
                msgs.append(f"state {t.state_label(i)}: classes {a!r} and {b!r} tie at {float(x)}")
    for msg in msgs:
        warnings.warn(msg, GenericityWarning, stacklevel=2)
    return msgs


def reduce(raw: RawTree) -> ReducedTree:
    """Collapse states offering the same class set and average payoffs."""
    groups: dict[frozenset[str], list[RawState]] = {}
    for st in raw.states:
        groups.setdefault(st.class_set, []).append(st)

    states = []
    for key, members in groups.items():
        p = _simplify(_total([st.prob for st in members]))
        payoffs: dict[str, Number] = {}
        for c in raw.classes:
            if c not in key:
                continue
            terms = []
            for st in members:
                within = _mean([a.payoff for a in st.alternatives if a.cls == c])
                terms.append(st.prob * within)
            tot = _total(terms)
            payoffs[c] = _simplify(tot / p) if isinstance(tot, Fraction) and _is_exact(p) else float(tot) / float(p)
        states.append(ReducedState(key, p, payoffs))
    return ReducedTree(raw.classes, tuple(states))


def shift_unary_payoffs(t: ReducedTree, z: Number) -> ReducedTree:
    """Add ``z`` to the payoff of every single-class state.

    Arithmetic is exact (floats are lifted to rationals), so shifting by
    ``z`` and then ``-z`` restores the original payoffs bit for bit.
    """
    if isinstance(z, float) and not math.isfinite(z):
        raise TreeValidationError("shift must be finite")
    dz = Fraction(z)
    states = []
    for st in t.states:
        if len(st.classes) == 1:
            (c,) = st.classes
            new = _simplify(Fraction(st.payoffs[c]) + dz)
            states.append(ReducedState(st.classes, st.prob, {c: new}))
        else:
            states.append(st)
    return ReducedTree(t.classes, tuple(states))


def shift_all_payoffs(t: ReducedTree, c: Number) -> ReducedTree:
    """Add ``c`` to every payoff (an exact translation)."""
    dc = Fraction(c)
    states = [
        ReducedState(st.classes, st.prob, {k: _simplify(Fraction(x) + dc) for k, x in st.payoffs.items()})
        for st in t.states
    ]
    return ReducedTree(t.classes, tuple(states))


@dataclass(frozen=True)
class SupportProfile:
    has_all_unary: bool
    has_all_binary: bool
    monotone: bool
    uniform_unary: bool

    @property
    def assumption_monotone(self) -> bool:
        """Both clauses of the monotonicity assumption on ``p``."""
        return self.monotone and self.uniform_unary


def support_profile(t: ReducedTree) -> SupportProfile:
    present = {st.classes: float(st.prob) for st in t.states}
    unary = [frozenset([c]) for c in t.classes]
    binary = [frozenset(pair) for pair in combinations(t.classes, 2)]
    monotone = all(
        pa <= pb
        for a, pa in present.items()
        for b, pb in present.items()
        if a < b
    )
    unary_probs = [present[u] for u in unary if u in present]
    return SupportProfile(
        has_all_unary=all(u in present for u in unary),
        has_all_binary=all(b in present for b in binary),
        monotone=monotone,
        uniform_unary=len(set(unary_probs)) <= 1,
    )


def payoff_box(t: ReducedTree) -> tuple[np.ndarray, np.ndarray]:
    """Per-class ``(lo, hi)`` payoff range; contains every image of ``g``."""
    pm = t.payoff_matrix
    lo = np.where(t.mask, pm, np.inf).min(axis=0)
    hi = np.where(t.mask, pm, -np.inf).max(axis=0)
    return lo, hi


# ---------------------------------------------------------------- JSON format


def raw_from_dict(doc: Mapping[str, Any]) -> RawTree:
    try:
        classes = [str(c) for c in doc["classes"]]
        states = []
        for i, st in enumerate(doc["states"]):
            sid = str(st.get("id", f"s{i}"))
            alts = tuple(
                Alternative(
                    str(a["id"]),
                    str(a["class"]),
                    parse_number(a["payoff"], f"state {sid!r} alternative payoff"),
                )
                for a in st["alternatives"]
            )
            states.append(RawState(sid, parse_number(st["prob"], f"state {sid!r} prob"), alts))
    except (KeyError, TypeError) as exc:
        raise TreeValidationError(f"malformed raw tree: missing or bad field {exc}") from exc
    return RawTree(tuple(classes), tuple(states))


def reduced_from_dict(doc: Mapping[str, Any]) -> ReducedTree:
    try:
        classes = [str(c) for c in doc["classes"]]
        states = []
        for i, st in enumerate(doc["states"]):
            what = f"state #{i}"
            payoffs = {str(k): parse_number(v, f"{what} payoff") for k, v in st["payoffs"].items()}
            states.append(
                ReducedState(frozenset(str(c) for c in st["classes"]), parse_number(st["prob"], f"{what} prob"), payoffs)
            )
    except (KeyError, TypeError, AttributeError) as exc:
        raise TreeValidationError(f"malformed reduced tree: missing or bad field {exc}") from exc
    return ReducedTree(tuple(classes), tuple(states))


def tree_from_dict(doc: Mapping[str, Any]) -> RawTree | ReducedTree:
    if not isinstance(doc, Mapping):
        raise TreeValidationError("tree document must be a JSON object")
    if doc.get("reduced", False):
        return reduced_from_dict(doc)
    return raw_from_dict(doc)


def reduced_to_dict(t: ReducedTree) -> dict[str, Any]:
    return {
        "reduced": True,
        "classes": list(t.classes),
        "states": [
            {
                "classes": [c for c in t.classes if c in st.classes],
                "prob": format_number(st.prob),
                "payoffs": {c: format_number(st.payoffs[c]) for c in t.classes if c in st.classes},
            }
            for st in t.states
        ],
    }


def raw_to_dict(raw: RawTree) -> dict[str, Any]:
    return {
        "classes": list(raw.classes),
        "states": [
            {
                "id": st.id,
                "prob": format_number(st.prob),
                "alternatives": [
                    {"id": a.id, "class": a.cls, "payoff": format_number(a.payoff)} for a in st.alternatives
                ],
            }
            for st in raw.states
        ],
    }


def load_tree(path: str | Path) -> RawTree | ReducedTree:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return tree_from_dict(doc)


def load_reduced(path: str | Path) -> ReducedTree:
    tree = load_tree(path)
    return reduce(tree) if isinstance(tree, RawTree) else tree


def dump_tree(tree: RawTree | ReducedTree, path: str | Path) -> None:
    doc = reduced_to_dict(tree) if isinstance(tree, ReducedTree) else raw_to_dict(tree)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
