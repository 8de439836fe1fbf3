import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpal import trees
from cpal.dynamics import g_map, mean_field_rhs
from cpal.equilibrium import (
    ConstructionError,
    NoMixedEquilibrium,
    SolverError,
    beta_sweep,
    beta_zero_equilibrium,
    construct_strict_pure_VE,
    dedupe,
    enumerate_pure_VE,
    find_all,
    geometric_betas,
    indifference_groups,
    make_equilibrium,
    mixed_limit_solve,
    multistart_points,
    reduce_1d,
    solve_fixed_point,
    tie_tolerance,
)
from cpal.tree import ReducedState, ReducedTree, shift_all_payoffs, shift_unary_payoffs
from oracles import pure_ve_bruteforce, two_class_mixed_closed_form
from strategies import reduced_trees


def _closed_form(t):
    f = reduce_1d(t, 1.0)
    return two_class_mixed_closed_form(f.p_ii, f.p_jj, f.p_ij, f.u_ii, f.u_jj, f.u_ij, f.u_ji)


# ------------------------------------------------------------------ solver


@pytest.mark.parametrize("beta", [50.0, 1e3, 1e4])
def test_multiplicity_tree_has_three_equilibria(beta):
    eqs = find_all(trees.multiplicity_tree(), beta)
    assert len(eqs) == 3
    labels = sorted(e.classification for e in eqs)
    assert labels == ["mixed", "strict-pure", "strict-pure"]
    assert all(e.residual < 1e-10 for e in eqs)


def test_unique_trees_have_one_equilibrium():
    mixed = find_all(trees.unique_mixed_tree(), 50.0)
    pure = find_all(trees.unique_pure_tree(), 50.0)
    assert len(mixed) == 1 and mixed[0].classification == "mixed"
    assert len(pure) == 1 and pure[0].is_strict_pure
    assert np.allclose(pure[0].v_star, [1.5, 0.0], atol=1e-9)


def test_pure_equilibrium_values_of_multiplicity_tree():
    eqs = find_all(trees.multiplicity_tree(), 1e3)
    pure = sorted(tuple(np.round(e.v_star, 6)) for e in eqs if e.is_strict_pure)
    assert pure == [(0.0, 0.5), (1.0, 0.0)]


@given(reduced_trees(max_classes=3), st.integers(0, 2**16))
def test_solver_output_is_a_fixed_point(t, seed):
    rng = np.random.default_rng(seed)
    beta = float(rng.uniform(0.1, 20))
    v0 = rng.uniform(-10, 10, t.n)
    eq = solve_fixed_point(v0, t, beta)
    assert np.max(np.abs(g_map(eq.v_star, t, beta) - eq.v_star)) < 1e-9


def test_beta_zero_is_unique_and_closed_form():
    t = trees.multiplicity_tree()
    eqs = find_all(t, 0.0)
    assert len(eqs) == 1
    assert np.allclose(eqs[0].v_star, beta_zero_equilibrium(t), atol=1e-12)
    assert np.allclose(beta_zero_equilibrium(t), [2 / 3, 1 / 3])


@settings(max_examples=15)
@given(st.integers(0, 2**16), st.floats(-50, 50))
def test_common_payoff_shift_translates_equilibria(seed, c):
    t = trees.random_full_support_tree(np.random.default_rng(seed), 2)
    a = find_all(t, 20.0, m=16)
    b = find_all(shift_all_payoffs(t, c), 20.0, m=16)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.max(np.abs(x.v_star + c - y.v_star)) < 1e-9


def test_solver_refuses_infinite_beta():
    with pytest.raises(ValueError):
        solve_fixed_point(np.zeros(2), trees.multiplicity_tree(), math.inf)


def test_solver_error_carries_best_iterate():
    t = trees.multiplicity_tree()
    with pytest.raises(SolverError) as info:
        solve_fixed_point(np.array([0.9, 0.1]), t, 1e3, tol=0.0, max_iter=1)
    err = info.value
    assert err.best.shape == (2,) and math.isfinite(err.residual)


def test_dedupe_merges_and_sorts():
    t = trees.multiplicity_tree()
    a = make_equilibrium([1.0, 0.0], t, 50.0)
    b = make_equilibrium([1.0 + 1e-9, 0.0], t, 50.0)
    c = make_equilibrium([0.0, 0.5], t, 50.0)
    out = dedupe([a, b, c])
    assert [tuple(e.v_star) for e in out] == [(0.0, 0.5), (1.0, 0.0)]


def test_multistart_covers_box_vertices_and_centre():
    t = trees.unique_mixed_tree()
    pts = multistart_points(t, m=8, seed=1)
    assert {tuple(p) for p in pts[:4]} == {(2, 1), (2, 3), (3, 1), (3, 3)}
    assert tuple(pts[4]) == (2.5, 2.0)
    assert np.array_equal(pts, multistart_points(t, m=8, seed=1))


def test_find_all_with_threads_matches_serial():
    t = trees.multiplicity_tree()
    a = find_all(t, 50.0, m=16)
    b = find_all(t, 50.0, m=16, workers=4)
    assert [tuple(e.v_star) for e in a] == [tuple(e.v_star) for e in b]


# ----------------------------------------------------------- ties, policy


def test_indifference_groups_chain_within_tolerance():
    groups = indifference_groups(np.array([1.0, 1.0 + 5e-7, 3.0, 1.0 + 9e-7]), 1e-6)
    assert sorted(map(sorted, groups)) == [[0, 1, 3], [2]]


def test_tie_tolerance_follows_sensitivity():
    t = trees.multiplicity_tree()
    assert tie_tolerance(t, 1e3) == pytest.approx(math.log(1e6) / 1e3)
    assert tie_tolerance(t, math.inf) == pytest.approx(2e-6)


def test_mixed_limit_policy_splits_the_binary_state():
    t = trees.unique_mixed_tree()
    eq = find_all(t, 1e4)[0]
    both = t.find_state(["L", "R"])
    assert eq.classification == "mixed"
    assert eq.limit_policy[both].tolist() == [0.5, 0.5]
    d = eq.to_dict(t)
    assert d["indifference_groups"] == [["L", "R"]]


# ------------------------------------------------------------ mixed limit


def test_mixed_limit_of_unique_mixed_tree():
    m = mixed_limit_solve(trees.unique_mixed_tree())
    # L: (3 + 2q)/(1 + q) and R: (4 - q)/(2 - q) meet at q = sqrt(3) - 1
    assert m.q == pytest.approx(math.sqrt(3) - 1, abs=1e-12)
    assert m.valuation == pytest.approx(2 + 1 / math.sqrt(3), abs=1e-12)


def test_symmetric_mixed_limit_is_one_half():
    third = 1 / 3
    t = ReducedTree(
        ("a", "b"),
        (ReducedState({"a", "b"}, third, {"a": 1, "b": 1}), ReducedState({"a"}, third, {"a": 3}),
         ReducedState({"b"}, 1 - 2 * third, {"b": 3})),
    )
    assert mixed_limit_solve(t).q == pytest.approx(0.5, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_mixed_limit_matches_quadratic(seed):
    t = trees.random_two_class_tree(np.random.default_rng(seed))
    roots = _closed_form(t)
    try:
        m = mixed_limit_solve(t)
    except NoMixedEquilibrium:
        # no sign change on [0, 1]: the crossings inside come in pairs (or there are none)
        assert len([r for r in roots if 1e-9 < r < 1 - 1e-9]) in (0, 2)
        return
    assert min(abs(m.q - r) for r in roots) < 1e-9


def test_mixed_limit_needs_a_binary_state():
    t = ReducedTree(("a", "b"), (ReducedState({"a"}, 0.5, {"a": 1}), ReducedState({"b"}, 0.5, {"b": 2})))
    with pytest.raises(NoMixedEquilibrium):
        mixed_limit_solve(t)


def test_mixed_limit_absent_for_unique_pure_tree():
    with pytest.raises(NoMixedEquilibrium):
        mixed_limit_solve(trees.unique_pure_tree())


# ------------------------------------------------------------ pure equilibria


@given(reduced_trees(max_classes=4))
def test_enumeration_matches_bruteforce(t):
    strict = {tuple(round(float(x), 9) for x in ve.valuations) for ve in enumerate_pure_VE(t) if ve.strict}
    brute = pure_ve_bruteforce(t)
    # brute force keeps only strict ones, enumeration may add tied extras
    assert brute <= {tuple(round(float(x), 9) for x in ve.valuations) for ve in enumerate_pure_VE(t)}
    assert strict <= brute


def test_enumeration_on_illustrations():
    assert len(enumerate_pure_VE(trees.multiplicity_tree())) == 2
    assert len(enumerate_pure_VE(trees.unique_pure_tree())) == 1
    assert enumerate_pure_VE(trees.unique_mixed_tree()) == []


def test_enumeration_refuses_many_classes():
    t = trees.random_sparse_tree(np.random.default_rng(0), 11, n_states=11)
    with pytest.raises(ValueError, match="refused"):
        enumerate_pure_VE(t)


@settings(max_examples=25)
@given(st.integers(0, 2**16), st.integers(2, 4))
def test_construction_lands_in_enumeration(seed, n):
    t = trees.random_full_support_tree(np.random.default_rng(seed), n, z=-100.0)
    ve = construct_strict_pure_VE(t)
    assert ve.strict
    assert ve in enumerate_pure_VE(t)


def test_construction_fails_with_high_unary_payoffs():
    t = trees.random_full_support_tree(np.random.default_rng(4), 3, z=100.0)
    with pytest.raises(ConstructionError):
        construct_strict_pure_VE(t)


@settings(max_examples=10)
@given(st.integers(0, 2**16))
def test_pure_ve_are_large_beta_equilibria(seed):
    t = trees.random_full_support_tree(np.random.default_rng(seed), 3, z=-100.0)
    found = find_all(t, 1e3, m=32)
    for ve in enumerate_pure_VE(t):
        if ve.strict:
            assert min(np.max(np.abs(e.v_star - ve.valuations)) for e in found) < 1e-3


# ---------------------------------------------------------- continuation


def test_geometric_schedule_ends_on_stop():
    b = geometric_betas(1.0, 10.0, 2.0)
    assert b == [1.0, 2.0, 4.0, 8.0, 10.0]


def test_sweep_reaches_the_mixed_limit():
    t = trees.unique_mixed_tree()
    lim = mixed_limit_solve(t)
    path = beta_sweep(t, geometric_betas(1.0, 1e4, 1.5), [beta_zero_equilibrium(t)])[0]
    assert path.termination == "completed"
    assert np.max(np.abs(path.final.v_star - lim.valuation)) < 1e-3


def test_sweep_from_a_pure_point_stays_put():
    t = trees.multiplicity_tree()
    path = beta_sweep(t, geometric_betas(50.0, 1e4, 2.0), [np.array([1.0, 0.0])])[0]
    assert path.termination == "completed"
    assert np.allclose(path.final.v_star, [1.0, 0.0], atol=1e-9)
    assert path.limit_label == "strict-pure"


def test_sweep_rejects_decreasing_schedule():
    with pytest.raises(ValueError):
        beta_sweep(trees.multiplicity_tree(), [2.0, 1.0], [np.zeros(2)])


def test_sweep_flags_a_jump():
    t = trees.multiplicity_tree()
    # small steps, then a big gap in the schedule lands far away
    betas = [1.0, 1.05, 1.1, 1.15, 1.2, 1e3]
    path = beta_sweep(t, betas, [beta_zero_equilibrium(t)])[0]
    assert path.termination == "jump"
    assert "trailing median" in path.error
    assert path.betas == betas[:-1]


# --------------------------------------------------------- one-dim field


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 50))
def test_one_dim_derivative_matches_finite_difference(seed, beta):
    f = reduce_1d(trees.random_two_class_tree(np.random.default_rng(seed)), beta)
    lo, hi = f.bounds
    for x in np.linspace(lo, hi, 7):
        h = 1e-6
        fd = (f.f(x + h) - f.f(x - h)) / (2 * h)
        assert fd == pytest.approx(f.fprime(x), rel=1e-5, abs=1e-5)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 30))
def test_one_dim_roots_lift_to_equilibria(seed, beta):
    t = trees.random_two_class_tree(np.random.default_rng(seed))
    f = reduce_1d(t, beta)
    roots = f.roots()
    assert roots
    for x in roots:
        v = f.lift(x)
        assert np.max(np.abs(mean_field_rhs(v, t, beta))) < 1e-9
    found = find_all(t, beta, m=32)
    assert len(found) == len(roots)


def test_one_dim_stability_alternates():
    f = reduce_1d(trees.multiplicity_tree(), 50.0)
    roots = f.roots()
    assert [f.stability(x) for x in roots] == ["stable", "unstable", "stable"]


def test_one_dim_needs_the_three_state_shape():
    with pytest.raises(ValueError):
        reduce_1d(trees.random_full_support_tree(np.random.default_rng(0), 3), 1.0)


def test_unary_shift_changes_count():
    low = shift_unary_payoffs(trees.multiplicity_tree(), 0)
    assert len(find_all(low, 50.0)) == 3
    assert len(find_all(trees.two_class_tree(3, 3), 50.0)) == 1
