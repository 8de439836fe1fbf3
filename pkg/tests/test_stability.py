import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpal import trees
from cpal.dynamics import mean_field_rhs
from cpal.equilibrium import find_all
from cpal.stability import (
    classify,
    cooperativity_probe,
    discs_cover,
    gershgorin_discs,
    jacobian,
    report,
    row_sum_defect,
    strongly_connected,
    unary_shift_threshold,
)
from cpal.tree import payoff_box
from oracles import centered_jacobian
from strategies import reduced_trees


@given(reduced_trees(), st.data(), st.floats(0, 30))
def test_jacobian_matches_finite_differences(t, data, beta):
    lo, hi = payoff_box(t)
    v = np.array([data.draw(st.floats(float(a), float(b))) for a, b in zip(lo, hi)])
    J = jacobian(v, t, beta)
    Jfd = centered_jacobian(lambda x: mean_field_rhs(x, t, beta), v)
    assert np.max(np.abs(J - Jfd)) <= 1e-5 * max(1.0, np.max(np.abs(J)))


@given(reduced_trees(), st.data(), st.floats(0, 1e3))
def test_rows_sum_to_minus_one(t, data, beta):
    v = np.array(data.draw(st.lists(st.floats(-20, 20), min_size=t.n, max_size=t.n)))
    J = jacobian(v, t, beta)
    assert row_sum_defect(J) < 1e-9 * max(1.0, np.abs(J).max())


def test_jacobian_is_minus_identity_without_sensitivity():
    J = jacobian(np.array([0.3, 0.1]), trees.multiplicity_tree(), 0.0)
    assert np.array_equal(J, -np.eye(2))


def test_jacobian_needs_finite_beta():
    with pytest.raises(ValueError):
        jacobian(np.zeros(2), trees.multiplicity_tree(), math.inf)


def test_two_class_spectrum_has_minus_one():
    t = trees.unique_mixed_tree()
    rep = report(find_all(t, 50.0)[0].v_star, t, 50.0)
    assert any(abs(z + 1) < 1e-10 for z in rep.eigenvalues)


def test_multiplicity_tree_verdicts():
    t = trees.multiplicity_tree()
    verdicts = [report(e.v_star, t, 50.0).verdict for e in find_all(t, 50.0)]
    # sorted lexicographically: (0, 0.5), the mixed point, (1, 0)
    assert verdicts == ["stable", "unstable", "stable"]


def test_report_warns_away_from_equilibrium():
    with pytest.warns(RuntimeWarning, match="non-equilibrium"):
        report(np.array([0.2, 0.9]), trees.multiplicity_tree(), 5.0)


def test_report_json_shape():
    t = trees.unique_pure_tree()
    d = report(np.array([1.5, 0.0]), t, 50.0).to_dict()
    assert set(d) == {"eigenvalues", "spectral_abscissa", "verdict", "gershgorin", "cooperative", "irreducible",
                      "row_sum_defect"}
    assert all(len(z) == 2 for z in d["eigenvalues"])
    assert set(d["gershgorin"][0]) == {"center", "radius"}


def test_classify_band():
    assert classify(-1e-3) == "stable"
    assert classify(1e-3) == "unstable"
    assert classify(1e-10) == "marginal"


@given(st.integers(2, 5).flatmap(lambda n: st.lists(st.floats(-5, 5), min_size=n * n, max_size=n * n)))
def test_gershgorin_always_covers(vals):
    n = int(round(math.sqrt(len(vals))))
    a = np.array(vals).reshape(n, n)
    from cpal.linalg import eigenvalues

    assert discs_cover(eigenvalues(a), gershgorin_discs(a))


def test_discs_cover_detects_escape():
    assert not discs_cover([5.0], [(0.0, 1.0)])


def test_strong_connectivity():
    ring = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=bool)
    chain = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool)
    assert strongly_connected(ring)
    assert not strongly_connected(chain)


def test_large_unary_payoffs_make_the_field_cooperative(rng):
    t = trees.random_full_support_tree(rng, 3, z=100.0)
    assert cooperativity_probe(t, 5.0, count=50) > 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = report(payoff_box(t)[1], t, 5.0)
    assert rep.cooperative and rep.irreducible
    assert rep.spectral_abscissa == pytest.approx(-1.0, abs=1e-9)


def test_negative_unary_payoffs_break_cooperativity(rng):
    t = trees.random_full_support_tree(rng, 3, z=-100.0)
    assert cooperativity_probe(t, 5.0, count=50) < 0


def test_shift_threshold_is_finite_and_sufficient():
    t = trees.multiplicity_tree()
    z = unary_shift_threshold(t, 5.0, count=40)
    assert 0 < z < math.inf
    from cpal.tree import shift_unary_payoffs

    assert cooperativity_probe(shift_unary_payoffs(t, z), 5.0, count=40) > 0


@given(reduced_trees(min_classes=2), st.data(), st.floats(0.01, 30))
def test_scaled_offdiagonal_keeps_signs(t, data, beta):
    from cpal.stability import scaled_offdiagonal

    lo, hi = payoff_box(t)
    v = np.array([data.draw(st.floats(float(a), float(b))) for a, b in zip(lo, hi)])
    J = jacobian(v, t, beta)
    S = scaled_offdiagonal(v, t, beta)
    off = ~np.eye(t.n, dtype=bool)
    big = np.abs(J[off]) > 1e-9 * max(1.0, np.abs(J).max())
    assert np.array_equal(np.sign(J[off])[big], np.sign(S[off])[big])
