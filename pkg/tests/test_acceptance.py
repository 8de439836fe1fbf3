"""Reproduction checks, one test per check.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are also repeated in
the pytest terminal summary.  Run directly (``python tests/test_acceptance.py``)
to get just the table.
"""

import sys

import pytest

from cpal import acceptance

RESULTS: dict[int, str] = {}


@pytest.mark.parametrize("number", range(1, len(acceptance.CHECKS) + 1))
def test_check(number):
    (check,) = acceptance.run_all(only=[number])
    RESULTS[number] = check.line()
    print(check.line())
    assert check.passed, check.line()


def test_corrupted_tree_is_caught():
    # z2=5 keeps a single strict pure equilibrium, but at the wrong place
    overrides = acceptance.mutated_trees("z2=5")
    names = [fn.__name__ for fn in acceptance.CHECKS]
    only = [names.index(k) + 1 for k in overrides]
    checks = {c.number: c for c in acceptance.run_all(overrides, only=only)}
    assert not checks[names.index("check_unique_pure") + 1].passed


if __name__ == "__main__":
    checks = acceptance.run_all(echo=print)
    sys.exit(0 if all(c.passed for c in checks) else 1)
