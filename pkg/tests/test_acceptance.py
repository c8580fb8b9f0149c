"""The twelve acceptance criteria at their full bounds and time limits.

One pass/fail line per criterion is printed in the terminal summary.
"""

import pytest

from artifact.acceptance import CRITERIA

LINES = {}


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{c.number}" for c in CRITERIA])
def test_criterion(criterion):
    res = criterion()
    LINES[criterion.number] = res.line()
    print(res.line())
    assert res.passed, res.line() + "\nfirst failures: " + repr(res.failures[:3])
