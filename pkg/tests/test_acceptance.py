"""All acceptance criteria at their stated tolerances and runtime limits.

One PASS/FAIL line per criterion is printed (visible with ``pytest -s`` and
in the terminal summary).
"""

import pytest

from freelyap.acceptance import CRITERIA, run_criterion

_LINES = []


@pytest.mark.parametrize("ident", list(CRITERIA))
def test_criterion(ident, request):
    if CRITERIA[ident][3]:
        request.applymarker(pytest.mark.slow)
    res = run_criterion(ident, seed=0)
    line = res.line()
    _LINES.append(line)
    print(line)
    assert res.passed, line

