"""Acceptance suite: one test per criterion, each built from its independent reference.

Every test prints a single ``[PASS]``/``[FAIL]`` verdict line for its criterion
(plus the individual sub-checks) and the lines are repeated in the pytest
terminal summary.  Tolerances live in :mod:`fockssh.validation`.
"""

import pytest

from fockssh.validation import CHECKS

from conftest import ACCEPTANCE_LINES


def _run(number: int) -> None:
    title, fn = CHECKS[number]
    try:
        results = fn()
    except Exception as exc:  # a crash is a failed criterion, not a skipped one
        ACCEPTANCE_LINES[number] = [f"[FAIL] criterion {number:2d}: {title} raised {type(exc).__name__}: {exc}"]
        print(ACCEPTANCE_LINES[number][0])
        raise
    ok = all(r.passed for r in results)
    verdict = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}"
    ACCEPTANCE_LINES[number] = [verdict] + ["         " + r.line() for r in results]
    print("\n".join(ACCEPTANCE_LINES[number]))
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)


@pytest.mark.parametrize("number", sorted(CHECKS), ids=lambda n: f"criterion_{n:02d}_{CHECKS[n][0].replace(' ', '_')}")
def test_acceptance(number):
    _run(number)
