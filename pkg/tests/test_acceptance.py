"""Acceptance suite: runs every verification criterion at its stated tolerance.

One test per criterion; each prints its own PASS/FAIL line.  The whole suite
shares a single run (module-scoped cache) so the Monte Carlo work happens
once.  Criterion c05 is a known, documented failure: the exp(-lambda)
envelope prediction it compares against carries ~0.06 of model error at
(N=2, n=16), three times the slack the criterion allows; see the analysis in
the criterion's docstring in treepath/verify.py.  It is asserted as stated
rather than loosened.
"""

import pytest

from treepath import verify

_RESULTS: dict = {}


def _result(cid: str) -> verify.CriterionResult:
    if cid not in _RESULTS:
        criterion = next(c for c in verify.CRITERIA if c.cid == cid)
        _RESULTS[cid] = criterion.run(workers=0)
    return _RESULTS[cid]


@pytest.mark.parametrize("cid", [c.cid for c in verify.CRITERIA])
def test_criterion(cid):
    outcome = _result(cid)
    tag = "PASS" if outcome.passed else "FAIL"
    print(f"[{tag}] {outcome.cid} ({outcome.seconds:.1f}s) {outcome.description}")
    for name, ok in outcome.checks:
        print(f"    {'ok  ' if ok else 'FAIL'} {name}")
    failed = [name for name, ok in outcome.checks if not ok]
    assert outcome.passed, (
        f"{outcome.cid} failed sub-checks {failed}; details: {outcome.details}"
    )
