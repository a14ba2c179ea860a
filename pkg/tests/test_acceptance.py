"""One test per acceptance criterion; each prints a PASS/FAIL line with its measured values."""
import pytest

from specrad.acceptance import CRITERIA, run_one


@pytest.mark.parametrize("number", [k for k, _, _ in CRITERIA], ids=[f"c{k:02d}-{fn.__name__[4:]}" for k, _, fn in CRITERIA])
def test_criterion(number, capsys):
    outcome = run_one(number, workers=1)
    with capsys.disabled():
        print("\n" + outcome.line())
    assert outcome.passed, outcome.detail
