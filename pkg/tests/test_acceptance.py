"""Exit-criterion gate: one PASS/FAIL line per criterion.

The lines are collected into an "acceptance criteria" section at the end
of the pytest run.
"""

import pytest

from aqlab import acceptance

SEED = 0


@pytest.fixture(scope="module")
def results():
    return {r.cid: r for r in acceptance.run_all(SEED)}


def check(results, criterion_log, cid):
    r = results[cid]
    criterion_log.append(r.line())
    print(r.line(), r.details)
    assert r.passed, r.line()


def test_criterion_1(results, criterion_log):
    check(results, criterion_log, "1")


def test_criterion_2(results, criterion_log):
    check(results, criterion_log, "2")


def test_criterion_3(results, criterion_log):
    check(results, criterion_log, "3")


def test_criterion_4(results, criterion_log):
    check(results, criterion_log, "4")


def test_criterion_5(results, criterion_log):
    check(results, criterion_log, "5")


def test_criterion_6(results, criterion_log):
    check(results, criterion_log, "6")


def test_criterion_7a(results, criterion_log):
    check(results, criterion_log, "7a")


def test_criterion_7b(results, criterion_log):
    check(results, criterion_log, "7b")


def test_criterion_7c(results, criterion_log):
    check(results, criterion_log, "7c")


def test_criterion_8(results, criterion_log):
    check(results, criterion_log, "8")


def test_criterion_9(results, criterion_log):
    check(results, criterion_log, "9")


def test_criterion_10(results, criterion_log):
    r = acceptance.criterion_10(SEED, first=list(results.values()))
    criterion_log.append(r.line())
    print(r.line(), r.details)
    assert r.passed, r.line()
