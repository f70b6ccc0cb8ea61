from __future__ import annotations

import os

import pytest
from hypothesis import settings

from recruitment.experiments import builtin_case, builtin_cases
from recruitment.model import Category, CategoryParams, Policy, Scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def cat(label="A", p0=0.8, v=1.5, qH=0.6, qL=1.0, Pbar=0.9) -> CategoryParams:
    return CategoryParams(Category(label), p0, v, qH, qL, Pbar)


@pytest.fixture(scope="session")
def cases():
    return {c.id: c for c in builtin_cases()}


@pytest.fixture(scope="session")
def p1():
    return builtin_case("P1")


@pytest.fixture(scope="session")
def p3():
    return builtin_case("P3")


@pytest.fixture
def noisy() -> Scenario:
    """Two imperfect technologies and some search; nothing is revealing."""
    return Scenario(0.9, cat("A", 0.5, 1.0, 0.8, 0.7), cat("B", 0.45, 1.0, 0.85, 0.75, 0.92),
                    0.4, 0.4, Policy.MYOPIC)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA, RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in CRITERIA:
        if cid in RESULTS:
            ok, detail = RESULTS[cid]
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}: {detail}")
