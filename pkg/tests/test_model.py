from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from recruitment.model import (
    Category,
    ImpossibleHistoryError,
    Scenario,
    is_acceptable,
    minority_category,
    posterior,
    predictive_one,
    signal_prob,
    validate,
)

from conftest import cat

probs = st.floats(0.01, 0.99)


@st.composite
def technologies(draw):
    qL = draw(st.floats(0.5, 1.0))
    qH = draw(st.floats(max(1.0 - qL, 0.01), 0.99))
    p0 = draw(probs)
    return cat("A", p0, 1.0, qH, qL, 1.0)


def bayes_step(c, p: Fraction, s: int) -> Fraction:
    """One exact update; rational arithmetic keeps the replay itself free of rounding."""
    qH, qL = Fraction(c.qH), Fraction(c.qL)
    like_h = qH if s else 1 - qH
    like_l = 1 - qL if s else qL
    return p * like_h / (p * like_h + (1 - p) * like_l)


def test_posterior_examples():
    a = cat()
    assert posterior(a, 0, 0) == pytest.approx(0.8, abs=1e-15)
    assert posterior(a, 0, 1) == pytest.approx(0.32 / 0.52, abs=1e-12)
    assert posterior(a, 1, 0) == 1.0


def test_signal_prob_examples():
    assert signal_prob(cat(), 0, 0, 1) == pytest.approx(0.48, abs=1e-12)
    assert signal_prob(cat("B", 0.7, 1.0, 1.0, 1.0, 0.95), 0, 0, 1) == pytest.approx(0.7, abs=1e-12)


def test_acceptability():
    a = cat()
    assert not is_acceptable(a, 0, 0)
    assert is_acceptable(a, 1, 0)
    assert not is_acceptable(a, 0, 5)


def test_impossible_history():
    # qH = 1 and qL = 1: a zero rules out the qualified type, a one the other
    with pytest.raises(ImpossibleHistoryError, match="impossible history"):
        posterior(cat(qH=1.0), 1, 1)


@pytest.mark.parametrize(
    "qa, qb, expected",
    [((0.6, 1.0), (1.0, 1.0), Category.A), ((0.4, 1.0), (0.8, 1.0), Category.A),
     ((0.7, 0.9), (0.7, 0.9), None), ((0.9, 0.9), (0.7, 0.9), Category.B), ((0.9, 0.7), (0.7, 0.9), None)],
)
def test_minority(qa, qb, expected):
    s = Scenario(0.9, cat("A", qH=qa[0], qL=qa[1]), cat("B", 0.7, 1.0, qb[0], qb[1], 0.95))
    assert minority_category(s) == expected


@given(st.floats(0.3, 1.0), st.floats(0.5, 1.0), st.floats(0.3, 1.0), st.floats(0.5, 1.0))
def test_minority_antisymmetric(qha, qla, qhb, qlb):
    a = Scenario(0.9, cat("A", qH=qha, qL=qla), cat("B", qH=qhb, qL=qlb))
    b = Scenario(0.9, cat("A", qH=qhb, qL=qlb), cat("B", qH=qha, qL=qla))
    swap = {Category.A: Category.B, Category.B: Category.A, None: None}
    assert minority_category(b) == swap[minority_category(a)]


@given(technologies(), st.integers(0, 6), st.integers(0, 6))
def test_exchangeability(c, n1, n0):
    if c.qL == 1.0 and n1 and c.qH == 1.0:
        return
    want = posterior(c, n1, n0)
    bits = [1] * n1 + [0] * n0
    for order in set(itertools.permutations(bits)) if n1 + n0 <= 7 else [tuple(bits)]:
        p = Fraction(c.p0)
        for s in order:
            p = bayes_step(c, p, s)
        assert abs(float(p) - want) <= 1e-12


@given(technologies(), st.integers(0, 8), st.integers(0, 8))
def test_martingale(c, n1, n0):
    p = posterior(c, n1, n0)
    if p in (0.0, 1.0):
        return
    mean = sum(signal_prob(c, n1, n0, s) * posterior(c, n1 + s, n0 + 1 - s) for s in (0, 1))
    assert abs(mean - p) <= 1e-12
    assert signal_prob(c, n1, n0, 0) + signal_prob(c, n1, n0, 1) == pytest.approx(1.0, abs=1e-15)


@given(technologies(), st.integers(0, 10), st.integers(0, 10))
def test_posterior_monotone(c, n1, n0):
    p = posterior(c, n1, n0)
    assert posterior(c, n1 + 1, n0) >= p - 1e-15
    assert posterior(c, n1, n0 + 1) <= p + 1e-15


def test_predictive_one_is_mixture():
    c = cat(qH=0.7, qL=0.8)
    assert predictive_one(c, 0.25) == pytest.approx(0.25 * 0.7 + 0.75 * 0.2)


def test_validate_golden_cases_clean(cases):
    for case in cases.values():
        assert validate(case.scenario_before) == []
        assert validate(case.scenario_after) == []


def test_validate_violations(p1):
    s = p1.scenario_before
    bad = s.with_(catA=s.catA.with_(p0=0.9))
    assert "A: prior not below threshold" in validate(bad)
    assert "search probabilities exceed 1" in validate(s.with_mu(0.7, 0.5))
    assert any("delta" in m for m in validate(s.with_(delta=1.0)))


def test_validate_myopic_standing_assumption(p1):
    # blank-slate values 0.72 and 0.7 against a search value close to them
    s = p1.scenario_after.with_(delta=0.99, catB=p1.scenario_after.catB.with_(p0=0.6))
    msgs = validate(s)
    assert msgs and all("blank-slate" in m for m in msgs)


def test_log_odds_extremes_are_finite_probabilities():
    c = cat(p0=0.5, qH=0.99, qL=0.99)
    assert 0.0 < posterior(c, 0, 400) < 1e-300 or posterior(c, 0, 400) == 0.0
    assert posterior(c, 400, 0) == pytest.approx(1.0)
    assert not math.isnan(posterior(c, 200, 200))
