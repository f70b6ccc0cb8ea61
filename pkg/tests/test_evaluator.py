from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from recruitment.evaluator import (
    BlockOutcome,
    Verdict,
    block_outcome,
    compare,
    exact_outcome,
    monte_carlo,
    renewal,
    verdict_from,
)
from recruitment.model import Category, HorizonError, NumericalConfig, Policy, Scenario, ScenarioError
from recruitment.policies import Scorer

from conftest import cat

A, B = Category.A, Category.B


@pytest.fixture
def soft() -> Scenario:
    """Imperfect signals on both sides; one success is enough to hire."""
    return Scenario(0.9, cat("A", 0.5, 1.0, 0.8, 0.7, 0.7), cat("B", 0.45, 1.0, 0.85, 0.75, 0.72), 0.4, 0.4)


def _width_ok(d, tol=1e-9):
    assert d.pA_lo <= d.pA_hi and d.pB_lo <= d.pB_hi and d.pNone_lo <= d.pNone_hi
    assert d.pA_lo + d.pB_lo + d.pNone_lo <= 1.0 + 1e-12 <= d.pA_hi + d.pB_hi + d.pNone_hi + 2e-12
    assert d.pA_hi - d.pA_lo <= d.truncation_mass + 1e-15 <= tol + 1e-15


def test_p1_no_search_golden(p1):
    d = exact_outcome(p1.scenario_before)
    assert d.pA_lo <= 0.576 + 1e-12 and d.pA_hi >= 0.576 - 1e-12
    assert d.pA_hi - d.pA_lo <= 1e-9


def test_p1_with_search_golden(p1):
    d = exact_outcome(p1.scenario_after)
    la = 0.48
    want = la * (1 + (2 / 3) * (1 - la) * 0.3 / ((2 / 3) * la + (1 / 3) * 0.7))
    assert d.midpoint(A) == pytest.approx(want, abs=1e-9)
    assert d.midpoint(A) == pytest.approx(0.5703, abs=1e-4)


def test_p3_golden(p3):
    assert exact_outcome(p3.scenario_before).midpoint(A) == pytest.approx(0.225, abs=1e-9)
    la, pb = 0.1425, 0.7
    want = (1 - pb) * la * (0.52 + 0.48 * pb) / (0.52 * la + 0.48 * pb)
    assert exact_outcome(p3.scenario_after).midpoint(A) == pytest.approx(want, abs=1e-9)
    assert want == pytest.approx(0.0892, abs=1e-4)


@pytest.mark.parametrize("case_id", ["P1", "P2", "P3", "P4"])
def test_oracle_agreement(cases, case_id):
    case = cases[case_id]
    for s, form in ((case.scenario_before, case.closed_form_before), (case.scenario_after, case.closed_form_after)):
        d = exact_outcome(s)
        _width_ok(d)
        assert abs(d.midpoint(A) - form(s)) <= 1e-6


@pytest.mark.parametrize("policy", list(Policy))
def test_conservation_soft(soft, policy):
    _width_ok(exact_outcome(soft.with_(policy=policy)))


def test_insufficient_horizon(soft):
    with pytest.raises(HorizonError, match="insufficient horizon") as err:
        exact_outcome(soft.with_mu(0.0, 0.0), NumericalConfig(horizon_cap=3))
    part = err.value.partial
    assert part.truncation_mass == err.value.bound > 1e-9
    assert part.pA_lo <= part.pA_hi


def test_exact_rejects_broken_scenario(p1):
    with pytest.raises(ScenarioError):
        exact_outcome(p1.scenario_before.with_mu(0.8, 0.8))


def test_renewal_without_retirement():
    s = Scenario(0.9, cat("A"), cat("B", 0.7, 1.0, 1.0, 1.0, 0.95), 0.3, 0.7)
    blocks = {A: BlockOutcome(0.4, 0.0, 0.0), B: BlockOutcome(0.9, 0.0, 0.0)}
    r = renewal(s, blocks)
    # every block ends in a hire, so the first arrival decides; normalised over hiring arrivals
    den = 0.3 * 0.4 + 0.7 * 0.9
    assert r.pA == pytest.approx(0.3 * 0.4 / den, abs=1e-15)
    blocks = {A: BlockOutcome(1.0, 0.0, 0.0), B: BlockOutcome(1.0, 0.0, 0.0)}
    assert renewal(s, blocks).pA == pytest.approx(0.3, abs=1e-15)


def test_block_outcome_revealing_b(p3):
    s = p3.scenario_after
    b = block_outcome(s, Scorer(s), B, 50)
    assert b.hire == pytest.approx(0.7, abs=1e-15) and b.retire == pytest.approx(0.3, abs=1e-15)
    a = block_outcome(s, Scorer(s), A, 50)
    assert a.hire == pytest.approx(0.1425, abs=1e-15) and a.truncated == 0.0


@given(st.floats(0.05, 0.6), st.floats(0.05, 0.6), st.floats(0.6, 0.95), st.floats(0.1, 0.7))
def test_symmetric_relabeling(m1, m2, qH, p0):
    if m1 + m2 > 1.0:
        m1, m2 = m1 / 2, m2 / 2
    c = cat("A", p0, 1.0, qH, 1.0, 0.9)
    s = Scenario(0.9, c, c.with_(label=B), m1, m2)
    rec = compare(s, s.with_mu(m2, m1))
    dA = 0.5 * sum(rec.diffA)
    dB = 0.5 * sum(rec.diffB)
    assert dA == pytest.approx(-dB, abs=1e-9)


def test_compare_verdicts(p1, p3):
    assert compare(p1.scenario_before, p1.scenario_after).verdict is Verdict.BACKFIRES
    assert compare(p3.scenario_after, p3.scenario_after).verdict is Verdict.INDETERMINATE
    with pytest.raises(ValueError):
        compare(p1.scenario_before, p1.scenario_after.with_(delta=0.8))
    assert verdict_from((0.1, 0.2)) is Verdict.HELPS
    assert verdict_from((-0.1, 0.0)) is Verdict.INDETERMINATE


@pytest.mark.parametrize("policy", list(Policy))
def test_mc_matches_exact(soft, policy):
    s = soft.with_(policy=policy)
    d = exact_outcome(s)
    m = monte_carlo(s, 100_000, seed=5)
    assert abs(m.pA - d.midpoint(A)) <= 4 * m.stderrA
    assert abs(m.pB - d.midpoint(B)) <= 4 * m.stderrB
    assert m.pA + m.pB + m.pNone == pytest.approx(1.0, abs=1e-12)


def test_mc_deterministic(p1):
    s = p1.scenario_after
    assert monte_carlo(s, 5000, seed=42) == monte_carlo(s, 5000, seed=42)
    assert monte_carlo(s, 5000, seed=42) != monte_carlo(s, 5000, seed=43)


def test_mc_independent_of_workers(p3):
    s = p3.scenario_after
    one = monte_carlo(s, 20_000, seed=9, workers=1)
    two = monte_carlo(s, 20_000, seed=9, workers=2)
    assert one == two


def test_mc_unreachable_threshold_never_hires():
    inert = cat(p0=0.2, qH=0.4, qL=0.6, Pbar=0.9)
    s = Scenario(0.9, inert, inert.with_(label=B))
    m = monte_carlo(s, 200, seed=1, trial_horizon=100)
    assert m.pNone == 1.0 and m.censored == 200


def test_mc_requires_trials(p1):
    with pytest.raises(ValueError):
        monte_carlo(p1.scenario_before, 0)
