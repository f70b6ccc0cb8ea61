from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from recruitment.indices import (
    CONTINUE,
    STOP,
    gittins_closed_form_qL1,
    gittins_index,
    index_objective,
    myopic_search_value,
    myopic_value,
    myopic_values,
    one_step_hire_prob,
    profile_rule,
    search_index,
    search_index_closed_form_qL1,
)
from recruitment.model import (
    CandidateState,
    Category,
    Scenario,
    HorizonError,
    NumericalConfig,
    OracleInapplicableError,
    posterior,
    signal_prob,
)

from conftest import cat

D = 0.9


def test_myopic_values_p1(p1):
    mv = myopic_values(p1.scenario_after)
    assert mv.uA_blank == pytest.approx(0.72, abs=1e-12)
    assert mv.uB_blank == pytest.approx(0.7, abs=1e-12)
    assert mv.uS == pytest.approx(0.642, abs=1e-12)
    assert myopic_value(p1.scenario_after.catA, 0, 1) == pytest.approx(0.6 * 1.5 * 0.32 / 0.52, abs=1e-12)


def test_myopic_trivial_cases(p1):
    assert myopic_search_value(p1.scenario_before) == 0.0
    assert myopic_search_value(p1.scenario_after.with_(delta=0.0)) == 0.0
    # a single success cannot lift a 0.2 prior past 0.99 with this technology
    assert one_step_hire_prob(cat(p0=0.2, qH=0.7, qL=0.6, Pbar=0.99), 0, 0) == 0.0


def test_gittins_p3_golden(p3):
    a, b = p3.scenario_after.catA, p3.scenario_after.catB
    assert gittins_index(b, 0, 0, D).value == pytest.approx(0.7 / (1 - 0.9 * 0.3), abs=1e-9)
    assert gittins_index(a, 0, 0, D).value == pytest.approx(0.1425 * 1.2 / (1 - 0.9 * 0.8575), abs=1e-9)
    lam = 0.19 * 0.75 * 0.81 / 0.8575
    assert gittins_index(a, 0, 1, D).value == pytest.approx(lam * 1.2 / (1 - 0.9 * (1 - lam)), abs=1e-9)
    # hand-rounded reference values, good to five decimals
    assert gittins_closed_form_qL1(a, 1, D) == pytest.approx(0.730408, abs=1e-5)


def test_gittins_acceptable_and_dead_states():
    a = cat()
    assert gittins_index(a, 1, 0, D).value == 1.5
    assert gittins_index(cat(qH=1.0), 0, 1, D).value == 0.0
    assert gittins_closed_form_qL1(cat(qH=1.0), 3, D) == 0.0


def test_closed_form_needs_revealing_zero():
    with pytest.raises(OracleInapplicableError, match="oracle inapplicable"):
        gittins_closed_form_qL1(cat(qL=0.9), 0, D)


def test_horizon_error():
    with pytest.raises(HorizonError, match="horizon insufficient") as err:
        gittins_index(cat(p0=0.5, qH=0.8, qL=0.7), 0, 0, 0.95, NumericalConfig(horizon_cap=5))
    assert err.value.bound > 1e-9


def test_search_index_p3_golden(p3):
    s = p3.scenario_after
    want = 0.9 * (0.52 * 0.1425 * 1.2 + 0.48 * 0.7) / (1 - 0.81 + 0.81 * (0.52 * 0.1425 + 0.48 * 0.7))
    assert want == pytest.approx(0.732368, abs=1e-5)
    assert search_index(s).value == pytest.approx(want, abs=1e-9)
    assert search_index(p3.scenario_before).value == 0.0


def test_search_index_p4_golden(cases):
    # frozen from the one-failure/one-failure and one-failure/two-failure formulas
    before, after = cases["P4"].scenario_before, cases["P4"].scenario_after
    assert search_index(before).value == pytest.approx(0.7587515340808391, abs=1e-9)
    assert search_index(after).value == pytest.approx(0.7575902843327031, abs=1e-9)
    assert search_index_closed_form_qL1(before) == pytest.approx(0.7587515340808391, abs=1e-12)
    assert search_index_closed_form_qL1(after) == pytest.approx(0.7575902843327031, abs=1e-12)


def test_unreachable_threshold_gives_zero():
    # qH = 1 - qL: signals carry no information, the prior never reaches Pbar
    c = NumericalConfig(horizon_cap=1)
    inert = cat(p0=0.2, qH=0.4, qL=0.6, Pbar=0.9)
    sc = Scenario(D, inert, inert.with_(label=Category.B), 0.5, 0.5, tolerances=c)
    assert one_step_hire_prob(inert, 0, 0) == 0.0
    assert gittins_index(inert, 0, 0, D, c).value == 0.0
    assert search_index(sc, c).value == 0.0


@pytest.mark.parametrize("case_id", ["P1", "P2", "P3", "P4"])
def test_oracle_equivalence(cases, case_id):
    for s in (cases[case_id].scenario_before, cases[case_id].scenario_after):
        for c in (s.catA, s.catB):
            for n0 in range(7):
                assert abs(gittins_index(c, 0, n0, s.delta).value - gittins_closed_form_qL1(c, n0, s.delta)) <= 1e-6
        if s.muA + s.muB > 0:
            assert abs(search_index(s).value - search_index_closed_form_qL1(s)) <= 1e-6


@st.composite
def noisy_cats(draw):
    qL = draw(st.floats(0.55, 0.95))
    qH = draw(st.floats(max(1.0 - qL, 0.05) + 0.05, 0.95))
    p0 = draw(st.floats(0.1, 0.8))
    Pbar = draw(st.floats(p0 + 0.05, 0.99))
    v = draw(st.floats(0.2, 3.0))
    return cat("A", p0, v, qH, qL, Pbar)


states = st.tuples(st.integers(0, 4), st.integers(0, 4))


@given(noisy_cats(), states)
def test_index_bounds(c, st_):
    r = gittins_index(c, *st_, 0.8)
    assert -1e-12 <= r.value <= c.v + 1e-12


@given(noisy_cats(), states, st.sampled_from([0.5, 2.0]))
def test_index_linear_in_v(c, st_, k):
    base = gittins_index(c, *st_, 0.8).value
    assert gittins_index(c.with_(v=c.v * k), *st_, 0.8).value == pytest.approx(k * base, abs=1e-9)


@given(noisy_cats(), states)
def test_index_monotone(c, st_):
    n1, n0 = st_
    v = gittins_index(c, n1, n0, 0.8).value
    assert gittins_index(c, n1, n0 + 1, 0.8).value <= v + 2e-9
    assert gittins_index(c, n1 + 1, n0, 0.8).value >= v - 2e-9


@given(st.lists(st.tuples(st.sampled_from("AB"), st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=4))
def test_search_index_stationary(pool):
    base = Scenario(D, cat("A", 0.5, 1.0, 0.8, 0.7), cat("B", 0.45, 1.0, 0.85, 0.75, 0.92), 0.4, 0.4)
    ref = search_index(base).value
    s = base.with_(initial_pool=tuple(CandidateState(Category(c), n1, n0) for c, n1, n0 in pool))
    assert abs(search_index(s).value - ref) <= 1e-12


@given(noisy_cats(), states)
def test_forced_single_step_pays_expected_quality(c, st_):
    """tau = 1 pays p'v on every one-step acceptance, p' the posterior reached."""
    n1, n0 = st_
    if posterior(c, n1, n0) >= c.Pbar:
        return
    got = index_objective(c, n1, n0, 0.8, lambda m1, m0: True)
    want = sum(signal_prob(c, n1, n0, s) * posterior(c, n1 + s, n0 + 1 - s) * c.v
               for s in (0, 1) if posterior(c, n1 + s, n0 + 1 - s) >= c.Pbar)
    assert got == pytest.approx(want, abs=1e-12)


@given(st.floats(0.05, 0.85), st.floats(0.05, 0.95), st.floats(0.2, 3.0), st.integers(0, 5))
def test_forced_single_step_is_myopic_when_success_reveals(p0, qH, v, n0):
    c = cat(p0=p0, v=v, qH=qH, qL=1.0, Pbar=0.9)
    got = index_objective(c, 0, n0, 0.8, lambda m1, m0: True)
    assert got == pytest.approx(myopic_value(c, 0, n0), abs=1e-12)


@given(noisy_cats(), st.integers(0, 2))
def test_index_is_supremum(c, n0):
    """The optimal profile attains the index; other simple rules do no better."""
    r = gittins_index(c, 0, n0, 0.8)
    if posterior(c, 0, n0) >= c.Pbar or r.value == 0.0:
        return
    attained = index_objective(c, 0, n0, 0.8, profile_rule(r.stopping_profile))
    assert attained == pytest.approx(r.value, abs=1e-7)
    for k in (1, 2, 3, 5):
        rule = lambda m1, m0, k=k: (m1 + m0 - n0) >= k
        assert index_objective(c, 0, n0, 0.8, rule) <= r.value + 1e-9


def test_profile_marks_acceptable_states_continue(p1):
    a = p1.scenario_after.catA
    prof = gittins_index(a.with_(qL=0.9), 0, 0, D).stopping_profile
    acceptable = [k for k in prof if posterior(a.with_(qL=0.9), *k) >= a.Pbar]
    assert acceptable and all(prof[k] == CONTINUE for k in acceptable)
    assert prof[(0, 0)] == CONTINUE
    assert STOP in set(prof.values())


def test_search_profile_frontier(p3):
    prof = search_index(p3.scenario_after).stopping_profile
    assert (0, 1) in prof[Category.A].frontier()
    assert prof[Category.A][(0, 0)] == CONTINUE
