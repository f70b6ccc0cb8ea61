"""Closed-form hiring probabilities for the no-news-is-bad-news technologies.

Every formula here assumes qL = 1 for both categories (a single success
reveals a qualified candidate) and muA + muB = 1 whenever search is used.
Each one describes a fixed evaluation order, so it is only the right
answer when the scenario's rule actually follows that order; the
experiments module checks those orderings separately.

These are oracles for the exact evaluator, written independently of it.
"""
from __future__ import annotations

from .model import OracleInapplicableError, Scenario, posterior


def lam(cat, n0: int = 0) -> float:
    """One-step hire probability after n0 failures."""
    return posterior(cat, 0, n0) * cat.qH


def _require_revealing(s: Scenario) -> None:
    if s.catA.qL != 1.0 or s.catB.qL != 1.0:
        raise OracleInapplicableError("oracle inapplicable: closed forms need qL = 1 for both categories")


def a_first_no_search(s: Scenario) -> float:
    """A evaluated first, then a revealing B, then A until it succeeds; no arrivals."""
    _require_revealing(s)
    a, b = s.catA, s.catB
    return a.p0 * (1.0 - b.p0 + b.p0 * a.qH)


def a_first_with_search(s: Scenario) -> float:
    """A first, then a revealing B, then search; each arrival is dropped after one failure."""
    _require_revealing(s)
    a, b = s.catA, s.catB
    la = lam(a)
    return la * (1.0 + s.muA * (1.0 - la) * (1.0 - b.p0) / (s.muA * la + s.muB * b.p0))


def b_first_no_search(s: Scenario) -> float:
    """A revealing B first, then A until it succeeds; no arrivals."""
    _require_revealing(s)
    return (1.0 - s.catB.p0) * s.catA.p0


def b_first_with_search(s: Scenario) -> float:
    """A revealing B first, then A once, then search with one-failure blocks."""
    _require_revealing(s)
    la, pb = lam(s.catA), s.catB.p0
    return (1.0 - pb) * la * (s.muA + s.muB * pb) / (s.muA * la + s.muB * pb)


def b_then_a_one_failure(s: Scenario) -> float:
    """B once, then A once, then search; every block ends at the first failure."""
    _require_revealing(s)
    la, lb = lam(s.catA), lam(s.catB)
    return (1.0 - lb) * la * (s.muA + s.muB * lb) / (s.muA * la + s.muB * lb)


def b_then_a_then_b_two_failures(s: Scenario) -> float:
    """B once, A once, B a second time, then search; B blocks allow two failures."""
    _require_revealing(s)
    la, lb, lb0 = lam(s.catA), lam(s.catB), lam(s.catB, 1)
    tail = (1.0 - lb0) * (1.0 - la) * s.muA / (s.muA * la + s.muB * (lb + lb0 * (1.0 - lb)))
    return (1.0 - lb) * la * (1.0 + tail)
