"""Myopic values, candidate (Gittins) indices and the search index.

Indices are computed by retirement calibration: for a trial retirement
value M, a backward induction on the (n1, n0) lattice decides between
retiring for M and evaluating once more; the index is the M at which the
root state is indifferent.  Acceptable states are absorbing and pay
``p * v`` in index units.

The lattice is cut at depth ``horizon_cap``.  Two boundary conditions
bracket the unknown tail: W = M (retire at the cut) from below and
W = max(M, v) from above.  The two bisection roots sandwich the true
index and their half-gap is reported as ``achieved_tol``.
"""
from __future__ import annotations

import functools
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from ._core import Lattice
from .model import (
    Category,
    CategoryParams,
    HorizonError,
    NumericalConfig,
    OracleInapplicableError,
    Scenario,
    _log_ratio,
    is_acceptable,
    log_odds,
    posterior,
    predictive_one,
)

CONTINUE = "continue"
STOP = "stop"


# ---------------------------------------------------------------------------
# myopic values


def one_step_hire_prob(cat: CategoryParams, n1: int, n0: int) -> float:
    """Probability that the next evaluation makes the candidate acceptable."""
    p1 = predictive_one(cat, posterior(cat, n1, n0))
    lam = 0.0
    if p1 > 0.0 and is_acceptable(cat, n1 + 1, n0):
        lam += p1
    if p1 < 1.0 and is_acceptable(cat, n1, n0 + 1):
        lam += 1.0 - p1
    return lam


def myopic_value(cat: CategoryParams, n1: int, n0: int) -> float:
    return one_step_hire_prob(cat, n1, n0) * cat.v


def myopic_search_value(scenario: Scenario) -> float:
    uA = myopic_value(scenario.catA, 0, 0)
    uB = myopic_value(scenario.catB, 0, 0)
    return scenario.delta * (scenario.muA * uA + scenario.muB * uB)


@dataclass(frozen=True)
class MyopicValues:
    uA_blank: float
    uB_blank: float
    uS: float


def myopic_values(scenario: Scenario) -> MyopicValues:
    return MyopicValues(
        myopic_value(scenario.catA, 0, 0),
        myopic_value(scenario.catB, 0, 0),
        myopic_search_value(scenario),
    )


# ---------------------------------------------------------------------------
# lattice plumbing


def build_lattice(cat: CategoryParams, n1: int, n0: int, delta: float, horizon: int) -> Lattice:
    log_odds(cat, n1, n0)  # surfaces impossible histories before the kernel sees them
    return Lattice(
        _log_ratio(cat.p0, 1.0 - cat.p0),
        _log_ratio(cat.qH, 1.0 - cat.qL),
        _log_ratio(1.0 - cat.qH, cat.qL),
        cat.qH,
        cat.qL,
        cat.Pbar,
        cat.v,
        delta,
        horizon,
        n1,
        n0,
    )


def _inert(cat: CategoryParams) -> bool:
    """Uninformative signals: the posterior never moves, so a prior below threshold stays there."""
    return cat.qH == 1.0 - cat.qL and cat.p0 < cat.Pbar


def _truncated(lat: Lattice) -> bool:
    return bool(lat.widths[-1] > 0)


class StoppingProfile(Mapping):
    """Stop/continue decision per lattice state at a fixed retirement value.

    Keys are absolute ``(n1, n0)`` counts.  The start state always
    continues (stopping times are positive) and acceptable states continue
    forever.  Decisions are tabulated lazily on first access.
    """

    def __init__(self, lattice: Lattice, cat: CategoryParams, n1: int, n0: int, M: float):
        self._lat = lattice
        self._cat = cat
        self._start = (n1, n0)
        self._M = M
        self._flags: np.ndarray | None = None

    @property
    def retirement_value(self) -> float:
        return self._M

    def _table(self) -> np.ndarray:
        if self._flags is None:
            self._flags = self._lat.stop_flags(self._M)
        return self._flags

    def _locate(self, key) -> tuple[int, int] | None:
        m1, m0 = key
        i, k = m1 - self._start[0], m1 + m0 - sum(self._start)
        if i < 0 or k - i < 0 or k > self._lat.horizon:
            return None
        return i, k

    def __getitem__(self, key) -> str:
        loc = self._locate(key)
        if loc is None:
            raise KeyError(key)
        i, k = loc
        width = int(self._lat.widths[k])
        if i < width:
            if k == 0:
                return CONTINUE
            return STOP if self._table()[int(self._lat.offsets[k]) + i] else CONTINUE
        if is_acceptable(self._cat, *key):
            return CONTINUE
        raise KeyError(key)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        n1, n0 = self._start
        widths = self._lat.widths
        for k in range(self._lat.horizon + 1):
            w = int(widths[k])
            stop = w + 1 if w < k + 1 else w
            for i in range(stop):
                yield (n1 + i, n0 + k - i)

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def frontier(self) -> list[tuple[int, int]]:
        """States where the rule retires the candidate."""
        return [s for s, d in self.items() if d == STOP]


@dataclass(frozen=True)
class IndexResult:
    value: float
    achieved_tol: float
    stopping_profile: Mapping


def _bracket_root(lat: Lattice, tol: float) -> tuple[float, float]:
    lo, _ = lat.bracket(tol, False)
    if not _truncated(lat):
        _, hi = lat.bracket(tol, False)
        return lo, hi
    _, hi = lat.bracket(tol, True)
    return lo, hi


@functools.lru_cache(maxsize=4096)
def _gittins_cached(cat: CategoryParams, n1: int, n0: int, delta: float, cfg: NumericalConfig) -> IndexResult:
    p = posterior(cat, n1, n0)
    lat = build_lattice(cat, n1, n0, delta, cfg.horizon_cap)
    if p >= cat.Pbar or p == 0.0 or _inert(cat):
        value = p * cat.v if p >= cat.Pbar else 0.0
        return IndexResult(value, 0.0, StoppingProfile(lat, cat, n1, n0, value))
    lo, hi = _bracket_root(lat, cfg.index_tol / 4)
    value = 0.5 * (lo + hi)
    result = IndexResult(value, 0.5 * (hi - lo), StoppingProfile(lat, cat, n1, n0, value))
    if result.achieved_tol > cfg.index_tol:
        raise HorizonError("horizon insufficient for candidate index", result.achieved_tol, partial=result)
    return result


def gittins_index(
    cat: CategoryParams, n1: int, n0: int, delta: float, cfg: NumericalConfig | None = None
) -> IndexResult:
    """Index of a category-``cat`` candidate whose history has n1 ones and n0 zeros."""
    return _gittins_cached(cat, int(n1), int(n0), float(delta), cfg or NumericalConfig())


def gittins_closed_form_qL1(cat: CategoryParams, n0: int, delta: float) -> float:
    """Index after n0 failures when a single success reveals the qualified type."""
    if cat.qL != 1.0:
        raise OracleInapplicableError(f"oracle inapplicable: {cat.label}.qL = {cat.qL} != 1")
    lam = posterior(cat, 0, n0) * cat.qH
    return lam * cat.v / (1.0 - delta * (1.0 - lam))


# ---------------------------------------------------------------------------
# search index


def _search_root(lattices: list[tuple[float, Lattice]], mu0: float, delta: float, hi: float, tol: float,
                 upper: bool) -> tuple[float, float]:
    def excess(M: float) -> float:
        total = mu0 * M
        for mu, lat in lattices:
            total += mu * max(M, lat.continuation(M, upper))
        return delta * total - M

    lo = 0.0
    if excess(0.0) <= 0.0:
        return 0.0, 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


@functools.lru_cache(maxsize=256)
def _search_cached(scenario_key: tuple, cfg: NumericalConfig) -> IndexResult:
    delta, catA, catB, muA, muB = scenario_key
    mu0 = max(0.0, 1.0 - muA - muB)
    lattices = []
    profiles: dict[Category, StoppingProfile] = {}
    for mu, cat in ((muA, catA), (muB, catB)):
        lat = build_lattice(cat, 0, 0, delta, cfg.horizon_cap)
        profiles[cat.label] = lat
        if mu > 0.0 and _inert(cat):
            mu0 += mu  # such an arrival is never worth evaluating
        elif mu > 0.0:
            lattices.append((mu, lat))
    if not lattices:
        value, lo, hi = 0.0, 0.0, 0.0
    else:
        top = max(catA.v, catB.v)
        tol = cfg.index_tol / 4
        lo, _ = _search_root(lattices, mu0, delta, top, tol, False)
        if any(_truncated(lat) for _, lat in lattices):
            _, hi = _search_root(lattices, mu0, delta, top, tol, True)
        else:
            _, hi = _search_root(lattices, mu0, delta, top, tol, False)
        value = 0.5 * (lo + hi)
    frontier = {
        label: StoppingProfile(lat, catA if label is Category.A else catB, 0, 0, value)
        for label, lat in profiles.items()
    }
    result = IndexResult(value, 0.5 * (hi - lo), frontier)
    if result.achieved_tol > cfg.index_tol:
        raise HorizonError("horizon insufficient for search index", result.achieved_tol, partial=result)
    return result


def search_index(scenario: Scenario, cfg: NumericalConfig | None = None) -> IndexResult:
    """Index of the search action.

    Root of M = delta * (muA W_A(M) + muB W_B(M) + mu0 M), where W_j(M) is
    the retirement-M value of a blank-slate category-j arrival and mu0 the
    no-arrival probability.  Depends on the scenario only through its
    primitives, never through the pool.  ``stopping_profile`` maps each
    category to its profile at M = V^S.
    """
    key = (scenario.delta, scenario.catA, scenario.catB, scenario.muA, scenario.muB)
    return _search_cached(key, cfg or scenario.tolerances)


def _block_terms(cat: CategoryParams, k: int, delta: float) -> tuple[float, float]:
    """(payoff, discount) of a block that retires after k straight failures."""
    payoff, survive = 0.0, 1.0
    for i in range(k):
        lam = posterior(cat, 0, i) * cat.qH
        payoff += delta**i * survive * lam * cat.v
        survive *= 1.0 - lam
    return payoff, delta**k * survive


def search_index_closed_form_qL1(scenario: Scenario, max_failures: int = 8) -> float:
    """Search index when both categories accept on the first success.

    Each category's arrival is evaluated until k_j failures and then
    retired; for fixed (k_A, k_B) the index solves a linear equation.  The
    pair is accepted when the resulting value is consistent with the
    closed-form candidate indices: V(0^i) > V^S for i < k_j and
    V(0^k_j) <= V^S.
    """
    a, b = scenario.catA, scenario.catB
    for cat in (a, b):
        if cat.qL != 1.0:
            raise OracleInapplicableError(f"oracle inapplicable: {cat.label}.qL = {cat.qL} != 1")
    d, muA, muB = scenario.delta, scenario.muA, scenario.muB
    if muA + muB <= 0.0:
        return 0.0
    idx = {c.label: [gittins_closed_form_qL1(c, i, d) for i in range(max_failures + 1)] for c in (a, b)}

    def consistent(cat: CategoryParams, k: int, M: float) -> bool:
        seq = idx[cat.label]
        return all(seq[i] > M for i in range(k)) and seq[k] <= M

    for kA in range(max_failures + 1):
        for kB in range(max_failures + 1):
            pA, dA = _block_terms(a, kA, d)
            pB, dB = _block_terms(b, kB, d)
            mu0 = 1.0 - muA - muB
            M = d * (muA * pA + muB * pB) / (1.0 - d * (muA * dA + muB * dB + mu0))
            if (muA == 0.0 or consistent(a, kA, M)) and (muB == 0.0 or consistent(b, kB, M)):
                if (muA == 0.0 and kA) or (muB == 0.0 and kB):
                    continue
                return M
    raise OracleInapplicableError("oracle inapplicable: no retirement pattern within the failure cap")


# ---------------------------------------------------------------------------
# direct evaluation of the index objective


def index_objective(
    cat: CategoryParams,
    n1: int,
    n0: int,
    delta: float,
    stop: Callable[[int, int], bool],
    depth: int = 200,
) -> float:
    """Average discounted payoff of evaluating one candidate under a given stopping rule.

    ``stop(n1, n0)`` is consulted at every state reached after at least one
    evaluation, acceptable states included; an acceptable state that is
    not stopped keeps paying forever.  Paths still running at ``depth``
    are stopped there.
    """
    num = 0.0
    den_tail = 0.0  # E[delta**tau] over stopped paths
    layer = {n1: 1.0}  # ones count -> probability, at time t with n0 + (t - ...) zeros
    for t in range(depth):
        nxt: dict[int, float] = {}
        for m1, mass in layer.items():
            m0 = n0 + t - (m1 - n1)
            p = posterior(cat, m1, m0)
            p1 = predictive_one(cat, p)
            for s, w in ((1, p1), (0, 1.0 - p1)):
                if w == 0.0:
                    continue
                a1, a0 = (m1 + 1, m0) if s else (m1, m0 + 1)
                mass_s = mass * w
                if is_acceptable(cat, a1, a0):
                    flow = posterior(cat, a1, a0) * cat.v
                    if stop(a1, a0):
                        num += mass_s * delta**t * (1.0 - delta) * flow
                        den_tail += mass_s * delta ** (t + 1)
                    else:
                        num += mass_s * delta**t * flow
                    continue
                if stop(a1, a0) or t + 1 == depth:
                    den_tail += mass_s * delta ** (t + 1)
                    continue
                nxt[a1] = nxt.get(a1, 0.0) + mass_s
        layer = nxt
        if not layer:
            break
    return num / (1.0 - den_tail)


def profile_rule(profile: Mapping) -> Callable[[int, int], bool]:
    """Turn a stopping profile into a rule for :func:`index_objective`."""

    def rule(m1: int, m0: int) -> bool:
        return profile.get((m1, m0), STOP) == STOP

    return rule


__all__ = [
    "CONTINUE",
    "STOP",
    "IndexResult",
    "MyopicValues",
    "StoppingProfile",
    "build_lattice",
    "gittins_closed_form_qL1",
    "gittins_index",
    "index_objective",
    "myopic_search_value",
    "myopic_value",
    "myopic_values",
    "one_step_hire_prob",
    "profile_rule",
    "search_index",
    "search_index_closed_form_qL1",
]
