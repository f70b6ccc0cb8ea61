"""Ex-ante hiring probabilities: exact interval computation and seeded Monte Carlo.

Exact computation has two phases.  Phase 1 pushes probability mass forward
through the pool states reachable from the initial pool until it is hired,
reaches the first search, or hits the depth cap.  Mass is split by the
latent types of the initial candidates so that unresolved mass at the cap
can be bounded per type.  Phase 2 treats everything after the first search
as a renewal process: each arrival's evaluation block ends in a hire, a
retirement (back to search) or truncation, and the renewal equation gives
the eventual hire probabilities.
"""
from __future__ import annotations

import concurrent.futures as cf
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .indices import build_lattice, myopic_value
from .model import (
    Category,
    HorizonError,
    ImpossibleHistoryError,
    NumericalConfig,
    Policy,
    Scenario,
    ScenarioError,
    hard_violations,
    is_acceptable,
    log_odds,
    posterior,
    predictive_one,
)
from .policies import ActionKind, PoolState, Scorer, apply

CATEGORIES = (Category.A, Category.B)


@dataclass(frozen=True)
class OutcomeDistribution:
    pA_lo: float
    pA_hi: float
    pB_lo: float
    pB_hi: float
    pNone_lo: float
    pNone_hi: float
    truncation_mass: float

    def interval(self, which: Category | str | None) -> tuple[float, float]:
        if which is None or which == "none":
            return self.pNone_lo, self.pNone_hi
        if Category(which) is Category.A:
            return self.pA_lo, self.pA_hi
        return self.pB_lo, self.pB_hi

    def midpoint(self, which: Category | str | None) -> float:
        lo, hi = self.interval(which)
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BlockOutcome:
    """How the evaluation of one fresh arrival ends."""

    hire: float
    retire: float
    truncated: float


# ---------------------------------------------------------------------------
# phase 2: evaluation blocks of fresh arrivals


def _stop_rule(scenario: Scenario, scorer: Scorer, category: Category, horizon: int):
    """Predicate (n1, n0) -> retire, for a candidate evaluated alone after search."""
    cat = scenario.params(category)
    if scorer.policy is Policy.MYOPIC:
        uS = scorer.threshold
        return lambda n1, n0: myopic_value(cat, n1, n0) < uS
    lat = build_lattice(cat, 0, 0, scenario.delta, horizon)
    flags = lat.stop_flags(scorer.threshold)
    offsets = lat.offsets
    widths = lat.widths

    def stop(n1: int, n0: int) -> bool:
        k = n1 + n0
        return n1 < widths[k] and bool(flags[offsets[k] + n1])

    return stop


def block_outcome(scenario: Scenario, scorer: Scorer, category: Category, horizon: int) -> BlockOutcome:
    """Hire/retire/truncation probabilities for a blank-slate arrival of ``category``."""
    cat = scenario.params(category)
    stop = _stop_rule(scenario, scorer, category, horizon)
    hire = retire = 0.0
    layer = {0: 1.0}  # ones count at depth k -> mass
    for k in range(horizon):
        nxt: dict[int, float] = {}
        for n1, mass in layer.items():
            n0 = k - n1
            if stop(n1, n0):
                retire += mass
                continue
            p1 = predictive_one(cat, posterior(cat, n1, n0))
            for s, w in ((1, p1), (0, 1.0 - p1)):
                if w <= 0.0:
                    continue
                m1 = n1 + s
                if is_acceptable(cat, m1, k + 1 - m1):
                    hire += mass * w
                else:
                    nxt[m1] = nxt.get(m1, 0.0) + mass * w
        layer = nxt
        if not layer:
            break
    return BlockOutcome(hire, retire, sum(layer.values()))


@dataclass(frozen=True)
class Renewal:
    """Eventual outcome of the process from a search period on."""

    pA: float
    pB: float
    unknown: float


def renewal(scenario: Scenario, blocks: dict[Category, BlockOutcome]) -> Renewal:
    den = 0.0
    for c in CATEGORIES:
        b = blocks[c]
        den += scenario.mu(c) * (b.hire + b.truncated)
    if den <= 0.0:
        return Renewal(0.0, 0.0, 0.0)
    a = scenario.muA * blocks[Category.A].hire / den
    b = scenario.muB * blocks[Category.B].hire / den
    x = sum(scenario.mu(c) * blocks[c].truncated for c in CATEGORIES) / den
    return Renewal(a, b, x)


# ---------------------------------------------------------------------------
# phase 1 and assembly


def _odds(p: float) -> float:
    return math.inf if p >= 1.0 else p / (1.0 - p)


def _ville(cat, n1: int, n0: int) -> float:
    """Upper bound on Pr(posterior ever reaches Pbar | unqualified)."""
    target = _odds(cat.Pbar)
    if target == math.inf:
        return 0.0
    return min(1.0, _odds(posterior(cat, n1, n0)) / target)


def _type_prior(scenario: Scenario, pool: PoolState) -> np.ndarray:
    k = len(pool.candidates)
    w = np.ones(1 << k)
    for combo in range(1 << k):
        for i, c in enumerate(pool.candidates):
            p = posterior(scenario.params(c.category), c.n1, c.n0)
            w[combo] *= p if combo >> i & 1 else 1.0 - p
    return w


def _signal_one(scenario: Scenario, pool: PoolState, i: int) -> np.ndarray:
    """Pr(s=1) for candidate i under each type combination."""
    cat = scenario.params(pool.candidates[i].category)
    k = len(pool.candidates)
    combos = np.arange(1 << k)
    good = (combos >> i) & 1
    return np.where(good == 1, cat.qH, 1.0 - cat.qL)


def _live_bounds(scenario: Scenario, pool: PoolState, mass: np.ndarray) -> dict[Category, float]:
    """Largest eventual hire probability per category for mass still undecided at the cap."""
    total = float(mass.sum())
    out = {}
    k = len(pool.candidates)
    for c in CATEGORIES:
        if scenario.mu(c) > 0.0:
            out[c] = total
            continue
        cat = scenario.params(c)
        bound = np.zeros(1 << k)
        for i, cand in enumerate(pool.candidates):
            if cand.retired or cand.category is not c:
                continue
            good = (np.arange(1 << k) >> i) & 1
            bound += np.where(good == 1, 1.0, _ville(cat, cand.n1, cand.n0))
        out[c] = float(np.dot(mass, np.minimum(bound, 1.0)))
    return out


def exact_outcome(scenario: Scenario, cfg: NumericalConfig | None = None) -> OutcomeDistribution:
    """Interval-valued probabilities that A, B or nobody is eventually hired."""
    bad = hard_violations(scenario)
    if bad:
        raise ScenarioError(bad)
    cfg = cfg or scenario.tolerances
    scenario = scenario.with_(tolerances=cfg)
    H = cfg.horizon_cap
    scorer = Scorer(scenario)

    root = PoolState.initial(scenario)
    layer: dict[tuple, tuple[PoolState, np.ndarray]] = {root.key(): (root, _type_prior(scenario, root))}
    hires = {c: 0.0 for c in CATEGORIES}
    search_mass = 0.0
    actions: dict[tuple, object] = {}
    for _ in range(H):
        nxt: dict[tuple, tuple[PoolState, np.ndarray]] = {}
        for key, (pool, mass) in layer.items():
            action = actions.get(key)
            if action is None:
                action = actions[key] = scorer.choose(pool)
            if action.kind is ActionKind.SEARCH:
                search_mass += float(mass.sum())
                continue
            one = _signal_one(scenario, pool, action.position)
            for s, w in ((1, one), (0, 1.0 - one)):
                m = mass * w
                if not m.any():
                    continue
                out = apply(pool, action, s, scenario)
                if out.next.terminated is not None:
                    hires[out.category] += float(m.sum())
                    continue
                nkey = out.next.key()
                if nkey in nxt:
                    nxt[nkey] = (nxt[nkey][0], nxt[nkey][1] + m)
                else:
                    nxt[nkey] = (out.next, m)
        layer = nxt
        if not layer:
            break

    extra = {c: 0.0 for c in CATEGORIES}
    for pool, mass in layer.values():
        for c, b in _live_bounds(scenario, pool, mass).items():
            extra[c] += b

    if search_mass > 0.0:
        blocks = {c: block_outcome(scenario, scorer, c, 2 * H) for c in CATEGORIES}
        ren = renewal(scenario, blocks)
        hires[Category.A] += search_mass * ren.pA
        hires[Category.B] += search_mass * ren.pB
        for c in CATEGORIES:
            extra[c] += search_mass * ren.unknown

    pA_lo, pB_lo = hires[Category.A], hires[Category.B]
    pA_hi = min(1.0, pA_lo + extra[Category.A])
    pB_hi = min(1.0, pB_lo + extra[Category.B])
    dist = OutcomeDistribution(
        pA_lo,
        pA_hi,
        pB_lo,
        pB_hi,
        max(0.0, 1.0 - pA_hi - pB_hi),
        max(0.0, 1.0 - pA_lo - pB_lo),
        (pA_hi - pA_lo) + (pB_hi - pB_lo),
    )
    if dist.truncation_mass > cfg.prob_tol:
        raise HorizonError("insufficient horizon for exact outcome", dist.truncation_mass, partial=dist)
    return dist


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McEstimate:
    pA: float
    pB: float
    pNone: float
    stderrA: float
    stderrB: float
    stderrNone: float
    n: int
    seed: int
    censored: int = 0
    exhausted: int = 0
    trial_horizon: int = 10_000
    backend: str = field(default_factory=lambda: _core.BACKEND)

    def estimate(self, which: Category | str | None) -> tuple[float, float]:
        if which is None or which == "none":
            return self.pNone, self.stderrNone
        if Category(which) is Category.A:
            return self.pA, self.stderrA
        return self.pB, self.stderrB


class ScoreTables:
    """Lazily grown per-category score tables for the simulation kernel.

    NaN marks an entry not computed yet, +inf an acceptable state and -inf
    a history that cannot occur.
    """

    def __init__(self, scenario: Scenario, scorer: Scorer, rows: int = 4, cols: int = 64):
        self.scenario = scenario
        self.scorer = scorer
        self.tables = [np.full((rows, cols), np.nan) for _ in CATEGORIES]

    def _score(self, category: Category, n1: int, n0: int) -> float:
        cat = self.scenario.params(category)
        try:
            log_odds(cat, n1, n0)
        except ImpossibleHistoryError:
            return -math.inf
        if is_acceptable(cat, n1, n0):
            return math.inf
        return self.scorer.score(category, n1, n0)

    def fill(self, ci: int, n1: int, n0: int) -> None:
        tab = self.tables[ci]
        rows, cols = tab.shape
        if n1 >= rows or n0 >= cols:
            new_rows = max(rows, 2 * (n1 + 1)) if n1 >= rows else rows
            new_cols = max(cols, 2 * (n0 + 1)) if n0 >= cols else cols
            grown = np.full((new_rows, new_cols), np.nan)
            grown[:rows, :cols] = tab
            tab = self.tables[ci] = grown
        stop = min(tab.shape[1], n0 + max(32, n0))
        category = CATEGORIES[ci]
        for m0 in range(n0, stop):
            if math.isnan(tab[n1, m0]):
                tab[n1, m0] = self._score(category, n1, m0)


def _mc_setup(scenario: Scenario):
    scorer = Scorer(scenario)
    live = [c for c in scenario.initial_pool if not c.retired]
    init_cat = np.array([CATEGORIES.index(c.category) for c in live], dtype=np.int64)
    init_n1 = np.array([c.n1 for c in live], dtype=np.int64)
    init_n0 = np.array([c.n0 for c in live], dtype=np.int64)
    init_p = np.array([posterior(scenario.params(c.category), c.n1, c.n0) for c in live])
    return scorer, (init_cat, init_n1, init_n0, init_p)


def _run_range(scenario: Scenario, start: int, stop: int, seed: int, trial_horizon: int) -> np.ndarray:
    scorer, init = _mc_setup(scenario)
    tables = ScoreTables(scenario, scorer)
    a, b = scenario.catA, scenario.catB
    qH = np.array([a.qH, b.qH])
    qL = np.array([a.qL, b.qL])
    p0 = np.array([a.p0, b.p0])
    counts = np.zeros(4, dtype=np.int64)
    trial = start
    while trial < stop:
        trial, ci, n1, n0 = _core.simulate(
            trial, stop, seed, trial_horizon, scenario.muA, scenario.muB, qH, qL, p0,
            tables.tables[0], tables.tables[1], scorer.threshold, scorer.policy is Policy.OPTIMAL,
            *init, counts,
        )
        if ci >= 0:
            tables.fill(ci, n1, n0)
    return counts


def monte_carlo(
    scenario: Scenario,
    n: int,
    seed: int = 0,
    trial_horizon: int = 10_000,
    workers: int = 1,
) -> McEstimate:
    """Simulate ``n`` independent hiring processes.

    Trial i draws from its own stream keyed by (seed, i), so the estimate
    does not depend on ``workers`` or on the backend.  Trials still open
    after ``trial_horizon`` periods are counted as nobody hired, and so are
    trials that reach a search with no possible arrival.
    """
    if n < 1:
        raise ValueError("need at least one trial")
    bad = hard_violations(scenario)
    if bad:
        raise ScenarioError(bad)
    seed = int(seed) & ((1 << 64) - 1)
    if workers <= 1 or n < 10_000:
        counts = _run_range(scenario, 0, n, seed, trial_horizon)
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        counts = np.zeros(4, dtype=np.int64)
        with cf.ProcessPoolExecutor(workers) as pool:
            futs = [pool.submit(_run_range, scenario, int(lo), int(hi), seed, trial_horizon)
                    for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
            for f in futs:
                counts += f.result()
    hA, hB, exhausted, censored = (int(x) for x in counts)
    pA, pB = hA / n, hB / n
    pNone = (exhausted + censored) / n

    def se(p: float) -> float:
        return math.sqrt(p * (1.0 - p) / n)

    return McEstimate(pA, pB, pNone, se(pA), se(pB), se(pNone), n, seed, censored, exhausted, trial_horizon)


# ---------------------------------------------------------------------------
# comparison


class Verdict(str, enum.Enum):
    BACKFIRES = "Backfires"
    HELPS = "Helps"
    INDETERMINATE = "Indeterminate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ComparisonRecord:
    before: OutcomeDistribution
    after: OutcomeDistribution
    diffA: tuple[float, float]
    diffB: tuple[float, float]
    diffNone: tuple[float, float]
    verdict: Verdict


def _diff(after: tuple[float, float], before: tuple[float, float]) -> tuple[float, float]:
    return after[0] - before[1], after[1] - before[0]


def verdict_from(diff: tuple[float, float]) -> Verdict:
    lo, hi = diff
    if hi < 0.0:
        return Verdict.BACKFIRES
    if lo > 0.0:
        return Verdict.HELPS
    return Verdict.INDETERMINATE


def compare(before: Scenario, after: Scenario, cfg: NumericalConfig | None = None) -> ComparisonRecord:
    """Effect of an arrival-probability shift on who gets hired; the verdict is about category A."""
    if before.with_mu(after.muA, after.muB) != after:
        raise ValueError("before and after scenarios must differ only in muA, muB")
    b = exact_outcome(before, cfg)
    a = exact_outcome(after, cfg)
    dA = _diff(a.interval(Category.A), b.interval(Category.A))
    dB = _diff(a.interval(Category.B), b.interval(Category.B))
    dN = _diff(a.interval(None), b.interval(None))
    return ComparisonRecord(b, a, dA, dB, dN, verdict_from(dA))
