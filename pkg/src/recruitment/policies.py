"""Action selection for the myopic and index rules, and the one-period transition.

Both rules share one shape: score every live candidate, retire the ones
that search dominates, then evaluate the best survivor or search when
none is left.  Only the score and the retirement test differ:

* myopic: score u(sigma); retire when u < u^S, so a tie keeps evaluating;
* optimal: score V(sigma); retire when V <= V^S.

Because the search value is stationary and an idle candidate's score is
frozen, a retired candidate would never be picked again, so retirement
is permanent without changing any trajectory.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .indices import gittins_index, myopic_search_value, myopic_value, search_index
from .model import (
    CandidateState,
    Category,
    IllegalActionError,
    Policy,
    Scenario,
    is_acceptable,
    signal_prob,
)


class ActionKind(str, enum.Enum):
    EVALUATE = "evaluate"
    SEARCH = "search"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    position: int | None = None
    retire: tuple[int, ...] = ()

    @classmethod
    def evaluate(cls, position: int, retire: tuple[int, ...] = ()) -> "Action":
        return cls(ActionKind.EVALUATE, position, retire)

    @classmethod
    def search(cls, retire: tuple[int, ...] = ()) -> "Action":
        return cls(ActionKind.SEARCH, None, retire)

    def __str__(self) -> str:
        if self.kind is ActionKind.SEARCH:
            return "search"
        return f"evaluate[{self.position}]"


@dataclass(frozen=True)
class Hire:
    category: Category
    position: int
    period: int


@dataclass(frozen=True)
class PoolState:
    candidates: tuple[CandidateState, ...]
    terminated: Hire | None = None
    period: int = 0

    @classmethod
    def initial(cls, scenario: Scenario) -> "PoolState":
        return cls(tuple(scenario.initial_pool))

    def live(self) -> list[int]:
        return [i for i, c in enumerate(self.candidates) if not c.retired]

    def key(self) -> tuple:
        """Hashable summary that determines the next action (period excluded)."""
        return tuple((c.category.value, c.n1, c.n0, c.retired, c.arrival) for c in self.candidates)


class OutcomeKind(str, enum.Enum):
    SIGNAL = "signal"
    ARRIVAL = "arrival"
    NO_ARRIVAL = "no_arrival"
    HIRED = "hired"


@dataclass(frozen=True)
class StepOutcome:
    kind: OutcomeKind
    next: PoolState
    bit: int | None = None
    category: Category | None = None
    position: int | None = None


# ---------------------------------------------------------------------------
# scoring


class Scorer:
    """Per-scenario scores and search threshold for one rule, memoised by state."""

    def __init__(self, scenario: Scenario, policy: Policy | None = None, VS: float | None = None):
        self.scenario = scenario
        self.policy = Policy(policy or scenario.policy)
        if self.policy is Policy.MYOPIC:
            self.threshold = myopic_search_value(scenario) if VS is None else VS
        else:
            self.threshold = search_index(scenario).value if VS is None else VS
        self._cache: dict[tuple, float] = {}

    def score(self, category: Category, n1: int, n0: int) -> float:
        key = (category, n1, n0)
        s = self._cache.get(key)
        if s is None:
            cat = self.scenario.params(category)
            if self.policy is Policy.MYOPIC:
                s = myopic_value(cat, n1, n0)
            else:
                cfg = self.scenario.tolerances
                s = gittins_index(cat, n1, n0, self.scenario.delta, cfg).value
            self._cache[key] = s
        return s

    def retires(self, s: float) -> bool:
        if self.policy is Policy.MYOPIC:
            return s < self.threshold
        return s <= self.threshold

    def choose(self, pool: PoolState) -> Action:
        retire = []
        best = None
        best_key = None
        for i in pool.live():
            c = pool.candidates[i]
            s = self.score(c.category, c.n1, c.n0)
            if self.retires(s):
                retire.append(i)
                continue
            k = (-s, c.arrival, c.category.value, i)
            if best_key is None or k < best_key:
                best, best_key = i, k
        if best is None:
            return Action.search(tuple(retire))
        return Action.evaluate(best, tuple(retire))


def myopic_action(pool: PoolState, scenario: Scenario, scorer: Scorer | None = None) -> Action:
    if scorer is None:
        scorer = Scorer(scenario, Policy.MYOPIC)
    return scorer.choose(pool)


def optimal_action(pool: PoolState, scenario: Scenario, VS: float | None = None,
                   scorer: Scorer | None = None) -> Action:
    if scorer is None:
        scorer = Scorer(scenario, Policy.OPTIMAL, VS)
    return scorer.choose(pool)


def choose_action(pool: PoolState, scenario: Scenario, scorer: Scorer | None = None) -> Action:
    """Dispatch on ``scenario.policy``."""
    return (scorer or Scorer(scenario)).choose(pool)


# ---------------------------------------------------------------------------
# transition


def apply(pool: PoolState, action: Action, draw, scenario: Scenario | None = None) -> StepOutcome:
    """Advance one period.

    ``draw`` is the signal bit for an evaluation and a category (or None)
    for a search.  ``scenario`` is needed only to detect hiring.
    """
    if pool.terminated is not None:
        raise IllegalActionError("illegal action: the process has already ended")
    cands = list(pool.candidates)
    for i in action.retire:
        cands[i] = cands[i].retire()
    t = pool.period + 1

    if action.kind is ActionKind.SEARCH:
        if draw is None:
            return StepOutcome(OutcomeKind.NO_ARRIVAL, PoolState(tuple(cands), None, t))
        cat = Category(draw)
        cands.append(CandidateState(cat, arrival=t))
        return StepOutcome(OutcomeKind.ARRIVAL, PoolState(tuple(cands), None, t), category=cat)

    i = action.position
    if i is None or not 0 <= i < len(cands) or cands[i].retired:
        raise IllegalActionError(f"illegal action: candidate {i} is not available for evaluation")
    if draw not in (0, 1):
        raise IllegalActionError(f"illegal action: signal draw must be 0 or 1, got {draw!r}")
    cands[i] = cands[i].observe(int(draw))
    c = cands[i]
    if scenario is not None and is_acceptable(scenario.params(c.category), c.n1, c.n0):
        hire = Hire(c.category, i, t)
        return StepOutcome(OutcomeKind.HIRED, PoolState(tuple(cands), hire, t), bit=int(draw),
                           category=c.category, position=i)
    return StepOutcome(OutcomeKind.SIGNAL, PoolState(tuple(cands), None, t), bit=int(draw), position=i)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class TrajectoryStep:
    pool: PoolState
    action: Action
    outcome: StepOutcome


def sample_trajectory(scenario: Scenario, rng: np.random.Generator, max_steps: int = 1000,
                      scorer: Scorer | None = None) -> list[TrajectoryStep]:
    """Play the scenario's rule forward with signals drawn from the predictive law."""
    scorer = scorer or Scorer(scenario)
    pool = PoolState.initial(scenario)
    steps: list[TrajectoryStep] = []
    for _ in range(max_steps):
        action = scorer.choose(pool)
        if action.kind is ActionKind.SEARCH:
            if scenario.muA + scenario.muB <= 0.0:
                break
            u = rng.random()
            draw = Category.A if u < scenario.muA else Category.B if u < scenario.muA + scenario.muB else None
        else:
            c = pool.candidates[action.position]
            p1 = signal_prob(scenario.params(c.category), c.n1, c.n0, 1)
            draw = int(rng.random() < p1)
        out = apply(pool, action, draw, scenario)
        steps.append(TrajectoryStep(pool, action, out))
        pool = out.next
        if pool.terminated is not None:
            break
    return steps


def depth_limited_tree(scenario: Scenario, depth: int, scorer: Scorer | None = None):
    """Yield ``(path, pool, action)`` for every decision node within ``depth`` periods.

    ``path`` lists the draws leading to the node; branches with zero
    probability are skipped.
    """
    scorer = scorer or Scorer(scenario)
    stack = [((), PoolState.initial(scenario))]
    while stack:
        path, pool = stack.pop()
        action = scorer.choose(pool)
        yield path, pool, action
        if len(path) >= depth:
            continue
        if action.kind is ActionKind.SEARCH:
            draws = [(Category.A, scenario.muA), (Category.B, scenario.muB), (None, scenario.mu_none)]
        else:
            c = pool.candidates[action.position]
            p1 = signal_prob(scenario.params(c.category), c.n1, c.n0, 1)
            draws = [(1, p1), (0, 1.0 - p1)]
        children = []
        for d, w in draws:
            if w <= 0.0:
                continue
            out = apply(pool, action, d, scenario)
            if out.next.terminated is None:
                children.append((path + (d if not isinstance(d, Category) else d.value,), out.next))
        stack.extend(reversed(children))


def with_retired(pool: PoolState, positions) -> PoolState:
    cands = list(pool.candidates)
    for i in positions:
        cands[i] = cands[i].retire()
    return replace(pool, candidates=tuple(cands))
