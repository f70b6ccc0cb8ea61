"""Domain types and Bayesian bookkeeping for the two-category recruitment model.

A candidate's history is kept as the pair ``(n1, n0)`` of signal counts.
Signals are conditionally iid given the latent type, so the counts are a
sufficient statistic and every posterior is order independent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace


class ModelError(Exception):
    """Base class for errors raised by the recruitment engine."""


class ImpossibleHistoryError(ModelError):
    pass


class HorizonError(ModelError):
    """Raised when a truncation depth cannot certify the requested tolerance.

    ``bound`` holds the error bound that was achieved, ``partial`` the
    best available result (an interval-valued answer) when there is one.
    """

    def __init__(self, message: str, bound: float, partial=None):
        super().__init__(f"{message} (achieved bound {bound:.3g})")
        self.bound = bound
        self.partial = partial


class OracleInapplicableError(ModelError):
    pass


class IllegalActionError(ModelError):
    pass


class ScenarioError(ModelError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid scenario: " + "; ".join(violations))
        self.violations = violations


class Category(str, enum.Enum):
    A = "A"
    B = "B"

    def __str__(self) -> str:
        return self.value


class Policy(str, enum.Enum):
    MYOPIC = "myopic"
    OPTIMAL = "optimal"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CategoryParams:
    """Primitives of one candidate category.

    qH is Pr(s=1 | qualified) and qL is Pr(s=0 | unqualified).
    """

    label: Category
    p0: float
    v: float
    qH: float
    qL: float
    Pbar: float

    def with_(self, **changes) -> "CategoryParams":
        return replace(self, **changes)

    @property
    def technology(self) -> tuple[float, float, float, float, float]:
        """Everything except the label; two categories with equal technology behave identically."""
        return (self.p0, self.v, self.qH, self.qL, self.Pbar)


@dataclass(frozen=True)
class NumericalConfig:
    index_tol: float = 1e-9
    horizon_cap: int = 200
    prob_tol: float = 1e-9


@dataclass(frozen=True)
class CandidateState:
    category: Category
    n1: int = 0
    n0: int = 0
    retired: bool = False
    arrival: int = 0

    def observe(self, s: int) -> "CandidateState":
        if s:
            return replace(self, n1=self.n1 + 1)
        return replace(self, n0=self.n0 + 1)

    def retire(self) -> "CandidateState":
        return self if self.retired else replace(self, retired=True)


def default_pool() -> tuple[CandidateState, ...]:
    return (CandidateState(Category.A), CandidateState(Category.B))


@dataclass(frozen=True)
class Scenario:
    delta: float
    catA: CategoryParams
    catB: CategoryParams
    muA: float = 0.0
    muB: float = 0.0
    policy: Policy = Policy.MYOPIC
    initial_pool: tuple[CandidateState, ...] = field(default_factory=default_pool)
    tolerances: NumericalConfig = field(default_factory=NumericalConfig)

    def params(self, category: Category | str) -> CategoryParams:
        return self.catA if Category(category) is Category.A else self.catB

    def mu(self, category: Category | str) -> float:
        return self.muA if Category(category) is Category.A else self.muB

    @property
    def mu_none(self) -> float:
        return max(0.0, 1.0 - self.muA - self.muB)

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def with_mu(self, muA: float, muB: float) -> "Scenario":
        return replace(self, muA=muA, muB=muB)


# ---------------------------------------------------------------------------
# posterior arithmetic


def _log_ratio(num: float, den: float) -> float:
    if num == 0.0:
        return -math.inf if den > 0.0 else math.nan
    if den == 0.0:
        return math.inf
    return math.log(num) - math.log(den)


def log_odds(cat: CategoryParams, n1: int, n0: int) -> float:
    """Posterior log-odds of the qualified type; +-inf for revealing histories."""
    lo = _log_ratio(cat.p0, 1.0 - cat.p0)
    if n1:
        lo += n1 * _log_ratio(cat.qH, 1.0 - cat.qL)
    if n0:
        lo += n0 * _log_ratio(1.0 - cat.qH, cat.qL)
    if math.isnan(lo):
        raise ImpossibleHistoryError(
            f"impossible history: ({n1}, {n0}) has zero likelihood under both types for {cat.label}"
        )
    return lo


def odds_to_prob(lo: float) -> float:
    if lo == math.inf:
        return 1.0
    if lo == -math.inf:
        return 0.0
    if lo >= 0:
        return 1.0 / (1.0 + math.exp(-lo))
    e = math.exp(lo)
    return e / (1.0 + e)


def posterior(cat: CategoryParams, n1: int, n0: int) -> float:
    """Pr(qualified | n1 ones and n0 zeros)."""
    return odds_to_prob(log_odds(cat, n1, n0))


def predictive_one(cat: CategoryParams, p: float) -> float:
    """Pr(next signal is 1) for a candidate with posterior ``p``."""
    return p * cat.qH + (1.0 - p) * (1.0 - cat.qL)


def signal_prob(cat: CategoryParams, n1: int, n0: int, s: int) -> float:
    one = predictive_one(cat, posterior(cat, n1, n0))
    return one if s else 1.0 - one


def is_acceptable(cat: CategoryParams, n1: int, n0: int) -> bool:
    return posterior(cat, n1, n0) >= cat.Pbar


def minority_category(scenario: Scenario) -> Category | None:
    """The category whose evaluation is Blackwell less informative, if any."""
    a, b = scenario.catA, scenario.catB
    if b.qH >= a.qH and b.qL >= a.qL and (b.qH > a.qH or b.qL > a.qL):
        return Category.A
    if a.qH >= b.qH and a.qL >= b.qL and (a.qH > b.qH or a.qL > b.qL):
        return Category.B
    return None


# ---------------------------------------------------------------------------
# validation


def _category_violations(cat: CategoryParams) -> list[str]:
    out = []
    tag = str(cat.label)
    for name in ("p0", "qH", "qL", "Pbar"):
        x = getattr(cat, name)
        if not (0.0 <= x <= 1.0) or math.isnan(x):
            out.append(f"{tag}.{name} out of [0,1]")
    if not (0.0 < cat.p0 < 1.0):
        out.append(f"{tag}.p0 must lie strictly inside (0,1)")
    if not cat.Pbar > 0.0:
        out.append(f"{tag}.Pbar must be positive")
    if not cat.v > 0.0:
        out.append(f"{tag}.v must be positive")
    if not cat.p0 < cat.Pbar:
        out.append(f"{tag}: prior not below threshold")
    if cat.qH < 1.0 - cat.qL:
        out.append(f"{tag}: qH < 1 - qL, a success would lower the posterior")
    return out


def hard_violations(scenario: Scenario) -> list[str]:
    """Type-invariant violations; any of these makes the scenario unusable."""
    out: list[str] = []
    if not (0.0 < scenario.delta < 1.0):
        out.append("delta out of (0,1)")
    for cat, label in ((scenario.catA, Category.A), (scenario.catB, Category.B)):
        if cat.label is not label:
            out.append(f"category block {label} carries label {cat.label}")
        out.extend(_category_violations(cat))
    if scenario.muA < 0.0 or scenario.muB < 0.0:
        out.append("negative search probability")
    if scenario.muA + scenario.muB > 1.0 + 1e-12:
        out.append("search probabilities exceed 1")
    cfg = scenario.tolerances
    if not (cfg.index_tol > 0 and cfg.prob_tol > 0):
        out.append("tolerances must be positive")
    if cfg.horizon_cap < 1:
        out.append("horizon_cap must be at least 1")
    if out:
        return out
    if not scenario.initial_pool:
        out.append("initial pool is empty")
    for i, c in enumerate(scenario.initial_pool):
        if c.n1 < 0 or c.n0 < 0:
            out.append(f"pool[{i}] has negative signal counts")
            continue
        cat = scenario.params(c.category)
        try:
            if is_acceptable(cat, c.n1, c.n0):
                out.append(f"pool[{i}] is already acceptable")
        except ImpossibleHistoryError:
            out.append(f"pool[{i}] has an impossible history")
    return out


def validate(scenario: Scenario) -> list[str]:
    """All violated invariants and standing assumptions, one message each."""
    out = hard_violations(scenario)
    if out:
        return out
    if scenario.policy is Policy.MYOPIC:
        # imported lazily: indices depends on this module
        from .indices import myopic_search_value, myopic_value

        uS = myopic_search_value(scenario)
        for cat in (scenario.catA, scenario.catB):
            if not myopic_value(cat, 0, 0) > uS:
                out.append(f"{cat.label}: blank-slate myopic value not above search value")
    return out


def require_valid(scenario: Scenario) -> None:
    bad = hard_violations(scenario)
    if bad:
        raise ScenarioError(bad)
