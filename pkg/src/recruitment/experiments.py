"""Golden cases P1-P4, their inequality conditions, robustness checks and sweeps."""
from __future__ import annotations

import concurrent.futures as cf
import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from . import closed_forms as cfm
from .evaluator import ComparisonRecord, Verdict, compare
from .indices import gittins_index, myopic_search_value, myopic_value, search_index
from .model import (
    Category,
    CategoryParams,
    ModelError,
    NumericalConfig,
    Policy,
    Scenario,
    hard_violations,
)

PBAR_A = 0.90
PBAR_B = 0.95
TIGHT_MARGIN = 1e-2


# ---------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class Condition:
    """A chain g_0 > g_1 > ... where every member of a group beats every member of the next."""

    name: str
    groups: tuple[tuple[tuple[str, float], ...], ...]

    @property
    def margin(self) -> float:
        return min(
            min(v for _, v in hi) - max(v for _, v in lo) for hi, lo in zip(self.groups, self.groups[1:])
        )

    @property
    def holds(self) -> bool:
        return self.margin > 0.0

    @property
    def tight(self) -> bool:
        return 0.0 < self.margin < TIGHT_MARGIN

    def describe(self) -> str:
        parts = [", ".join(f"{k}={v:.6g}" for k, v in g) for g in self.groups]
        return " > ".join(parts)


def chain(name: str, *groups) -> Condition:
    norm = []
    for g in groups:
        if isinstance(g[0], str):
            g = (g,)
        norm.append(tuple((k, float(v)) for k, v in g))
    return Condition(name, tuple(norm))


def _V(s: Scenario, c: Category, n0: int = 0) -> float:
    return gittins_index(s.params(c), 0, n0, s.delta, s.tolerances).value


def _u(s: Scenario, c: Category, n0: int = 0) -> float:
    return myopic_value(s.params(c), 0, n0)


def _lam(s: Scenario, c: Category, n0: int = 0) -> float:
    return cfm.lam(s.params(c), n0)


def _search_reduces_a(after: Scenario) -> Condition:
    a, b = after.catA, after.catB
    return chain(
        "search lowers A's chance",
        ("muB*p0B*(1-qHA)", after.muB * b.p0 * (1.0 - a.qH)),
        ("muA*(1-p0A)*qHA", after.muA * (1.0 - a.p0) * a.qH),
    )


def _shift_reduces_a(before: Scenario, after: Scenario) -> Condition:
    muA, muB = before.muA, before.muB
    zeta = after.muA - before.muA
    lA, lB, lB0 = _lam(before, Category.A), _lam(before, Category.B), _lam(before, Category.B, 1)
    lhs = muA / (muA * lA + muB * lB)
    rhs = (1.0 - lB0) * (muA + zeta) / ((muA + zeta) * lA + (muB - zeta) * (lB + lB0 * (1.0 - lB)))
    return chain("shift lowers A's chance", ("lhs", lhs), ("rhs", rhs))


def conditions_p1(before: Scenario, after: Scenario) -> list[Condition]:
    uA, uB, uS = _u(after, Category.A), _u(after, Category.B), myopic_search_value(after)
    return [
        chain("A evaluated first", ("uA()", uA), ("uB()", uB)),
        chain("B preferred to search initially", ("uA()", uA), ("uB()", uB), ("uS", uS)),
        chain("search beats A after one failure", ("uS", uS), ("uA(0)", _u(after, Category.A, 1))),
        _search_reduces_a(after),
    ]


def conditions_p2(before: Scenario, after: Scenario) -> list[Condition]:
    uS0, uSz = myopic_search_value(before), myopic_search_value(after)
    uA0, uB0 = _u(before, Category.A, 1), _u(before, Category.B, 1)
    return [
        chain(
            "blank slates beat search, search beats one failure",
            ("uB()", _u(before, Category.B)),
            ("uA()", _u(before, Category.A)),
            ("uS", uS0),
            (("uA(0)", uA0), ("uB(0)", uB0)),
        ),
        chain("after the shift B survives one failure, A does not", ("uB(0)", uB0), ("uS'", uSz), ("uA(0)", uA0)),
        _shift_reduces_a(before, after),
    ]


def conditions_p3(before: Scenario, after: Scenario) -> list[Condition]:
    VS = search_index(after).value
    VA, VB = _V(after, Category.A), _V(after, Category.B)
    return [
        chain("B evaluated first", ("VB()", VB), ("VA()", VA)),
        chain("one failure retires an arrival", (("VA()", VA), ("VB()", VB)), ("VS", VS),
              ("VA(0)", _V(after, Category.A, 1))),
        _search_reduces_a(after),
    ]


def conditions_p4(before: Scenario, after: Scenario) -> list[Condition]:
    VS0, VSz = search_index(before).value, search_index(after).value
    VA, VB = _V(before, Category.A), _V(before, Category.B)
    VA0, VB0, VB00 = _V(before, Category.A, 1), _V(before, Category.B, 1), _V(before, Category.B, 2)
    return [
        chain("B evaluated first", ("VB()", VB), ("VA()", VA)),
        chain("one failure retires either arrival", (("VA()", VA), ("VB()", VB)), ("VS", VS0),
              (("VA(0)", VA0), ("VB(0)", VB0))),
        chain("after the shift B needs two failures", (("VA()", VA), ("VB(0)", VB0)), ("VS'", VSz),
              (("VA(0)", VA0), ("VB(0,0)", VB00))),
        _shift_reduces_a(before, after),
    ]


# ---------------------------------------------------------------------------
# golden cases


@dataclass(frozen=True)
class GoldenCase:
    id: str
    scenario_before: Scenario
    scenario_after: Scenario
    conditions: Callable[[Scenario, Scenario], list[Condition]]
    closed_form_before: Callable[[Scenario], float]
    closed_form_after: Callable[[Scenario], float]
    expected_direction: Verdict = Verdict.BACKFIRES
    zeta: float | None = None

    @property
    def policy(self) -> Policy:
        return self.scenario_before.policy

    def with_scenarios(self, before: Scenario, after: Scenario) -> "GoldenCase":
        return GoldenCase(self.id, before, after, self.conditions, self.closed_form_before,
                               self.closed_form_after, self.expected_direction, self.zeta)


def _cat(label: Category, p0: float, v: float, qH: float, qL: float = 1.0) -> CategoryParams:
    return CategoryParams(label, p0, v, qH, qL, PBAR_A if label is Category.A else PBAR_B)


def builtin_cases(cfg: NumericalConfig | None = None) -> list[GoldenCase]:
    cfg = cfg or NumericalConfig()
    A, B = Category.A, Category.B

    def pair(delta, catA, catB, mu_before, mu_after, policy):
        s = Scenario(delta, catA, catB, *mu_before, policy=policy, tolerances=cfg)
        return s, s.with_mu(*mu_after)

    p1 = pair(0.9, _cat(A, 0.8, 1.5, 0.6), _cat(B, 0.7, 1.0, 1.0), (0.0, 0.0), (2 / 3, 1 / 3), Policy.MYOPIC)
    p2 = pair(0.9, _cat(A, 0.8, 1.5, 0.2), _cat(B, 0.64, 1.0, 0.75), (0.9, 0.1), (0.94, 0.06), Policy.MYOPIC)
    p3 = pair(0.9, _cat(A, 0.75, 1.2, 0.19), _cat(B, 0.7, 1.0, 1.0), (0.0, 0.0), (0.52, 0.48), Policy.OPTIMAL)
    p4 = pair(0.9, _cat(A, 0.69, 1.01, 0.4), _cat(B, 0.68, 1.0, 0.8), (0.15, 0.85), (0.16, 0.84), Policy.OPTIMAL)
    return [
        GoldenCase("P1", *p1, conditions_p1, cfm.a_first_no_search, cfm.a_first_with_search),
        GoldenCase("P2", *p2, conditions_p2, cfm.b_then_a_one_failure, cfm.b_then_a_then_b_two_failures,
                        zeta=0.04),
        GoldenCase("P3", *p3, conditions_p3, cfm.b_first_no_search, cfm.b_first_with_search),
        GoldenCase("P4", *p4, conditions_p4, cfm.b_then_a_one_failure, cfm.b_then_a_then_b_two_failures,
                        zeta=0.01),
    ]


def builtin_case(case_id: str, cfg: NumericalConfig | None = None) -> GoldenCase:
    for case in builtin_cases(cfg):
        if case.id == case_id.upper():
            return case
    raise KeyError(f"unknown builtin case {case_id!r}; expected one of P1, P2, P3, P4")


@dataclass(frozen=True)
class ConditionReport:
    case_id: str
    conditions: list[Condition]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def min_margin(self) -> float:
        return min(c.margin for c in self.conditions)

    @property
    def tight(self) -> list[str]:
        return [c.name for c in self.conditions if c.tight]


def check_conditions(case: GoldenCase) -> ConditionReport:
    return ConditionReport(case.id, case.conditions(case.scenario_before, case.scenario_after))


@dataclass(frozen=True)
class CaseResult:
    case: GoldenCase
    comparison: ComparisonRecord
    report: ConditionReport
    closed_before: float
    closed_after: float


def reproduce(case: GoldenCase, cfg: NumericalConfig | None = None) -> CaseResult:
    rec = compare(case.scenario_before, case.scenario_after, cfg)
    return CaseResult(case, rec, check_conditions(case), case.closed_form_before(case.scenario_before),
                      case.closed_form_after(case.scenario_after))


# ---------------------------------------------------------------------------
# perturbations


_PERTURBABLE = ("delta", "muA", "A.p0", "A.v", "A.qH", "B.p0", "B.v", "B.qH")


def set_param(s: Scenario, path: str, value: float) -> Scenario:
    """Copy of ``s`` with one parameter replaced; paths are ``delta``, ``muA``, ``A.qH`` and so on."""
    if "." in path:
        label, name = path.split(".", 1)
        cat = s.params(label).with_(**{name: value})
        return s.with_(**{f"cat{label}": cat})
    return s.with_(**{path: value})


def get_param(s: Scenario, path: str) -> float:
    if "." in path:
        label, name = path.split(".", 1)
        return getattr(s.params(label), name)
    return getattr(s, path)


def _shifted_pair(case: GoldenCase, path: str, value: float) -> tuple[Scenario, Scenario]:
    b, a = case.scenario_before, case.scenario_after
    if path == "muA":
        # keep muA + muB = 1 and the size of the shift
        if case.zeta is None:
            a = a.with_mu(value, 1.0 - value)
        else:
            b = b.with_mu(value, 1.0 - value)
            a = a.with_mu(value + case.zeta, 1.0 - value - case.zeta)
        return b, a
    return set_param(b, path, value), set_param(a, path, value)


@dataclass(frozen=True)
class Perturbation:
    case_id: str
    path: str
    value: float
    conditions_hold: bool | None
    verdict: Verdict | None
    skipped: str | None = None

    @property
    def ok(self) -> bool:
        return self.skipped is not None or (bool(self.conditions_hold) and self.verdict is Verdict.BACKFIRES)


def perturbations(case: GoldenCase, eps: float = 1e-4) -> list[Perturbation]:
    """Nudge each free parameter by +-eps and recheck conditions and verdict.

    Parameters pinned at a boundary (a revealing qH = 1) stay fixed, and
    so does anything whose nudge would leave its admissible range.  A
    nudge is skipped, with the reason recorded, when the base case has a
    condition margin smaller than eps.
    """
    out = []
    base = check_conditions(case)
    for path in _PERTURBABLE:
        x0 = get_param(case.scenario_after if path == "muA" and case.zeta is None else case.scenario_before, path)
        if path.endswith("qH") and x0 == 1.0:
            continue
        for sign in (1.0, -1.0):
            x = x0 + sign * eps
            b, a = _shifted_pair(case, path, x)
            if hard_violations(b) or hard_violations(a):
                out.append(Perturbation(case.id, path, x, None, None, skipped="leaves admissible range"))
                continue
            if base.min_margin < eps:
                out.append(Perturbation(case.id, path, x, None, None, skipped="base margin below perturbation"))
                continue
            trial = case.with_scenarios(b, a)
            holds = check_conditions(trial).all_hold
            verdict = compare(b, a).verdict
            out.append(Perturbation(case.id, path, x, holds, verdict))
    return out


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    """Grid over parameter paths applied to both scenarios of a template case.

    Paths are scenario keys (``delta``, ``A.qH``, ...) plus ``muA``, which
    moves the arrival split keeping the shift, and ``zeta``, which resizes
    a reallocation shift.
    """

    template: GoldenCase
    varying: Sequence[tuple[str, Sequence[float]]] = ()
    policy: Policy | None = None
    cap: int = 10_000
    workers: int = 1
    cfg: NumericalConfig | None = None

    @property
    def size(self) -> int:
        return math.prod(len(v) for _, v in self.varying) if self.varying else 1


@dataclass
class SweepRow:
    params: dict[str, float]
    values: dict[str, float] = field(default_factory=dict)
    verdict: str = ""
    margins: dict[str, float] = field(default_factory=dict)
    error: str = ""


def _apply_point(case: GoldenCase, point: dict[str, float], policy: Policy | None) -> GoldenCase:
    b, a = case.scenario_before, case.scenario_after
    if policy is not None:
        b, a = b.with_(policy=policy), a.with_(policy=policy)
    case = case.with_scenarios(b, a)
    for path, x in point.items():
        if path == "zeta":
            b = case.scenario_before
            a = b.with_mu(b.muA + x, b.muB - x)
            case = GoldenCase(case.id, b, a, case.conditions, case.closed_form_before,
                                   case.closed_form_after, case.expected_direction, x)
        else:
            case = case.with_scenarios(*_shifted_pair(case, path, x))
    return case


def _sweep_point(args) -> SweepRow:
    case, point, policy, cfg = args
    row = SweepRow(dict(point))
    try:
        case = _apply_point(case, point, policy)
        rec = compare(case.scenario_before, case.scenario_after, cfg)
    except (ModelError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    for tag, dist in (("before", rec.before), ("after", rec.after)):
        row.values[f"pA_{tag}"] = dist.midpoint(Category.A)
        row.values[f"pB_{tag}"] = dist.midpoint(Category.B)
        row.values[f"pNone_{tag}"] = dist.midpoint(None)
    row.values["width"] = max(rec.before.truncation_mass, rec.after.truncation_mass)
    row.verdict = str(rec.verdict)
    try:
        for c in case.conditions(case.scenario_before, case.scenario_after):
            row.margins[c.name] = c.margin
    except ModelError as exc:
        row.error = f"conditions: {exc}"
    return row


def sweep(spec: SweepSpec) -> list[SweepRow]:
    """One row per grid point, in grid order; evaluator failures become error tags."""
    if spec.size > spec.cap:
        raise ValueError(f"sweep has {spec.size} points, above the cap of {spec.cap}")
    names = [p for p, _ in spec.varying]
    grids = [list(v) for _, v in spec.varying]
    jobs = [(spec.template, dict(zip(names, pt)), spec.policy, spec.cfg) for pt in itertools.product(*grids)]
    if spec.workers > 1 and len(jobs) > 1:
        with cf.ProcessPoolExecutor(spec.workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
