"""Flat ``key = value`` scenario documents.

Example::

    # P1, no search
    delta = 0.9
    policy = myopic
    muA = 0
    muB = 0
    A.p0 = 0.8
    A.v = 1.5
    A.qH = 0.6
    A.qL = 1
    A.Pbar = 0.9
    B.p0 = 0.7
    ...
    tolerances.horizon_cap = 200     # optional, like the other tolerances.*
    pool = A:0:0, B:0:0              # optional, category:n1:n0 in arrival order

Blank lines and ``#`` comments are ignored.  Unknown or repeated keys
are errors.
"""
from __future__ import annotations

from dataclasses import fields

from .model import (
    CandidateState,
    Category,
    CategoryParams,
    ModelError,
    NumericalConfig,
    Policy,
    Scenario,
    default_pool,
    hard_violations,
)

CATEGORY_FIELDS = ("p0", "v", "qH", "qL", "Pbar")
TOP_KEYS = ("delta", "policy", "muA", "muB")
TOLERANCE_KEYS = tuple(f.name for f in fields(NumericalConfig))
OPTIONAL = {"muA": "0", "muB": "0", "policy": "myopic"}


class ScenarioParseError(ModelError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def known_keys() -> list[str]:
    keys = list(TOP_KEYS)
    keys += [f"{c}.{f}" for c in "AB" for f in CATEGORY_FIELDS]
    keys += [f"tolerances.{k}" for k in TOLERANCE_KEYS]
    keys.append("pool")
    return keys


def read_document(text: str) -> dict[str, str]:
    doc: dict[str, str] = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in doc:
            problems.append(f"duplicate key {key}")
        doc[key] = value
    if problems:
        raise ScenarioParseError(problems)
    return doc


def apply_overrides(doc: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(doc)
    for item in overrides:
        if "=" not in item:
            raise ScenarioParseError([f"override {item!r} is not key=value"])
        key, value = (part.strip() for part in item.split("=", 1))
        out[key] = value
    return out


def _number(doc: dict[str, str], key: str, problems: list[str], kind=float):
    try:
        return kind(doc[key])
    except ValueError:
        problems.append(f"{key}: not a valid {'integer' if kind is int else 'number'} ({doc[key]!r})")
        return None


def _pool(text: str, problems: list[str]) -> tuple[CandidateState, ...]:
    out = []
    for item in text.split(","):
        parts = item.strip().split(":")
        try:
            label = Category(parts[0].strip())
            n1, n0 = (int(x) for x in parts[1:3]) if len(parts) == 3 else (0, 0)
            if len(parts) not in (1, 3):
                raise ValueError
        except (ValueError, IndexError):
            problems.append(f"pool: bad entry {item.strip()!r}, expected category[:n1:n0]")
            continue
        out.append(CandidateState(label, n1, n0))
    return tuple(out)


def parse_document(doc: dict[str, str], check: bool = True) -> Scenario:
    """Build a scenario; with ``check`` the type invariants are enforced too."""
    problems = [f"unknown key {k}" for k in doc if k not in known_keys()]
    for label in "AB":
        present = [f for f in CATEGORY_FIELDS if f"{label}.{f}" in doc]
        if not present:
            problems.append(f"missing category {label}")
        else:
            problems += [f"missing key {label}.{f}" for f in CATEGORY_FIELDS if f not in present]
    if "delta" not in doc:
        problems.append("missing key delta")
    if problems:
        raise ScenarioParseError(problems)

    doc = {**OPTIONAL, **doc}
    values = {k: _number(doc, k, problems) for k in ("delta", "muA", "muB")}
    cats = {}
    for label in "AB":
        kw = {f: _number(doc, f"{label}.{f}", problems) for f in CATEGORY_FIELDS}
        cats[label] = kw
    tol = {}
    for k in TOLERANCE_KEYS:
        key = f"tolerances.{k}"
        if key in doc:
            tol[k] = _number(doc, key, problems, int if k == "horizon_cap" else float)
    try:
        policy = Policy(doc["policy"].lower())
    except ValueError:
        problems.append(f"policy: expected myopic or optimal, got {doc['policy']!r}")
        policy = Policy.MYOPIC
    pool = _pool(doc["pool"], problems) if "pool" in doc else default_pool()
    if problems:
        raise ScenarioParseError(problems)

    scenario = Scenario(
        values["delta"],
        CategoryParams(Category.A, **cats["A"]),
        CategoryParams(Category.B, **cats["B"]),
        values["muA"],
        values["muB"],
        policy,
        pool,
        NumericalConfig(**tol),
    )
    bad = hard_violations(scenario) if check else []
    if bad:
        raise ScenarioParseError(bad)
    return scenario


def parse_scenario(text: str, overrides: list[str] | None = None) -> Scenario:
    return parse_document(apply_overrides(read_document(text), overrides or []))


def to_document(s: Scenario) -> dict[str, str]:
    doc = {"delta": repr(s.delta), "policy": s.policy.value, "muA": repr(s.muA), "muB": repr(s.muB)}
    for cat in (s.catA, s.catB):
        for f in CATEGORY_FIELDS:
            doc[f"{cat.label}.{f}"] = repr(float(getattr(cat, f)))
    for k in TOLERANCE_KEYS:
        doc[f"tolerances.{k}"] = repr(getattr(s.tolerances, k))
    if s.initial_pool != default_pool():
        doc["pool"] = ", ".join(f"{c.category}:{c.n1}:{c.n0}" for c in s.initial_pool)
    return doc


def dump_scenario(s: Scenario) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_document(s).items())
