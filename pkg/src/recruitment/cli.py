"""Command-line entry point: ``recruitment <verb> [scenario] [options]``.

A scenario is either a path to a ``key = value`` document (see
:mod:`recruitment.scenario_io`) or a builtin id: ``P1`` .. ``P4`` with an
optional ``.before`` / ``.after`` suffix (the bare id means ``.before``).

Every verb prints one table.  ``--format csv`` writes a header row and
RFC 4180 quoting; ``--format json`` writes ``{"meta": ..., "results": [...]}``.
Floats are printed with 12 significant digits.

Exit status: 0 on success, 1 when ``validate`` finds violations, 2 on
usage errors, 3 when a lower layer raises.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path

from . import __version__, _core
from .evaluator import exact_outcome, monte_carlo
from .experiments import (
    SweepSpec,
    builtin_case,
    builtin_cases,
    perturbations,
    reproduce,
    sweep,
)
from .indices import gittins_index, myopic_search_value, myopic_value, search_index
from .model import Category, ModelError, NumericalConfig, Policy, Scenario, posterior, validate
from .policies import Scorer, depth_limited_tree
from .scenario_io import apply_overrides, parse_document, read_document, to_document

VERBS = ("validate", "indices", "action-trace", "exact", "simulate", "repro", "sweep")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


# ---------------------------------------------------------------------------
# scenario loading


def load_scenario(ref: str, overrides: Sequence[str] = (), check: bool = True) -> Scenario:
    ref = ref.strip()
    head, _, tail = ref.partition(".")
    if head.upper() in {"P1", "P2", "P3", "P4"} and tail in {"", "before", "after"} and not Path(ref).exists():
        case = builtin_case(head)
        base = case.scenario_after if tail == "after" else case.scenario_before
        doc = to_document(base)
    else:
        try:
            doc = read_document(Path(ref).read_text())
        except OSError as exc:
            raise ModelError(f"cannot read scenario {ref}: {exc.strerror}") from exc
    return parse_document(apply_overrides(doc, list(overrides)), check=check)


# ---------------------------------------------------------------------------
# verbs; each returns (rows, meta) where rows is a list of ordered dicts


def _tolerances(s: Scenario) -> dict:
    t = s.tolerances
    return {"index_tol": t.index_tol, "horizon_cap": t.horizon_cap, "prob_tol": t.prob_tol}


def cmd_validate(args) -> tuple[list[dict], dict]:
    s = load_scenario(args.scenario, args.set, check=False)
    problems = validate(s)
    rows = [{"violation": p} for p in problems]
    return rows, {"valid": not problems}


def cmd_indices(args) -> tuple[list[dict], dict]:
    s = load_scenario(args.scenario, args.set)
    cfg = s.tolerances
    rows = []
    for c in (Category.A, Category.B):
        cat = s.params(c)
        for depth in range(args.depth + 1):
            for n1 in range(depth + 1):
                n0 = depth - n1
                try:
                    p = posterior(cat, n1, n0)
                except ModelError:
                    continue
                r = gittins_index(cat, n1, n0, s.delta, cfg)
                rows.append({"item": str(c), "n1": n1, "n0": n0, "posterior": p,
                             "myopic": myopic_value(cat, n1, n0), "index": r.value, "tol": r.achieved_tol})
    VS = search_index(s)
    rows.append({"item": "search", "n1": None, "n0": None, "posterior": None,
                 "myopic": myopic_search_value(s), "index": VS.value, "tol": VS.achieved_tol})
    return rows, _tolerances(s)


def cmd_action_trace(args) -> tuple[list[dict], dict]:
    s = load_scenario(args.scenario, args.set)
    scorer = Scorer(s)
    rows = []
    for path, pool, action in depth_limited_tree(s, args.depth, scorer):
        live = " ".join(
            f"{c.category}({c.n1},{c.n0}){'x' if c.retired or i in action.retire else ''}"
            for i, c in enumerate(pool.candidates)
        )
        rows.append({"depth": len(path), "path": "".join(str(d) for d in path) or "-", "pool": live,
                     "action": str(action)})
    return rows, {"policy": str(scorer.policy), "threshold": scorer.threshold}


def _dist_rows(d) -> list[dict]:
    return [
        {"outcome": "A", "lo": d.pA_lo, "hi": d.pA_hi},
        {"outcome": "B", "lo": d.pB_lo, "hi": d.pB_hi},
        {"outcome": "none", "lo": d.pNone_lo, "hi": d.pNone_hi},
    ]


def cmd_exact(args) -> tuple[list[dict], dict]:
    s = load_scenario(args.scenario, args.set)
    d = exact_outcome(s)
    return _dist_rows(d), {"truncation_mass": d.truncation_mass, **_tolerances(s)}


def cmd_simulate(args) -> tuple[list[dict], dict]:
    s = load_scenario(args.scenario, args.set)
    m = monte_carlo(s, args.trials, args.seed, args.horizon, args.workers)
    rows = [
        {"outcome": "A", "estimate": m.pA, "stderr": m.stderrA},
        {"outcome": "B", "estimate": m.pB, "stderr": m.stderrB},
        {"outcome": "none", "estimate": m.pNone, "stderr": m.stderrNone},
    ]
    meta = {"trials": m.n, "censored": m.censored, "exhausted": m.exhausted, "trial_horizon": m.trial_horizon,
            "backend": m.backend}
    return rows, meta


def cmd_repro(args) -> tuple[list[dict], dict]:
    rows = []
    for case in builtin_cases():
        r = reproduce(case)
        rec = r.comparison
        row = {
            "case": case.id,
            "policy": str(case.policy),
            "pA_before_lo": rec.before.pA_lo,
            "pA_before_hi": rec.before.pA_hi,
            "closed_before": r.closed_before,
            "pA_after_lo": rec.after.pA_lo,
            "pA_after_hi": rec.after.pA_hi,
            "closed_after": r.closed_after,
            "verdict": str(rec.verdict),
            "conditions_hold": r.report.all_hold,
            "min_margin": r.report.min_margin,
            "tight": ";".join(r.report.tight),
        }
        if args.robustness:
            pert = perturbations(case)
            row["perturbations_ok"] = sum(p.ok for p in pert)
            row["perturbations"] = len(pert)
        rows.append(row)
    return rows, {}


def _grid(spec: str) -> tuple[str, list[float]]:
    if "=" not in spec:
        raise UsageError(f"--vary expects path=v1,v2,...; got {spec!r}")
    path, values = spec.split("=", 1)
    try:
        return path.strip(), [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--vary {path}: {exc}") from exc


def cmd_sweep(args) -> tuple[list[dict], dict]:
    case = builtin_case(args.case)
    varying = [_grid(v) for v in args.vary]
    policy = Policy(args.policy) if args.policy else None
    rows = sweep(SweepSpec(case, varying, policy, args.cap, args.workers))
    out = []
    for r in rows:
        d = dict(r.params)
        d.update(r.values)
        d["verdict"] = r.verdict
        d.update({f"margin[{k}]": v for k, v in r.margins.items()})
        d["error"] = r.error
        out.append(d)
    keys: list[str] = []
    for d in out:
        keys += [k for k in d if k not in keys]
    return [{k: d.get(k) for k in keys} for d in out], {"template": case.id}


HANDLERS = {
    "validate": cmd_validate,
    "indices": cmd_indices,
    "action-trace": cmd_action_trace,
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "repro": cmd_repro,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# output


def _rounded(obj):
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return float(fmt(obj))
    return obj


def render(rows: list[dict], meta: dict, form: str) -> str:
    if form == "json":
        doc = {"meta": _rounded(meta), "results": [_rounded(r) for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    header = list(rows[0]) if rows else []
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(r[k]) for k in header])
        return buf.getvalue()
    lines = [f"# {k}: {fmt(v)}" for k, v in meta.items()]
    if header:
        cells = [header] + [[fmt(r[k]) for k in header] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
        for row in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    elif not meta:
        lines.append("(no rows)")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="recruitment", description="Search, evaluation and selection engine.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("scenario", help="scenario file or builtin id (P1..P4[.before|.after])")
            sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                            help="override a scenario key; repeatable")
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")

    common(sub.add_parser("validate", help="list violated invariants and standing assumptions"))
    sp = sub.add_parser("indices", help="myopic values, candidate indices and the search index")
    common(sp)
    sp.add_argument("--depth", type=int, default=3)
    sp = sub.add_parser("action-trace", help="action at every node of the depth-limited game tree")
    common(sp)
    sp.add_argument("--depth", type=int, default=3)
    common(sub.add_parser("exact", help="interval-valued hiring probabilities"))
    sp = sub.add_parser("simulate", help="seeded Monte Carlo estimate")
    common(sp)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--horizon", type=int, default=10_000)
    sp.add_argument("--workers", type=int, default=1)
    sp = sub.add_parser("repro", help="golden table for P1..P4")
    common(sp, scenario=False)
    sp.add_argument("--robustness", action="store_true", help="also run the +-1e-4 perturbation checks")
    sp = sub.add_parser("sweep", help="grid sweep around a builtin case")
    common(sp, scenario=False)
    sp.add_argument("--case", default="P1")
    sp.add_argument("--vary", action="append", default=[], metavar="PATH=V1,V2,...")
    sp.add_argument("--policy", choices=[x.value for x in Policy])
    sp.add_argument("--cap", type=int, default=10_000)
    sp.add_argument("--workers", type=int, default=1)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "simulate" and args.trials < 1:
            raise UsageError("--trials must be at least 1")
        if getattr(args, "depth", 0) < 0:
            raise UsageError("--depth must be nonnegative")
        rows, meta = HANDLERS[args.verb](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"recruitment: error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, KeyError, ValueError) as exc:
        print(f"recruitment: {args.verb}: {exc}", file=sys.stderr)
        return 3
    full_meta = {"tool": f"recruitment {__version__}", "backend": _core.BACKEND}
    if args.verb == "simulate":
        full_meta["seed"] = args.seed
    full_meta.update(meta)
    for k, v in asdict(NumericalConfig()).items():
        full_meta.setdefault(k, v)
    sys.stdout.write(render(rows, full_meta if args.format == "json" else meta, args.format))
    if args.verb == "validate" and not meta["valid"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
