"""Drivers that run catalog entries over refinement ladders.

``run_estimate_check`` executes one entry: it validates parameters, runs the
operator-class precondition when the entry uses an operator, evaluates every
equation at every ladder value, classifies the trends, and assembles an
:class:`InequalityReport`.  ``refinement_study`` is the same with an explicit
strictly decreasing spacing ladder.  ``run_suite`` fans a list of specs out
over a thread pool and returns the reports in a deterministic order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from ..calculus import check_operator_class
from .catalog import ENTRIES, CatalogEntry, build_operator
from .report import (
    BOUNDED,
    DIVERGING,
    EXACT_PASS,
    EstimateSpec,
    InequalityReport,
    TermSeries,
    overall_verdict,
)

_EXACT_SLACK = 1e-9


def resolve_entry(estimate_id: str) -> CatalogEntry:
    try:
        return ENTRIES[estimate_id]
    except KeyError:
        known = ", ".join(sorted(ENTRIES))
        raise ValueError(f"unknown estimate id {estimate_id!r}; catalog ids: {known}") from None


def _class_precondition(entry: CatalogEntry, params: dict, seed: int) -> dict:
    """Reject operators that fail their sampled class membership check."""
    if "operator" not in params:
        return {}
    op = build_operator(params)
    rep = check_operator_class(op, int(params["d"]), budget=40, seed=seed)
    note = {
        "operator_class": {
            "kind": params["operator"],
            "passed": bool(rep.passed),
            "ellipticity_range": [float(rep.ellipticity_range[0]),
                                  float(rep.ellipticity_range[1])],
            "max_lipschitz_ratio": float(rep.max_lipschitz_ratio),
        }
    }
    if not rep.passed:
        raise ValueError(
            f"operator {params['operator']!r} fails its class check: {rep.failures[:3]}")
    return note


def run_estimate_check(spec: EstimateSpec) -> InequalityReport:
    entry = resolve_entry(spec.id)
    params = entry.merged(dict(spec.params))
    if entry.validate is not None:
        entry.validate(params)
    ladder = tuple(float(x) for x in (spec.ladder or entry.ladder))
    if not ladder:
        raise ValueError(f"empty ladder for {entry.id}")
    if entry.ladder_kind == "spacing":
        for x in ladder:
            if x < entry.min_spacing:
                raise ValueError(
                    f"spacing {x} is below the supported resolution "
                    f"{entry.min_spacing} for {entry.id}")

    notes = _class_precondition(entry, params, spec.seed)
    series: dict[str, TermSeries] = {}
    order: list[str] = []
    for x in ladder:
        for chk in entry.runner(params, x, spec.seed):
            if chk.equation not in series:
                series[chk.equation] = TermSeries(chk.equation, [], [])
                order.append(chk.equation)
            s = series[chk.equation]
            s.lhs.append(float(chk.lhs))
            s.rhs_terms.append([float(t) for t in chk.rhs_terms])
            notes.update(chk.notes)
    finalized = [series[name].finalize() for name in order]

    report = InequalityReport(
        id=entry.id,
        params=params,
        ladder=list(ladder),
        ladder_kind=entry.ladder_kind,
        primary=finalized[0],
        extras=finalized[1:],
        expect_divergence=entry.expect_divergence,
        seed=spec.seed,
        notes=notes,
    )
    report.verdict = overall_verdict(report)
    if entry.exact_threshold is not None:
        margin = max(report.primary.n_emp)
        satisfied = margin <= entry.exact_threshold * (1.0 + _EXACT_SLACK)
        report.notes["analytic_bound"] = {
            "threshold": entry.exact_threshold,
            "max_n_emp": margin,
            "satisfied": bool(satisfied),
        }
        if satisfied and report.verdict != DIVERGING:
            report.verdict = EXACT_PASS
    return report


def refinement_study(spec: EstimateSpec, ladder) -> InequalityReport:
    """Run one entry over an explicit spacing ladder of three or more steps."""
    ladder = tuple(float(x) for x in ladder)
    if len(ladder) < 3:
        raise ValueError("refinement ladders need at least 3 spacings")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError(f"refinement ladders must be strictly decreasing, got {ladder}")
    entry = resolve_entry(spec.id)
    if entry.ladder_kind != "spacing":
        raise ValueError(f"{entry.id} is not driven by a spacing ladder")
    return run_estimate_check(
        EstimateSpec(id=spec.id, params=dict(spec.params), ladder=ladder, seed=spec.seed))


def run_suite(specs, jobs: int = 1) -> list[InequalityReport]:
    """Run several estimate checks, optionally in parallel.

    The result order and content do not depend on ``jobs``; reports come back
    sorted by estimate id with ties broken by input position.
    """
    specs = list(specs)
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if jobs == 1:
        reports = [run_estimate_check(s) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_estimate_check, specs))
    keyed = sorted(range(len(reports)), key=lambda i: (reports[i].id, i))
    return [reports[i] for i in keyed]
