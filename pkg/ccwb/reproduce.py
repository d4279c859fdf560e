# ccwb/reproduce.py
"""
One-shot reproduction of every claim the workbench can check, grouped by
scope. Each check becomes a Report; the bundle's exit code is 1 if any check
failed, else 2 if any search hit its budget, else 0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from ccwb.builtins import builtin_family
from ccwb.constructions import honest, partial, separation
from ccwb.errors import EXIT_BUDGET, EXIT_FAILURE, EXIT_OK, BudgetExceededError, UsageError, WorkbenchError
from ccwb.logger import logger
from ccwb.protocols import HONEST, MALICIOUS, classical_to_halfduplex, run_halfduplex, verify_halfduplex
from ccwb.rectangles import (
    Axis,
    bipartition_certificate,
    build_adjacency,
    check_expansion,
    check_fooling_set,
    gamma_table,
    neighbourhood,
    verify_fooling_family,
    verify_partition,
)
from ccwb.schemas.report import CheckStatus, Report, ReportBundle
from ccwb.solver import SolveMode, cc_exact, cc_lower_bound, ceil_log2
from ccwb.tables import (
    blue_closed_form,
    gen_g3,
    gen_gn,
    gen_named,
    green_closed_form,
    simple_input_counts,
)

# section scopes run the core checks of a group, without its extension checks
SECTION_SCOPES = {"section-3": "partial", "section-4": "honest", "section-5": "separation"}
SCOPES = ("all", "partial", "honest", "separation", *SECTION_SCOPES)
SEPARATION_STATEMENT = "HD(U) ≤ 5 < 6 ≤ CC(M)"

EXPANSION_THRESHOLD = 17
HORIZONTAL_K = 9
VERTICAL_K = 13

# n -> (Gamma', Gamma) on one vertical component, S0 as the hub
EXPECTED_GAMMA = {
    1: (4, 4), 2: (5, 6), 3: (6, 6), 4: (7, 8), 5: (7, 8), 6: (9, 10),
    7: (10, 11), 8: (11, 12), 9: (12, 13), 10: (12, 13), 11: (12, 13), 12: (12, 13),
}
S_ZERO_RECTS = 6
S_VALUE_RECTS = 2
S_PARTITION_SIZE = 30
FIGURE_MATCH_RATE = 0.95


@dataclass
class CheckResult:
    passed: bool | None          # None: informational value
    value: Any = None
    witness: Any = None
    details: dict = field(default_factory=dict)
    budget: bool = False


@dataclass(frozen=True)
class Check:
    task_id: str
    instance: str
    run: Callable[[], CheckResult]
    heavy: bool = False
    extension: bool = False


# ============== SOLVER SANITY ==============

def _named_cc(family: str, n: int) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        result = cc_exact(gen_named(family, n), SolveMode.TOTAL, n + 2, witness=False, progress=False)
        return CheckResult(result.depth == n + 1, result.depth,
                           details={"expected": n + 1, "nodes": result.stats.nodes},
                           budget=result.budget_exceeded)
    return run


def _embedding() -> CheckResult:
    t = gen_named("eq", 2)
    proof = cc_exact(t, SolveMode.TOTAL, 4, progress=False).witness
    s_a, s_b = classical_to_halfduplex(proof)
    bad = []
    for x, y, want in t.defined_cells():
        outcomes = run_halfduplex(s_a, s_b, x, y, MALICIOUS)
        for o in outcomes:
            if o.silent_rounds or o.spent_rounds or o.a_out != want or o.b_out != want:
                bad.append([x, y])
    return CheckResult(not bad, s_a.rounds, witness=bad[:5] or None, details={"pairs": t.n_rows * t.n_cols})


# ============== PARTIAL FUNCTIONS ==============

def _g3_halfduplex() -> CheckResult:
    ce = verify_halfduplex(*partial.g3_strategies(), gen_g3(), MALICIOUS)
    return CheckResult(ce is None, 1, witness=None if ce is None else [ce.x, ce.y])


def _g3_cc() -> CheckResult:
    result = cc_exact(gen_g3(), SolveMode.PARTIAL_GLOBAL, 4, witness=False, progress=False)
    return CheckResult(result.depth == 2 and result.lower_bound == 2, result.depth,
                       details={"lower_bound": result.lower_bound}, budget=result.budget_exceeded)


def _gn_protocols() -> CheckResult:
    failures = {}
    depths = {}
    for n in range(1, partial.GN_VERIFY_MAX_N + 1):
        halfduplex, local = partial.verify_gn(n)
        depth = partial.gn_local_protocol(n).depth
        depths[n] = depth
        if halfduplex is not None:
            failures[f"halfduplex-{n}"] = [halfduplex.x, halfduplex.y]
        if local is not None:
            failures[f"local-{n}"] = [local.x, local.y]
        if depth != n + ceil_log2(n + 1):
            failures[f"depth-{n}"] = depth
    return CheckResult(not failures, depths, witness=failures or None)


def _gn_lower_bound() -> CheckResult:
    bounds = {n: cc_lower_bound(gen_gn(n), mode=SolveMode.PARTIAL_GLOBAL) for n in range(1, 5)}
    return CheckResult(all(b == 2 * n for n, b in bounds.items()), bounds)


def _counting() -> CheckResult:
    wrong = {}
    for n in range(1, 11):
        green, blue = simple_input_counts(n)
        if (green, blue) != (green_closed_form(n), blue_closed_form(n)):
            wrong[n] = [green, blue]
    bound = partial.counting_lower_bound(1)
    return CheckResult(not wrong and bound == Fraction(16, 6),
                       {n: str(partial.counting_lower_bound(n)) for n in range(1, 7)},
                       witness=wrong or None,
                       details={"asymptotic": partial.COUNTING_ASYMPTOTIC})


# ============== HONEST ADVERSARY ==============

def _f4_honest() -> CheckResult:
    ce = verify_halfduplex(*honest.f4_strategies(), honest.f4_table(), HONEST)
    return CheckResult(ce is None, honest.F4_ROUNDS)


def _f4_malicious() -> CheckResult:
    ce = verify_halfduplex(*honest.f4_strategies(), honest.f4_table(), MALICIOUS)
    failed_at_rr = ce is not None and (ce.x, ce.y) == (0, 0)
    return CheckResult(failed_at_rr, None if ce is None else [ce.x, ce.y],
                       details={} if ce is None else {"outputs": [ce.outcome.a_out, ce.outcome.b_out]})


def _f4_fooling() -> CheckResult:
    cells = honest.f4_fooling10()
    violation = check_fooling_set(honest.f4_table(), cells)
    return CheckResult(violation is None and len(cells) == 10, ceil_log2(len(cells)),
                       details={"size": len(cells)})


def _f4_cc() -> CheckResult:
    result = cc_exact(honest.f4_table(), SolveMode.TOTAL, 6, witness=False, progress=False)
    return CheckResult(result.depth == 4, result.depth, budget=result.budget_exceeded)


def _f4_power_fooling() -> CheckResult:
    t = honest.power_table(honest.f4_table(), 2)
    cells = honest.power_fooling(honest.f4_fooling10(), 2, (5, 5))
    violation = check_fooling_set(t, cells)
    return CheckResult(violation is None and len(cells) == 100, ceil_log2(len(cells)), details={"size": len(cells)})


def _f4_power_strategies() -> CheckResult:
    t = honest.power_table(honest.f4_table(), 2)
    ce = verify_halfduplex(*honest.power_strategies(2), t, HONEST)
    return CheckResult(ce is None, 2 * honest.F4_ROUNDS)


# ============== SEPARATION ==============

def _u_upper() -> CheckResult:
    u = separation.build_U()
    ce = verify_halfduplex(*separation.pi_strategies(), u, MALICIOUS)
    return CheckResult(ce is None, separation.PI_ROUNDS, details={"shape": list(u.shape)})


def _m_upper() -> CheckResult:
    alice, bob = separation.alice_inputs(), separation.bob_inputs()
    s_a, s_b = separation.pi_strategies([alice[r] for r in separation.m_rows()],
                                        [bob[c] for c in separation.m_cols()])
    m = separation.build_M()
    ce = verify_halfduplex(s_a, s_b, m, MALICIOUS)
    return CheckResult(ce is None and m.shape == (29, 15), separation.PI_ROUNDS, details={"shape": list(m.shape)})


def _m_figure() -> CheckResult:
    generated = separation.build_M()
    mismatches = separation.diff(generated, separation.figure_M())
    cells = generated.n_rows * generated.n_cols
    rate = 1 - len(mismatches) / cells
    return CheckResult(rate >= FIGURE_MATCH_RATE, len(mismatches),
                       witness=[[m.row, m.col, m.generated, m.figure] for m in mismatches] or None,
                       details={"match_rate": round(rate, 4)})


def _family(name: str) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        f = builtin_family(name)
        violation = verify_fooling_family(f)
        return CheckResult(violation is None, len(f),
                           witness=None if violation is None else violation.detail,
                           details={"dropped": f.dropped})
    return run


def _m_graph(name: str, axis: Axis):
    f = builtin_family(name)
    return f, build_adjacency(f, axis)


def _horizontal_graph() -> CheckResult:
    _, g = _m_graph("m-horizontal", Axis.HORIZONTAL)
    expected = {frozenset(e) for e in separation.expected_horizontal_graph().edges()}
    got = g.edges()
    return CheckResult(got == expected, len(got),
                       details={"missing": sorted(map(sorted, expected - got)),
                                "unexpected": sorted(map(sorted, got - expected))})


def _horizontal_expansion() -> CheckResult:
    _, g = _m_graph("m-horizontal", Axis.HORIZONTAL)
    witness = check_expansion(g, HORIZONTAL_K, EXPANSION_THRESHOLD, progress=False)
    return CheckResult(witness is None, math.comb(len(g), HORIZONTAL_K),
                       witness=None if witness is None else list(witness.vertices))


def _vertical_graph() -> CheckResult:
    _, g = _m_graph("m-vertical", Axis.VERTICAL)
    structure = separation.expected_vertical_structure()
    components = {frozenset(c) for c in g.components(without=[structure.hub])}
    expected_edges = {frozenset(e) for e in structure.graph.edges()}
    ok = (components == set(structure.components)
          and g.neighbours(structure.hub) - {structure.hub} == structure.hub_neighbours
          and g.edges() == expected_edges)
    return CheckResult(ok, len(components), details={"components": [sorted(c) for c in components]})


def _gamma() -> CheckResult:
    _, g = _m_graph("m-vertical", Axis.VERTICAL)
    structure = separation.expected_vertical_structure()
    table = gamma_table(g, sorted(structure.components[1]), structure.hub)
    return CheckResult(table == EXPECTED_GAMMA, {n: list(v) for n, v in table.items()})


def _tight_set() -> CheckResult:
    _, g = _m_graph("m-vertical", Axis.VERTICAL)
    structure = separation.expected_vertical_structure()
    count = neighbourhood(g, list(structure.components[2]) + ["R0"])
    return CheckResult(count == EXPANSION_THRESHOLD, count)


def _vertical_expansion(threshold: int) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        _, g = _m_graph("m-vertical", Axis.VERTICAL)
        witness = check_expansion(g, VERTICAL_K, threshold, candidates=separation.vertical_tight_sets())
        if threshold <= EXPANSION_THRESHOLD:
            return CheckResult(witness is None, math.comb(len(g), VERTICAL_K),
                               witness=None if witness is None else list(witness.vertices))
        structure = separation.expected_vertical_structure()
        found = (witness is not None and witness.neighbours == EXPANSION_THRESHOLD
                 and set(witness.vertices) == structure.components[2] | {"R0"})
        return CheckResult(found, None if witness is None else witness.neighbours,
                           witness=None if witness is None else list(witness.vertices))
    return run


def _certificate(name: str, axis: Axis) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        f = builtin_family(name)
        if verify_fooling_family(f) is not None:
            return CheckResult(False, None, details={"family": "verification failed"})
        cert = bipartition_certificate(f.table, f, axis, EXPANSION_THRESHOLD, progress=False)
        return CheckResult(cert.bound == 6, cert.bound,
                           witness=None if cert.bipartition_ok else list(cert.worst_split),
                           details={"bipartitions": cert.bipartitions, "worst_max": cert.worst_max,
                                    "dropped": list(cert.dropped)})
    return run


def _s_cc() -> CheckResult:
    result = cc_exact(separation.figure_S(), SolveMode.TOTAL, 6, witness=False)
    return CheckResult(result.depth == 6, result.depth, budget=result.budget_exceeded,
                       details={"nodes": result.stats.nodes, "wall_time_s": round(result.stats.wall_time, 1)})


def _s_partition() -> CheckResult:
    t = separation.figure_S()
    parts = separation.s_partition(t)
    counts = {value: result.count for value, result in parts}
    rects = [r for _, result in parts for r in result.rects]
    expected = all(c == (S_ZERO_RECTS if v == 0 else S_VALUE_RECTS) for v, c in counts.items())
    violation = verify_partition(t, rects, SolveMode.TOTAL)
    return CheckResult(expected and violation is None and len(rects) == S_PARTITION_SIZE, len(rects),
                       details={"per_value": counts})


# ============== SCOPES ==============

def checks_for(scope: str) -> list[Check]:
    if scope not in SCOPES:
        raise UsageError(f"unknown scope '{scope}' (choose from {', '.join(SCOPES)})")
    solver = [Check(f"solver.{family}{n}", f"cc({family.upper()}_{n}) = {n + 1}", _named_cc(family, n))
              for family in ("eq", "ip", "disj") for n in (1, 2)]
    solver += [
        Check("solver.eq3", "cc(EQ_3) = 4", _named_cc("eq", 3)),
        Check("embedding.eq2", "EQ_2 protocol as half-duplex strategies", _embedding),
    ]
    groups = {
        "partial": [
            Check("g3.halfduplex", "g in 1 half-duplex round, malicious adversary", _g3_halfduplex),
            Check("g3.cc", "classical complexity of g = 2", _g3_cc),
            Check("gn.protocols", "g_n half-duplex and local protocols, n <= 4", _gn_protocols),
            Check("gn.lower_bound", "lower bound for g_n = 2n, n <= 4", _gn_lower_bound),
            Check("gn.counting", "simple-input counts and counting bound", _counting),
        ],
        "honest": [
            Check("f4.honest", "f in 3 rounds, honest adversary", _f4_honest),
            Check("f4.malicious", "the same strategies fail at (r, r), malicious adversary", _f4_malicious),
            Check("f4.fooling", "fooling set of 10 cells for f", _f4_fooling),
            Check("f4.cc", "classical complexity of f = 4", _f4_cc),
            Check("f4.power_fooling", "fooling set of 100 cells for f^2", _f4_power_fooling, extension=True),
            Check("f4.power_strategies", "f^2 in 6 rounds, honest adversary", _f4_power_strategies, extension=True),
        ],
        "separation": [
            Check("u.upper", "U in 5 half-duplex rounds, malicious adversary", _u_upper),
            Check("m.upper", "M (29x15) in 5 half-duplex rounds", _m_upper),
            Check("m.figure", "generated M against the published table", _m_figure),
            Check("family.u-horizontal", "25 fooling rectangles on U", _family("u-horizontal")),
            Check("family.u-vertical", "29 fooling rectangles on U", _family("u-vertical")),
            Check("family.m-horizontal", "25 fooling rectangles on M", _family("m-horizontal")),
            Check("family.m-vertical", "29 fooling rectangles on M", _family("m-vertical")),
            Check("graph.horizontal", "horizontal adjacency graph", _horizontal_graph),
            Check("expansion.horizontal", "every 9 vertices have >= 17 neighbours", _horizontal_expansion),
            Check("graph.vertical", "vertical adjacency components and hub", _vertical_graph),
            Check("graph.gamma", "Gamma and Gamma' on a vertical component", _gamma),
            Check("graph.tight_set", "one component plus R0 has 17 neighbours", _tight_set),
            Check("expansion.vertical", "every 13 vertices have >= 17 neighbours",
                  _vertical_expansion(EXPANSION_THRESHOLD), heavy=True),
            Check("expansion.vertical.witness", "some 13 vertices have only 17 neighbours",
                  _vertical_expansion(EXPANSION_THRESHOLD + 1), heavy=True),
            Check("certificate.rows", "row bipartitions of M meet >= 17 rectangles on one side",
                  _certificate("m-horizontal", Axis.HORIZONTAL)),
            Check("certificate.cols", "column bipartitions of M meet >= 17 rectangles on one side",
                  _certificate("m-vertical", Axis.VERTICAL)),
            Check("s.cc", "classical complexity of S = 6", _s_cc, heavy=True),
            Check("s.partition", "S partitions into 30 monochromatic rectangles", _s_partition),
        ],
    }
    if scope == "all":
        return solver + [c for group in groups.values() for c in group]
    if scope in SECTION_SCOPES:
        return [c for c in groups[SECTION_SCOPES[scope]] if not c.extension]
    return groups[scope]


def run_check(check: Check, fast: bool = False) -> Report:
    if fast and check.heavy:
        logger.info(f"Skipping {check.task_id} (fast mode)")
        return Report(task_id=check.task_id, instance=check.instance, status=CheckStatus.skipped)
    logger.info(f"Running {check.task_id}: {check.instance}")
    start = time.perf_counter()
    try:
        result = check.run()
    except BudgetExceededError as e:
        logger.warning(f"{check.task_id}: {e}")
        result = CheckResult(False, None, details={"error": str(e)}, budget=True)
    except WorkbenchError as e:
        logger.error(f"{check.task_id} raised {type(e).__name__}: {e}")
        result = CheckResult(False, None, details={"error": str(e)})
    runtime_ms = (time.perf_counter() - start) * 1000

    if result.budget:
        status = CheckStatus.budget
    elif result.passed is None:
        status = CheckStatus.value
    else:
        status = CheckStatus.passed if result.passed else CheckStatus.failed
    report = Report(task_id=check.task_id, instance=check.instance, status=status, value=result.value,
                    witness=result.witness, runtime_ms=round(runtime_ms, 1), details=result.details)
    log = logger.info if report.ok else logger.warning
    log(f"{check.task_id}: {status.value} ({runtime_ms:.0f} ms)")
    return report


def bundle_exit_code(reports: list[Report]) -> int:
    if any(r.status is CheckStatus.failed for r in reports):
        return EXIT_FAILURE
    if any(r.status is CheckStatus.budget for r in reports):
        return EXIT_BUDGET
    return EXIT_OK


def _separation(reports: list[Report]) -> str | None:
    passed = {r.task_id for r in reports if r.status is CheckStatus.passed}
    if {"u.upper", "certificate.rows", "certificate.cols"} <= passed:
        return SEPARATION_STATEMENT
    return None


def reproduce(scope: str, fast: bool = False) -> ReportBundle:
    checks = checks_for(scope)
    reports = [run_check(check, fast) for check in checks]
    summary: dict[str, int] = {}
    for r in reports:
        summary[r.status.value] = summary.get(r.status.value, 0) + 1
    bundle = ReportBundle(command="reproduce", scope=scope, reports=reports, summary=summary,
                          separation=_separation(reports), exit_code=bundle_exit_code(reports))
    if bundle.separation:
        logger.info(f"Separation: {bundle.separation}")
    logger.info(f"Reproduce {scope}: {summary}, exit code {bundle.exit_code}")
    return bundle
