# ccwb/main.py
"""
Communication Complexity Workbench - command line interface.
Every verification command prints a JSON report bundle on stdout and exits
with 0 (pass), 1 (failure), 2 (budget exceeded) or 64 (usage error).
"""

import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

import typer

try:  # typer>=0.26 vendors click as typer._click
    from typer._click import exceptions as click_exceptions
except ImportError:
    from click import exceptions as click_exceptions

from ccwb import __version__, config
from ccwb.builtins import FAMILY_BUILTINS, builtin_family, builtin_table, resolve_table
from ccwb.constructions import honest, partial, separation
from ccwb.database import SessionLocal
from ccwb.errors import EXIT_USAGE, UsageError, WorkbenchError
from ccwb.history import recent_runs, record_run, run_summary
from ccwb.logger import logger, set_level
from ccwb.protocols import GLOBAL, HONEST, MALICIOUS, load_protocol, save_protocol, verify_classical, verify_halfduplex
from ccwb.rectangles import (
    Axis,
    bipartition_certificate,
    build_adjacency,
    check_expansion,
    check_fooling_set,
    search_fooling_set,
    verify_fooling_family,
    verify_partition,
)
from ccwb.reproduce import SCOPES, FIGURE_MATCH_RATE, bundle_exit_code, reproduce as run_reproduce
from ccwb.schemas.report import CheckStatus, Report, ReportBundle
from ccwb.solver import SolveMode, cc_exact, ceil_log2
from ccwb.tables import dump_ccmat, gen_g3, gen_gn, save_ccmat

app = typer.Typer(help="Exact verification workbench for two-party communication complexity.")
fooling_app = typer.Typer(help="Fooling sets and fooling rectangle families.")
app.add_typer(fooling_app, name="fooling")

HALFDUPLEX_BUILTINS = ("pi", "f4", "f4-power", "g3", "gn:N")


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(__version__)
        raise typer.Exit()


@app.callback()
def app_options(
    version: bool = typer.Option(False, "--version", callback=_version_callback, is_eager=True,
                                 help="Show the workbench version and exit."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr."),
    progress: bool = typer.Option(config.PROGRESS, "--progress/--no-progress", help="tqdm progress bars on stderr."),
) -> None:
    """Global logging and progress controls."""
    if verbose:
        set_level("DEBUG")
    config.PROGRESS = progress


# ============== OUTPUT ==============

def _emit(bundle: ReportBundle, report_path: Optional[Path] = None) -> None:
    text = bundle.model_dump_json(indent=2)
    typer.echo(text)
    if report_path is not None:
        report_path.write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {report_path}")
    if bundle.exit_code:
        raise typer.Exit(code=bundle.exit_code)


def _single(command: str, report: Report, report_path: Optional[Path] = None) -> None:
    bundle = ReportBundle(command=command, reports=[report], summary={report.status.value: 1},
                          exit_code=bundle_exit_code([report]))
    _emit(bundle, report_path)


def _verdict(ok: bool) -> CheckStatus:
    return CheckStatus.passed if ok else CheckStatus.failed


# ============== TABLES AND PROTOCOLS ==============

@app.command()
def gen(
    name: str = typer.Argument(..., help="Builtin table (u, m, m-figure, s-figure, f4, g3, gn:N, eq:N, ip:N, disj:N, depth3)."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write ccmat here instead of stdout."),
) -> None:
    """Generate a builtin table in ccmat format."""
    t = builtin_table(name)
    if output is None:
        typer.echo(dump_ccmat(t), nl=False)
    else:
        save_ccmat(t, output)


@app.command()
def solve(
    table: str = typer.Argument(..., help="ccmat path or builtin name."),
    mode: SolveMode = typer.Option(SolveMode.TOTAL, "--mode", help="Leaf semantics."),
    max_depth: int = typer.Option(8, "--max-depth", help="Give up above this depth."),
    threads: Optional[int] = typer.Option(None, "--threads", help="Workers for the top-level split search."),
    memo_cap: Optional[int] = typer.Option(None, "--memo-cap", help="Memo size cap in bytes."),
    witness: Optional[Path] = typer.Option(None, "--witness", help="Write an optimal protocol as JSON."),
    report: Optional[Path] = typer.Option(None, "--report", help="Also write the report here."),
) -> None:
    """Exact deterministic communication complexity of a table."""
    t = resolve_table(table)
    result = cc_exact(t, mode, max_depth, threads=threads, memo_cap=memo_cap, witness=witness is not None)
    if result.witness is not None:
        save_protocol(result.witness, witness)
    stats = result.stats
    _single("solve", Report(
        task_id="solve",
        instance=f"{table} ({t.n_rows}x{t.n_cols}, {mode.value})",
        status=CheckStatus.budget if result.budget_exceeded else CheckStatus.value,
        value=result.depth,
        runtime_ms=round(stats.wall_time * 1000, 1),
        details={"lower_bound": result.lower_bound, "max_depth": max_depth, "nodes": stats.nodes,
                 "memo_entries": stats.memo_entries, "memo_hits": stats.memo_hits, "evictions": stats.evictions},
    ), report)


@app.command("verify-protocol")
def verify_protocol(
    protocol: Path = typer.Argument(..., help="Protocol JSON file."),
    table: str = typer.Argument(..., help="ccmat path or builtin name."),
    semantics: str = typer.Option(GLOBAL, "--semantics", help="global or local leaves."),
) -> None:
    """Check a classical protocol on every defined cell."""
    p = load_protocol(protocol)
    t = resolve_table(table)
    ce = verify_classical(p, t, semantics)
    _single("verify-protocol", Report(
        task_id="verify-protocol",
        instance=f"{protocol.name} on {table} ({semantics})",
        status=_verdict(ce is None),
        value=p.depth,
        witness=None if ce is None else {"x": ce.x, "y": ce.y, "got": ce.got, "want": ce.want},
    ))


def _halfduplex_builtin(name: str):
    name = name.lower()
    if name == "pi":
        return separation.pi_strategies(), separation.build_U()
    if name == "f4":
        return honest.f4_strategies(), honest.f4_table()
    if name == "f4-power":
        return honest.power_strategies(2), honest.power_table(honest.f4_table(), 2)
    if name == "g3":
        return partial.g3_strategies(), gen_g3()
    if name.startswith("gn:"):
        try:
            n = int(name[3:])
        except ValueError:
            raise UsageError(f"bad size in builtin '{name}'") from None
        return partial.gn_strategies(n), gen_gn(n)
    raise UsageError(f"unknown strategy builtin '{name}' (choose from {', '.join(HALFDUPLEX_BUILTINS)})")


@app.command("verify-halfduplex")
def verify_halfduplex_command(
    builtin: str = typer.Option(..., "--builtin", help="pi, f4, f4-power, g3 or gn:N."),
    adversary: str = typer.Option(MALICIOUS, "--adversary", help="honest or malicious."),
) -> None:
    """Run builtin half-duplex strategies against every adversary choice."""
    if adversary not in (HONEST, MALICIOUS):
        raise UsageError(f"unknown adversary '{adversary}'")
    (s_a, s_b), t = _halfduplex_builtin(builtin)
    ce = verify_halfduplex(s_a, s_b, t, adversary)
    witness = None
    if ce is not None:
        witness = {"x": ce.x, "y": ce.y, "want": ce.want,
                   "outputs": [ce.outcome.a_out, ce.outcome.b_out],
                   "alice": [e.value for e in ce.outcome.a_events],
                   "bob": [e.value for e in ce.outcome.b_events]}
    _single("verify-halfduplex", Report(
        task_id="verify-halfduplex",
        instance=f"{builtin} ({adversary} adversary)",
        status=_verdict(ce is None),
        value=s_a.rounds,
        witness=witness,
    ))


# ============== FOOLING SETS AND RECTANGLES ==============

@fooling_app.command("verify")
def fooling_verify(
    builtin: str = typer.Option(..., "--builtin", help=f"One of {', '.join(FAMILY_BUILTINS)}."),
) -> None:
    """Check values, disjointness and the cross condition of a fooling family."""
    f = builtin_family(builtin)
    violation = verify_fooling_family(f)
    _single("fooling-verify", Report(
        task_id="fooling.verify",
        instance=f"{f.name} on {f.table.n_rows}x{f.table.n_cols}",
        status=_verdict(violation is None),
        value=len(f),
        witness=None if violation is None else {"kind": violation.kind, "detail": violation.detail,
                                                "cells": [list(c) for c in violation.cells]},
        details={"dropped": f.dropped},
    ))


@fooling_app.command("search")
def fooling_search(
    table: str = typer.Argument(..., help="ccmat path or builtin name."),
    restarts: int = typer.Option(100, "--restarts", help="Randomized greedy passes."),
    seed: int = typer.Option(0, "--seed", help="Random seed."),
) -> None:
    """Look for a large fooling set with randomized greedy restarts."""
    t = resolve_table(table)
    cells = search_fooling_set(t, restarts, seed)
    violation = check_fooling_set(t, cells)
    _single("fooling-search", Report(
        task_id="fooling.search",
        instance=f"{table} ({restarts} restarts, seed {seed})",
        status=CheckStatus.value if violation is None else CheckStatus.failed,
        value=len(cells),
        witness=[list(c) for c in cells],
        details={"lower_bound": ceil_log2(len(cells))},
    ))


def _graph_family(builtin: str) -> str:
    try:
        axis = Axis.parse(builtin)
    except UsageError:
        raise UsageError(f"unknown graph '{builtin}' (choose horizontal or vertical)") from None
    return f"m-{axis.value}"


@app.command()
def expansion(
    builtin: str = typer.Option(..., "--builtin", help="horizontal or vertical adjacency graph of M."),
    k: int = typer.Option(..., "--k", help="Subset size."),
    min_neighbours: int = typer.Option(17, "--min", help="Required neighbourhood size."),
    threads: Optional[int] = typer.Option(None, "--threads", help="Workers over the top subset element."),
) -> None:
    """Check that every k vertices have at least --min neighbours (themselves included)."""
    name = _graph_family(builtin)
    f = builtin_family(name)
    axis = Axis.parse(builtin)
    g = build_adjacency(f, axis)
    tight = separation.vertical_tight_sets() if axis is Axis.VERTICAL else ()
    witness = check_expansion(g, k, min_neighbours, threads=threads, candidates=tight)
    _single("expansion", Report(
        task_id="expansion",
        instance=f"{name}: every {k} of {len(g)} vertices have >= {min_neighbours} neighbours",
        status=_verdict(witness is None),
        value=None if witness is None else witness.neighbours,
        witness=None if witness is None else list(witness.vertices),
    ))


@app.command()
def certificate(
    table: str = typer.Option("m", "--table", help="m or u."),
    axis: str = typer.Option(..., "--axis", help="rows or cols."),
    threshold: int = typer.Option(17, "--threshold", help="Rectangles one side must meet."),
) -> None:
    """Every row (or column) bipartition meets >= threshold family rectangles on one side."""
    if table not in ("m", "u"):
        raise UsageError(f"certificates are built for m or u, not '{table}'")
    parsed = Axis.parse(axis)
    f = builtin_family(f"{table}-{parsed.value}")
    violation = verify_fooling_family(f)
    if violation is not None:
        _single("certificate", Report(task_id="certificate", instance=f.name, status=CheckStatus.failed,
                                      witness={"kind": violation.kind, "detail": violation.detail}))
        return
    cert = bipartition_certificate(f.table, f, parsed, threshold)
    _single("certificate", Report(
        task_id="certificate",
        instance=f"{f.name}, {parsed.value} bipartitions, threshold {threshold}",
        status=_verdict(cert.bound is not None),
        value=cert.bound,
        witness=None if cert.bipartition_ok else list(cert.worst_split),
        details={"bipartitions": cert.bipartitions, "worst_max": cert.worst_max, "dropped": list(cert.dropped)},
    ))


@app.command()
def partition(
    builtin: str = typer.Option("s-figure", "--builtin", help="Table to partition (ccmat path or builtin)."),
) -> None:
    """Minimal monochromatic rectangle partition, value by value."""
    t = resolve_table(builtin)
    parts = separation.s_partition(t)
    rects = [r for _, result in parts for r in result.rects]
    violation = verify_partition(t, rects)
    _single("partition", Report(
        task_id="partition",
        instance=f"{builtin} ({t.n_rows}x{t.n_cols})",
        status=CheckStatus.value if violation is None else CheckStatus.failed,
        value=len(rects),
        witness={str(value): [[r.row_indices, r.col_indices] for r in result.rects] for value, result in parts},
        details={"per_value": {str(value): result.count for value, result in parts}},
    ))


@app.command("diff-figure")
def diff_figure(
    search_s: bool = typer.Option(False, "--search-s", help="Also look for S as a submatrix of U."),
) -> None:
    """Compare the generated M with the published table, cell by cell."""
    generated, figure = separation.build_M(), separation.figure_M()
    mismatches = separation.diff(generated, figure)
    rate = 1 - len(mismatches) / (generated.n_rows * generated.n_cols)
    reports = [Report(
        task_id="diff-figure",
        instance="generated M against the published table",
        status=_verdict(rate >= FIGURE_MATCH_RATE),
        value=len(mismatches),
        witness=[[m.row, m.col, m.generated, m.figure] for m in mismatches] or None,
        details={"match_rate": round(rate, 4)},
    )]
    if search_s:
        found = separation.find_submatrix(separation.build_U(), separation.figure_S())
        reports.append(Report(
            task_id="diff-figure.search-s",
            instance="S as a submatrix of U in any row and column order",
            status=CheckStatus.value,
            value=found is not None,
            witness=None if found is None else {"rows": found[0], "cols": found[1]},
        ))
    summary: dict[str, int] = {}
    for r in reports:
        summary[r.status.value] = summary.get(r.status.value, 0) + 1
    _emit(ReportBundle(command="diff-figure", reports=reports, summary=summary, exit_code=bundle_exit_code(reports)))


# ============== REPRODUCTION ==============

@app.command()
def reproduce(
    scope: str = typer.Argument("all", help=f"One of {', '.join(SCOPES)}. section-3, section-4 and section-5 "
                                            "run the partial, honest and separation checks without extensions."),
    report: Optional[Path] = typer.Option(None, "--report", help="Also write the bundle here."),
    fast: bool = typer.Option(False, "--fast", help="Skip the heavy exhaustive checks."),
    record: bool = typer.Option(config.RECORD_RUNS, "--record/--no-record", help="Store the run in the history database."),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker count for the heavy checks."),
) -> None:
    """Run every check of a scope and print the report bundle."""
    if threads is not None:
        config.THREADS = threads
    started_at = datetime.utcnow()
    bundle = run_reproduce(scope, fast=fast)
    if record:
        db = SessionLocal()
        try:
            record_run(db, bundle, started_at, config.resolve_threads())
        finally:
            db.close()
    _emit(bundle, report)


@app.command()
def history(
    limit: int = typer.Option(10, "--limit", help="Most recent runs to list."),
) -> None:
    """List stored runs, newest first, one JSON object per line."""
    db = SessionLocal()
    try:
        for run_record in recent_runs(db, limit):
            typer.echo(json.dumps(run_summary(run_record)))
    finally:
        db.close()


# ============== ENTRY POINTS ==============

def run(argv: Optional[list[str]] = None) -> int:
    """Invoke the CLI without exiting; returns the process exit code."""
    command = typer.main.get_command(app)
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        rv = command.main(args, prog_name="ccwb", standalone_mode=False)
    except click_exceptions.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click_exceptions.Abort:
        return 1
    except WorkbenchError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return rv if isinstance(rv, int) else 0


def main() -> None:
    sys.exit(run())
