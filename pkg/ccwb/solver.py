# ccwb/solver.py
"""
Exact classical communication complexity by memoized rectangle splitting.

cc_leq(rect, d) asks whether a protocol of depth <= d exists for the
sub-table: either the rectangle is already a leaf for the chosen semantics,
or some split of its rows (Alice speaks) or columns (Bob speaks) yields two
halves that both fit in depth d - 1.

Sub-tables are compared by a canonical key: undefined-only lines dropped,
duplicate rows and columns merged, lines sorted by content, the smaller of
the matrix and its transpose kept. Complexity is invariant under all of these,
so the key is what gets memoized and what the recursion works on.
"""

from __future__ import annotations

import enum
import sys
import threading
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from tqdm import tqdm

from ccwb import config
from ccwb.errors import UsageError
from ccwb.logger import logger
from ccwb.protocols import ClassicalProtocol, GlobalLeaf, LocalLeaf, Node, Owner, Tree
from ccwb.tables import Rect, ValueTable, make_table

UNDEF = -1

Matrix = tuple[tuple[int, ...], ...]


class SolveMode(str, enum.Enum):
    """Leaf semantics of the protocols searched for"""
    TOTAL = "total"
    PARTIAL_GLOBAL = "partial-global"
    PARTIAL_LOCAL = "partial-local"

    @property
    def is_local(self) -> bool:
        return self is SolveMode.PARTIAL_LOCAL


def check_mode(t: ValueTable, mode: SolveMode) -> None:
    if mode is SolveMode.TOTAL and not t.is_total:
        raise UsageError("Total mode requires a total table; use partial-global or partial-local")


# ============== MATRIX HELPERS ==============

def matrix_of(t: ValueTable, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
    return tuple(tuple(UNDEF if (v := t.cells[r][c]) is None else v for c in cols) for r in rows)


def table_of(m: Matrix) -> ValueTable:
    return make_table([[None if v == UNDEF else v for v in row] for row in m])


def _line_key(line: tuple[int, ...]) -> tuple:
    return tuple(sorted(line)), line


def _orient(rows: Iterable[tuple[int, ...]]) -> Matrix:
    ordered = sorted(rows, key=_line_key)
    cols = sorted(zip(*ordered), key=_line_key)
    return tuple(sorted(zip(*cols), key=_line_key))


def canonical(rows: Iterable[tuple[int, ...]]) -> Matrix:
    """Canonical key of a non-empty matrix (see module docstring)."""
    distinct_rows = {row for row in rows if any(v != UNDEF for v in row)}
    if not distinct_rows:
        return ((UNDEF,),)
    distinct_cols = {col for col in zip(*distinct_rows) if any(v != UNDEF for v in col)}
    cols = list(distinct_cols)
    rows_ = list(zip(*cols))
    first = _orient(rows_)
    second = _orient(cols)
    return min(first, second)


def distinct_values(m: Matrix) -> set[int]:
    return {v for row in m for v in row if v != UNDEF}


def is_leaf(m: Matrix, local: bool) -> bool:
    """Global: all defined cells equal. Local: every row and every column constant on defined cells."""
    if not local:
        return len(distinct_values(m)) <= 1
    for row in m:
        if len({v for v in row if v != UNDEF}) > 1:
            return False
    for col in zip(*m):
        if len({v for v in col if v != UNDEF}) > 1:
            return False
    return True


def _constant_lines(lines: Iterable[tuple[int, ...]]) -> set[int] | None:
    """Values of lines that are constant on defined cells, or None if some line is not."""
    values = set()
    for line in lines:
        line_values = {v for v in line if v != UNDEF}
        if len(line_values) > 1:
            return None
        values |= line_values
    return values


def _depth_one(m: Matrix) -> bool:
    """Global semantics at depth 1: one speaker splits into two constant halves."""
    for lines in (m, tuple(zip(*m))):
        values = _constant_lines(lines)
        if values is not None and len(values) <= 2:
            return True
    return False


def gray_bipartitions(k: int) -> Iterator[int]:
    """
    Membership masks (bit i set = line i in the second part) of the
    2^(k-1) - 1 bipartitions of k lines, line 0 pinned to the first part,
    in Gray-code order.
    """
    for g in range(1, 1 << (k - 1)):
        yield (g ^ (g >> 1)) << 1


def split_lines(lines: Sequence, mask: int) -> tuple[list, list]:
    first, second = [], []
    for i, line in enumerate(lines):
        (second if (mask >> i) & 1 else first).append(line)
    return first, second


# ============== MEMO ==============

class Memo:
    """
    Bounded LRU map from canonical key to (smallest depth known feasible,
    largest depth known infeasible). Safe to share between threads.
    """
    ENTRY_OVERHEAD = 200

    def __init__(self, cap_bytes: int = config.MEMO_CAP):
        self.cap_bytes = cap_bytes
        self.size_bytes = 0
        self.hits = 0
        self.evictions = 0
        self._entries: OrderedDict[Matrix, list[int]] = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._entries)

    @staticmethod
    def _cost(key: Matrix) -> int:
        return Memo.ENTRY_OVERHEAD + 8 * len(key) * len(key[0])

    def lookup(self, key: Matrix, d: int) -> bool | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            self._entries.move_to_end(key)
            true_at, false_at = entry
            if true_at <= d:
                self.hits += 1
                return True
            if false_at >= d:
                self.hits += 1
                return False
            return None

    def store(self, key: Matrix, d: int, feasible: bool) -> None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                entry = [sys.maxsize, -1]
                self._entries[key] = entry
                self.size_bytes += self._cost(key)
            else:
                self._entries.move_to_end(key)
            if feasible:
                entry[0] = min(entry[0], d)
            else:
                entry[1] = max(entry[1], d)
            while self.size_bytes > self.cap_bytes and len(self._entries) > 1:
                old_key, _ = self._entries.popitem(last=False)
                self.size_bytes -= self._cost(old_key)
                self.evictions += 1


# ============== SEARCH ==============

@dataclass
class SolveStats:
    nodes: int = 0
    memo_entries: int = 0
    memo_hits: int = 0
    evictions: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    depth: int | None
    mode: SolveMode
    witness: ClassicalProtocol | None = None
    lower_bound: int = 0
    budget_exceeded: bool = False
    stats: SolveStats = field(default_factory=SolveStats)


class Solver:
    """Decision procedure cc(sub-table) <= d over canonical keys, with a shared memo."""

    def __init__(self, mode: SolveMode, memo: Memo | None = None, threads: int = 1):
        self.mode = mode
        self.local = mode.is_local
        self.memo = memo if memo is not None else Memo()
        self.threads = max(1, threads)
        self.nodes = 0
        self._count_lock = threading.Lock()

    def leq(self, m: Matrix, d: int) -> bool:
        return self._leq(canonical(m), d)

    def _prune(self, m: Matrix, d: int) -> bool:
        """True when the sub-table provably needs more than depth d."""
        if self.local:
            return False
        return len(distinct_values(m)) > (1 << d)

    def _fooling_prune(self, m: Matrix, d: int) -> bool:
        """Full lower bound, distinct values and greedy fooling set. Run once per expanded node."""
        if self.local:
            return False
        return cc_lower_bound(table_of(m), mode=self.mode) > d

    def _children(self, m: Matrix) -> Iterator[tuple[Matrix, Matrix]]:
        """Canonical halves of every row split and column split, smaller axis first."""
        cols = tuple(zip(*m))
        axes = [(m, False), (cols, True)]
        if len(cols) < len(m):
            axes.reverse()
        for lines, transposed in axes:
            if len(lines) < 2:
                continue
            for mask in gray_bipartitions(len(lines)):
                first, second = split_lines(lines, mask)
                if transposed:
                    first, second = list(zip(*first)), list(zip(*second))
                yield canonical(first), canonical(second)

    def _leq(self, m: Matrix, d: int) -> bool:
        known = self.memo.lookup(m, d)
        if known is not None:
            return known
        with self._count_lock:
            self.nodes += 1

        if is_leaf(m, self.local):
            result = True
        elif d <= 0 or self._prune(m, d):
            result = False
        elif d == 1 and not self.local:
            result = _depth_one(m)
        elif self._fooling_prune(m, d):
            result = False
        else:
            result = False
            for first, second in self._children(m):
                if self._prune(first, d - 1) or self._prune(second, d - 1):
                    continue
                # the half with more values fails more often; test it first
                if len(distinct_values(first)) < len(distinct_values(second)):
                    first, second = second, first
                if self._leq(first, d - 1) and self._leq(second, d - 1):
                    result = True
                    break

        self.memo.store(m, d, result)
        return result

    def leq_top(self, m: Matrix, d: int, progress: bool = False) -> bool:
        """Like leq, but fans the top-level splits out to worker threads and shows progress."""
        key = canonical(m)
        known = self.memo.lookup(key, d)
        if known is not None:
            return known
        if is_leaf(key, self.local) or d <= 1 or self._prune(key, d):
            return self._leq(key, d)

        children = list(self._children(key))
        bar = tqdm(total=len(children), desc=f"depth <= {d}", file=sys.stderr, disable=not progress,
                   mininterval=config.PROGRESS_INTERVAL, leave=False)

        def feasible(pair: tuple[Matrix, Matrix]) -> bool:
            first, second = pair
            ok = (not self._prune(first, d - 1) and not self._prune(second, d - 1)
                  and self._leq(first, d - 1) and self._leq(second, d - 1))
            bar.update(1)
            return ok

        try:
            if self.threads == 1:
                result = any(feasible(pair) for pair in children)
            else:
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    result = any(pool.map(feasible, children))
        finally:
            bar.close()
        self.memo.store(key, d, result)
        return result


# ============== WITNESS EXTRACTION ==============

def _grouped(lines: dict[int, tuple[int, ...]]) -> list[list[int]]:
    """Original line indices grouped by identical content, in first-occurrence order."""
    groups: dict[tuple[int, ...], list[int]] = {}
    for index, content in lines.items():
        groups.setdefault(content, []).append(index)
    return list(groups.values())


def _leaf_for(t: ValueTable, rows: list[int], cols: list[int], local: bool) -> GlobalLeaf | LocalLeaf:
    if not local:
        values = {v for r in rows for c in cols if (v := t.cells[r][c]) is not None}
        return GlobalLeaf(min(values) if values else 0)
    out_a = [0] * t.n_rows
    out_b = [0] * t.n_cols
    for r in rows:
        for c in cols:
            v = t.cells[r][c]
            if v is not None:
                out_a[r] = v
                out_b[c] = v
    return LocalLeaf(tuple(out_a), tuple(out_b))


def extract_witness(solver: Solver, t: ValueTable, rect: Rect, d: int) -> Tree:
    """Rebuild a depth <= d tree for the rectangle, asking the memo-backed solver about every half."""
    rows, cols = rect.row_indices, rect.col_indices
    m = matrix_of(t, rows, cols)
    if is_leaf(m, solver.local):
        return _leaf_for(t, rows, cols, solver.local)

    row_groups = _grouped({r: m[i] for i, r in enumerate(rows)})
    col_lines = tuple(zip(*m))
    col_groups = _grouped({c: col_lines[j] for j, c in enumerate(cols)})
    axes = [(row_groups, Owner.A), (col_groups, Owner.B)]
    if len(col_groups) < len(row_groups):
        axes.reverse()

    for groups, owner in axes:
        if len(groups) < 2:
            continue
        for mask in gray_bipartitions(len(groups)):
            first, second = split_lines(groups, mask)
            first = sorted(i for g in first for i in g)
            second = sorted(i for g in second for i in g)
            if owner is Owner.A:
                halves = (Rect.of(first, cols), Rect.of(second, cols))
            else:
                halves = (Rect.of(rows, first), Rect.of(rows, second))
            if all(solver.leq(matrix_of(t, h.row_indices, h.col_indices), d - 1) for h in halves):
                width = t.n_rows if owner is Owner.A else t.n_cols
                second_set = set(second)
                bits = tuple(1 if i in second_set else 0 for i in range(width))
                return Node(owner, bits,
                            extract_witness(solver, t, halves[0], d - 1),
                            extract_witness(solver, t, halves[1], d - 1))
    raise RuntimeError(f"no split found for a rectangle the solver accepted at depth {d}")


# ============== PUBLIC OPERATIONS ==============

def cc_leq(
    t: ValueTable,
    r: Rect,
    d: int,
    mode: SolveMode,
    witness: bool = False,
    solver: Solver | None = None,
) -> tuple[bool, ClassicalProtocol | None]:
    """Is there a protocol of depth <= d for the sub-table on r? Optionally return one."""
    check_mode(t, mode)
    r.validate(t.n_rows, t.n_cols)
    solver = solver or Solver(mode)
    ok = solver.leq(matrix_of(t, r.row_indices, r.col_indices), d)
    if ok and witness:
        return True, ClassicalProtocol(extract_witness(solver, t, r, d), t.n_rows, t.n_cols)
    return ok, None


def greedy_fooling_set(
    t: ValueTable,
    r: Rect | None = None,
    seed: Sequence[tuple[int, int]] = (),
) -> list[tuple[int, int]]:
    """Seed cells first, then every defined cell in row-major order that keeps the set fooling."""
    r = r or t.full_rect()
    chosen: list[tuple[int, int]] = []
    for x, y in list(seed) + [cell for cell in r.cells() if t.cells[cell[0]][cell[1]] is not None]:
        if (x, y) in chosen or t.cells[x][y] is None:
            continue
        if all(fooling_pair(t, (x, y), other) for other in chosen):
            chosen.append((x, y))
    return chosen


def fooling_pair(t: ValueTable, a: tuple[int, int], b: tuple[int, int]) -> bool:
    """No rectangle that is constant on its defined cells contains both cells."""
    (x, y), (u, v) = a, b
    minor = [t.cells[x][y], t.cells[u][v], t.cells[x][v], t.cells[u][y]]
    return len({value for value in minor if value is not None}) > 1


def ceil_log2(n: int) -> int:
    return 0 if n <= 1 else (n - 1).bit_length()


def cc_lower_bound(
    t: ValueTable,
    r: Rect | None = None,
    mode: SolveMode = SolveMode.TOTAL,
    seed: Sequence[tuple[int, int]] = (),
) -> int:
    """
    max(ceil log2 #distinct values, ceil log2 |greedy fooling set|) for the
    global modes. Local leaves may hold many values, so the local bound is 0.
    """
    if mode.is_local:
        return 0
    r = r or t.full_rect()
    by_values = ceil_log2(len(t.defined_values(r)))
    by_fooling = ceil_log2(len(greedy_fooling_set(t, r, seed)))
    return max(by_values, by_fooling)


def cc_exact(
    t: ValueTable,
    mode: SolveMode,
    max_d: int,
    threads: int | None = None,
    memo_cap: int | None = None,
    witness: bool = True,
    progress: bool | None = None,
) -> SolveResult:
    """Iterative deepening from the lower bound up to max_d."""
    if max_d < 0:
        raise UsageError("max depth must be non-negative")
    check_mode(t, mode)
    start = time.perf_counter()
    memo = Memo(memo_cap if memo_cap is not None else config.MEMO_CAP)
    solver = Solver(mode, memo, config.resolve_threads(threads))
    progress = config.PROGRESS if progress is None else progress

    full = t.full_rect()
    lower = cc_lower_bound(t, full, mode)
    m = matrix_of(t, range(t.n_rows), range(t.n_cols))
    logger.info(f"Solving {t.n_rows}x{t.n_cols} {t.kind} table in {mode.value} mode, lower bound {lower}")

    def stats() -> SolveStats:
        return SolveStats(solver.nodes, len(memo), memo.hits, memo.evictions, time.perf_counter() - start)

    for d in range(lower, max_d + 1):
        if solver.leq_top(m, d, progress=progress):
            proof = ClassicalProtocol(extract_witness(solver, t, full, d), t.n_rows, t.n_cols) if witness else None
            result = SolveResult(d, mode, proof, lower, False, stats())
            logger.info(f"Depth {d} ({result.stats.nodes} nodes, {result.stats.memo_entries} memo entries, "
                        f"{result.stats.wall_time:.1f}s)")
            return result
        logger.debug(f"No protocol of depth {d}")

    logger.warning(f"No protocol of depth <= {max_d}; budget exceeded")
    return SolveResult(None, mode, None, lower, True, stats())

