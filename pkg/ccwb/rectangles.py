# ccwb/rectangles.py
"""
Rectangle analysis: monochromatic rectangles, fooling sets, families of
fooling rectangles, their adjacency graphs and expansion, the bipartition
lower-bound certificate and exact small partitions.
"""

from __future__ import annotations

import enum
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from tqdm import tqdm

from ccwb import config
from ccwb.errors import BudgetExceededError, SizeLimitError, UsageError
from ccwb.logger import logger
from ccwb.solver import SolveMode, ceil_log2, fooling_pair
from ccwb.tables import Rect, ValueTable, bits_of, indices_of, popcount

Cell = tuple[int, int]

PARTITION_MAX_CELLS = 64
GAMMA_MAX_COMPONENT = 12


class Axis(str, enum.Enum):
    """Which projection two rectangles must share to be adjacent."""
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"

    @classmethod
    def parse(cls, name: str) -> "Axis":
        aliases = {"rows": cls.HORIZONTAL, "cols": cls.VERTICAL, "columns": cls.VERTICAL}
        try:
            return aliases.get(name) or cls(name)
        except ValueError:
            raise UsageError(f"unknown axis '{name}'") from None

    def lines(self, r: Rect) -> int:
        return r.rows if self is Axis.HORIZONTAL else r.cols


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    cells: tuple[Cell, ...] = ()


# ============== MONOCHROMATIC RECTANGLES ==============

def is_mono(t: ValueTable, r: Rect, mode: SolveMode = SolveMode.TOTAL) -> bool:
    r.validate(t.n_rows, t.n_cols)
    if mode.is_local:
        rows, cols = r.row_indices, r.col_indices
        for x in rows:
            if len({t.cells[x][y] for y in cols} - {None}) > 1:
                return False
        for y in cols:
            if len({t.cells[x][y] for x in rows} - {None}) > 1:
                return False
        return True
    values = [t.cells[x][y] for x, y in r.cells()]
    if mode is SolveMode.TOTAL and None in values:
        return False
    return len(set(values) - {None}) <= 1


# ============== FOOLING SETS ==============

def check_fooling_set(t: ValueTable, cells: Sequence[Cell]) -> Violation | None:
    """None if every pair of distinct cells spans a non-constant 2x2 minor."""
    for x, y in cells:
        if t.cells[x][y] is None:
            raise UsageError(f"fooling set cell ({x}, {y}) is undefined")
    distinct = list(dict.fromkeys(cells))
    for a, b in itertools.combinations(distinct, 2):
        if not fooling_pair(t, a, b):
            return Violation("fooling", f"cells {a} and {b} lie in a constant rectangle", (a, b))
    return None


def search_fooling_set(t: ValueTable, restarts: int = 100, seed: int = 0) -> list[Cell]:
    """Largest fooling set found by greedy passes over shuffled cell orders."""
    rng = np.random.default_rng(seed)
    cells = [(x, y) for x, y, _ in t.defined_cells()]
    best: list[Cell] = []
    for _ in range(restarts):
        chosen: list[Cell] = []
        for i in rng.permutation(len(cells)):
            cell = cells[i]
            if all(fooling_pair(t, cell, other) for other in chosen):
                chosen.append(cell)
        if len(chosen) > len(best):
            best = chosen
            logger.debug(f"Fooling set of size {len(best)}")
    return best


# ============== FOOLING RECTANGLE FAMILIES ==============

@dataclass(frozen=True)
class NamedRect:
    name: str
    rect: Rect
    value: int


@dataclass
class FoolingFamily:
    """Named constant rectangles over a host table. verified is set by verify_fooling_family."""
    name: str
    table: ValueTable
    rects: list[NamedRect]
    dropped: list[str] = field(default_factory=list)
    verified: bool = False

    @property
    def names(self) -> list[str]:
        return [nr.name for nr in self.rects]

    def __getitem__(self, name: str) -> NamedRect:
        for nr in self.rects:
            if nr.name == name:
                return nr
        raise KeyError(name)

    def __len__(self):
        return len(self.rects)


def project_family(f: FoolingFamily, t: ValueTable, rows: Sequence[int], cols: Sequence[int]) -> FoolingFamily:
    """
    The family seen inside a sub-table: rows/cols list the host indices of
    t's lines in t's order. Rectangles that miss the sub-table are dropped.
    """
    row_pos = {host: i for i, host in enumerate(rows)}
    col_pos = {host: j for j, host in enumerate(cols)}
    kept, dropped = [], list(f.dropped)
    for nr in f.rects:
        sub = Rect.of(
            (row_pos[x] for x in nr.rect.row_indices if x in row_pos),
            (col_pos[y] for y in nr.rect.col_indices if y in col_pos),
        )
        if sub.is_empty():
            dropped.append(nr.name)
        else:
            kept.append(NamedRect(nr.name, sub, nr.value))
    if dropped:
        logger.info(f"Family {f.name}: {len(dropped)} rectangle(s) empty in the sub-table: {dropped}")
    return FoolingFamily(f.name, t, kept, dropped)


def verify_fooling_family(f: FoolingFamily) -> Violation | None:
    """
    None iff every rectangle is constant with its declared value, the
    rectangles are pairwise disjoint, and any two cells taken from different
    rectangles span a non-constant minor. Cells of different declared values
    always do, so only same-value pairs of rectangles are scanned.
    """
    t = f.table
    for nr in f.rects:
        nr.rect.validate(t.n_rows, t.n_cols)
        for x, y in nr.rect.cells():
            if t.cells[x][y] != nr.value:
                return Violation("value", f"{nr.name} holds {t.cells[x][y]} at ({x}, {y}), "
                                          f"declared {nr.value}", ((x, y),))

    for a, b in itertools.combinations(f.rects, 2):
        if a.rect.intersects(b.rect):
            return Violation("disjointness", f"{a.name} and {b.name} overlap")

    by_value: dict[int, list[NamedRect]] = {}
    for nr in f.rects:
        by_value.setdefault(nr.value, []).append(nr)
    for group in by_value.values():
        for a, b in itertools.combinations(group, 2):
            b_cells = list(b.rect.cells())
            for u in a.rect.cells():
                for v in b_cells:
                    if not fooling_pair(t, u, v):
                        return Violation("fooling", f"{u} in {a.name} and {v} in {b.name} "
                                                    f"lie in a constant rectangle", (u, v))
    f.verified = True
    logger.info(f"Family {f.name}: {len(f)} fooling rectangles verified")
    return None


# ============== ADJACENCY GRAPHS ==============

@dataclass(frozen=True)
class AdjacencyGraph:
    """Vertices are rectangle names; adjacency[i] is a bitset that always contains i."""
    labels: tuple[str, ...]
    adjacency: tuple[int, ...]

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"no vertex named '{label}'") from None

    def mask(self, vertices: Iterable[str]) -> int:
        return bits_of(self.index(v) for v in vertices)

    def union(self, mask: int) -> int:
        out = 0
        for i in indices_of(mask):
            out |= self.adjacency[i]
        return out

    def neighbours(self, label: str) -> set[str]:
        return {self.labels[j] for j in indices_of(self.adjacency[self.index(label)])}

    def edges(self) -> set[frozenset[str]]:
        """Undirected edges between distinct vertices."""
        return {
            frozenset((self.labels[i], self.labels[j]))
            for i, row in enumerate(self.adjacency)
            for j in indices_of(row) if j > i
        }

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.labels)
        g.add_edges_from(tuple(e) for e in self.edges())
        g.add_edges_from((v, v) for v in self.labels)
        return g

    def components(self, without: Iterable[str] = ()) -> list[set[str]]:
        """Connected components, optionally after deleting some vertices."""
        g = self.to_networkx()
        g.remove_nodes_from(without)
        order = {label: i for i, label in enumerate(self.labels)}
        return sorted((set(c) for c in nx.connected_components(g)),
                      key=lambda c: min(order[v] for v in c))


def build_adjacency(f: FoolingFamily, axis: Axis) -> AdjacencyGraph:
    lines = [axis.lines(nr.rect) for nr in f.rects]
    adjacency = tuple(
        bits_of(j for j, other in enumerate(lines) if mine & other)
        for mine in lines
    )
    return AdjacencyGraph(tuple(f.names), adjacency)


def neighbourhood(g: AdjacencyGraph, vertices: Iterable[str]) -> int:
    """Number of vertices adjacent to (or in) the given set."""
    return popcount(g.union(g.mask(vertices)))


# ============== EXPANSION ==============

@dataclass(frozen=True)
class WitnessSubset:
    vertices: tuple[str, ...]
    neighbours: int


def _first_witness(adj: Sequence[int], k: int, t: int, top: int) -> list[int] | None:
    """Colex-first k-subset with largest element top whose neighbour union is below t."""
    chosen = [top]

    def walk(limit: int, left: int, union: int) -> list[int] | None:
        if popcount(union) >= t:
            return None  # supersets only grow the union
        if left == 0:
            return sorted(chosen)
        for v in range(left - 1, limit):
            chosen.append(v)
            found = walk(v, left - 1, union | adj[v])
            chosen.pop()
            if found is not None:
                return found
        return None

    return walk(top, k - 1, adj[top])


def check_expansion(
    g: AdjacencyGraph,
    k: int,
    t: int,
    threads: int | None = None,
    progress: bool | None = None,
    candidates: Iterable[Iterable[str]] = (),
) -> WitnessSubset | None:
    """
    None iff every k-subset of vertices has at least t neighbours (itself
    included). The k-subsets among candidates are tried first, in the given
    order. After that subsets are walked in colex order with incremental
    unions; a prefix whose union already reaches t is not extended. The first
    failing subset is returned.
    """
    n = len(g)
    if not 0 <= k <= n:
        raise UsageError(f"subset size {k} outside 0..{n}")
    if k == 0:
        return None if t <= 0 else WitnessSubset((), 0)

    for subset in candidates:
        mask = g.mask(subset)
        if popcount(mask) == k and popcount(g.union(mask)) < t:
            found = WitnessSubset(tuple(g.labels[i] for i in indices_of(mask)), popcount(g.union(mask)))
            logger.info(f"Expansion fails on a candidate: {list(found.vertices)} has {found.neighbours} neighbours")
            return found

    threads = config.resolve_threads(threads)
    progress = config.PROGRESS if progress is None else progress
    tops = range(k - 1, n)
    logger.info(f"Checking {math.comb(n, k)} subsets of size {k} for >= {t} neighbours")

    with tqdm(total=len(tops), desc=f"expansion k={k}", file=sys.stderr, disable=not progress,
              mininterval=config.PROGRESS_INTERVAL, leave=False) as bar:
        def branch(top: int) -> list[int] | None:
            found = _first_witness(g.adjacency, k, t, top)
            bar.update(1)
            return found

        if threads == 1:
            results = map(branch, tops)
            witness = next((w for w in results if w is not None), None)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                witness = next((w for w in pool.map(branch, tops) if w is not None), None)

    if witness is None:
        return None
    mask = bits_of(witness)
    found = WitnessSubset(tuple(g.labels[i] for i in witness), popcount(g.union(mask)))
    logger.info(f"Expansion fails: {list(found.vertices)} has {found.neighbours} neighbours")
    return found


def min_neighbourhood(g: AdjacencyGraph, k: int) -> int:
    """Exact minimum neighbour count over all k-subsets (no pruning; small graphs only)."""
    if not 0 <= k <= len(g):
        raise UsageError(f"subset size {k} outside 0..{len(g)}")
    return min(
        popcount(g.union(bits_of(subset)))
        for subset in itertools.combinations(range(len(g)), k)
    )


def gamma_table(
    g: AdjacencyGraph,
    component: Iterable[str],
    hub: str | None = None,
) -> dict[int, tuple[int, int]]:
    """
    n -> (Gamma', Gamma): the least number of neighbours inside the component
    over its n-subsets, without and with the hub counted when it is adjacent.
    """
    members = [g.index(v) for v in component]
    if len(members) > GAMMA_MAX_COMPONENT:
        raise SizeLimitError(f"component of {len(members)} vertices exceeds {GAMMA_MAX_COMPONENT}")
    inside = bits_of(members)
    hub_mask = g.adjacency[g.index(hub)] if hub is not None else 0

    table: dict[int, tuple[int, int]] = {}
    for n in range(1, len(members) + 1):
        best_inner = best_total = None
        for subset in itertools.combinations(members, n):
            mask = bits_of(subset)
            inner = popcount(g.union(mask) & inside)
            total = inner + (1 if hub_mask & mask else 0)
            best_inner = inner if best_inner is None else min(best_inner, inner)
            best_total = total if best_total is None else min(best_total, total)
        table[n] = (best_inner, best_total)
    return table


# ============== BIPARTITION CERTIFICATE ==============

@dataclass(frozen=True)
class Certificate:
    family: str
    axis: Axis
    threshold: int
    family_ok: bool
    bipartition_ok: bool
    bipartitions: int
    worst_max: int | None
    worst_split: tuple[int, ...] | None
    dropped: tuple[str, ...]

    @property
    def bound(self) -> int | None:
        if self.family_ok and self.bipartition_ok:
            return 1 + ceil_log2(self.threshold)
        return None


def _union_table(masks: Sequence[int]) -> np.ndarray:
    """Entry s is the OR of masks[i] over the bits i of s."""
    table = np.zeros(1 << len(masks), dtype=np.uint64)
    for i, mask in enumerate(masks):
        table[1 << i: 1 << (i + 1)] = table[: 1 << i] | np.uint64(mask)
    return table


def bipartition_certificate(
    t: ValueTable,
    f: FoolingFamily,
    axis: Axis,
    threshold: int,
    progress: bool | None = None,
) -> Certificate:
    """
    Over every split of the axis's lines into nonempty W and V, one side
    meets at least threshold rectangles. Lines are split into a low and a
    high half with precomputed union tables; line 0 is always in W.
    """
    if not f.verified:
        raise UsageError(f"family {f.name} has not passed verify_fooling_family")
    if f.table.shape != t.shape:
        raise UsageError(f"family {f.name} lives on a {f.table.shape} table, not {t.shape}")
    if len(f) > 64:
        raise SizeLimitError("bipartition certificate supports at most 64 rectangles")

    n_lines = t.n_rows if axis is Axis.HORIZONTAL else t.n_cols
    masks = [bits_of(j for j, nr in enumerate(f.rects) if (axis.lines(nr.rect) >> line) & 1)
             for line in range(n_lines)]
    count = (1 << (n_lines - 1)) - 1
    progress = config.PROGRESS if progress is None else progress
    logger.info(f"Certificate for {f.name}: {count} bipartitions of {n_lines} {axis.value} lines, "
                f"threshold {threshold}")

    worst: tuple[int, int, int] | None = None  # (max count, low subset, high subset)
    if count > 0:
        lo = (n_lines + 1) // 2
        hi = n_lines - lo
        low_table, high_table = _union_table(masks[:lo]), _union_table(masks[lo:])
        full_lo, full_hi = (1 << lo) - 1, (1 << hi) - 1
        low_w = np.arange(1, 1 << lo, 2, dtype=np.int64)
        w_part, v_part = low_table[low_w], low_table[full_lo ^ low_w]

        for h in tqdm(range(1 << hi), desc="bipartitions", file=sys.stderr, disable=not progress,
                      mininterval=config.PROGRESS_INTERVAL, leave=False):
            meet_w = np.bitwise_count(w_part | high_table[h])
            meet_v = np.bitwise_count(v_part | high_table[full_hi ^ h])
            larger = np.maximum(meet_w, meet_v)
            if h == full_hi:
                larger[-1] = np.iinfo(larger.dtype).max  # W = everything, V empty
            pos = int(np.argmin(larger))
            value = int(larger[pos])
            if worst is None or value < worst[0]:
                worst = (value, int(low_w[pos]), h)

    if worst is None:
        ok, worst_max, split = True, None, None
    else:
        ok = worst[0] >= threshold
        worst_max = worst[0]
        split = tuple(indices_of(worst[1] | (worst[2] << ((n_lines + 1) // 2))))
    cert = Certificate(f.name, axis, threshold, f.verified, ok, count, worst_max, split, tuple(f.dropped))
    if ok:
        logger.info(f"Certificate for {f.name} passes (worst side meets {worst_max}); bound {cert.bound}")
    else:
        logger.warning(f"Certificate for {f.name} fails: split W={list(split)} meets only {worst_max}")
    return cert


# ============== PARTITIONS ==============

def verify_partition(t: ValueTable, rects: Sequence[Rect], mode: SolveMode = SolveMode.TOTAL) -> Violation | None:
    covered: dict[Cell, int] = {}
    for i, r in enumerate(rects):
        if r.is_empty() or r.rows >> t.n_rows or r.cols >> t.n_cols:
            return Violation("invalid", f"rectangle {i} is empty or out of bounds")
        if not is_mono(t, r, mode):
            return Violation("mono", f"rectangle {i} {r} is not monochromatic")
        for cell in r.cells():
            if cell in covered:
                return Violation("overlap", f"rectangles {covered[cell]} and {i} share {cell}", (cell,))
            covered[cell] = i
    missing = [(x, y) for x in range(t.n_rows) for y in range(t.n_cols) if (x, y) not in covered]
    if missing:
        return Violation("coverage", f"{len(missing)} cell(s) not covered", tuple(missing[:10]))
    return None


@dataclass(frozen=True)
class PartitionResult:
    count: int
    rects: tuple[Rect, ...]
    lower_bound: int
    greedy: int


class _Pattern:
    """A cell set with values, with identical rows and identical columns merged."""

    def __init__(self, t: ValueTable, cells: Iterable[Cell]):
        values = {}
        for x, y in cells:
            if t.cells[x][y] is None:
                raise UsageError(f"cell ({x}, {y}) is undefined")
            values[(x, y)] = t.cells[x][y]
        rows = sorted({x for x, _ in values})
        cols = sorted({y for _, y in values})
        row_sig = {x: tuple((y, values[x, y]) for y in cols if (x, y) in values) for x in rows}
        col_sig = {y: tuple((x, values[x, y]) for x in rows if (x, y) in values) for y in cols}
        self.row_groups = _groups(rows, row_sig)
        self.col_groups = _groups(cols, col_sig)
        self.cells = {
            (i, j): values[g[0], h[0]]
            for i, g in enumerate(self.row_groups)
            for j, h in enumerate(self.col_groups)
            if (g[0], h[0]) in values
        }

    def lift(self, rows: Iterable[int], cols: Iterable[int]) -> Rect:
        return Rect.of(
            (x for i in rows for x in self.row_groups[i]),
            (y for j in cols for y in self.col_groups[j]),
        )


def _groups(lines: list[int], signature: dict[int, tuple]) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for line in lines:
        groups.setdefault(signature[line], []).append(line)
    return list(groups.values())


def _independent(open_cells: dict[Cell, int]) -> int:
    """Greedy set of cells no two of which fit in one rectangle; a lower bound on the count."""
    chosen: list[Cell] = []
    for (a, b), value in open_cells.items():
        if all(
            not (open_cells.get((a, d)) == value == open_cells.get((c, b)) == open_cells[(c, d)])
            for c, d in chosen
        ):
            chosen.append((a, b))
    return len(chosen)


def _rects_at(open_cells: dict[Cell, int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All constant rectangles of open cells whose first cell in row-major order is the first open cell."""
    (r0, c0), value = next(iter(open_cells.items()))
    side_cols = [c for (r, c), v in open_cells.items() if r == r0 and c > c0 and v == value]
    found = []
    for size in range(len(side_cols) + 1):
        for extra in itertools.combinations(side_cols, size):
            cols = (c0,) + extra
            side_rows = sorted({r for (r, _) in open_cells if r > r0
                                and all(open_cells.get((r, c)) == value for c in cols)})
            for n_rows in range(len(side_rows) + 1):
                for more in itertools.combinations(side_rows, n_rows):
                    found.append(((r0,) + more, cols))
    found.sort(key=lambda rc: len(rc[0]) * len(rc[1]), reverse=True)
    return found


def _remove(open_cells: dict[Cell, int], rows: Sequence[int], cols: Sequence[int]) -> dict[Cell, int]:
    gone = {(r, c) for r in rows for c in cols}
    return {cell: v for cell, v in open_cells.items() if cell not in gone}


def _partition_within(open_cells: dict[Cell, int], budget: int) -> list | None:
    if not open_cells:
        return []
    if budget <= 0 or _independent(open_cells) > budget:
        return None
    for rows, cols in _rects_at(open_cells):
        rest = _partition_within(_remove(open_cells, rows, cols), budget - 1)
        if rest is not None:
            return [(rows, cols)] + rest
    return None


def _greedy_partition(open_cells: dict[Cell, int]) -> list:
    out = []
    while open_cells:
        rows, cols = _rects_at(open_cells)[0]
        out.append((rows, cols))
        open_cells = _remove(open_cells, rows, cols)
    return out


def min_rect_partition(t: ValueTable, cells: Iterable[Cell], cap: int = 16) -> PartitionResult:
    """
    Fewest constant-value rectangles partitioning the cell set. Exact branch
    and bound on the first open cell, seeded by a greedy largest-rectangle
    partition as upper bound.
    """
    cells = sorted(set(cells))
    if len(cells) > PARTITION_MAX_CELLS:
        raise SizeLimitError(f"{len(cells)} cells exceed the exact partition limit {PARTITION_MAX_CELLS}")
    if not cells:
        return PartitionResult(0, (), 0, 0)

    pattern = _Pattern(t, cells)
    start = dict(sorted(pattern.cells.items()))
    lower = _independent(start)
    best = _greedy_partition(start)
    greedy = len(best)
    if lower > cap:
        raise BudgetExceededError(f"partition needs at least {lower} rectangles, cap is {cap}")

    for k in range(lower, min(greedy - 1, cap) + 1):
        found = _partition_within(start, k)
        if found is not None:
            best = found
            break
    if len(best) > cap:
        raise BudgetExceededError(f"no partition with at most {cap} rectangles")

    rects = tuple(pattern.lift(rows, cols) for rows, cols in best)
    logger.debug(f"Partition of {len(cells)} cells: {len(rects)} rectangles (lower {lower}, greedy {greedy})")
    return PartitionResult(len(rects), rects, lower, greedy)


def value_support(t: ValueTable, value: int) -> list[Cell]:
    return [(x, y) for x, y, v in t.defined_cells() if v == value]
