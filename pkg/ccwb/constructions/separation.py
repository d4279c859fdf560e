# ccwb/constructions/separation.py
"""
The five-round half-duplex protocol and the functions U, M and S it defines,
with the fooling-rectangle families used for the classical lower bound.

Alice's inputs to U are r.eta (receive first, then use eta) or j.psi (send j
first, then use psi); Bob's are r or i.phi. The domains, in the order used for
indexing (first element most significant):

    eta: 001 010 101 110   (round-1 bit m, round-2 bit i, round-4 bit k)
    psi: 0 1 00 01 10 11   (the bits Alice has received so far)
    phi: L 0 1             (L is the empty history)

Rounds 2 to 5 are classical (Bob, Alice, Bob, Alice send). The transcript of
those four rounds, Bob's round-2 bit most significant, is the result, with
0000, 0101, 1010 and 1111 identified to 0.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import networkx as nx
from networkx.algorithms import bipartite
from tqdm import tqdm

from ccwb import config
from ccwb.errors import ConstructionError, UsageError
from ccwb.logger import logger
from ccwb.protocols import MALICIOUS, Action, HalfDuplexStrategy, History, run_halfduplex
from ccwb.rectangles import FoolingFamily, NamedRect, PartitionResult, min_rect_partition, project_family, value_support
from ccwb.tables import Rect, ValueTable, make_table, read_ccmat, select

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

ETA_DOMAIN = ("001", "010", "101", "110")
PSI_DOMAIN = ("0", "1", "00", "01", "10", "11")
PHI_DOMAIN = ("", "0", "1")

N_ETA = 1 << len(ETA_DOMAIN)
N_PSI = 1 << len(PSI_DOMAIN)
N_PHI = 1 << len(PHI_DOMAIN)

IDENTIFIED = (0b0000, 0b0101, 0b1010, 0b1111)
PI_ROUNDS = 5

# Rows and columns of M, in the order of the published table
M_ETA_ROWS = ("0000", "0001", "0110", "1011", "1100", "1111")
M_PSI0_ROWS = ("000001", "010100", "001011", "011010", "011100", "001101",
               "100011", "100101", "110000", "110110", "101101")
M_PSI1_ROWS = ("000011", "010110", "001001", "011000", "001111", "011110",
               "100001", "110010", "100111", "100110", "110001", "110100")
M_PHI0_COLS = ("000", "010", "001", "011", "100", "101", "110")
M_PHI1_COLS = ("010", "001", "011", "100", "101", "110", "111")


# ============== INPUTS ==============

def map_bit(index: int, domain: Sequence[str], key: str) -> int:
    """Value of the map with the given index at one domain element."""
    return (index >> (len(domain) - 1 - domain.index(key))) & 1


def map_bits(index: int, domain: Sequence[str]) -> str:
    return format(index, f"0{len(domain)}b")


@dataclass(frozen=True)
class AliceInput:
    """j is None for r.eta (fn is the eta index), else j.psi (fn is the psi index)."""
    j: int | None
    fn: int

    @property
    def receives_first(self) -> bool:
        return self.j is None

    def eta(self, m: int, i: int, k: int) -> int:
        return map_bit(self.fn, ETA_DOMAIN, f"{m}{i}{k}")

    def psi(self, key: str) -> int:
        return map_bit(self.fn, PSI_DOMAIN, key)

    @property
    def label(self) -> str:
        if self.j is None:
            return f"r:{map_bits(self.fn, ETA_DOMAIN)}"
        return f"{self.j}:{map_bits(self.fn, PSI_DOMAIN)}"


@dataclass(frozen=True)
class BobInput:
    """i is None for r, else i.phi."""
    i: int | None
    phi_index: int = 0

    @property
    def receives_first(self) -> bool:
        return self.i is None

    def phi(self, key: str) -> int:
        return map_bit(self.phi_index, PHI_DOMAIN, key)

    @property
    def label(self) -> str:
        return "r" if self.i is None else f"{self.i}:{map_bits(self.phi_index, PHI_DOMAIN)}"


def alice_inputs() -> list[AliceInput]:
    """Row order of U: r.eta by eta, then 0.psi by psi, then 1.psi."""
    return ([AliceInput(None, e) for e in range(N_ETA)]
            + [AliceInput(j, p) for j in (0, 1) for p in range(N_PSI)])


def bob_inputs() -> list[BobInput]:
    """Column order of U: r, then 0.phi by phi, then 1.phi."""
    return [BobInput(None)] + [BobInput(i, p) for i in (0, 1) for p in range(N_PHI)]


def eta_row(bits: str) -> int:
    return int(bits, 2)


def psi_row(j: int, bits: str) -> int:
    return N_ETA + j * N_PSI + int(bits, 2)


def phi_col(i: int, bits: str) -> int:
    return 1 + i * N_PHI + int(bits, 2)


# ============== THE PROTOCOL ==============

def identify(transcript: int) -> int:
    return 0 if transcript in IDENTIFIED else transcript


def transcript_of(history: History) -> int:
    """Rounds 2..5 as a 4-bit number, round 2 most significant."""
    value = 0
    for event in history[1:PI_ROUNDS]:
        value = (value << 1) | event.bit
    return value


def _alice_action(x: AliceInput, history: History) -> Action:
    step = len(history)
    if step == 0:
        return Action.RECEIVE if x.receives_first else Action.send(x.j)
    if step in (1, 3):
        return Action.RECEIVE
    m, i = history[0].bit, history[1].bit
    if step == 2:
        return Action.send(m if x.receives_first else x.psi(str(i)))
    k = history[3].bit
    if x.receives_first:
        return Action.send(m if i == k else x.eta(m, i, k))
    return Action.send(x.psi(f"{i}{k}"))


def _bob_action(y: BobInput, history: History) -> Action:
    step = len(history)
    if step == 0:
        return Action.RECEIVE if y.receives_first else Action.send(y.i)
    if step in (2, 4):
        return Action.RECEIVE
    m = history[0].bit
    if step == 1:
        return Action.send(m if y.receives_first else y.phi(""))
    return Action.send(m if y.receives_first else y.phi(str(history[2].bit)))


def _output(_x: int, history: History) -> int:
    return identify(transcript_of(history))


def pi_strategies(
    alice: Sequence[AliceInput] | None = None,
    bob: Sequence[BobInput] | None = None,
) -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    """Strategies over the given input lists (all of U's inputs by default)."""
    alice = list(alice) if alice is not None else alice_inputs()
    bob = list(bob) if bob is not None else bob_inputs()
    return (
        HalfDuplexStrategy(PI_ROUNDS, len(alice), lambda x, h: _alice_action(alice[x], h), _output, name="pi-alice"),
        HalfDuplexStrategy(PI_ROUNDS, len(bob), lambda y, h: _bob_action(bob[y], h), _output, name="pi-bob"),
    )


@lru_cache(maxsize=1)
def build_U() -> ValueTable:
    """
    Run the protocol on every input pair along every malicious branch; all
    outcomes of a pair must carry one identified value, which becomes the cell.
    """
    alice, bob = alice_inputs(), bob_inputs()
    s_a, s_b = pi_strategies(alice, bob)
    grid = []
    runs = 0
    for x in tqdm(range(len(alice)), desc="building U", file=sys.stderr, disable=not config.PROGRESS,
                  mininterval=config.PROGRESS_INTERVAL, leave=False):
        row = []
        for y in range(len(bob)):
            outcomes = run_halfduplex(s_a, s_b, x, y, MALICIOUS)
            runs += len(outcomes)
            value = outcomes.single_value()
            if value is None:
                logger.error(f"Branches disagree on ({alice[x].label}, {bob[y].label}): {outcomes.outputs()}")
                raise ConstructionError(f"adversary branches disagree on ({alice[x].label}, {bob[y].label})")
            row.append(value)
        grid.append(row)
    logger.info(f"Built U ({len(alice)}x{len(bob)}) from {runs} branch outcomes")
    return make_table(grid, [a.label for a in alice], [b.label for b in bob])


# ============== M, S AND THE PUBLISHED TABLES ==============

def m_rows() -> list[int]:
    return ([eta_row(e) for e in M_ETA_ROWS]
            + [psi_row(0, p) for p in M_PSI0_ROWS]
            + [psi_row(1, p) for p in M_PSI1_ROWS])


def m_cols() -> list[int]:
    return [0] + [phi_col(0, p) for p in M_PHI0_COLS] + [phi_col(1, p) for p in M_PHI1_COLS]


def m_selection() -> Rect:
    return Rect.of(m_rows(), m_cols())


def build_M() -> ValueTable:
    """M as a sub-table of U in the published row and column order."""
    return select(build_U(), m_rows(), m_cols())


def figure_M() -> ValueTable:
    return read_ccmat(FIXTURES / "figure_m.ccmat")


def figure_S() -> ValueTable:
    return read_ccmat(FIXTURES / "figure_s.ccmat")


@dataclass(frozen=True)
class Mismatch:
    row: int
    col: int
    generated: int | None
    figure: int | None


def diff(generated: ValueTable, figure: ValueTable) -> list[Mismatch]:
    if generated.shape != figure.shape:
        raise UsageError(f"cannot compare {generated.shape} with {figure.shape}")
    out = [
        Mismatch(r, c, generated.cells[r][c], figure.cells[r][c])
        for r in range(generated.n_rows)
        for c in range(generated.n_cols)
        if generated.cells[r][c] != figure.cells[r][c]
    ]
    for m in out:
        logger.warning(f"Figure mismatch at ({generated.row_labels[m.row]}, {generated.col_labels[m.col]}): "
                       f"generated {m.generated}, figure {m.figure}")
    return out


def find_submatrix(big: ValueTable, small: ValueTable) -> tuple[list[int], list[int]] | None:
    """
    Distinct rows and columns of big whose sub-table equals small exactly, or
    None. Columns are assigned by backtracking while every small row keeps a
    candidate row; rows are then matched with a bipartite matching.
    """
    n, m = small.n_rows, small.n_cols
    if n > big.n_rows or m > big.n_cols:
        return None
    cols: list[int] = []

    def rows_for(candidates: list[set[int]]) -> list[int] | None:
        g = nx.Graph()
        left = [("s", i) for i in range(n)]
        g.add_nodes_from(left, bipartite=0)
        g.add_edges_from((("s", i), ("b", r)) for i in range(n) for r in candidates[i])
        matching = bipartite.hopcroft_karp_matching(g, top_nodes=left)
        if not all(node in matching for node in left):
            return None
        return [matching[("s", i)][1] for i in range(n)]

    def extend(candidates: list[set[int]]) -> list[int] | None:
        j = len(cols)
        if j == m:
            return rows_for(candidates)
        for c in range(big.n_cols):
            if c in cols:
                continue
            narrowed = [{r for r in cand if big.cells[r][c] == small.cells[i][j]}
                        for i, cand in enumerate(candidates)]
            if any(not cand for cand in narrowed):
                continue
            cols.append(c)
            found = extend(narrowed)
            if found is not None:
                return found
            cols.pop()
        return None

    rows = extend([set(range(big.n_rows)) for _ in range(n)])
    if rows is None:
        logger.info(f"No {n}x{m} occurrence found")
        return None
    return rows, list(cols)


# ============== FOOLING RECTANGLES ==============

def _bits(i: int) -> tuple[int, int, int, int]:
    return (i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1


def _rows(pred: Callable[[AliceInput], bool]) -> list[int]:
    return [x for x, a in enumerate(alice_inputs()) if pred(a)]


def _cols(pred: Callable[[BobInput], bool]) -> list[int]:
    return [y for y, b in enumerate(bob_inputs()) if pred(b)]


def _senders(pred: Callable[[AliceInput], bool], j: int | None = None) -> list[int]:
    """j.psi rows (any j when j is None) whose psi satisfies pred."""
    return _rows(lambda a: not a.receives_first and (j is None or a.j == j) and pred(a))


def _bob_senders(pred: Callable[[BobInput], bool], i: int | None = None) -> list[int]:
    return _cols(lambda b: not b.receives_first and (i is None or b.i == i) and pred(b))


def _rect(rows: Iterable[int], cols: Iterable[int]) -> Rect:
    return Rect.of(rows, cols)


def r_rect(i: int) -> Rect:
    """R_i of the horizontal family, for i not in {5, 10, 15}."""
    a, b, c, d = _bits(i)
    na, nb = 1 - a, 1 - b
    if i == 0:
        return _rect(_senders(lambda x: x.psi("0") == 0 and x.psi("00") == 0),
                     _bob_senders(lambda y: y.phi("") == 0 and y.phi("0") == 0, i=1))
    if a != c:
        return _rect(_senders(lambda x: x.psi(f"{a}") == b and x.psi(f"{a}{na}") == d),
                     _bob_senders(lambda y: y.phi("") == a and y.phi(f"{b}") == na, i=nb))
    if b != d:
        return _rect(_senders(lambda x: x.psi(f"{a}") == b and x.psi(f"{a}{a}") == nb, j=na),
                     _bob_senders(lambda y: y.phi("") == a and y.phi(f"{b}") == a))
    raise UsageError(f"R_{i} is not part of the horizontal family")


def r_abab(a: int, b: int) -> Rect:
    """R_abab of the vertical family (R0, R5, R10, R15)."""
    na, nb = 1 - a, 1 - b
    return _rect(
        _senders(lambda x: x.psi(f"{a}") == b and x.psi(f"{a}{a}") == b and x.psi(f"{na}") != x.psi(f"{na}{na}")),
        _bob_senders(lambda y: y.phi("") == a and y.phi(f"{b}") == a and y.phi(f"{nb}") == na, i=nb),
    )


def s_rect(i: int) -> Rect:
    """S_i for i not in {0, 5, 10, 15}."""
    a, b, c, d = _bits(i)
    if a == c and b == d:
        raise UsageError(f"S_{i} is not defined")
    if a != c:
        return _rect(_rows(lambda x: x.receives_first and x.eta(b, a, c) == d),
                     _bob_senders(lambda y: y.phi("") == a and y.phi(f"{b}") == c, i=b))
    return _rect(_senders(lambda x: x.psi(f"{a}") == b and x.psi(f"{a}{a}") == d, j=a), [0])


def s0_rect() -> Rect:
    return _rect(_rows(lambda x: x.receives_first), _bob_senders(lambda y: y.phi("") == y.phi(f"{y.i}")))


HORIZONTAL_R = tuple(i for i in range(15) if i not in (5, 10))
S_DEFINED = tuple(i for i in range(1, 15) if i not in (5, 10))


def fooling_family_horizontal() -> FoolingFamily:
    """The 25 fooling rectangles on U."""
    rects = ([NamedRect(f"R{i}", r_rect(i), i) for i in HORIZONTAL_R]
             + [NamedRect(f"S{i}", s_rect(i), i) for i in S_DEFINED])
    return FoolingFamily("u-horizontal", build_U(), rects)


def fooling_family_vertical() -> FoolingFamily:
    """The horizontal family with R0 reduced, plus R5, R10, R15 and S0: 29 rectangles on U."""
    rects = []
    for i in range(16):
        if i in (0, 5, 10, 15):
            a, b = _bits(i)[:2]
            rects.append(NamedRect(f"R{i}", r_abab(a, b), 0))
        else:
            rects.append(NamedRect(f"R{i}", r_rect(i), i))
    rects.append(NamedRect("S0", s0_rect(), 0))
    rects += [NamedRect(f"S{i}", s_rect(i), i) for i in S_DEFINED]
    return FoolingFamily("u-vertical", build_U(), rects)


def m_family(f: FoolingFamily) -> FoolingFamily:
    """A family on U seen inside M."""
    projected = project_family(f, build_M(), m_rows(), m_cols())
    projected.name = f.name.replace("u-", "m-")
    return projected


# ============== EXPECTED ADJACENCY ==============

def _complete_bipartite(g: nx.Graph, first: Iterable[str], second: Iterable[str]) -> None:
    second = list(second)
    g.add_edges_from((u, v) for u in first for v in second)


def _names(prefix: str, indices: Iterable[int]) -> list[str]:
    return [f"{prefix}{i}" for i in indices]


def expected_horizontal_graph() -> nx.Graph:
    """Edges (without self-loops) of the horizontal adjacency graph of the family on M."""
    g = nx.Graph()
    g.add_nodes_from(_names("R", HORIZONTAL_R) + _names("S", S_DEFINED))
    parts = [["S2", "S3"], ["S6", "S7"], ["S8", "S9"], ["S12", "S13"]]
    for p, first in enumerate(parts):
        for second in parts[p + 1:]:
            _complete_bipartite(g, first, second)
    _complete_bipartite(g, ["R0", "R1", "S1"], ["R2", "R3"])
    _complete_bipartite(g, ["R4", "S4"], ["R6", "R7"])
    _complete_bipartite(g, ["R11", "S11"], ["R8", "R9"])
    _complete_bipartite(g, ["R14", "S14"], ["R12", "R13"])
    left = ["R0", "R1", "R2", "R3", "R4", "R6", "R7", "S1", "S4"]
    right = ["R8", "R9", "R11", "R12", "R13", "R14", "S11", "S14"]
    excluded = {frozenset((u, v)) for u in ("R1", "R4", "S11", "S14") for v in ("R11", "R14", "S1", "S4")}
    g.add_edges_from((u, v) for u in left for v in right if frozenset((u, v)) not in excluded)
    return g


@dataclass(frozen=True)
class VerticalStructure:
    graph: nx.Graph
    hub: str
    components: tuple[frozenset[str], ...]

    @property
    def hub_neighbours(self) -> set[str]:
        return set(self.graph.neighbors(self.hub))


def _swap(name: str) -> str:
    """Exchange zeros and ones in the index of R_abcd or S_abcd."""
    return f"{name[0]}{15 - int(name[1:])}"


def expected_vertical_structure() -> VerticalStructure:
    """
    Without S0 the vertical graph has three components: the r-column
    rectangles S1, S4, S11, S14 (a clique), and two isomorphic components of
    rectangles whose index starts with 0 and with 1. S0 meets every R except
    R0, R5, R10, R15.
    """
    g = nx.Graph()
    g.add_nodes_from(_names("R", range(16)) + _names("S", (0,) + S_DEFINED))

    r_only = ["S1", "S4", "S11", "S14"]
    g.add_edges_from((u, v) for k, u in enumerate(r_only) for v in r_only[k + 1:])

    zero_edges = {("R0", "R1"), ("R2", "R3"), ("S2", "S3"), ("R4", "R5"), ("R6", "R7"), ("S6", "S7")}
    first = ["R0", "R1", "R2", "R3", "S2", "S3"]
    second = ["R4", "R5", "R6", "R7", "S6", "S7"]
    excluded = {("R0", "R4"), ("R0", "R5"), ("R1", "R5")}
    excluded |= {(u, v) for u in ("R0", "R2", "R3", "S6", "S7") for v in ("R5", "R6", "R7", "S2", "S3")}
    for u in first:
        for v in second:
            if (u, v) not in excluded:
                zero_edges.add((u, v))
    g.add_edges_from(zero_edges)
    g.add_edges_from((_swap(u), _swap(v)) for u, v in zero_edges)

    g.add_edges_from(("S0", f"R{i}") for i in range(16) if i not in (0, 5, 10, 15))

    zero = frozenset(_names("R", range(8)) + ["S2", "S3", "S6", "S7"])
    one = frozenset(_swap(v) for v in zero)
    return VerticalStructure(g, "S0", (frozenset(r_only), zero, one))


def vertical_tight_sets() -> list[frozenset[str]]:
    """Each half component plus the corner rectangle of the other half: 13 vertices, 17 neighbours."""
    _, zero, one = expected_vertical_structure().components
    return [one | {"R0"}, zero | {"R15"}]


# ============== PARTITION OF S ==============

def s_partition(t: ValueTable | None = None) -> list[tuple[int, PartitionResult]]:
    """Minimal constant-value partition of each value's cells, value by value."""
    t = t if t is not None else figure_S()
    out = []
    for value in sorted({v for _, _, v in t.defined_cells()}):
        result = min_rect_partition(t, value_support(t, value))
        logger.debug(f"Value {value}: {result.count} rectangles")
        out.append((value, result))
    logger.info(f"Partition into {sum(r.count for _, r in out)} monochromatic rectangles")
    return out
