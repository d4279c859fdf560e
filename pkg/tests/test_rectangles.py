# tests/test_rectangles.py
import itertools

import networkx as nx
import pytest

from ccwb.errors import BudgetExceededError, SizeLimitError, UsageError
from ccwb.rectangles import (
    AdjacencyGraph,
    Axis,
    FoolingFamily,
    NamedRect,
    bipartition_certificate,
    build_adjacency,
    check_expansion,
    check_fooling_set,
    gamma_table,
    is_mono,
    min_neighbourhood,
    min_rect_partition,
    neighbourhood,
    project_family,
    search_fooling_set,
    value_support,
    verify_fooling_family,
    verify_partition,
)
from ccwb.solver import SolveMode
from ccwb.tables import Rect, bits_of, gen_named, make_table, select


def diagonal_family(t, name="diag"):
    return FoolingFamily(name, t, [NamedRect(f"D{i}", Rect.of([i], [i]), 1) for i in range(t.n_rows)])


def graph_from_networkx(g):
    g = nx.relabel_nodes(g, str)
    labels = tuple(sorted(g.nodes, key=int))
    adjacency = tuple(
        bits_of([labels.index(v)] + [labels.index(u) for u in g.neighbors(v)]) for v in labels
    )
    return AdjacencyGraph(labels, adjacency)


# ============== MONOCHROMATIC ==============

def test_is_mono_modes(small_partial):
    assert is_mono(small_partial, Rect.of([1], [0, 1]))
    assert not is_mono(small_partial, Rect.of([0], [0, 2]))
    assert not is_mono(small_partial, Rect.of([0], [0, 1]), SolveMode.TOTAL)
    assert is_mono(small_partial, Rect.of([0], [0, 1]), SolveMode.PARTIAL_GLOBAL)
    # rows constant and columns constant, values differ between lines
    assert is_mono(small_partial, Rect.of([0, 1], [1, 2]), SolveMode.PARTIAL_LOCAL)
    assert not is_mono(small_partial, Rect.of([0, 1], [1, 2]), SolveMode.PARTIAL_GLOBAL)


# ============== FOOLING SETS ==============

def test_check_fooling_set(eq2):
    assert check_fooling_set(eq2, [(i, i) for i in range(4)]) is None
    violation = check_fooling_set(eq2, [(0, 1), (0, 2)])
    assert violation.kind == "fooling"
    assert violation.cells == ((0, 1), (0, 2))


def test_check_fooling_set_rejects_undefined(small_partial):
    with pytest.raises(UsageError):
        check_fooling_set(small_partial, [(0, 1)])


def test_search_fooling_set_is_seeded():
    t = gen_named("eq", 3)
    first = search_fooling_set(t, restarts=20, seed=5)
    assert first == search_fooling_set(t, restarts=20, seed=5)
    assert check_fooling_set(t, first) is None
    assert len(first) >= 8


# ============== FAMILIES ==============

def test_verify_diagonal_family(eq2):
    f = diagonal_family(eq2)
    assert verify_fooling_family(f) is None
    assert f.verified
    assert f.names == ["D0", "D1", "D2", "D3"]
    assert f["D2"].rect == Rect.of([2], [2])
    with pytest.raises(KeyError):
        f["D9"]


def test_family_violations(eq2):
    wrong_value = FoolingFamily("bad", eq2, [NamedRect("A", Rect.of([0], [1]), 1)])
    assert verify_fooling_family(wrong_value).kind == "value"
    overlap = FoolingFamily("bad", eq2, [NamedRect("A", Rect.of([0], [1, 2]), 0),
                                         NamedRect("B", Rect.of([0, 3], [2]), 0)])
    assert verify_fooling_family(overlap).kind == "disjointness"
    # two zero cells of one row fit in a constant rectangle
    joinable = FoolingFamily("bad", eq2, [NamedRect("A", Rect.of([0], [1]), 0),
                                          NamedRect("B", Rect.of([0], [2]), 0)])
    violation = verify_fooling_family(joinable)
    assert violation.kind == "fooling"
    assert not joinable.verified


def test_project_family_drops_missing_rectangles(eq2):
    f = diagonal_family(eq2)
    sub = select(eq2, [3, 1], [1, 3])
    projected = project_family(f, sub, [3, 1], [1, 3])
    assert projected.names == ["D1", "D3"]
    assert projected.dropped == ["D0", "D2"]
    assert projected["D3"].rect == Rect.of([0], [1])
    assert verify_fooling_family(projected) is None


# ============== GRAPHS ==============

def test_adjacency_graph_axes():
    t = make_table([[1, 1, 0], [0, 0, 2], [0, 2, 0]])
    f = FoolingFamily("f", t, [
        NamedRect("A", Rect.of([0], [0, 1]), 1),
        NamedRect("B", Rect.of([1], [2]), 2),
        NamedRect("C", Rect.of([2], [1]), 2),
    ])
    rows = build_adjacency(f, Axis.HORIZONTAL)
    cols = build_adjacency(f, Axis.VERTICAL)
    assert rows.edges() == set()
    assert cols.edges() == {frozenset(("A", "C"))}
    assert cols.neighbours("A") == {"A", "C"}
    assert neighbourhood(cols, ["A"]) == 2
    assert cols.components() == [{"A", "C"}, {"B"}]
    assert rows.components(without=["B"]) == [{"A"}, {"C"}]
    assert Axis.parse("rows") is Axis.HORIZONTAL
    assert Axis.parse("cols") is Axis.VERTICAL
    with pytest.raises(UsageError):
        Axis.parse("diagonal")


def test_expansion_matches_exhaustive_minimum():
    g = graph_from_networkx(nx.petersen_graph())
    for k in (1, 3, 5):
        least = min_neighbourhood(g, k)
        assert check_expansion(g, k, least, threads=1) is None
        witness = check_expansion(g, k, least + 1, threads=1)
        assert witness is not None
        assert len(witness.vertices) == k
        assert witness.neighbours == least == neighbourhood(g, witness.vertices)


def test_expansion_threads_agree():
    g = graph_from_networkx(nx.cycle_graph(12))
    one = check_expansion(g, 4, 9, threads=1)
    many = check_expansion(g, 4, 9, threads=3)
    assert one == many
    assert one.neighbours == 6


def test_expansion_tries_candidates_first():
    g = graph_from_networkx(nx.cycle_graph(12))
    assert check_expansion(g, 4, 9, threads=1).vertices == ("0", "1", "2", "3")
    # wrong size and expanding candidates are passed over
    candidates = [["4", "5"], ["0", "3", "6", "9"], ["4", "5", "6", "7"]]
    witness = check_expansion(g, 4, 9, threads=1, candidates=candidates)
    assert witness.vertices == ("4", "5", "6", "7")
    assert witness.neighbours == 6
    assert check_expansion(g, 4, 6, threads=1, candidates=candidates) is None


def test_expansion_bounds():
    g = graph_from_networkx(nx.path_graph(3))
    with pytest.raises(UsageError):
        check_expansion(g, 4, 1)
    assert check_expansion(g, 0, 0) is None


def test_gamma_table_on_a_star():
    star = nx.star_graph(3)               # centre 0, leaves 1..3
    star.add_edge(1, 4)                   # 4 plays the hub, adjacent to leaf 1
    g = graph_from_networkx(nx.relabel_nodes(star, str))
    table = gamma_table(g, ["0", "1", "2", "3"], hub="4")
    assert table[1] == (2, 2)             # a leaf other than 1 sees itself and the centre
    assert table[4] == (4, 5)
    with pytest.raises(SizeLimitError):
        gamma_table(graph_from_networkx(nx.path_graph(13)), [str(i) for i in range(13)])


# ============== CERTIFICATE ==============

def test_certificate_on_diagonal(eq2):
    f = diagonal_family(eq2)
    with pytest.raises(UsageError):
        bipartition_certificate(eq2, f, Axis.HORIZONTAL, 2)
    verify_fooling_family(f)

    cert = bipartition_certificate(eq2, f, Axis.HORIZONTAL, 2, progress=False)
    assert cert.bipartitions == 7
    assert cert.bipartition_ok
    assert cert.worst_max == 2
    assert cert.bound == 2

    failing = bipartition_certificate(eq2, f, Axis.VERTICAL, 3, progress=False)
    assert not failing.bipartition_ok
    assert failing.bound is None
    assert 0 in failing.worst_split and len(failing.worst_split) == 2


def test_certificate_on_odd_line_count():
    t = gen_named("eq", 1)
    t3 = make_table([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    f = diagonal_family(t3)
    verify_fooling_family(f)
    cert = bipartition_certificate(t3, f, Axis.HORIZONTAL, 2, progress=False)
    assert cert.bipartitions == 3
    assert cert.worst_max == 2 and cert.bound == 2
    with pytest.raises(UsageError):
        bipartition_certificate(t, f, Axis.HORIZONTAL, 2)


# ============== PARTITIONS ==============

def test_verify_partition(eq2):
    diag = [Rect.of([i], [i]) for i in range(4)]
    zeros = [Rect.of([i], [j for j in range(4) if j != i]) for i in range(4)]
    assert verify_partition(eq2, diag + zeros) is None
    assert verify_partition(eq2, diag).kind == "coverage"
    assert verify_partition(eq2, diag + zeros + [Rect.of([0], [0])]).kind == "overlap"
    assert verify_partition(eq2, [Rect.of([0, 1], [0])]).kind == "mono"
    assert verify_partition(eq2, [Rect.of([4], [0])]).kind == "invalid"


def test_min_rect_partition_small_cases(eq2):
    ones = min_rect_partition(eq2, value_support(eq2, 1))
    assert ones.count == 4
    eq1 = gen_named("eq", 1)
    assert min_rect_partition(eq1, value_support(eq1, 0)).count == 2
    constant = make_table([[3] * 4] * 3)
    assert min_rect_partition(constant, value_support(constant, 3)).count == 1
    assert min_rect_partition(eq2, []).count == 0


def test_min_rect_partition_is_exact():
    # five cells in an L shape
    t = make_table([[1, 1, 1], [1, 1, 0], [0, 0, 0]])
    result = min_rect_partition(t, value_support(t, 1))
    assert result.count == 2
    assert result.lower_bound <= 2 <= result.greedy
    cells = {cell for r in result.rects for cell in r.cells()}
    assert cells == set(value_support(t, 1))


def test_min_rect_partition_matches_brute_force():
    t = make_table([[1, 0, 1], [1, 1, 1], [0, 1, 1]])
    cells = value_support(t, 1)
    all_rects = [
        Rect.of(rows, cols)
        for k in range(1, 4) for rows in itertools.combinations(range(3), k)
        for m in range(1, 4) for cols in itertools.combinations(range(3), m)
        if all(t.value(r, c) == 1 for r in rows for c in cols)
    ]
    target = frozenset(cells)

    def fewest(budget):
        for n in range(1, budget + 1):
            for combo in itertools.combinations(all_rects, n):
                covered = [c for r in combo for c in r.cells()]
                if len(covered) == len(set(covered)) and set(covered) == target:
                    return n
        return None

    assert min_rect_partition(t, cells).count == fewest(5)


def test_min_rect_partition_limits(eq2):
    with pytest.raises(BudgetExceededError):
        min_rect_partition(eq2, value_support(eq2, 1), cap=2)
    eq4 = gen_named("eq", 4)
    with pytest.raises(SizeLimitError):
        min_rect_partition(eq4, value_support(eq4, 0))
