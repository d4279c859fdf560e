# tests/test_constructions_separation.py
import pytest

from ccwb.constructions import separation
from ccwb.constructions.separation import (
    IDENTIFIED,
    PI_ROUNDS,
    eta_row,
    find_submatrix,
    identify,
    phi_col,
    psi_row,
    transcript_of,
)
from ccwb.protocols import MALICIOUS, Action, HalfDuplexStrategy, run_halfduplex, verify_halfduplex
from ccwb.rectangles import (
    Axis,
    bipartition_certificate,
    build_adjacency,
    check_expansion,
    gamma_table,
    min_rect_partition,
    neighbourhood,
    value_support,
    verify_fooling_family,
    verify_partition,
)
from ccwb.reproduce import (
    EXPANSION_THRESHOLD,
    EXPECTED_GAMMA,
    FIGURE_MATCH_RATE,
    HORIZONTAL_K,
    S_PARTITION_SIZE,
    S_VALUE_RECTS,
    S_ZERO_RECTS,
    VERTICAL_K,
)
from ccwb.solver import SolveMode, cc_exact
from ccwb.tables import make_table, restrict


@pytest.fixture(scope="module")
def m_horizontal():
    return separation.m_family(separation.fooling_family_horizontal())


@pytest.fixture(scope="module")
def m_vertical():
    return separation.m_family(separation.fooling_family_vertical())


# ============== U AND THE PROTOCOL ==============

def test_u_shape_and_labels(u_table):
    assert u_table.shape == (144, 17)
    assert u_table.is_total
    assert u_table.row_labels[0] == "r:0000"
    assert u_table.row_labels[psi_row(1, "000000")] == "1:000000"
    assert u_table.col_labels[0] == "r"
    assert u_table.col_labels[phi_col(1, "111")] == "1:111"


def test_u_header_cells(u_table):
    assert u_table.value(eta_row("0000"), phi_col(1, "100")) == 12
    assert u_table.value(eta_row("0000"), phi_col(1, "101")) == 0


def test_u_values_skip_identified_transcripts(u_table):
    values = u_table.defined_values()
    assert 0 in values
    assert not values & set(IDENTIFIED[1:])
    assert values <= set(range(16))


def test_identify():
    assert [identify(t) for t in IDENTIFIED] == [0, 0, 0, 0]
    assert identify(0b0110) == 6


def test_pi_verifies_on_u(u_table):
    s_a, s_b = separation.pi_strategies()
    assert s_a.rounds == PI_ROUNDS
    assert verify_halfduplex(s_a, s_b, u_table, MALICIOUS) is None


def test_two_receivers_meet_in_silence():
    s_a, s_b = separation.pi_strategies()
    outcomes = run_halfduplex(s_a, s_b, eta_row("1010"), 0, MALICIOUS)
    assert all(o.silent_rounds == 1 for o in outcomes)
    assert outcomes.single_value() == 0


# ============== M AND THE PUBLISHED TABLES ==============

def test_m_is_a_selection_of_u(u_table, m_table):
    assert m_table.shape == (29, 15)
    rows, cols = separation.m_rows(), separation.m_cols()
    for r, c, v in m_table.defined_cells():
        assert u_table.value(rows[r], cols[c]) == v
    assert restrict(u_table, separation.m_selection()).shape == (29, 15)


def test_m_matches_the_published_table(m_table):
    figure = separation.figure_M()
    assert figure.shape == m_table.shape
    mismatches = separation.diff(m_table, figure)
    assert 1 - len(mismatches) / (29 * 15) >= FIGURE_MATCH_RATE


def test_s_fixture(s_table):
    assert s_table.shape == (15, 13)
    assert s_table.is_total


def test_find_submatrix():
    big = make_table([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    small = make_table([[9, 7], [3, 1]])
    rows, cols = find_submatrix(big, small)
    assert (rows, cols) == ([2, 0], [2, 0])
    assert find_submatrix(big, make_table([[1, 9]])) is None
    assert find_submatrix(small, big) is None


# ============== FOOLING FAMILIES ==============

def test_u_families_verify():
    horizontal = separation.fooling_family_horizontal()
    vertical = separation.fooling_family_vertical()
    assert len(horizontal) == 25 and len(vertical) == 29
    assert verify_fooling_family(horizontal) is None
    assert verify_fooling_family(vertical) is None


def test_m_families_verify(m_horizontal, m_vertical):
    assert len(m_horizontal) == 25 and len(m_vertical) == 29
    assert m_horizontal.name == "m-horizontal"
    assert verify_fooling_family(m_horizontal) is None
    assert verify_fooling_family(m_vertical) is None


def test_horizontal_graph(m_horizontal):
    g = build_adjacency(m_horizontal, Axis.HORIZONTAL)
    expected = {frozenset(e) for e in separation.expected_horizontal_graph().edges()}
    assert g.edges() == expected


def test_vertical_structure(m_vertical):
    g = build_adjacency(m_vertical, Axis.VERTICAL)
    structure = separation.expected_vertical_structure()
    assert g.edges() == {frozenset(e) for e in structure.graph.edges()}
    assert {frozenset(c) for c in g.components(without=[structure.hub])} == set(structure.components)
    assert g.neighbours("S0") - {"S0"} == structure.hub_neighbours
    assert len(structure.hub_neighbours) == 12


def test_gamma_on_a_vertical_component(m_vertical):
    g = build_adjacency(m_vertical, Axis.VERTICAL)
    structure = separation.expected_vertical_structure()
    assert gamma_table(g, sorted(structure.components[1]), structure.hub) == EXPECTED_GAMMA


def test_component_with_r0_is_tight(m_vertical):
    g = build_adjacency(m_vertical, Axis.VERTICAL)
    one = separation.expected_vertical_structure().components[2]
    assert len(one) + 1 == VERTICAL_K
    assert neighbourhood(g, list(one) + ["R0"]) == EXPANSION_THRESHOLD


def test_tight_sets_are_the_vertical_witness(m_vertical):
    g = build_adjacency(m_vertical, Axis.VERTICAL)
    tight = separation.vertical_tight_sets()
    assert [neighbourhood(g, s) for s in tight] == [EXPANSION_THRESHOLD] * 2
    witness = check_expansion(g, VERTICAL_K, EXPANSION_THRESHOLD + 1, candidates=tight)
    one = separation.expected_vertical_structure().components[2]
    assert set(witness.vertices) == one | {"R0"}
    assert witness.neighbours == EXPANSION_THRESHOLD


def test_cols_certificate(m_vertical):
    verify_fooling_family(m_vertical)
    cert = bipartition_certificate(m_vertical.table, m_vertical, Axis.VERTICAL, EXPANSION_THRESHOLD)
    assert cert.bipartitions == 2 ** 14 - 1
    assert cert.bipartition_ok
    assert cert.bound == 6


@pytest.mark.slow
def test_rows_certificate(m_horizontal):
    verify_fooling_family(m_horizontal)
    cert = bipartition_certificate(m_horizontal.table, m_horizontal, Axis.HORIZONTAL, EXPANSION_THRESHOLD)
    assert cert.bound == 6


@pytest.mark.slow
def test_horizontal_expansion(m_horizontal):
    g = build_adjacency(m_horizontal, Axis.HORIZONTAL)
    assert check_expansion(g, HORIZONTAL_K, EXPANSION_THRESHOLD) is None


@pytest.mark.slow
def test_vertical_expansion_is_tight(m_vertical):
    g = build_adjacency(m_vertical, Axis.VERTICAL)
    tight = separation.vertical_tight_sets()
    assert check_expansion(g, VERTICAL_K, EXPANSION_THRESHOLD, candidates=tight) is None
    witness = check_expansion(g, VERTICAL_K, EXPANSION_THRESHOLD + 1, candidates=tight)
    assert witness.neighbours == EXPANSION_THRESHOLD
    one = separation.expected_vertical_structure().components[2]
    assert set(witness.vertices) == one | {"R0"}


# ============== S ==============

def test_nonzero_values_of_s_need_two_rectangles(s_table):
    for value in sorted(s_table.defined_values() - {0}):
        result = min_rect_partition(s_table, value_support(s_table, value))
        assert result.count == S_VALUE_RECTS


@pytest.mark.slow
def test_s_partition(s_table):
    parts = dict(separation.s_partition(s_table))
    assert parts[0].count == S_ZERO_RECTS
    rects = [r for result in parts.values() for r in result.rects]
    assert len(rects) == S_PARTITION_SIZE
    assert verify_partition(s_table, rects, SolveMode.TOTAL) is None


@pytest.mark.slow
def test_s_needs_six_bits(s_table):
    assert cc_exact(s_table, SolveMode.TOTAL, 6, witness=False).depth == 6


# ============== FIRST REALIZATION ==============

def _first_realization():
    """
    Smaller variant with one-bit eta and two-bit psi and phi. Rows: r.0, r.1,
    then j.psi; columns: r, then i.phi.
    """
    alice = [("r", e) for e in "01"] + [(str(j), f"{a}{b}") for j in "01" for a in "01" for b in "01"]
    bob = [("r", "")] + [(str(i), f"{a}{b}") for i in "01" for a in "01" for b in "01"]

    def alice_act(x, h):
        kind, bits = alice[x]
        step = len(h)
        if kind == "r":
            if step in (0, 1, 3):
                return Action.RECEIVE
            m = h[0].bit
            if step == 2:
                return Action.send(m)
            return Action.send(m if h[1].bit == h[3].bit else int(bits))
        if step == 0:
            return Action.send(int(kind))
        return Action.RECEIVE if step in (1, 3) else Action.send(int(bits[step // 2 - 1]))

    def bob_act(y, h):
        kind, bits = bob[y]
        step = len(h)
        if kind == "r":
            return Action.send(h[0].bit) if step in (1, 3) else Action.RECEIVE
        if step == 0:
            return Action.send(int(kind))
        return Action.send(int(bits[step // 2])) if step in (1, 3) else Action.RECEIVE

    def output(_x, h):
        return identify(transcript_of(h))

    s_a = HalfDuplexStrategy(PI_ROUNDS, len(alice), alice_act, output)
    s_b = HalfDuplexStrategy(PI_ROUNDS, len(bob), bob_act, output)
    grid = [[run_halfduplex(s_a, s_b, x, y, MALICIOUS).single_value() for y in range(len(bob))]
            for x in range(len(alice))]
    return make_table(grid)


def test_first_realization_has_seven_distinct_columns():
    t = _first_realization()
    assert t.shape == (10, 9)
    assert t.is_total
    assert t.value(0, 1 + 0b10) == 8
    assert t.value(0, 1 + 0b01) == 2 and t.value(0, 1 + 4 + 0b01) == 6
    columns = {tuple(t.cells[r][c] for r in range(t.n_rows)) for c in range(t.n_cols)}
    assert len(columns) == 7
