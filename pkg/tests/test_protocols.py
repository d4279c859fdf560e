# tests/test_protocols.py
import json

import pytest

from ccwb.errors import StrategyIncompleteError, TableFormatError, UsageError
from ccwb.protocols import (
    GLOBAL,
    HONEST,
    LOCAL,
    MALICIOUS,
    Action,
    ClassicalProtocol,
    Event,
    GlobalLeaf,
    HalfDuplexStrategy,
    Node,
    Owner,
    classical_to_halfduplex,
    diagonal_table,
    eq1_protocol,
    example_depth3_protocol,
    example_depth3_table,
    identity_local_protocol,
    leaf_rects,
    load_protocol,
    run_classical,
    run_halfduplex,
    save_protocol,
    transpose_protocol,
    verify_classical,
    verify_halfduplex,
)
from ccwb.tables import gen_named, make_table, transpose


# ============== CLASSICAL ==============

def test_depth3_example_run():
    p = example_depth3_protocol()
    assert p.depth == 3
    transcript, leaf = run_classical(p, 0b010, 0b110)
    assert transcript == (1, 0, 1)
    assert leaf == GlobalLeaf(4)
    assert verify_classical(p, example_depth3_table()) is None
    assert example_depth3_table().defined_values() == {1, 2, 3, 4}


def test_eq1_protocol_and_counterexample():
    p = eq1_protocol()
    assert verify_classical(p, gen_named("eq", 1)) is None
    ce = verify_classical(p, make_table([[1, 0], [0, 0]]))
    assert (ce.x, ce.y, ce.got, ce.want) == (1, 1, 1, 0)


def test_verify_classical_checks_shapes_and_semantics():
    with pytest.raises(UsageError):
        verify_classical(eq1_protocol(), gen_named("eq", 2))
    with pytest.raises(UsageError):
        verify_classical(eq1_protocol(), gen_named("eq", 1), LOCAL)
    with pytest.raises(UsageError):
        verify_classical(eq1_protocol(), gen_named("eq", 1), "quantum")


def test_leaf_rects_partition_the_inputs():
    p = example_depth3_protocol()
    t = example_depth3_table()
    rects = leaf_rects(p)
    seen = set()
    for rect, leaf in rects:
        for x, y in rect.cells():
            assert (x, y) not in seen
            assert t.value(x, y) == leaf.value
            seen.add((x, y))
    assert len(seen) == 64
    assert len(rects) <= 8


def test_local_leaves_on_the_diagonal():
    t = diagonal_table(2)
    p = identity_local_protocol(2)
    assert p.depth == 0
    assert p.leaf_kind == LOCAL
    assert verify_classical(p, t, LOCAL) is None
    with pytest.raises(UsageError):
        verify_classical(p, t, GLOBAL)


def test_transpose_protocol():
    p = example_depth3_protocol()
    assert verify_classical(transpose_protocol(p), transpose(example_depth3_table())) is None


def test_protocol_json(tmp_path):
    path = tmp_path / "p.json"
    save_protocol(example_depth3_protocol(), path)
    loaded = load_protocol(path)
    assert loaded == example_depth3_protocol()

    local_path = tmp_path / "local.json"
    save_protocol(identity_local_protocol(1), local_path)
    assert load_protocol(local_path) == identity_local_protocol(1)


@pytest.mark.parametrize("doc", [
    {"n_rows": 1, "n_cols": 1, "nodes": [{"id": 0, "owner": "A", "bits": [0]}]},
    {"n_rows": 1, "n_cols": 1, "nodes": [{"id": 0, "owner": "A", "bits": [2], "children": [1, 1]},
                                         {"id": 1, "value": 0}]},
    {"n_rows": 1, "n_cols": 1, "nodes": [{"id": 1, "value": 0}]},
    {"n_rows": 1, "n_cols": 1, "nodes": [{"id": 0, "owner": "B", "bits": [0], "children": [0, 0]}]},
    {"n_rows": 2, "n_cols": 1, "nodes": [{"id": 0, "owner": "A", "bits": [0], "children": [1, 1]},
                                         {"id": 1, "value": 0}]},
])
def test_invalid_protocol_documents(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(TableFormatError):
        load_protocol(path)


# ============== HALF-DUPLEX ==============

def _strategy(rounds, n_inputs, act, output=lambda x, h: tuple(e.value for e in h)):
    return HalfDuplexStrategy(rounds, n_inputs, act, output)


def test_round_events():
    alice = _strategy(3, 1, lambda x, h: [Action.SEND1, Action.SEND0, Action.RECEIVE][len(h)])
    bob = _strategy(3, 1, lambda y, h: [Action.RECEIVE, Action.SEND1, Action.SEND0][len(h)])
    (outcome,) = run_halfduplex(alice, bob, 0, 0)
    assert outcome.a_events == (Event.SENT1, Event.SENT0, Event.RECV0)
    assert outcome.b_events == (Event.RECV1, Event.SENT1, Event.SENT0)
    assert outcome.spent_rounds == 1
    assert outcome.silent_rounds == 0


def test_silent_round_branches():
    silent = _strategy(1, 1, lambda x, h: Action.RECEIVE)
    malicious = run_halfduplex(silent, silent, 0, 0, MALICIOUS)
    honest = run_halfduplex(silent, silent, 0, 0, HONEST)
    assert len(malicious) == 4
    assert len(honest) == 2
    assert all(o.silent_rounds == 1 for o in malicious)
    assert {(o.a_events[0].bit, o.b_events[0].bit) for o in honest} == {(0, 0), (1, 1)}
    assert malicious.single_value() is None


def test_halfduplex_errors():
    one = _strategy(1, 1, lambda x, h: Action.RECEIVE)
    two = _strategy(2, 1, lambda x, h: Action.RECEIVE)
    with pytest.raises(UsageError):
        run_halfduplex(one, two, 0, 0)
    with pytest.raises(UsageError):
        run_halfduplex(one, one, 0, 0, "lazy")
    broken = _strategy(1, 1, lambda x, h: None)
    with pytest.raises(StrategyIncompleteError):
        run_halfduplex(broken, one, 0, 0)
    mute = _strategy(1, 1, lambda x, h: Action.SEND0, output=lambda x, h: {}[x])
    with pytest.raises(StrategyIncompleteError):
        run_halfduplex(mute, mute, 0, 0)


def test_verify_halfduplex_reports_first_failure():
    # Alice announces x, Bob outputs what he heard: computes f(x, y) = x
    alice = _strategy(1, 2, lambda x, h: Action.send(x), output=lambda x, h: x)
    bob = _strategy(1, 2, lambda y, h: Action.RECEIVE, output=lambda y, h: h[0].bit)
    assert verify_halfduplex(alice, bob, make_table([[0, 0], [1, 1]])) is None
    ce = verify_halfduplex(alice, bob, make_table([[0, 0], [1, 0]]))
    assert (ce.x, ce.y, ce.want) == (1, 1, 0)
    with pytest.raises(UsageError):
        verify_halfduplex(alice, bob, make_table([[0, 0, 0], [1, 1, 1]]))


def test_value_of_maps_outputs():
    alice = _strategy(1, 2, lambda x, h: Action.send(x), output=lambda x, h: f"v{x}")
    bob = _strategy(1, 1, lambda y, h: Action.RECEIVE, output=lambda y, h: f"v{h[0].bit}")
    t = make_table([[0], [1]])
    assert verify_halfduplex(alice, bob, t) is not None
    assert verify_halfduplex(alice, bob, t, value_of=lambda v: int(v[1:])) is None


# ============== EMBEDDING ==============

def test_classical_protocol_runs_without_silent_or_spent_rounds():
    p = example_depth3_protocol()
    t = example_depth3_table()
    s_a, s_b = classical_to_halfduplex(p)
    assert s_a.rounds == 3
    for x, y, want in t.defined_cells():
        (outcome,) = run_halfduplex(s_a, s_b, x, y, MALICIOUS)
        assert outcome.silent_rounds == 0 and outcome.spent_rounds == 0
        assert outcome.a_out == outcome.b_out == want
    assert verify_halfduplex(s_a, s_b, t) is None


def test_embedding_pads_short_branches():
    # depth 2 on the left, a leaf on the right
    root = Node(Owner.A, (0, 1),
                Node(Owner.B, (0, 1), GlobalLeaf(0), GlobalLeaf(1)),
                GlobalLeaf(2))
    p = ClassicalProtocol(root, 2, 2)
    s_a, s_b = classical_to_halfduplex(p)
    (outcome,) = run_halfduplex(s_a, s_b, 1, 0)
    assert outcome.a_events == (Event.SENT1, Event.SENT0)
    assert outcome.b_events == (Event.RECV1, Event.RECV0)
    assert outcome.a_out == outcome.b_out == 2


def test_local_protocols_are_not_embedded():
    with pytest.raises(UsageError):
        classical_to_halfduplex(identity_local_protocol(1))
