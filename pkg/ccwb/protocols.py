# ccwb/protocols.py
"""
Executable semantics of two-party protocols.

Classical protocols are binary trees whose internal nodes name a speaker and a
bit function of that speaker's input; leaves carry either one value (global)
or a pair of per-player output maps (local).

Half-duplex protocols are given as a pair of fixed-round strategies. In every
round each player independently sends 0, sends 1 or receives:

    Alice        Bob          Alice's event   Bob's event
    send a       send b       sent a          sent b          (spent round)
    send a       receive      sent a          received a
    receive      send b       received b      sent b
    receive      receive      received i      received j      (silent round)

In a silent round the adversary picks (i, j); an honest adversary picks i = j.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence, Union

from pydantic import ValidationError

from ccwb.errors import StrategyIncompleteError, TableFormatError, UsageError
from ccwb.logger import logger
from ccwb.schemas.protocol import ProtocolDocument
from ccwb.tables import Rect, ValueTable, bits_of

GLOBAL = "global"
LOCAL = "local"

HONEST = "honest"
MALICIOUS = "malicious"

# Adversary branches of a silent round: (bit for Alice, bit for Bob)
MALICIOUS_BRANCHES = ((0, 0), (0, 1), (1, 0), (1, 1))
HONEST_BRANCHES = ((0, 0), (1, 1))


# ============== CLASSICAL PROTOCOLS ==============

class Owner(str, enum.Enum):
    """Speaker of an internal node"""
    A = "A"
    B = "B"


@dataclass(frozen=True)
class GlobalLeaf:
    value: int


@dataclass(frozen=True)
class LocalLeaf:
    """out_a[x] is Alice's output on row x, out_b[y] Bob's on column y."""
    out_a: tuple[int | None, ...]
    out_b: tuple[int | None, ...]


@dataclass(frozen=True)
class Node:
    """Internal node: the owner sends bits[input] and the tokens follow that child."""
    owner: Owner
    bits: tuple[int, ...]
    zero: "Tree"
    one: "Tree"

    def child(self, bit: int) -> "Tree":
        return self.one if bit else self.zero


Tree = Union[Node, GlobalLeaf, LocalLeaf]


@dataclass(frozen=True)
class ClassicalProtocol:
    """A classical protocol for an n_rows x n_cols input space."""
    root: Tree
    n_rows: int
    n_cols: int

    @property
    def depth(self) -> int:
        return tree_depth(self.root)

    @property
    def leaf_kind(self) -> str:
        return LOCAL if any(isinstance(leaf, LocalLeaf) for leaf in iter_leaves(self.root)) else GLOBAL

    def __repr__(self):
        return f"<ClassicalProtocol({self.n_rows}x{self.n_cols}, depth={self.depth}, leaves={self.leaf_kind})>"


def tree_depth(tree: Tree) -> int:
    if isinstance(tree, Node):
        return 1 + max(tree_depth(tree.zero), tree_depth(tree.one))
    return 0


def iter_leaves(tree: Tree) -> Iterator[GlobalLeaf | LocalLeaf]:
    if isinstance(tree, Node):
        yield from iter_leaves(tree.zero)
        yield from iter_leaves(tree.one)
    else:
        yield tree


def run_classical(p: ClassicalProtocol, x: int, y: int) -> tuple[tuple[int, ...], GlobalLeaf | LocalLeaf]:
    """Move both tokens from the root to a leaf; return the sent bits and the leaf."""
    transcript = []
    node = p.root
    while isinstance(node, Node):
        bit = node.bits[x] if node.owner is Owner.A else node.bits[y]
        transcript.append(bit)
        node = node.child(bit)
    return tuple(transcript), node


def leaf_result(leaf: GlobalLeaf | LocalLeaf, x: int, y: int) -> int | None:
    """Result of the computation at a leaf; local leaves are undefined on disagreement."""
    if isinstance(leaf, GlobalLeaf):
        return leaf.value
    a_out, b_out = leaf.out_a[x], leaf.out_b[y]
    return a_out if a_out == b_out else None


@dataclass(frozen=True)
class Counterexample:
    x: int
    y: int
    got: object
    want: int


def verify_classical(p: ClassicalProtocol, t: ValueTable, semantics: str = GLOBAL) -> Counterexample | None:
    """
    Check the protocol on every defined cell. Returns None when it computes the
    table, otherwise the first failing cell in row-major order.
    """
    if semantics not in (GLOBAL, LOCAL):
        raise UsageError(f"unknown semantics '{semantics}'")
    if p.leaf_kind != semantics:
        raise UsageError(f"protocol has {p.leaf_kind} leaves but {semantics} semantics was requested")
    if (p.n_rows, p.n_cols) != t.shape:
        raise UsageError(f"protocol is for {p.n_rows}x{p.n_cols} inputs, table is {t.n_rows}x{t.n_cols}")

    for x, y, want in t.defined_cells():
        _, leaf = run_classical(p, x, y)
        got = leaf_result(leaf, x, y)
        if got != want:
            logger.debug(f"Classical protocol fails at ({x}, {y}): got {got}, want {want}")
            return Counterexample(x, y, got, want)
    return None


def leaf_rects(p: ClassicalProtocol, t: ValueTable | None = None) -> list[tuple[Rect, GlobalLeaf | LocalLeaf]]:
    """Rectangles of input pairs reaching each leaf (empty ones omitted), left to right."""
    n_rows, n_cols = (t.n_rows, t.n_cols) if t is not None else (p.n_rows, p.n_cols)
    out = []

    def walk(tree: Tree, rows: list[int], cols: list[int]) -> None:
        if not rows or not cols:
            return
        if isinstance(tree, Node):
            side = rows if tree.owner is Owner.A else cols
            zero = [i for i in side if tree.bits[i] == 0]
            one = [i for i in side if tree.bits[i] == 1]
            if tree.owner is Owner.A:
                walk(tree.zero, zero, cols)
                walk(tree.one, one, cols)
            else:
                walk(tree.zero, rows, zero)
                walk(tree.one, rows, one)
            return
        out.append((Rect(bits_of(rows), bits_of(cols)), tree))

    walk(p.root, list(range(n_rows)), list(range(n_cols)))
    return out


def transpose_protocol(p: ClassicalProtocol) -> ClassicalProtocol:
    """Swap the roles of Alice and Bob."""

    def swap(tree: Tree) -> Tree:
        if isinstance(tree, Node):
            owner = Owner.B if tree.owner is Owner.A else Owner.A
            return Node(owner, tree.bits, swap(tree.zero), swap(tree.one))
        if isinstance(tree, LocalLeaf):
            return LocalLeaf(tree.out_b, tree.out_a)
        return tree

    return ClassicalProtocol(swap(p.root), p.n_cols, p.n_rows)


# ============== JSON DESCRIPTION ==============

def protocol_from_document(doc: ProtocolDocument) -> ClassicalProtocol:
    """Build the tree from a validated node list (root is node 0)."""
    nodes = {node.id: node for node in doc.nodes}
    if 0 not in nodes:
        raise TableFormatError("protocol description has no root node 0")

    def build(node_id: int, seen: frozenset[int]) -> Tree:
        if node_id in seen:
            raise TableFormatError(f"protocol description has a cycle through node {node_id}")
        if node_id not in nodes:
            raise TableFormatError(f"protocol description references missing node {node_id}")
        node = nodes[node_id]
        if node.owner is not None:
            width = doc.n_rows if node.owner == "A" else doc.n_cols
            if len(node.bits) != width:
                raise TableFormatError(f"node {node_id}: bit table has {len(node.bits)} entries, expected {width}")
            seen = seen | {node_id}
            return Node(Owner(node.owner), tuple(node.bits),
                        build(node.children[0], seen), build(node.children[1], seen))
        if node.value is not None:
            return GlobalLeaf(node.value)
        if len(node.out_a) != doc.n_rows or len(node.out_b) != doc.n_cols:
            raise TableFormatError(f"node {node_id}: local output maps do not match the input sizes")
        return LocalLeaf(tuple(node.out_a), tuple(node.out_b))

    return ClassicalProtocol(build(0, frozenset()), doc.n_rows, doc.n_cols)


def protocol_to_document(p: ClassicalProtocol) -> ProtocolDocument:
    nodes = []

    def emit(tree: Tree) -> int:
        node_id = len(nodes)
        nodes.append(None)
        if isinstance(tree, Node):
            zero, one = emit(tree.zero), emit(tree.one)
            nodes[node_id] = {"id": node_id, "owner": tree.owner.value, "bits": list(tree.bits),
                              "children": [zero, one]}
        elif isinstance(tree, GlobalLeaf):
            nodes[node_id] = {"id": node_id, "value": tree.value}
        else:
            nodes[node_id] = {"id": node_id, "out_a": list(tree.out_a), "out_b": list(tree.out_b)}
        return node_id

    emit(p.root)
    return ProtocolDocument.model_validate({"n_rows": p.n_rows, "n_cols": p.n_cols, "nodes": nodes})


def load_protocol(path: str | Path) -> ClassicalProtocol:
    try:
        doc = ProtocolDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        logger.error(f"Invalid protocol description {path}: {e.error_count()} errors")
        raise TableFormatError(f"invalid protocol description: {e}") from e
    return protocol_from_document(doc)


def save_protocol(p: ClassicalProtocol, path: str | Path) -> None:
    Path(path).write_text(protocol_to_document(p).model_dump_json(indent=2, exclude_none=True), encoding="utf-8")
    logger.info(f"Wrote depth-{p.depth} protocol to {path}")


# ============== HALF-DUPLEX STRATEGIES ==============

class Action(str, enum.Enum):
    """What a player does in one round"""
    SEND0 = "send0"
    SEND1 = "send1"
    RECEIVE = "receive"

    @classmethod
    def send(cls, bit: int) -> "Action":
        return cls.SEND1 if bit else cls.SEND0


class Event(str, enum.Enum):
    """What a player observed in one round"""
    SENT0 = "sent0"
    SENT1 = "sent1"
    RECV0 = "recv0"
    RECV1 = "recv1"

    @classmethod
    def sent(cls, bit: int) -> "Event":
        return cls.SENT1 if bit else cls.SENT0

    @classmethod
    def received(cls, bit: int) -> "Event":
        return cls.RECV1 if bit else cls.RECV0

    @property
    def bit(self) -> int:
        return 1 if self in (Event.SENT1, Event.RECV1) else 0

    @property
    def is_sent(self) -> bool:
        return self in (Event.SENT0, Event.SENT1)


History = tuple[Event, ...]
ActionMap = Callable[[int, History], Action]
OutputMap = Callable[[int, History], object]


@dataclass(frozen=True)
class HalfDuplexStrategy:
    """
    One player's strategy: act(input, history) for histories shorter than
    `rounds`, output(input, history) for histories of length `rounds`.
    Either map may raise KeyError or return None where it is undefined.
    """
    rounds: int
    n_inputs: int
    act: ActionMap
    output: OutputMap
    name: str = ""

    def action(self, x: int, history: History) -> Action:
        try:
            action = self.act(x, history)
        except (KeyError, IndexError) as e:
            raise StrategyIncompleteError(f"{self.name or 'strategy'}: no action for input {x} after {history}") from e
        if action is None:
            raise StrategyIncompleteError(f"{self.name or 'strategy'}: no action for input {x} after {history}")
        return action

    def result(self, x: int, history: History) -> object:
        try:
            value = self.output(x, history)
        except (KeyError, IndexError) as e:
            raise StrategyIncompleteError(f"{self.name or 'strategy'}: no output for input {x} after {history}") from e
        if value is None:
            raise StrategyIncompleteError(f"{self.name or 'strategy'}: no output for input {x} after {history}")
        return value


@dataclass(frozen=True)
class Outcome:
    a_out: object
    b_out: object
    a_events: History
    b_events: History

    @property
    def silent_rounds(self) -> int:
        return sum(1 for a, b in zip(self.a_events, self.b_events) if not a.is_sent and not b.is_sent)

    @property
    def spent_rounds(self) -> int:
        return sum(1 for a, b in zip(self.a_events, self.b_events) if a.is_sent and b.is_sent)

    @property
    def agreed(self) -> bool:
        return self.a_out == self.b_out


@dataclass
class OutcomeSet:
    """All outcomes over the adversary branches, in branch enumeration order."""
    outcomes: list[Outcome] = field(default_factory=list)

    def add(self, outcome: Outcome) -> None:
        if outcome not in self.outcomes:
            self.outcomes.append(outcome)

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self):
        return len(self.outcomes)

    def outputs(self) -> set[tuple[object, object]]:
        return {(o.a_out, o.b_out) for o in self.outcomes}

    def single_value(self) -> object | None:
        """The common output when every branch agrees on one value, else None."""
        values = {o.a_out for o in self.outcomes} | {o.b_out for o in self.outcomes}
        return next(iter(values)) if len(values) == 1 else None


def _round_events(a_act: Action, b_act: Action, branch: tuple[int, int] | None) -> tuple[Event, Event]:
    a_send = a_act is not Action.RECEIVE
    b_send = b_act is not Action.RECEIVE
    a_bit = 1 if a_act is Action.SEND1 else 0
    b_bit = 1 if b_act is Action.SEND1 else 0
    if a_send and b_send:
        return Event.sent(a_bit), Event.sent(b_bit)
    if a_send:
        return Event.sent(a_bit), Event.received(a_bit)
    if b_send:
        return Event.received(b_bit), Event.sent(b_bit)
    i, j = branch
    return Event.received(i), Event.received(j)


def run_halfduplex(
    s_a: HalfDuplexStrategy,
    s_b: HalfDuplexStrategy,
    x: int,
    y: int,
    adversary: str = MALICIOUS,
) -> OutcomeSet:
    """Run the two strategies on (x, y) along every adversary branch."""
    if s_a.rounds != s_b.rounds:
        raise UsageError(f"strategies disagree on the round count ({s_a.rounds} vs {s_b.rounds})")
    if adversary not in (HONEST, MALICIOUS):
        raise UsageError(f"unknown adversary '{adversary}'")
    branches = HONEST_BRANCHES if adversary == HONEST else MALICIOUS_BRANCHES
    result = OutcomeSet()

    def step(a_hist: History, b_hist: History) -> None:
        if len(a_hist) == s_a.rounds:
            result.add(Outcome(s_a.result(x, a_hist), s_b.result(y, b_hist), a_hist, b_hist))
            return
        a_act = s_a.action(x, a_hist)
        b_act = s_b.action(y, b_hist)
        if a_act is Action.RECEIVE and b_act is Action.RECEIVE:
            for branch in branches:
                a_ev, b_ev = _round_events(a_act, b_act, branch)
                step(a_hist + (a_ev,), b_hist + (b_ev,))
        else:
            a_ev, b_ev = _round_events(a_act, b_act, None)
            step(a_hist + (a_ev,), b_hist + (b_ev,))

    step((), ())
    return result


@dataclass(frozen=True)
class HalfDuplexCounterexample:
    x: int
    y: int
    outcome: Outcome
    want: int


def verify_halfduplex(
    s_a: HalfDuplexStrategy,
    s_b: HalfDuplexStrategy,
    t: ValueTable,
    adversary: str = MALICIOUS,
    value_of: Callable[[object], object] | None = None,
) -> HalfDuplexCounterexample | None:
    """
    Every outcome on every defined cell must have both outputs equal to the
    cell. `value_of` maps raw outputs to table values (identity by default).
    Returns None on success, else the first failure in row-major order.
    """
    if (s_a.n_inputs, s_b.n_inputs) != t.shape:
        raise UsageError(f"strategies are for {s_a.n_inputs}x{s_b.n_inputs} inputs, table is {t.n_rows}x{t.n_cols}")
    convert = value_of or (lambda v: v)
    for x, y, want in t.defined_cells():
        for outcome in run_halfduplex(s_a, s_b, x, y, adversary):
            if convert(outcome.a_out) != want or convert(outcome.b_out) != want:
                logger.debug(f"Half-duplex strategies fail at ({x}, {y}) under {adversary} adversary: {outcome}")
                return HalfDuplexCounterexample(x, y, outcome, want)
    return None


# ============== CLASSICAL -> HALF-DUPLEX ==============

def _follow(root: Tree, history: History) -> Tree:
    node = root
    for event in history:
        if not isinstance(node, Node):
            break
        node = node.child(event.bit)
    return node


def classical_to_halfduplex(p: ClassicalProtocol) -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    """
    Run a global classical protocol as half-duplex strategies with depth(p)
    rounds: the owner of the current node sends, the other player receives.
    Once a leaf is reached on a shorter branch, Alice sends 0 and Bob receives
    until the last round.
    """
    if p.leaf_kind != GLOBAL:
        raise UsageError("only protocols with global leaves can be embedded")
    rounds = p.depth

    def act_for(owner: Owner) -> ActionMap:
        def act(x: int, history: History) -> Action:
            node = _follow(p.root, history)
            if not isinstance(node, Node):
                return Action.SEND0 if owner is Owner.A else Action.RECEIVE
            if node.owner is owner:
                return Action.send(node.bits[x])
            return Action.RECEIVE
        return act

    def output(_x: int, history: History) -> int:
        node = _follow(p.root, history)
        return node.value

    return (
        HalfDuplexStrategy(rounds, p.n_rows, act_for(Owner.A), output, name="alice"),
        HalfDuplexStrategy(rounds, p.n_cols, act_for(Owner.B), output, name="bob"),
    )


# ============== SMALL EXAMPLES ==============

def _coordinate_bits(labels: Sequence[str], position: int) -> tuple[int, ...]:
    return tuple(int(label[position]) for label in labels)


def example_depth3_protocol() -> ClassicalProtocol:
    """
    A depth-3 protocol on 3-bit strings with values in {1,2,3,4}. Alice first
    sends her middle bit; on x=010, y=110 Alice sends 1 then 0, Bob sends 1
    and both output 4.
    """
    from ccwb.tables import bit_strings

    labels = bit_strings(3)

    def a(pos: int, zero: Tree, one: Tree) -> Node:
        return Node(Owner.A, _coordinate_bits(labels, pos), zero, one)

    def b(pos: int, zero: Tree, one: Tree) -> Node:
        return Node(Owner.B, _coordinate_bits(labels, pos), zero, one)

    leaf = GlobalLeaf
    root = a(1,
             a(2, b(1, leaf(1), leaf(2)), b(2, leaf(3), leaf(4))),
             a(0, b(0, leaf(3), leaf(4)), b(2, leaf(1), leaf(2))))
    return ClassicalProtocol(root, 8, 8)


def example_depth3_table() -> ValueTable:
    """The function computed by example_depth3_protocol."""
    from ccwb.tables import bit_strings, make_table

    p = example_depth3_protocol()
    labels = bit_strings(3)
    grid = [[run_classical(p, x, y)[1].value for y in range(8)] for x in range(8)]
    return make_table(grid, labels, labels)


def eq1_protocol() -> ClassicalProtocol:
    """Alice sends x, Bob answers whether x = y."""
    root = Node(Owner.A, (0, 1),
                Node(Owner.B, (1, 0), GlobalLeaf(0), GlobalLeaf(1)),
                Node(Owner.B, (0, 1), GlobalLeaf(0), GlobalLeaf(1)))
    return ClassicalProtocol(root, 2, 2)


def diagonal_table(n: int) -> ValueTable:
    """f(x, x) = x on n-bit strings, undefined off the diagonal."""
    from ccwb.tables import bit_strings, make_table

    size = 1 << n
    grid = [[x if x == y else None for y in range(size)] for x in range(size)]
    return make_table(grid, bit_strings(n), bit_strings(n))


def identity_local_protocol(n: int) -> ClassicalProtocol:
    """Depth 0: both players output their own input."""
    size = 1 << n
    identity = tuple(range(size))
    return ClassicalProtocol(LocalLeaf(identity, identity), size, size)
