# ccwb/constructions/honest.py
"""
A total function f with half-duplex complexity 3 under an honest adversary
and classical complexity 4, together with its Cartesian powers.

Inputs of f are "r" or a two-bit string. The three-round strategy: in round 1
a player holding a string sends its first bit, a player holding "r" receives.
In round 2 Bob sends, in round 3 Alice sends; each sends the bit received in
round 1 if there was one, otherwise the second bit of its input. The result
is 2*b2 + a3 with 3 identified with 0.
"""

import itertools
from typing import Sequence

from ccwb.errors import SizeLimitError
from ccwb.protocols import Action, HalfDuplexStrategy, History
from ccwb.tables import ValueTable, make_table

F4_LABELS = ("r", "00", "01", "10", "11")
F4_CELLS = (
    (0, 0, 2, 1, 0),
    (0, 0, 2, 0, 2),
    (1, 1, 0, 1, 0),
    (2, 0, 2, 0, 2),
    (0, 1, 0, 1, 0),
)
F4_FOOLING = ((0, 2), (0, 3), (0, 4), (1, 0), (1, 4), (2, 0), (3, 0), (3, 1), (4, 1), (4, 2))
F4_ROUNDS = 3

POWER_MAX_LINES = 4096


def f4_table() -> ValueTable:
    return make_table(F4_CELLS, F4_LABELS, F4_LABELS)


def f4_fooling10() -> list[tuple[int, int]]:
    return list(F4_FOOLING)


def _identify(b2: int, a3: int) -> int:
    value = 2 * b2 + a3
    return 0 if value == 3 else value


def _coordinate_action(symbol: str, step: int, history: History, speaks_in: int) -> Action:
    """Action for one coordinate's rounds; step is 0, 1 or 2 within the block."""
    if step == 0:
        return Action.RECEIVE if symbol == "r" else Action.send(int(symbol[0]))
    if step != speaks_in:
        return Action.RECEIVE
    first = history[0]
    return Action.send(first.bit if not first.is_sent else int(symbol[1]))


def _coordinate_value(history: History) -> int:
    return _identify(history[1].bit, history[2].bit)


def f4_strategies() -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    return power_strategies(1)


# ============== POWERS ==============

def _check_power(n_lines: int, n: int) -> None:
    if n < 1:
        raise SizeLimitError("power must be positive")
    if n_lines ** n > POWER_MAX_LINES:
        raise SizeLimitError(f"{n_lines}^{n} lines exceed {POWER_MAX_LINES}")


def power_value(values: Sequence[int], base: int) -> int:
    """Tuple of coordinate values, first coordinate most significant."""
    out = 0
    for v in values:
        out = out * base + v
    return out


def power_table(t: ValueTable, n: int) -> ValueTable:
    """
    f^n on n-tuples of inputs (labels joined by ','); values are the tuples
    of coordinate values in base max+1. Undefined if any coordinate is.
    """
    _check_power(max(t.n_rows, t.n_cols), n)
    base = max(v for _, _, v in t.defined_cells()) + 1
    rows = list(itertools.product(range(t.n_rows), repeat=n))
    cols = list(itertools.product(range(t.n_cols), repeat=n))
    grid = []
    for xs in rows:
        line = []
        for ys in cols:
            values = [t.cells[x][y] for x, y in zip(xs, ys)]
            line.append(None if None in values else power_value(values, base))
        grid.append(line)
    row_labels = [",".join(t.row_labels[x] for x in xs) for xs in rows]
    col_labels = [",".join(t.col_labels[y] for y in ys) for ys in cols]
    return make_table(grid, row_labels, col_labels)


def power_fooling(cells: Sequence[tuple[int, int]], n: int, shape: tuple[int, int]) -> list[tuple[int, int]]:
    """Cartesian power of a cell set, as cells of power_table on a table of the given shape."""
    n_rows, n_cols = shape
    _check_power(max(n_rows, n_cols), n)
    out = []
    for combo in itertools.product(cells, repeat=n):
        out.append((power_value([x for x, _ in combo], n_rows), power_value([y for _, y in combo], n_cols)))
    return out


def power_strategies(n: int) -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    """The three-round strategy run once per coordinate, 3n rounds in total."""
    _check_power(len(F4_LABELS), n)
    inputs = [tuple(F4_LABELS[i] for i in combo)
              for combo in itertools.product(range(len(F4_LABELS)), repeat=n)]

    def act_for(speaks_in: int):
        def act(x: int, history: History) -> Action:
            block, step = divmod(len(history), F4_ROUNDS)
            start = block * F4_ROUNDS
            return _coordinate_action(inputs[x][block], step, history[start:], speaks_in)
        return act

    def output(_x: int, history: History) -> int:
        values = [_coordinate_value(history[b * F4_ROUNDS:(b + 1) * F4_ROUNDS]) for b in range(n)]
        return power_value(values, 3)

    size = len(inputs)
    return (
        HalfDuplexStrategy(F4_ROUNDS * n, size, act_for(2), output, name=f"f4^{n}-alice"),
        HalfDuplexStrategy(F4_ROUNDS * n, size, act_for(1), output, name=f"f4^{n}-bob"),
    )
