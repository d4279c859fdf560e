# ccwb/tables.py
"""
Function matrices: the ValueTable model, rectangles over it, generators for
the named functions, restriction/transposition and the ccmat text format.

Rows are Alice's inputs, columns are Bob's inputs. A cell is a non-negative
integer or None (undefined, only allowed in partial tables).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ccwb.errors import InvalidRectError, SizeLimitError, TableFormatError
from ccwb.logger import logger

UNDEFINED = None
MAX_VALUE = 2 ** 31

TOTAL = "total"
PARTIAL = "partial"

# Symbol order of the g family and its base-4 digit for each output symbol
G_INPUT_SYMBOLS = ("0", "1", "r")
G_OUTPUT_SYMBOLS = ("0r", "1r", "r0", "r1")

NAMED_FAMILIES = ("eq", "ip", "disj")
NAMED_MAX_N = 12
GN_MAX_N = 6
SIMPLE_MAX_N = 14


# ============== BITSETS ==============

def bits_of(indices: Iterable[int]) -> int:
    """Bitset with the given indices set."""
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def indices_of(mask: int) -> list[int]:
    """Ascending indices of the set bits."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return mask.bit_count()


# ============== RECT ==============

@dataclass(frozen=True)
class Rect:
    """A combinatorial rectangle: row bitset x column bitset."""
    rows: int
    cols: int

    @classmethod
    def of(cls, rows: Iterable[int], cols: Iterable[int]) -> "Rect":
        return cls(bits_of(rows), bits_of(cols))

    @property
    def row_indices(self) -> list[int]:
        return indices_of(self.rows)

    @property
    def col_indices(self) -> list[int]:
        return indices_of(self.cols)

    @property
    def size(self) -> int:
        return popcount(self.rows) * popcount(self.cols)

    def is_empty(self) -> bool:
        return self.rows == 0 or self.cols == 0

    def cells(self) -> Iterator[tuple[int, int]]:
        cols = self.col_indices
        for r in self.row_indices:
            for c in cols:
                yield r, c

    def contains(self, row: int, col: int) -> bool:
        return bool((self.rows >> row) & 1 and (self.cols >> col) & 1)

    def intersects(self, other: "Rect") -> bool:
        return bool(self.rows & other.rows and self.cols & other.cols)

    def validate(self, n_rows: int, n_cols: int) -> None:
        if self.is_empty():
            raise InvalidRectError("rectangle has an empty row or column selection")
        if self.rows >> n_rows or self.cols >> n_cols:
            raise InvalidRectError(f"rectangle exceeds table bounds {n_rows}x{n_cols}")

    def __repr__(self):
        return f"<Rect(rows={self.row_indices}, cols={self.col_indices})>"


# ============== VALUE TABLE ==============

@dataclass(frozen=True)
class ValueTable:
    """An immutable (possibly partial) function matrix."""
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: tuple[tuple[int | None, ...], ...]
    kind: str = TOTAL

    def __post_init__(self):
        n_rows, n_cols = len(self.row_labels), len(self.col_labels)
        if n_rows < 1 or n_cols < 1:
            raise TableFormatError("a table needs at least one row and one column")
        if len(self.cells) != n_rows or any(len(row) != n_cols for row in self.cells):
            raise TableFormatError(f"cell grid does not match labels {n_rows}x{n_cols}")
        if len(set(self.row_labels)) != n_rows or len(set(self.col_labels)) != n_cols:
            raise TableFormatError("labels must be unique within their axis")
        has_undefined = False
        for row in self.cells:
            for value in row:
                if value is None:
                    has_undefined = True
                elif not (0 <= value < MAX_VALUE):
                    raise TableFormatError(f"cell value {value} outside 0..2^31-1")
        if self.kind not in (TOTAL, PARTIAL):
            raise TableFormatError(f"unknown table kind '{self.kind}'")
        if (self.kind == TOTAL) == has_undefined:
            raise TableFormatError(f"kind '{self.kind}' does not match the presence of undefined cells")

    @property
    def n_rows(self) -> int:
        return len(self.row_labels)

    @property
    def n_cols(self) -> int:
        return len(self.col_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def is_total(self) -> bool:
        return self.kind == TOTAL

    def value(self, row: int, col: int) -> int | None:
        return self.cells[row][col]

    def full_rect(self) -> Rect:
        return Rect((1 << self.n_rows) - 1, (1 << self.n_cols) - 1)

    def defined_values(self, rect: Rect | None = None) -> set[int]:
        rect = rect or self.full_rect()
        return {v for r, c in rect.cells() if (v := self.cells[r][c]) is not None}

    def defined_cells(self) -> Iterator[tuple[int, int, int]]:
        for r, row in enumerate(self.cells):
            for c, value in enumerate(row):
                if value is not None:
                    yield r, c, value

    def row_index(self, label: str) -> int:
        return self.row_labels.index(label)

    def col_index(self, label: str) -> int:
        return self.col_labels.index(label)

    def as_array(self) -> np.ndarray:
        """int64 matrix with -1 for undefined cells."""
        return np.array(
            [[-1 if v is None else v for v in row] for row in self.cells],
            dtype=np.int64,
        )

    def __repr__(self):
        return f"<ValueTable({self.n_rows}x{self.n_cols}, kind='{self.kind}')>"


def make_table(
    cells: Sequence[Sequence[int | None]],
    row_labels: Sequence[str] | None = None,
    col_labels: Sequence[str] | None = None,
) -> ValueTable:
    """Build a table from a grid, inferring the kind and defaulting labels to indices."""
    grid = tuple(tuple(None if v is None else int(v) for v in row) for row in cells)
    if not grid:
        raise TableFormatError("empty cell grid")
    row_labels = tuple(row_labels) if row_labels is not None else tuple(str(i) for i in range(len(grid)))
    col_labels = tuple(col_labels) if col_labels is not None else tuple(str(j) for j in range(len(grid[0])))
    kind = PARTIAL if any(v is None for row in grid for v in row) else TOTAL
    return ValueTable(row_labels, col_labels, grid, kind)


# ============== GENERATORS ==============

def bit_strings(n: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n)]


def gen_named(family: str, n: int) -> ValueTable:
    """EQ_n, IP_n or DISJ_n over lexicographically ordered n-bit strings."""
    family = family.lower()
    if family not in NAMED_FAMILIES:
        raise SizeLimitError(f"unknown named family '{family}'")
    if not 1 <= n <= NAMED_MAX_N:
        raise SizeLimitError(f"n={n} outside 1..{NAMED_MAX_N} for {family.upper()}")

    size = 1 << n
    xs = np.arange(size, dtype=np.int64)[:, None]
    ys = np.arange(size, dtype=np.int64)[None, :]
    if family == "eq":
        grid = (xs == ys)
    elif family == "ip":
        grid = np.bitwise_count((xs & ys).astype(np.uint64)) % 2
    else:
        grid = (xs & ys) == 0

    labels = bit_strings(n)
    logger.debug(f"Generated {family.upper()}_{n} ({size}x{size})")
    return make_table(grid.astype(np.int64).tolist(), labels, labels)


def encode_g_output(symbols: Sequence[str]) -> int:
    """Base-4 code of a string over (0r, 1r, r0, r1); first position most significant."""
    value = 0
    for symbol in symbols:
        value = value * 4 + G_OUTPUT_SYMBOLS.index(symbol)
    return value


def decode_g_output(value: int, n: int) -> list[str]:
    digits = []
    for _ in range(n):
        digits.append(G_OUTPUT_SYMBOLS[value % 4])
        value //= 4
    return digits[::-1]


def g_value(x: str, y: str) -> int | None:
    """g_n on one pair of {0,1,r}^n strings; None when the inputs are inconsistent."""
    symbols = []
    for a, b in zip(x, y):
        if (a == "r") == (b == "r"):
            return None
        symbols.append(f"{a}r" if b == "r" else f"r{b}")
    return encode_g_output(symbols)


def gen_gn(n: int) -> ValueTable:
    """The partial function g_n over {0,1,r}^n x {0,1,r}^n."""
    if not 1 <= n <= GN_MAX_N:
        raise SizeLimitError(f"n={n} outside 1..{GN_MAX_N} for g_n")
    labels = ["".join(s) for s in itertools.product(G_INPUT_SYMBOLS, repeat=n)]
    grid = [[g_value(x, y) for y in labels] for x in labels]
    logger.debug(f"Generated g_{n} ({len(labels)}x{len(labels)})")
    return make_table(grid, labels, labels)


def gen_g3() -> ValueTable:
    """The 3x3 partial function g (values 0r, 1r, r0, r1 encoded as 0..3)."""
    return gen_gn(1)


# ============== RESTRICTION ==============

def restrict(t: ValueTable, r: Rect) -> ValueTable:
    """Sub-table on the selected rows/columns, original order and labels kept."""
    r.validate(t.n_rows, t.n_cols)
    return select(t, r.row_indices, r.col_indices)


def select(t: ValueTable, rows: Sequence[int], cols: Sequence[int]) -> ValueTable:
    """Sub-table with rows and columns in the given order."""
    if not rows or not cols:
        raise InvalidRectError("empty selection")
    if max(rows) >= t.n_rows or max(cols) >= t.n_cols or min(rows) < 0 or min(cols) < 0:
        raise InvalidRectError("selection outside the table")
    grid = [[t.cells[r][c] for c in cols] for r in rows]
    return make_table(grid, [t.row_labels[r] for r in rows], [t.col_labels[c] for c in cols])


def transpose(t: ValueTable) -> ValueTable:
    grid = [[t.cells[r][c] for r in range(t.n_rows)] for c in range(t.n_cols)]
    return ValueTable(t.col_labels, t.row_labels, tuple(tuple(row) for row in grid), t.kind)


# ============== SIMPLE INPUTS OF g_n ==============

def simple_inputs(n: int) -> tuple[list[str], list[str]]:
    """Alice's simple inputs {0,1}^k r^(n-k) and Bob's r^m {0,1}^(n-m)."""
    xs = [prefix + "r" * (n - k) for k in range(n + 1) for prefix in bit_strings(k)]
    ys = ["r" * m + suffix for m in range(n + 1) for suffix in bit_strings(n - m)]
    return xs, ys


def simple_input_counts(n: int) -> tuple[int, int]:
    """
    Count green ([x]+[y] = n) and blue ([x]+[y] < n) simple inputs.

    Every simple string of each side is enumerated; pairs are counted per
    class of [x] and [y].
    """
    if not 1 <= n <= SIMPLE_MAX_N:
        raise SizeLimitError(f"n={n} outside 1..{SIMPLE_MAX_N}")
    xs, ys = simple_inputs(n)
    x_classes = Counter(n - x.count("r") for x in xs)
    y_classes = Counter(n - y.count("r") for y in ys)

    green = blue = 0
    for kx, cx in x_classes.items():
        for ky, cy in y_classes.items():
            if kx + ky == n:
                green += cx * cy
            elif kx + ky < n:
                blue += cx * cy
    return green, blue


def green_closed_form(n: int) -> int:
    return (n + 1) * 2 ** n


def blue_closed_form(n: int) -> int:
    return (n - 1) * 2 ** n + 1


# ============== CCMAT FORMAT ==============

CCMAT_MAGIC = "ccmat"
CCMAT_VERSION = "v1"


def dump_ccmat(t: ValueTable, labels: bool = True) -> str:
    """Serialize to ccmat v1 text (LF line endings, trailing newline)."""
    lines = [f"{CCMAT_MAGIC} {CCMAT_VERSION} {t.n_rows} {t.n_cols} {t.kind}"]
    if labels:
        lines.append("#rowlabels " + "\t".join(t.row_labels))
        lines.append("#collabels " + "\t".join(t.col_labels))
    for row in t.cells:
        lines.append(" ".join("." if v is None else str(v) for v in row))
    return "\n".join(lines) + "\n"


def load_ccmat(text: str) -> ValueTable:
    """Parse ccmat v1 text."""
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise TableFormatError("missing ccmat header")
    header = lines[0].split()
    if len(header) != 5 or header[0] != CCMAT_MAGIC or header[1] != CCMAT_VERSION:
        raise TableFormatError(f"bad ccmat header: '{lines[0]}'")
    try:
        n_rows, n_cols = int(header[2]), int(header[3])
    except ValueError as e:
        raise TableFormatError(f"bad ccmat dimensions: '{lines[0]}'") from e
    kind = header[4]

    row_labels: list[str] | None = None
    col_labels: list[str] | None = None
    grid: list[list[int | None]] = []
    for number, line in enumerate(lines[1:], start=2):
        if line.startswith("#rowlabels "):
            row_labels = line[len("#rowlabels "):].split("\t")
            continue
        if line.startswith("#collabels "):
            col_labels = line[len("#collabels "):].split("\t")
            continue
        if line.startswith("#") or not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != n_cols:
            raise TableFormatError(f"line {number}: expected {n_cols} tokens, got {len(tokens)}")
        row = []
        for token in tokens:
            if token == ".":
                row.append(None)
            elif token.isascii() and token.isdigit():
                row.append(int(token))
            else:
                raise TableFormatError(f"line {number}: bad token '{token}'")
        grid.append(row)

    if len(grid) != n_rows:
        raise TableFormatError(f"expected {n_rows} rows, got {len(grid)}")
    table = make_table(grid, row_labels, col_labels)
    if table.kind != kind:
        raise TableFormatError(f"header kind '{kind}' does not match the cells")
    return table


def save_ccmat(t: ValueTable, path: str | Path) -> None:
    Path(path).write_bytes(dump_ccmat(t).encode("utf-8"))
    logger.info(f"Wrote {t.n_rows}x{t.n_cols} {t.kind} table to {path}")


def read_ccmat(path: str | Path) -> ValueTable:
    return load_ccmat(Path(path).read_bytes().decode("utf-8"))
