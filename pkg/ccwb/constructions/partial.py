# ccwb/constructions/partial.py
"""
The partial function g and its powers g_n: half-duplex strategies with one
round per coordinate, the local classical protocol of depth
n + ceil(log2(n+1)), and the counting bound on the global complexity.
"""

import itertools
from fractions import Fraction
from math import log2

from ccwb.errors import BudgetExceededError, SizeLimitError
from ccwb.logger import logger
from ccwb.protocols import (
    LOCAL,
    MALICIOUS,
    Action,
    ClassicalProtocol,
    HalfDuplexStrategy,
    History,
    LocalLeaf,
    Node,
    Owner,
    Tree,
    verify_classical,
    verify_halfduplex,
)
from ccwb.solver import ceil_log2
from ccwb.tables import (
    G_INPUT_SYMBOLS,
    GN_MAX_N,
    blue_closed_form,
    encode_g_output,
    gen_gn,
    green_closed_form,
)

GN_VERIFY_MAX_N = 4
COUNTING_ASYMPTOTIC = "n*2^n/3*(1+o(1))"


def gn_labels(n: int) -> list[str]:
    """Input strings of g_n in table order."""
    return ["".join(s) for s in itertools.product(G_INPUT_SYMBOLS, repeat=n)]


# ============== HALF-DUPLEX STRATEGIES ==============

def gn_strategies(n: int) -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    """
    Round i handles coordinate i: a player holding a bit sends it, a player
    holding r receives. Each side then knows the whole coordinate symbol.
    """
    if not 1 <= n <= GN_MAX_N:
        raise SizeLimitError(f"n={n} outside 1..{GN_MAX_N} for g_n")
    labels = gn_labels(n)

    def act(x: int, history: History) -> Action:
        symbol = labels[x][len(history)]
        return Action.RECEIVE if symbol == "r" else Action.send(int(symbol))

    def output_for(owner: Owner):
        def output(x: int, history: History) -> int:
            symbols = []
            for symbol, event in zip(labels[x], history):
                if symbol != "r":
                    symbols.append(f"{symbol}r" if owner is Owner.A else f"r{symbol}")
                else:
                    symbols.append(f"r{event.bit}" if owner is Owner.A else f"{event.bit}r")
            return encode_g_output(symbols)
        return output

    size = len(labels)
    return (
        HalfDuplexStrategy(n, size, act, output_for(Owner.A), name=f"g{n}-alice"),
        HalfDuplexStrategy(n, size, act, output_for(Owner.B), name=f"g{n}-bob"),
    )


def g3_strategies() -> tuple[HalfDuplexStrategy, HalfDuplexStrategy]:
    return gn_strategies(1)


# ============== LOCAL CLASSICAL PROTOCOL ==============

def _own_bits(label: str) -> list[int]:
    return [int(s) for s in label if s != "r"]


def gn_local_protocol(n: int) -> ClassicalProtocol:
    """
    Alice announces k, the number of r symbols in her input, in
    ceil(log2(n+1)) bits, then sends her n-k bits; Bob answers with his k
    bits. On the domain Bob holds exactly k bits, at the positions of
    Alice's r symbols, so each side can fill in its own output string.
    """
    if not 1 <= n <= GN_MAX_N:
        raise SizeLimitError(f"n={n} outside 1..{GN_MAX_N} for g_n")
    labels = gn_labels(n)
    size = len(labels)
    alice_bits = [_own_bits(x) for x in labels]
    bob_bits = [_own_bits(y) for y in labels]
    r_count = [x.count("r") for x in labels]
    width = ceil_log2(n + 1)
    dummy = LocalLeaf((0,) * size, (0,) * size)

    def alice_output(x: str, bob_sent: tuple[int, ...]) -> int:
        sent = iter(bob_sent)
        return encode_g_output([f"{s}r" if s != "r" else f"r{next(sent)}" for s in x])

    def bob_output(y: str, alice_sent: tuple[int, ...]) -> int:
        sent = iter(alice_sent)
        return encode_g_output([f"r{s}" if s != "r" else f"{next(sent)}r" for s in y])

    def leaf(k: int, alice_sent: tuple[int, ...], bob_sent: tuple[int, ...]) -> LocalLeaf:
        out_a = tuple(alice_output(x, bob_sent) if r_count[i] == k else None for i, x in enumerate(labels))
        out_b = tuple(bob_output(y, alice_sent) if len(bob_bits[j]) == k else None
                      for j, y in enumerate(labels))
        return LocalLeaf(out_a, out_b)

    def bob_phase(k: int, alice_sent: tuple[int, ...], bob_sent: tuple[int, ...]) -> Tree:
        if len(bob_sent) == k:
            return leaf(k, alice_sent, bob_sent)
        pos = len(bob_sent)
        bits = tuple(b[pos] if pos < len(b) else 0 for b in bob_bits)
        return Node(Owner.B, bits,
                    bob_phase(k, alice_sent, bob_sent + (0,)),
                    bob_phase(k, alice_sent, bob_sent + (1,)))

    def alice_phase(k: int, alice_sent: tuple[int, ...]) -> Tree:
        if len(alice_sent) == n - k:
            return bob_phase(k, alice_sent, ())
        pos = len(alice_sent)
        bits = tuple(a[pos] if pos < len(a) else 0 for a in alice_bits)
        return Node(Owner.A, bits, alice_phase(k, alice_sent + (0,)), alice_phase(k, alice_sent + (1,)))

    def count_phase(prefix: int, depth: int) -> Tree:
        if depth == width:
            return alice_phase(prefix, ()) if prefix <= n else dummy
        shift = width - 1 - depth
        bits = tuple((r_count[i] >> shift) & 1 for i in range(size))
        return Node(Owner.A, bits, count_phase(prefix << 1, depth + 1), count_phase((prefix << 1) | 1, depth + 1))

    p = ClassicalProtocol(count_phase(0, 0), size, size)
    logger.debug(f"Local protocol for g_{n}: depth {p.depth}")
    return p


def verify_gn(n: int):
    """Exhaustive check of both g_n upper bounds; returns the two counterexamples (None when sound)."""
    if n > GN_VERIFY_MAX_N:
        raise BudgetExceededError(f"exhaustive g_n verification is limited to n <= {GN_VERIFY_MAX_N}")
    t = gen_gn(n)
    halfduplex = verify_halfduplex(*gn_strategies(n), t, MALICIOUS)
    local = verify_classical(gn_local_protocol(n), t, LOCAL)
    return halfduplex, local


# ============== COUNTING BOUND ==============

def counting_lower_bound(n: int) -> Fraction:
    """
    G^2 / (G + 2B) with G = (n+1)2^n green and B = (n-1)2^n + 1 blue simple
    inputs, i.e. (n+1)^2 4^n / ((3n-1)2^n + 2).
    """
    if n < 1:
        raise SizeLimitError("n must be positive")
    green, blue = green_closed_form(n), blue_closed_form(n)
    return Fraction(green * green, green + 2 * blue)


def counting_lower_bound_log2(n: int) -> float:
    return log2(counting_lower_bound(n))
