# tests/test_constructions_partial.py
from fractions import Fraction

import pytest

from ccwb.constructions.partial import (
    counting_lower_bound,
    counting_lower_bound_log2,
    g3_strategies,
    gn_labels,
    gn_local_protocol,
    gn_strategies,
    verify_gn,
)
from ccwb.errors import BudgetExceededError, SizeLimitError
from ccwb.protocols import MALICIOUS, run_halfduplex, verify_halfduplex
from ccwb.solver import SolveMode, cc_lower_bound, ceil_log2
from ccwb.tables import encode_g_output, gen_g3, gen_gn


def test_gn_labels():
    assert gn_labels(1) == ["0", "1", "r"]
    assert gn_labels(2)[:4] == ["00", "01", "0r", "10"]
    assert len(gn_labels(3)) == 27


# ============== HALF-DUPLEX ==============

def test_g3_in_one_round():
    s_a, s_b = g3_strategies()
    assert s_a.rounds == s_b.rounds == 1
    assert verify_halfduplex(s_a, s_b, gen_g3(), MALICIOUS) is None


def test_gn_run_outputs_both_strings():
    s_a, s_b = gn_strategies(2)
    labels = gn_labels(2)
    (outcome,) = run_halfduplex(s_a, s_b, labels.index("0r"), labels.index("r1"), MALICIOUS)
    assert outcome.a_out == outcome.b_out == encode_g_output(["0r", "r1"])
    assert outcome.silent_rounds == 0 and outcome.spent_rounds == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gn_protocols_verify(n):
    assert verify_gn(n) == (None, None)


def test_gn_limits():
    with pytest.raises(BudgetExceededError):
        verify_gn(5)
    with pytest.raises(SizeLimitError):
        gn_strategies(0)
    with pytest.raises(SizeLimitError):
        gn_local_protocol(7)


# ============== LOCAL PROTOCOL ==============

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_local_protocol_depth(n):
    assert gn_local_protocol(n).depth == n + ceil_log2(n + 1)


# ============== LOWER BOUNDS ==============

@pytest.mark.parametrize("n", [1, 2, 3])
def test_global_lower_bound(n):
    assert cc_lower_bound(gen_gn(n), mode=SolveMode.PARTIAL_GLOBAL) == 2 * n


def test_counting_bound():
    assert counting_lower_bound(1) == Fraction(16, 6)
    assert counting_lower_bound(2) == Fraction(144, 22)
    assert counting_lower_bound_log2(1) == pytest.approx(1.415, abs=1e-3)
    # monotone in n
    assert all(counting_lower_bound(n + 1) > counting_lower_bound(n) for n in range(1, 8))
    with pytest.raises(SizeLimitError):
        counting_lower_bound(0)
