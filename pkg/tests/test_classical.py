from fractions import Fraction

import numpy as np
import pytest

from mqrac.classical import (
    AND,
    OR,
    ClassicalStrategy,
    appendix_tasks,
    constant_strategy,
    enumerate_optimal,
    evaluate_strategy,
    identity_relay_strategy,
    search_budget,
    zigzag_formula,
    zigzag_strategy,
)
from mqrac.core import CapExceededError, RacTask

from oracles import chain_classical_optimum

# Brute-force optima from oracles.chain_classical_optimum, frozen.
STANDARD_OPTIMA = {2: Fraction(3, 4), 3: Fraction(17, 24), 4: Fraction(21, 32)}


def test_strategy_validation_and_json():
    s = zigzag_strategy(4)
    assert ClassicalStrategy.from_json(s.to_json()) == s
    with pytest.raises(ValueError):
        ClassicalStrategy((0, 1, 1), (), (0, 1, 0, 1))
    with pytest.raises(ValueError):
        ClassicalStrategy((0, 0, 0, 1), ((0, 1),), (0,) * 6)


def test_zigzag_three_is_and_then_or():
    s = zigzag_strategy(3)
    assert s.first_party == AND and s.relays == (OR,)
    assert s.decoder == (0, 0, 0, 1, 1, 1)
    assert evaluate_strategy(s, RacTask.standard(3, 2)) == Fraction(17, 24)


def test_single_and_party_two_bits():
    s = zigzag_strategy(2)
    assert s.first_party == AND
    assert evaluate_strategy(s, RacTask.standard(2, 2)) == Fraction(3, 4)


def test_identity_relay_direct_count():
    # Relay forwards x_0 untouched; B answers x_0 correctly, others by coin-free guess.
    assert evaluate_strategy(identity_relay_strategy(3), RacTask.standard(3, 2)) == Fraction(2, 3)


def test_constant_strategy_scores_half():
    assert evaluate_strategy(constant_strategy(4, 2, 0), RacTask.standard(4, 2)) == Fraction(1, 2)


def test_zigzag_formula_matches_evaluation():
    for n in range(2, 13):
        assert evaluate_strategy(zigzag_strategy(n), RacTask.standard(n, 2)) == zigzag_formula(n)


def test_zigzag_formula_values():
    assert zigzag_formula(3) == Fraction(17, 24)
    assert zigzag_formula(4) == Fraction(21, 32)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_enumeration_matches_brute_force(n):
    task = RacTask.standard(n, 2)
    assert chain_classical_optimum(task.table.tolist(), n, 2) == STANDARD_OPTIMA[n]
    assert enumerate_optimal(task).score == STANDARD_OPTIMA[n]


def test_enumeration_equals_formula_up_to_six():
    for n in range(3, 7):
        best = enumerate_optimal(RacTask.standard(n, 2))
        assert best.score == zigzag_formula(n)
        assert best.identity_decoder_optimal


def test_three_two_optimum_is_and_or():
    best = enumerate_optimal(RacTask.standard(3, 2))
    assert best.strategy.first_party == AND
    assert best.strategy.relays == (OR,)
    assert evaluate_strategy(best.strategy, RacTask.standard(3, 2)) == best.score


def test_routes_agree_on_random_tasks():
    rng = np.random.default_rng(8)
    for n, k in ((3, 2), (4, 2), (4, 3)):
        for _ in range(3):
            table = rng.integers(0, 2, size=(2**n, n))
            task = RacTask.from_function(n, k, lambda b, y, t=table: t[int("".join(map(str, b)), 2), y])
            enc = enumerate_optimal(task, route="encoder", cap=16**6)
            dec = enumerate_optimal(task, route="decoder", cap=16**6)
            assert enc.score == dec.score
            if k == 2:
                assert enc.score == chain_classical_optimum(table.tolist(), n, k)
            assert evaluate_strategy(enc.strategy, task) == enc.score
            assert evaluate_strategy(dec.strategy, task) == dec.score


def test_two_party_one_bit_baselines():
    assert enumerate_optimal(RacTask.standard(4, 4)).score == Fraction(11, 16)
    assert enumerate_optimal(RacTask.standard(6, 6)).score == Fraction(21, 32)


def test_cap_is_enforced():
    with pytest.raises(CapExceededError) as info:
        enumerate_optimal(RacTask.standard(7, 2))
    assert info.value.required > info.value.cap
    assert search_budget(3, 2) == {"encoder": 2**4 * 16, "decoder": 16 * 2**6}


def test_negating_a_column_keeps_the_optimum():
    task = RacTask.standard(4, 2)
    assert enumerate_optimal(task.negated(2)).score == enumerate_optimal(task).score


def test_appendix_rows():
    expected = [Fraction(17, 24), Fraction(3, 4), Fraction(17, 24), Fraction(17, 24),
                Fraction(17, 24), Fraction(2, 3), Fraction(2, 3), Fraction(2, 3)]
    rows = appendix_tasks()
    assert [r.expected for r in rows] == expected
    for row in rows:
        assert enumerate_optimal(row.task).score == row.expected
        assert chain_classical_optimum(row.task.table.tolist(), 3, 2) == row.expected
