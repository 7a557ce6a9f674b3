"""Optimal classical (one-bit-message) strategies for multiparty RAC tasks.

Deterministic strategies suffice because the average success is linear in
the response probabilities.  A strategy is three kinds of truth tables:

* ``first_party``: ``2**k`` bits, entry ``p`` is the message for prefix
  ``x_0..x_{k-1}`` read as a big-endian integer ``p``;
* ``relays``: one 4-bit table per relay, entry ``2*m + x`` for incoming
  message ``m`` and local bit ``x``;
* ``decoder``: ``2*n`` bits, entry ``m*n + y`` is the guess for ``(m, y)``.

Table strings and the lexicographic tie-break both use this entry order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .core import (
    CapExceededError,
    RacTask,
    SuccessReport,
    bit_matrix,
)

DEFAULT_CAP = 16**5

AND = (0, 0, 0, 1)
OR = (0, 1, 1, 1)


def _table_bits(code: int, size: int) -> tuple[int, ...]:
    return tuple((code >> (size - 1 - i)) & 1 for i in range(size))


def _all_tables(size: int) -> np.ndarray:
    """``(2**size, size)`` array of every table, in lexicographic order."""
    return bit_matrix(size)


@dataclass(frozen=True)
class ClassicalStrategy:
    first_party: tuple[int, ...]
    relays: tuple[tuple[int, ...], ...]
    decoder: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "first_party", tuple(int(b) for b in self.first_party))
        object.__setattr__(self, "relays", tuple(tuple(int(b) for b in r) for r in self.relays))
        object.__setattr__(self, "decoder", tuple(int(b) for b in self.decoder))
        k = int(math.log2(len(self.first_party))) if self.first_party else -1
        if len(self.first_party) != 2**k or k < 1:
            raise ValueError("first_party must have 2**k entries")
        if any(len(r) != 4 for r in self.relays):
            raise ValueError("relay tables have 4 entries")
        if len(self.decoder) != 2 * (k + len(self.relays)):
            raise ValueError("decoder must have 2*n entries")
        if set(self.first_party + self.decoder + sum(self.relays, ())) - {0, 1}:
            raise ValueError("tables hold bits")

    @property
    def k(self) -> int:
        return int(math.log2(len(self.first_party)))

    @property
    def n(self) -> int:
        return self.k + len(self.relays)

    def sort_key(self) -> tuple:
        return (self.first_party, self.relays, self.decoder)

    def messages(self) -> np.ndarray:
        """Final message for every input string ``x``."""
        n, k = self.n, self.k
        xs = bit_matrix(n)
        m = np.asarray(self.first_party, dtype=np.uint8)[np.arange(2**n) >> (n - k)]
        for j, relay in enumerate(self.relays):
            m = np.asarray(relay, dtype=np.uint8)[2 * m + xs[:, k + j]]
        return m

    def guesses(self) -> np.ndarray:
        """``(2**n, n)`` array of B's output."""
        n = self.n
        dec = np.asarray(self.decoder, dtype=np.uint8).reshape(2, n)
        return dec[self.messages()]

    def to_json(self) -> dict[str, Any]:
        def s(bits):
            return "".join(map(str, bits))

        return {
            "first_party": s(self.first_party),
            "relays": [s(r) for r in self.relays],
            "decoder": s(self.decoder),
        }

    @classmethod
    def from_json(cls, data) -> ClassicalStrategy:
        def b(s):
            return tuple(int(c) for c in s)

        return cls(b(data["first_party"]), tuple(b(r) for r in data["relays"]), b(data["decoder"]))


@dataclass(frozen=True)
class StrategyScore:
    strategy: ClassicalStrategy
    score: Fraction
    route: str = ""
    budget: int = 0
    examined: int = 0
    identity_decoder_score: Fraction | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def identity_decoder_optimal(self) -> bool | None:
        if self.identity_decoder_score is None:
            return None
        return self.identity_decoder_score == self.score


def _check_shape(s: ClassicalStrategy, task: RacTask):
    if (s.n, s.k) != (task.n, task.k):
        raise ValueError(
            f"strategy is for ({s.n},{s.k}) but the task is ({task.n},{task.k})"
        )


def evaluate_strategy(s: ClassicalStrategy, task: RacTask) -> Fraction:
    """Exact fraction of ``(x, y)`` pairs answered correctly."""
    _check_shape(s, task)
    correct = int(np.count_nonzero(s.guesses() == task.table))
    return Fraction(correct, task.scenario.pair_count)


def search_budget(n: int, k: int) -> dict[str, int]:
    """Raw strategy counts for the two exact search routes."""
    relays = 16 ** (n - k)
    return {"encoder": 2 ** (2**k) * relays, "decoder": relays * 2 ** (2 * n)}


def enumerate_optimal(
    task: RacTask, cap: int = DEFAULT_CAP, route: str = "auto"
) -> StrategyScore:
    """Best deterministic strategy by exhaustive search.

    ``route="encoder"`` enumerates ``A_0`` and relay tables and sets each
    decoder cell ``(m, y)`` to the majority target in that cell.
    ``route="decoder"`` enumerates relays and decoders and sets each ``A_0``
    entry to whichever message scores more over that prefix.  Both are exact
    because the objective splits into independent terms per decoder cell,
    respectively per ``A_0`` prefix.  ``"auto"`` takes the smaller budget.

    Among optimal strategies one with decoder ``b = m`` is preferred when it
    exists; remaining ties resolve to the lexicographically smallest
    enumerated tables, with the closed-form side taking 0 on ties.
    """
    n, k = task.n, task.k
    budgets = search_budget(n, k)
    if route == "auto":
        route = min(budgets, key=lambda r: (budgets[r], r != "encoder"))
    if route not in budgets:
        raise ValueError(f"unknown route {route!r}")
    if budgets[route] > cap:
        raise CapExceededError(budgets[route], cap)
    if route == "encoder":
        result = _search_encoders(task)
    else:
        result = _search_decoders(task)
    result = StrategyScore(**{**result.__dict__, "route": route, "budget": budgets[route]})
    if k == 2 and np.array_equal(task.table, bit_matrix(n)) and not result.identity_decoder_optimal:
        result.notes.append(
            f"b = m is not optimal here: {result.identity_decoder_score} < {result.score}"
        )
    return result


def _cell_counts(masks: np.ndarray, target: np.ndarray):
    """Counts of (message, target) combinations per strategy and question."""
    m = masks.astype(np.int32)
    f = target.astype(np.int32)
    total = m.shape[1]
    c11 = m @ f
    c1 = m.sum(axis=1)[:, None]
    cf = f.sum(axis=0)[None, :]
    c10 = c1 - c11
    c01 = cf - c11
    c00 = total - c1 - c01
    return c00, c01, c10, c11


def _dedupe(masks: np.ndarray, codes: np.ndarray):
    """Keep the first strategy (in enumeration order) of each distinct message map."""
    packed = np.packbits(masks, axis=1)
    _, first = np.unique(packed, axis=0, return_index=True)
    first.sort()
    return masks[first], codes[first]


def _search_encoders(task: RacTask) -> StrategyScore:
    n, k = task.n, task.k
    xs = bit_matrix(n)
    prefix = np.arange(2**n) >> (n - k)
    masks = _all_tables(2**k)[:, prefix]
    codes = np.arange(masks.shape[0])[:, None]
    examined = masks.shape[0]
    relay_tables = _all_tables(4)
    for j in range(n - k):
        masks, codes = _dedupe(masks, codes)
        idx = 2 * masks + xs[:, k + j][None, :]
        s = masks.shape[0]
        masks = relay_tables[:, idx].transpose(1, 0, 2).reshape(s * 16, -1)
        codes = np.hstack([np.repeat(codes, 16, axis=0), np.tile(np.arange(16), s)[:, None]])
        examined += masks.shape[0]
    masks, codes = _dedupe(masks, codes)

    c00, c01, c10, c11 = _cell_counts(masks, task.table)
    scores = (np.maximum(c00, c01) + np.maximum(c10, c11)).sum(axis=1)
    identity = (c00 + c11).sum(axis=1)
    if identity.max() == scores.max():
        best = int(np.argmax(identity))
        decoder = (0,) * n + (1,) * n
    else:
        best = int(np.argmax(scores))
        decoder = tuple((c01[best] > c00[best]).astype(int)) + tuple((c11[best] > c10[best]).astype(int))
    code = codes[best]
    strategy = ClassicalStrategy(
        _table_bits(int(code[0]), 2**k),
        tuple(_table_bits(int(c), 4) for c in code[1:]),
        decoder,
    )
    total = task.scenario.pair_count
    return StrategyScore(
        strategy,
        Fraction(int(scores[best]), total),
        examined=examined,
        identity_decoder_score=Fraction(int(identity.max()), total),
    )


def _search_decoders(task: RacTask) -> StrategyScore:
    n, k = task.n, task.k
    big = 2**n
    xs = bit_matrix(n)
    f = task.table.astype(np.int32)
    decoders = _all_tables(2 * n).reshape(-1, 2, n).astype(np.int32)
    # hits[d, m, x]: questions answered correctly for x when B receives m.
    hits = np.stack(
        [decoders[:, m, :] @ f.T + (1 - decoders[:, m, :]) @ (1 - f).T for m in (0, 1)], axis=1
    )
    identity_code = 2**n - 1
    best = None
    best_identity = -1
    examined = 0
    for relay_codes in itertools.product(range(16), repeat=n - k):
        relays = [_table_bits(c, 4) for c in relay_codes]
        final = np.empty((2, big), dtype=np.int64)
        for m0 in (0, 1):
            m = np.full(big, m0, dtype=np.uint8)
            for j, r in enumerate(relays):
                m = np.asarray(r, dtype=np.uint8)[2 * m + xs[:, k + j]]
            final[m0] = m
        # got[d, m0, x]: correct answers if A_0 sends m0 on x's prefix.
        got = np.stack(
            [np.where(final[m0] == 1, hits[:, 1, :], hits[:, 0, :]) for m0 in (0, 1)], axis=1
        )
        per_prefix = got.reshape(got.shape[0], 2, 2**k, -1).sum(axis=3)
        scores = per_prefix.max(axis=1).sum(axis=1)
        examined += scores.size
        if scores[identity_code] > best_identity:
            best_identity = int(scores[identity_code])
            choice = (per_prefix[identity_code, 1] > per_prefix[identity_code, 0]).astype(int)
            identity_best = (best_identity, relays, identity_code, tuple(choice))
        d = int(np.argmax(scores))
        if best is None or scores[d] > best[0]:
            choice = (per_prefix[d, 1] > per_prefix[d, 0]).astype(int)
            best = (int(scores[d]), relays, d, tuple(choice))
    if best_identity == best[0]:
        best = identity_best
    score, relays, d, first = best
    strategy = ClassicalStrategy(first, tuple(relays), _table_bits(d, 2 * n))
    total = task.scenario.pair_count
    return StrategyScore(
        strategy,
        Fraction(score, total),
        examined=examined,
        identity_decoder_score=Fraction(best_identity, total),
    )


def zigzag_strategy(n: int) -> ClassicalStrategy:
    """``A_0`` sends ``x_0 AND x_1``; later relays alternate OR, AND, ...; B outputs the message."""
    if n < 2:
        raise ValueError("zigzag needs n >= 2")
    relays = tuple(AND if (j + 1) % 2 else OR for j in range(1, n - 1))
    return ClassicalStrategy(AND, relays, (0,) * n + (1,) * n)


def _binom(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def zigzag_formula(n: int) -> Fraction:
    """Closed-form success of :func:`zigzag_strategy`, counted by Hamming weight."""
    if n < 2:
        raise ValueError("n must be >= 2")
    total = n * n + 2
    for i in range(2, n):
        ones = _binom(n - 1, i - 1) + sum(_binom(n - 2 * j + 1, i - j) for j in range(2, i + 1))
        total += ones * i + (_binom(n, i) - ones) * (n - i)
    return Fraction(total, n * 2**n)


def constant_strategy(n: int, k: int, bit: int) -> ClassicalStrategy:
    return ClassicalStrategy((0,) * 2**k, ((0, 0, 0, 0),) * (n - k), (bit,) * (2 * n))


def identity_relay_strategy(n: int, k: int = 2) -> ClassicalStrategy:
    """``A_0`` forwards ``x_0``, relays pass the message on, B outputs it."""
    first = tuple(p >> (k - 1) for p in range(2**k))
    return ClassicalStrategy(first, ((0, 0, 1, 1),) * (n - k), (0,) * n + (1,) * n)


@dataclass(frozen=True)
class AppendixRow:
    label: str
    task: RacTask
    expected: Fraction


def appendix_tasks() -> list[AppendixRow]:
    """The eight (3,2) tasks with corrected classical optima."""

    def no(b):
        return 1 - b

    rows = [
        ("x0, x1, x2", lambda x: (x[0], x[1], x[2]), Fraction(17, 24)),
        ("x0^x2, x1^x2, x2", lambda x: (x[0] ^ x[2], x[1] ^ x[2], x[2]), Fraction(3, 4)),
        ("x0^x2(x0^x1), x1^x2~(x0^x1), x2",
         lambda x: (x[0] ^ (x[2] & (x[0] ^ x[1])), x[1] ^ (x[2] & no(x[0] ^ x[1])), x[2]),
         Fraction(17, 24)),
        ("x0^x2~(x0^x1), x1^x2(x0^x1), x2",
         lambda x: (x[0] ^ (x[2] & no(x[0] ^ x[1])), x[1] ^ (x[2] & (x[0] ^ x[1])), x[2]),
         Fraction(17, 24)),
        ("x0^x2, x1, x2", lambda x: (x[0] ^ x[2], x[1], x[2]), Fraction(17, 24)),
        ("x0, x1, x2^x0", lambda x: (x[0], x[1], x[2] ^ x[0]), Fraction(2, 3)),
        ("x0^x2, x1, x0", lambda x: (x[0] ^ x[2], x[1], x[0]), Fraction(2, 3)),
        ("x0^x2, x1^x2, x0", lambda x: (x[0] ^ x[2], x[1] ^ x[2], x[0]), Fraction(2, 3)),
    ]
    return [
        AppendixRow(label, RacTask.from_function(3, 2, lambda x, y, g=g: g(x)[y], name=label), value)
        for label, g, value in rows
    ]


def optimal_report(task: RacTask, cap: int = DEFAULT_CAP) -> SuccessReport:
    best = enumerate_optimal(task, cap=cap)
    meta = {
        "strategy": best.strategy.to_json(),
        "route": best.route,
        "budget": best.budget,
        "identity_decoder_optimal": best.identity_decoder_optimal,
        "notes": list(best.notes),
    }
    return SuccessReport.exact(task, "classical-enumerated", best.score, metadata=meta)


def zigzag_report(n: int) -> SuccessReport:
    task = RacTask.standard(n, 2)
    value = evaluate_strategy(zigzag_strategy(n), task)
    formula = zigzag_formula(n)
    meta = {"strategy": zigzag_strategy(n).to_json(), "formula": formula, "matches_formula": value == formula}
    return SuccessReport.exact(task, "classical-zigzag", value, metadata=meta)
