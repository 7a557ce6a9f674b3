"""Scenario and task definitions shared by every protocol evaluator.

Bit order: ``x_0`` is the most significant bit of the integer encoding of an
input string, so ``BitString(4, 0b1000)`` has ``x_0 = 1``.  Every module uses
this convention.

Classical probabilities are exact :class:`fractions.Fraction` values.  Quantum
(Born-rule) probabilities are floats compared with :data:`FLOAT_TOL`.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

MAX_BITS = 16
FLOAT_TOL = 1e-12

METHODS = (
    "classical-enumerated",
    "classical-zigzag",
    "earac-bell",
    "earac-ghz",
    "earac-grid9",
    "qrac",
    "closed-form",
)


class IncompleteTableError(ValueError):
    """A per-pair table does not cover every ``(x, y)`` pair."""


class UnsupportedScenarioError(ValueError):
    """The requested protocol is not defined for this scenario."""


class CapExceededError(RuntimeError):
    """An exhaustive search would exceed its enumeration budget."""

    def __init__(self, required: int, cap: int, what: str = "strategies"):
        self.required = required
        self.cap = cap
        super().__init__(
            f"search needs {required:,} {what} but the cap is {cap:,}; "
            "raise the cap explicitly to run it"
        )


class VerificationError(RuntimeError):
    """An internal cross-check (simulation vs closed form, etc.) disagreed."""


def get_bit(value: int, i: int, length: int) -> int:
    """Bit ``x_i`` of an integer-encoded string of ``length`` bits."""
    if not 0 <= i < length:
        raise IndexError(f"bit index {i} out of range for length {length}")
    return (value >> (length - 1 - i)) & 1


def bits_of(value: int, length: int) -> tuple[int, ...]:
    return tuple((value >> (length - 1 - i)) & 1 for i in range(length))


def from_bits(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | (int(b) & 1)
    return value


def bit_matrix(n: int) -> np.ndarray:
    """``(2**n, n)`` uint8 array whose row ``x`` lists ``x_0 .. x_{n-1}``."""
    xs = np.arange(2**n)
    shifts = np.arange(n - 1, -1, -1)
    return ((xs[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True)
class BitString:
    length: int
    value: int

    def __post_init__(self):
        if not 1 <= self.length <= MAX_BITS:
            raise ValueError(f"length must be in 1..{MAX_BITS}, got {self.length}")
        if not 0 <= self.value < 2**self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, s: str) -> BitString:
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2))

    @classmethod
    def from_bits(cls, bits) -> BitString:
        bits = tuple(bits)
        return cls(len(bits), from_bits(bits))

    def __getitem__(self, i: int) -> int:
        return get_bit(self.value, i, self.length)

    def __iter__(self) -> Iterator[int]:
        return iter(bits_of(self.value, self.length))

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    @staticmethod
    def all(length: int) -> Iterator[BitString]:
        for v in range(2**length):
            yield BitString(length, v)


@dataclass(frozen=True)
class RacScenario:
    """An ``(n, k)`` scenario: ``A_0`` holds ``k`` bits, ``A_1..A_{n-k}`` one each.

    ``topology`` is ``"chain"`` for the linear arrangement; tree-shaped layouts
    (the nine-input grid) use their own label and leave the party count to the
    layout.
    """

    n: int
    k: int
    topology: str = "chain"

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BITS:
            raise ValueError(f"n must be in 1..{MAX_BITS}, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")

    @property
    def relay_count(self) -> int:
        return self.n - self.k

    @property
    def party_count(self) -> int:
        """Encoding parties plus the guessing party."""
        return self.n - self.k + 2

    @property
    def bits_per_party(self) -> tuple[int, ...]:
        return (self.k,) + (1,) * self.relay_count

    @property
    def pair_count(self) -> int:
        return self.n * 2**self.n


@dataclass(frozen=True, eq=False)
class RacTask:
    """A scenario plus the target ``f(x, y)`` as a ``(2**n, n)`` truth table."""

    scenario: RacScenario
    table: np.ndarray
    name: str = ""

    def __post_init__(self):
        n = self.scenario.n
        table = np.asarray(self.table, dtype=np.uint8)
        if table.shape != (2**n, n):
            raise IncompleteTableError(
                f"target table must have shape {(2**n, n)}, got {table.shape}"
            )
        if np.any(table > 1):
            raise ValueError("target table entries must be bits")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int:
        return self.scenario.n

    @property
    def k(self) -> int:
        return self.scenario.k

    def __call__(self, x: int | BitString, y: int) -> int:
        if isinstance(x, BitString):
            x = x.value
        return int(self.table[x, y])

    def __eq__(self, other):
        if not isinstance(other, RacTask):
            return NotImplemented
        return self.scenario == other.scenario and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.scenario, self.table.tobytes()))

    @classmethod
    def standard(cls, n: int, k: int, topology: str = "chain") -> RacTask:
        """The usual task ``f(x, y) = x_y``."""
        return cls(RacScenario(n, k, topology), bit_matrix(n), name=f"standard({n},{k})")

    @classmethod
    def from_function(
        cls, n: int, k: int, f: Callable[[tuple[int, ...], int], int], name: str = ""
    ) -> RacTask:
        table = np.array(
            [[f(bits_of(x, n), y) & 1 for y in range(n)] for x in range(2**n)],
            dtype=np.uint8,
        )
        return cls(RacScenario(n, k), table, name=name)

    @classmethod
    def from_remap(cls, n: int, k: int, remap, name: str = "") -> RacTask:
        """Task ``f(x, y) = x'_y`` where ``remap[x] = x'`` (integers)."""
        remap = np.asarray(remap, dtype=np.int64)
        return cls(RacScenario(n, k), bit_matrix(n)[remap], name=name)

    def negated(self, y: int) -> RacTask:
        table = self.table.copy()
        table[:, y] ^= 1
        return RacTask(self.scenario, table, name=f"{self.name}~{y}")

    def to_json(self) -> dict[str, Any]:
        """``table[x]`` is a string whose character ``y`` is ``f(x, y)``."""
        return {
            "n": self.n,
            "k": self.k,
            "topology": self.scenario.topology,
            "table": ["".join(map(str, row)) for row in self.table.tolist()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> RacTask:
        n, k = int(data["n"]), int(data["k"])
        rows = data["table"]
        if len(rows) != 2**n or any(len(r) != n for r in rows):
            raise IncompleteTableError("table must list 2**n strings of n bits")
        table = np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)
        return cls(RacScenario(n, k, data.get("topology", "chain")), table)


def _as_pair_array(per_pair, scenario: RacScenario) -> np.ndarray:
    n = scenario.n
    if isinstance(per_pair, Mapping):
        out = np.empty((2**n, n), dtype=object)
        missing = []
        for x in range(2**n):
            for y in range(n):
                key = (x, y)
                if key not in per_pair:
                    key = (BitString(n, x), y)
                    if key not in per_pair:
                        missing.append((x, y))
                        continue
                out[x, y] = per_pair[key]
        if missing:
            raise IncompleteTableError(
                f"{len(missing)} of {scenario.pair_count} pairs missing, e.g. {missing[:3]}"
            )
        return out
    arr = np.asarray(per_pair)
    if arr.shape != (2**n, n):
        raise IncompleteTableError(f"expected shape {(2**n, n)}, got {arr.shape}")
    return arr


def average_success(per_pair, scenario: RacScenario) -> Fraction | float:
    """Uniform average of per-pair success probabilities over all ``(x, y)``.

    ``per_pair`` is either a mapping keyed by ``(x, y)`` or a ``(2**n, n)``
    array.  Integer and Fraction entries give an exact Fraction; anything else
    gives a float.
    """
    arr = _as_pair_array(per_pair, scenario)
    values = arr.ravel().tolist()
    if all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values):
        return Fraction(sum(values, Fraction(0)), scenario.pair_count)
    return math.fsum(float(v) for v in values) / scenario.pair_count


@dataclass(frozen=True, eq=False)
class SuccessReport:
    task: RacTask
    method: str
    value_float: float
    value_exact: Fraction | None = None
    per_pair: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method label {self.method!r}")
        v = float(self.value_float)
        if not -FLOAT_TOL <= v <= 1 + FLOAT_TOL:
            raise ValueError(f"success probability {v} outside [0, 1]")
        if self.value_exact is not None and abs(v - float(self.value_exact)) >= FLOAT_TOL:
            raise VerificationError(
                f"float value {v!r} disagrees with exact {self.value_exact}"
            )
        if self.per_pair is not None:
            mean = float(average_success(np.asarray(self.per_pair, dtype=float), self.task.scenario))
            if abs(mean - v) >= FLOAT_TOL:
                raise VerificationError(f"per-pair mean {mean!r} != reported value {v!r}")

    @classmethod
    def exact(cls, task: RacTask, method: str, value: Fraction, **kw) -> SuccessReport:
        return cls(task, method, float(value), value_exact=Fraction(value), **kw)

    def to_json(self, digits: int = 12) -> dict[str, Any]:
        exact = self.value_exact
        per_pair = None
        if self.per_pair is not None:
            per_pair = [
                [round_sig(p, digits) for p in row]
                for row in np.asarray(self.per_pair, dtype=float).tolist()
            ]
        return {
            "method": self.method,
            "n": self.task.n,
            "k": self.task.k,
            "value_exact": None if exact is None else {"num": exact.numerator, "den": exact.denominator},
            "value_float": round_sig(self.value_float, digits),
            "per_pair": per_pair,
        }


def round_sig(value: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits, for byte-stable output."""
    return float(f"{float(value):.{digits}g}")
