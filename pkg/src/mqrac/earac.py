"""Entanglement-assisted multiparty RACs built by concatenating small primitives.

A protocol is a tree of primitive instances (:class:`Node`).  Each node owns
one entangled resource shared between its A-part and the guessing party B:

* ``"bell"``: a singlet.  One party sees two bits ``(v0, v1)``, measures with
  setting ``v0 ^ v1`` and forwards ``v0 ^ a``.
* ``"ghz"``: a GHZ state.  The first party sees ``(v0, v1)``, measures with
  setting ``v0 ^ v1`` and forwards ``m = v0 ^ a1``; the second party sees
  ``v2``, measures with setting ``m ^ v2`` and forwards ``m ^ a2``.

A slot bit is either a raw input ``x_i`` or the message leaving a child node.
To guess ``x_y`` B measures every node on the path from ``x_y`` to the root,
choosing at each node the setting that reads the slot the path enters
through, and outputs the root message XOR all those outcomes.

Success probabilities are exact Born-rule sums over all outcome branches.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import (
    BitString,
    RacTask,
    SuccessReport,
    UnsupportedScenarioError,
    VerificationError,
    bits_of,
)
from .quantum import (
    CIRCULAR,
    COMPUTATIONAL,
    HADAMARD,
    Basis1Q,
    StateVector,
    ket,
    make_bell,
    make_ghz,
    measure,
)

EPS_TOL = 1e-9


@dataclass(frozen=True)
class PrimitiveSpec:
    """Two-outcome RAC primitive retrieving one of ``n_bits`` with bias ``epsilon``."""

    resource: str
    n_bits: int
    party_count: int
    epsilon: float

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")

    @property
    def success(self) -> float:
        return (1 + self.epsilon) / 2


BELL_PRIMITIVE = PrimitiveSpec("bell", 2, 1, 2**-0.5)
GHZ_PRIMITIVE = PrimitiveSpec("ghz", 3, 2, 3**-0.5)
PRIMITIVES = {"bell": BELL_PRIMITIVE, "ghz": GHZ_PRIMITIVE}


def concat_success(epsilon: float, levels: int) -> float:
    """Success of a bit behind ``levels`` chained primitives of bias ``epsilon``."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    value = (1 + epsilon**levels) / 2
    assert abs(value - concat_success_binomial(epsilon, levels)) < 1e-12
    return value


def concat_success_binomial(epsilon: float, levels: int) -> float:
    """Same quantity as a sum over an even number of primitive errors."""
    ok, bad = (1 + epsilon) / 2, (1 - epsilon) / 2
    return math.fsum(
        math.comb(levels, 2 * j) * ok ** (levels - 2 * j) * bad ** (2 * j)
        for j in range(levels // 2 + 1)
    )


# Measurement settings of the encoding parties.

_BETA_PLUS = float(np.arccos(np.sqrt((np.sqrt(2) + 1) / (2 * np.sqrt(2)))))
_BETA_MINUS = float(np.arccos(np.sqrt((np.sqrt(2) - 1) / (2 * np.sqrt(2)))))


def bell_party_basis(setting: int) -> Basis1Q:
    if setting == 0:
        return Basis1Q(ket(_BETA_PLUS, 0.0), ket(_BETA_MINUS, np.pi))
    if setting == 1:
        return Basis1Q(ket(_BETA_MINUS, 0.0), ket(_BETA_PLUS, np.pi))
    raise ValueError("setting must be 0 or 1")


def ghz_apart_bases(role: int, setting: int) -> Basis1Q:
    """Basis of the first (``role=1``) or second (``role=2``) GHZ particle."""
    if setting not in (0, 1):
        raise ValueError("setting must be 0 or 1")
    if role == 1:
        phase = np.exp(-1j * (np.pi / 4 if setting == 0 else 3 * np.pi / 4))
        return Basis1Q(
            np.array([1, phase]) / np.sqrt(2), np.array([1, -phase]) / np.sqrt(2)
        )
    if role == 2:
        sign = 1 if setting == 0 else -1
        c = np.sqrt(0.5 + sign / (2 * np.sqrt(3)))
        s = np.sqrt(1 - c * c)
        return Basis1Q(np.array([c, s]), np.array([s, -c]))
    raise ValueError("role must be 1 or 2")


def guesser_basis(resource: str, z: int) -> Basis1Q:
    """B's basis for setting ``z`` on a resource.

    Singlet outcomes are anti-correlated, so B reads the Bell settings with
    outcome labels exchanged.
    """
    if resource == "bell":
        return (HADAMARD, COMPUTATIONAL)[z].swapped()
    if resource == "ghz":
        return (CIRCULAR, HADAMARD, COMPUTATIONAL)[z]
    raise ValueError(f"unknown resource {resource!r}")


# Layouts.

@dataclass(frozen=True)
class Node:
    """A primitive instance; each slot is an input index or a child node id."""

    resource: str
    slots: tuple[int | str, ...]

    def __post_init__(self):
        want = PRIMITIVES[self.resource].n_bits
        if len(self.slots) != want:
            raise ValueError(f"{self.resource} node needs {want} slots")


@dataclass(frozen=True)
class ConcatenationLayout:
    name: str
    n: int
    nodes: dict[str, Node]
    root: str
    order: tuple[str, ...] = field(init=False)
    parent: dict[str, tuple[str, int]] = field(init=False)
    home: dict[int, tuple[str, int]] = field(init=False)

    def __post_init__(self):
        parent, home = {}, {}
        for nid, node in self.nodes.items():
            for j, s in enumerate(node.slots):
                if isinstance(s, str):
                    if s not in self.nodes or s in parent:
                        raise ValueError(f"bad or reused child {s!r} in {nid}")
                    parent[s] = (nid, j)
                else:
                    if s in home or not 0 <= s < self.n:
                        raise ValueError(f"input {s} missing or placed twice")
                    home[s] = (nid, j)
        if len(home) != self.n:
            raise ValueError("every input must sit in exactly one slot")
        if self.root in parent or set(self.nodes) != set(parent) | {self.root}:
            raise ValueError("nodes must form a single tree under the root")
        order: list[str] = []

        def visit(nid: str, depth: int):
            if depth > len(self.nodes):
                raise ValueError("layout contains a cycle")
            for s in self.nodes[nid].slots:
                if isinstance(s, str):
                    visit(s, depth + 1)
            order.append(nid)

        visit(self.root, 0)
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "home", home)

    def node_level(self, nid: str) -> int:
        level = 1
        while nid in self.parent:
            nid = self.parent[nid][0]
            level += 1
        return level

    def level_of(self, y: int) -> int:
        return self.node_level(self.home[y][0])

    def levels(self) -> list[list[int]]:
        """``levels()[l-1]`` lists the inputs at level ``l``."""
        out: list[list[int]] = [[] for _ in range(max(map(self.level_of, range(self.n))))]
        for y in range(self.n):
            out[self.level_of(y) - 1].append(y)
        return out

    def path(self, y: int) -> list[tuple[str, int]]:
        """(node, slot) pairs from the node holding ``x_y`` up to the root."""
        nid, slot = self.home[y]
        out = [(nid, slot)]
        while nid in self.parent:
            nid, slot = self.parent[nid]
            out.append((nid, slot))
        return out

    def guesser_settings(self, y: int) -> dict[str, int]:
        """Settings ``z`` B uses per node to guess ``x_y``; other nodes stay idle."""
        return dict(self.path(y))

    def task(self) -> RacTask:
        topology = "chain" if self.name.endswith("chain") else self.name
        return RacTask.standard(self.n, 2, topology=topology)

    def describe(self) -> dict:
        return {
            "layout": self.name,
            "root": self.root,
            "nodes": {
                nid: {"resource": node.resource, "slots": [
                    s if isinstance(s, str) else f"x{s}" for s in node.slots
                ]}
                for nid, node in sorted(self.nodes.items())
            },
        }


def bell_chain(n: int) -> ConcatenationLayout:
    """Singlet ``i`` links ``A_{i-1}`` to B; ``A_0`` holds ``x_0 x_1``."""
    if n < 2:
        raise UnsupportedScenarioError("the Bell chain needs n >= 2")
    nodes = {}
    prev: int | str = 0
    for i in range(1, n):
        nid = f"bell{i}"
        nodes[nid] = Node("bell", (prev, i))
        prev = nid
    return ConcatenationLayout("bell-chain", n, nodes, f"bell{n - 1}")


def ghz_chain(n: int) -> ConcatenationLayout:
    """GHZ ``i`` is shared by ``A_{2i-2}``, ``A_{2i-1}`` and B (odd ``n``)."""
    if n < 3 or n % 2 == 0:
        raise UnsupportedScenarioError("the GHZ chain is defined for odd n >= 3")
    nodes = {}
    prev: int | str = 0
    for i in range(1, (n - 1) // 2 + 1):
        nid = f"ghz{i}"
        nodes[nid] = Node("ghz", (prev, 2 * i - 1, 2 * i))
        prev = nid
    return ConcatenationLayout("ghz-chain", n, nodes, f"ghz{(n - 1) // 2}")


def grid9() -> ConcatenationLayout:
    """Nine inputs, all at level 2 of a four-GHZ tree rooted at ``ghz2``.

    ``ghz4`` feeds the root's first slot with ``x_3`` in its second slot, so
    guessing ``x_3`` uses ``z_4 = 1`` and ``z_2 = 0``.
    """
    nodes = {
        "ghz1": Node("ghz", (6, 7, 8)),
        "ghz2": Node("ghz", ("ghz4", "ghz3", "ghz1")),
        "ghz3": Node("ghz", (0, 1, 2)),
        "ghz4": Node("ghz", (4, 3, 5)),
    }
    return ConcatenationLayout("grid9", 9, nodes, "ghz2")


# Branch enumeration.

@dataclass(frozen=True)
class NodeBranch:
    settings: tuple[int, ...]
    outcomes: tuple[int, ...]
    message: int
    guess_outcome: int | None
    probability: float


@lru_cache(maxsize=None)
def node_branches(resource: str, slot_bits: tuple[int, ...], z: int | None) -> tuple[NodeBranch, ...]:
    """All outcome branches of one primitive for fixed slot bits and B setting.

    Measurements run in protocol order on a fresh resource; B's particle is
    measured last (it commutes with the A-part measurements).
    """
    out: list[NodeBranch] = []
    if resource == "bell":
        v0, v1 = slot_bits
        s = v0 ^ v1
        for br in measure(make_bell(), 0, bell_party_basis(s)):
            if br.is_null:
                continue
            msg = v0 ^ br.outcome
            _finish(out, br.state, "bell", z, (s,), (br.outcome,), msg, br.probability)
    elif resource == "ghz":
        v0, v1, v2 = slot_bits
        s1 = v0 ^ v1
        for b1 in measure(make_ghz(), 0, ghz_apart_bases(1, s1)):
            if b1.is_null:
                continue
            m = v0 ^ b1.outcome
            s2 = m ^ v2
            for b2 in measure(b1.state, 0, ghz_apart_bases(2, s2)):
                if b2.is_null:
                    continue
                _finish(out, b2.state, "ghz", z, (s1, s2), (b1.outcome, b2.outcome),
                        m ^ b2.outcome, b1.probability * b2.probability)
    else:
        raise ValueError(f"unknown resource {resource!r}")
    return tuple(out)


def _finish(out, state: StateVector, resource, z, settings, outcomes, msg, p):
    if z is None:
        out.append(NodeBranch(settings, outcomes, msg, None, p))
        return
    for bc in measure(state, 0, guesser_basis(resource, z)):
        if not bc.is_null:
            out.append(NodeBranch(settings, outcomes, msg, bc.outcome, p * bc.probability))


@dataclass(frozen=True)
class BranchTrace:
    """One full run of the protocol for fixed ``(x, y)``."""

    settings: dict[str, tuple[int, ...]]
    outcomes: dict[str, tuple[int, ...]]
    guess_outcomes: dict[str, int]
    messages: dict[str, int]
    guess: int
    probability: float


def _as_int(x, n: int) -> int:
    if isinstance(x, BitString):
        if x.length != n:
            raise ValueError(f"expected {n} input bits, got {x.length}")
        return x.value
    if not 0 <= x < 2**n:
        raise ValueError(f"input {x} does not fit in {n} bits")
    return int(x)


def _check_y(layout: ConcatenationLayout, y: int):
    if not 0 <= y < layout.n:
        raise ValueError(f"y must be in 0..{layout.n - 1}, got {y}")


def enumerate_branches(layout: ConcatenationLayout, x, y: int) -> Iterator[BranchTrace]:
    """Every measurement-outcome branch for ``(x, y)``, nodes in protocol order."""
    _check_y(layout, y)
    xbits = bits_of(_as_int(x, layout.n), layout.n)
    zmap = layout.guesser_settings(y)
    order = layout.order

    def rec(i, msgs, settings, outcomes, cs, p):
        if i == len(order):
            guess = msgs[layout.root]
            for c in cs.values():
                guess ^= c
            yield BranchTrace(dict(settings), dict(outcomes), dict(cs), dict(msgs), guess, p)
            return
        nid = order[i]
        node = layout.nodes[nid]
        bits = tuple(msgs[s] if isinstance(s, str) else xbits[s] for s in node.slots)
        for br in node_branches(node.resource, bits, zmap.get(nid)):
            msgs[nid] = br.message
            settings[nid] = br.settings
            outcomes[nid] = br.outcomes
            if br.guess_outcome is not None:
                cs[nid] = br.guess_outcome
            yield from rec(i + 1, msgs, settings, outcomes, cs, p * br.probability)
            cs.pop(nid, None)

    yield from rec(0, {}, {}, {}, {}, 1.0)


def _subtree(layout, nid, xbits, zmap) -> dict[tuple[int, int], float]:
    """Distribution of (message out of ``nid``, parity of B outcomes in the subtree)."""
    node = layout.nodes[nid]
    fixed = []
    for s in node.slots:
        if isinstance(s, str):
            fixed.append(list(_subtree(layout, s, xbits, zmap).items()))
        else:
            fixed.append([((xbits[s], 0), 1.0)])
    dist: dict[tuple[int, int], float] = {}
    z = zmap.get(nid)
    for combo in itertools.product(*fixed):
        bits = tuple(mp[0] for mp, _ in combo)
        parity = 0
        p_in = 1.0
        for (_, par), p in combo:
            parity ^= par
            p_in *= p
        for br in node_branches(node.resource, bits, z):
            key = (br.message, parity ^ (br.guess_outcome or 0))
            dist[key] = dist.get(key, 0.0) + p_in * br.probability
    return dist


def pair_success(layout: ConcatenationLayout, x, y: int) -> float:
    """Exact probability that B's guess equals ``x_y``.

    Branches are merged on (message, parity) as they are generated; this is
    the same sum as :func:`enumerate_branches` without materializing traces.
    """
    _check_y(layout, y)
    xbits = bits_of(_as_int(x, layout.n), layout.n)
    dist = _subtree(layout, layout.root, xbits, layout.guesser_settings(y))
    return math.fsum(p for (m, par), p in dist.items() if m ^ par == xbits[y])


def per_pair_success(layout: ConcatenationLayout, workers: int = 1) -> np.ndarray:
    """``(2**n, n)`` array of exact per-pair success probabilities."""
    n = layout.n

    def column(y):
        return [pair_success(layout, x, y) for x in range(2**n)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, range(n)))
    else:
        cols = [column(y) for y in range(n)]
    return np.array(cols).T


def sample_success(layout: ConcatenationLayout, x, y: int, shots: int, seed: int) -> float:
    """Monte Carlo estimate of :func:`pair_success`; a sanity cross-check only."""
    _check_y(layout, y)
    rng = np.random.default_rng(seed)
    xbits = bits_of(_as_int(x, layout.n), layout.n)
    zmap = layout.guesser_settings(y)
    wins = 0
    for _ in range(shots):
        msgs, parity = {}, 0
        for nid in layout.order:
            node = layout.nodes[nid]
            bits = tuple(msgs[s] if isinstance(s, str) else xbits[s] for s in node.slots)
            branches = node_branches(node.resource, bits, zmap.get(nid))
            probs = np.array([b.probability for b in branches])
            br = branches[rng.choice(len(branches), p=probs / probs.sum())]
            msgs[nid] = br.message
            parity ^= br.guess_outcome or 0
        wins += (msgs[layout.root] ^ parity) == xbits[y]
    return wins / shots


def simulate_bell_chain(n: int, x, y: int) -> float:
    return pair_success(bell_chain(n), x, y)


def simulate_ghz_chain(n: int, x, y: int) -> float:
    return pair_success(ghz_chain(n), x, y)


def simulate_grid9(x, y: int) -> float:
    return pair_success(grid9(), x, y)


def closed_form_bell(n: int) -> float:
    if n < 2:
        raise UnsupportedScenarioError("n must be >= 2")
    return 0.5 + (1 + math.sqrt(2) - 2 ** (-(n - 2) / 2)) / (2 * n)


def closed_form_ghz(n: int, extrapolate: bool = False) -> float:
    """GHZ-chain average; ``extrapolate`` evaluates the formula at even ``n`` too."""
    if n < 3 or (n % 2 == 0 and not extrapolate):
        raise UnsupportedScenarioError("the GHZ closed form is defined for odd n >= 3")
    return 0.5 + (1 + math.sqrt(3) - 3 ** (-(n - 3) / 4)) / (2 * n)


def level_prediction(layout: ConcatenationLayout) -> np.ndarray:
    """Per-pair success predicted from input levels alone."""
    eps = {nid: PRIMITIVES[node.resource].epsilon for nid, node in layout.nodes.items()}
    row = []
    for y in range(layout.n):
        bias = 1.0
        for nid, _ in layout.path(y):
            bias *= eps[nid]
        row.append((1 + bias) / 2)
    return np.tile(row, (2**layout.n, 1))


def derive_epsilon(resource: str) -> float:
    """Bias of a primitive re-derived by simulating it alone; checked against the nominal value."""
    layout = bell_chain(2) if resource == "bell" else ghz_chain(3)
    table = per_pair_success(layout)
    if np.ptp(table) > EPS_TOL:
        raise VerificationError(f"{resource} primitive success depends on the inputs")
    eps = 2 * float(table.mean()) - 1
    if abs(eps - PRIMITIVES[resource].epsilon) > EPS_TOL:
        raise VerificationError(
            f"{resource} primitive bias {eps!r} != {PRIMITIVES[resource].epsilon!r}"
        )
    return eps


_METHOD = {"bell-chain": "earac-bell", "ghz-chain": "earac-ghz", "grid9": "earac-grid9"}


def layout_report(layout: ConcatenationLayout, closed_form: float | None,
                  per_pair: bool = True, workers: int = 1) -> SuccessReport:
    table = per_pair_success(layout, workers=workers)
    value = math.fsum(table.ravel()) / table.size
    meta = {"simulated": value, "wiring": layout.describe()}
    if closed_form is not None:
        meta["closed_form"] = closed_form
        meta["abs_diff"] = abs(value - closed_form)
    return SuccessReport(
        layout.task(), _METHOD[layout.name], value,
        per_pair=table if per_pair else None, metadata=meta,
    )


def bell_report(n: int, **kw) -> SuccessReport:
    return layout_report(bell_chain(n), closed_form_bell(n), **kw)


def ghz_report(n: int, **kw) -> SuccessReport:
    return layout_report(ghz_chain(n), closed_form_ghz(n), **kw)


def grid9_report(**kw) -> SuccessReport:
    return layout_report(grid9(), concat_success(GHZ_PRIMITIVE.epsilon, 2), **kw)

