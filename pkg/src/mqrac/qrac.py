"""Multiparty QRACs from polyhedral one-qubit encodings.

A two-party ``(n, n)`` QRAC measures the received qubit along a fixed Bloch
direction ``d_y`` for question ``y``; for string ``x'`` the best state points
along ``sum_y (-1)**x'_y d_y``.  In the ``(n, k)`` version ``A_0`` prepares one
of ``2**k`` states and relay ``i`` rotates the qubit when its bit is 1.  If
the relay orbit of the initial states reaches every encoding state, B can keep
the two-party measurements, and the task becomes ``f(x, y) = x'_y`` where
``x'`` is the string whose encoding state B receives on input ``x``.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .classical import DEFAULT_CAP, enumerate_optimal
from .core import RacTask, SuccessReport, bit_matrix, bits_of
from .quantum import BLOCH_TOL, Basis1Q, basis_along, rotation_matrix, su2_rotation

GOLDEN = (1 + math.sqrt(5)) / 2
MIN_SEPARATION = 0.6
# Classical optimum targeted by the (6,3) initial-state search.
PENTAKIS_CLASSICAL_TARGET = Fraction(5, 8)

# Reference x -> x' rows of the (4,2) task.
REFERENCE_REMAP_42 = {
    "0000": "0011", "0010": "0101", "0001": "0000", "0011": "0110",
    "0100": "0111", "0110": "0100", "0101": "0010", "0111": "1110",
    "1100": "1100", "1110": "1010", "1101": "1111", "1111": "1001",
    "1000": "1000", "1010": "1011", "1001": "1101", "1011": "0001",
}


class DegenerateMeasurementError(ValueError):
    """The optimal measurement direction for some question is undefined."""


class AssignmentSearchError(RuntimeError):
    """No initial states reproduce the two-party encoding."""

    def __init__(self, message: str, closest=()):
        self.closest = list(closest)
        super().__init__(message)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _cyclic(a: float, b: float) -> list[np.ndarray]:
    """Cyclic permutations of ``(0, ±a, ±b)``."""
    out = []
    for sa, sb in itertools.product((1, -1), repeat=2):
        v = (0.0, sa * a, sb * b)
        out += [np.array(v), np.array((v[2], v[0], v[1])), np.array((v[1], v[2], v[0]))]
    return out


def octahedron_vertices() -> np.ndarray:
    return np.vstack([np.eye(3), -np.eye(3)])


def cube_vertices() -> np.ndarray:
    return np.array(list(itertools.product((1, -1), repeat=3)), dtype=float) / math.sqrt(3)


def icosahedron_vertices() -> np.ndarray:
    return np.array([_unit(v) for v in _cyclic(1.0, GOLDEN)])


def dodecahedron_vertices() -> np.ndarray:
    """Dual of :func:`icosahedron_vertices`: its vertices sit over the icosahedron's faces."""
    extra = np.array(_cyclic(GOLDEN, 1 / GOLDEN)) / math.sqrt(3)
    return np.vstack([cube_vertices(), extra])


def tetrakis_vertices() -> np.ndarray:
    """14 vertices: the octahedron's 6 then the cube's 8."""
    return np.vstack([octahedron_vertices(), cube_vertices()])


def pentakis_vertices() -> np.ndarray:
    """32 vertices: dodecahedron (indices 0..19) then icosahedron (20..31)."""
    return np.vstack([dodecahedron_vertices(), icosahedron_vertices()])


def min_chord(vertices: np.ndarray) -> float:
    diff = vertices[:, None, :] - vertices[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    return float(dist[np.triu_indices(len(vertices), 1)].min())


def match_vertex(v, vertices: np.ndarray, tol: float = BLOCH_TOL) -> int | None:
    d = np.linalg.norm(vertices - np.asarray(v)[None, :], axis=1)
    i = int(np.argmin(d))
    return i if d[i] < tol else None


def antipodal_axes(vertices: np.ndarray) -> np.ndarray:
    """First vertex of each antipodal pair, in list order."""
    axes: list[np.ndarray] = []
    for v in vertices:
        if not any(np.allclose(v, -a, atol=BLOCH_TOL) for a in axes):
            axes.append(v)
    return np.array(axes)


@dataclass(frozen=True)
class RelayUnitaries:
    """Rotations ``(axis, degrees)`` applied by relays ``A_1, A_2, ...`` in that order."""

    rotations: tuple[tuple[str, float], ...]

    def __len__(self) -> int:
        return len(self.rotations)

    def matrix(self, bits) -> np.ndarray:
        """Bloch-sphere map for relay bits ``bits`` (first relay acts first)."""
        m = np.eye(3)
        for b, (axis, deg) in zip(bits, self.rotations):
            if b:
                m = rotation_matrix(axis, math.radians(deg)) @ m
        return m

    def su2(self, bits) -> np.ndarray:
        u = np.eye(2, dtype=complex)
        for b, (axis, deg) in zip(bits, self.rotations):
            if b:
                u = su2_rotation(axis, math.radians(deg)) @ u
        return u

    def composites(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        return [(bits, self.matrix(bits)) for bits in itertools.product((0, 1), repeat=len(self))]

    def perturbed(self, index: int, degrees: float) -> RelayUnitaries:
        rots = list(self.rotations)
        axis, deg = rots[index]
        rots[index] = (axis, deg + degrees)
        return RelayUnitaries(tuple(rots))

    def to_json(self) -> list[dict]:
        return [{"axis": a, "degrees": d} for a, d in self.rotations]


TETRAKIS_UNITARIES = RelayUnitaries((("y", 90.0), ("z", 90.0)))
PENTAKIS_UNITARIES = RelayUnitaries((("x", 180.0), ("y", 180.0), ("z", 180.0)))


def distinct_rotations(matrices, tol: float = BLOCH_TOL) -> int:
    found: list[np.ndarray] = []
    for m in matrices:
        if not any(np.allclose(m, f, atol=tol) for f in found):
            found.append(m)
    return len(found)


def generated_group_order(generators, limit: int = 1000, tol: float = BLOCH_TOL) -> int:
    """Order of the matrix group generated by ``generators`` (closure by products)."""
    elems = [np.eye(len(generators[0]), dtype=complex)]
    frontier = list(elems)
    while frontier:
        new = []
        for a in frontier:
            for g in generators:
                p = g @ a
                if not any(np.allclose(p, e, atol=tol) for e in elems):
                    elems.append(p)
                    new.append(p)
                    if len(elems) > limit:
                        raise RuntimeError("group is larger than the limit")
        frontier = new
    return len(elems)


@dataclass(frozen=True)
class RemapTable:
    """Bijection ``x -> x'`` on ``n``-bit strings; ``mapping[x] = x'``."""

    n: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        if len(self.mapping) != 2**self.n:
            raise ValueError("remap must list every string")
        if sorted(self.mapping) != list(range(2**self.n)):
            raise ValueError("remap is not a bijection")

    @classmethod
    def from_strings(cls, rows: dict[str, str]) -> RemapTable:
        n = len(next(iter(rows)))
        mapping = [0] * 2**n
        for a, b in rows.items():
            mapping[int(a, 2)] = int(b, 2)
        return cls(n, tuple(mapping))

    def __getitem__(self, x: int) -> int:
        return self.mapping[x]

    def as_strings(self) -> dict[str, str]:
        f = f"0{self.n}b"
        return {format(x, f): format(xp, f) for x, xp in enumerate(self.mapping)}

    def to_json(self) -> list[dict]:
        return [{"from": a, "to": b} for a, b in self.as_strings().items()]


@dataclass(frozen=True, eq=False)
class PolyhedralEncoding:
    """Two-party encoding: string ``x'`` -> vertex along ``sum_y (-1)**x'_y d_y``.

    Strings whose sum vanishes are free: any state serves them equally well.
    """

    name: str
    vertices: np.ndarray
    directions: np.ndarray
    assignment: dict[int, int]
    free_strings: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.directions)

    def state(self, xp: int) -> np.ndarray | None:
        i = self.assignment.get(xp)
        return None if i is None else self.vertices[i]

    def strings_at(self, vertex: int) -> list[int]:
        return sorted(xp for xp, v in self.assignment.items() if v == vertex)

    def states(self) -> np.ndarray:
        """``(2**n, 3)`` states indexed by ``x'``; free strings get the zero vector."""
        out = np.zeros((2**self.n, 3))
        for xp, v in self.assignment.items():
            out[xp] = self.vertices[v]
        return out

    def two_party_task(self) -> RacTask:
        return RacTask.standard(self.n, self.n)


def build_encoding(name: str, vertices: np.ndarray, directions: np.ndarray) -> PolyhedralEncoding:
    if min_chord(vertices) < MIN_SEPARATION:
        raise ValueError("polyhedron vertices are too close for nearest-vertex matching")
    directions = np.asarray(directions, dtype=float)
    n = len(directions)
    signs = 1 - 2 * bit_matrix(n).astype(float)
    sums = signs @ directions
    assignment, free = {}, []
    for xp, v in enumerate(sums):
        norm = np.linalg.norm(v)
        if norm < BLOCH_TOL:
            free.append(xp)
            continue
        i = match_vertex(v / norm, vertices)
        if i is None:
            raise ValueError(f"optimal state for {xp:0{n}b} is not a vertex of {name}")
        assignment[xp] = i
    return PolyhedralEncoding(name, vertices, directions, assignment, tuple(free))


def fit_directions(
    vertices: np.ndarray,
    axis_candidates: np.ndarray,
    unitaries: RelayUnitaries,
    k: int,
    reference: RemapTable,
) -> list[np.ndarray]:
    """Labelled measurement directions consistent with a known remap table.

    Returns every choice of ``d_0..d_{n-1}`` from ``axis_candidates`` under
    which the encoding states of ``reference`` are related by the relay
    rotations (constrained rows only), in lexicographic candidate order.
    """
    n = reference.n
    out = []
    for idx in itertools.product(range(len(axis_candidates)), repeat=n):
        d = axis_candidates[list(idx)]
        if np.linalg.matrix_rank(d, tol=1e-6) < 3:
            continue
        try:
            enc = build_encoding("fit", vertices, d)
        except ValueError:
            continue
        ok = True
        for x in range(2**n):
            bits = bits_of(x, n)
            target = enc.state(reference[x])
            if target is None:
                continue
            start = enc.state(reference[(x >> (n - k)) << (n - k)])
            if start is None or not np.allclose(unitaries.matrix(bits[k:]) @ start, target, atol=BLOCH_TOL):
                ok = False
                break
        if ok:
            out.append(d)
    return out


@dataclass(frozen=True, eq=False)
class InitialAssignment:
    initial: tuple[int, ...]
    remap: RemapTable
    free_inputs: tuple[int, ...]
    solutions_seen: int


def _image_table(encoding: PolyhedralEncoding, unitaries: RelayUnitaries) -> np.ndarray:
    """``img[c, v]``: vertex reached from vertex ``v`` under relay pattern ``c``."""
    comps = unitaries.composites()
    img = np.full((len(comps), len(encoding.vertices)), -1)
    for c, (_, m) in enumerate(comps):
        for v, vec in enumerate(encoding.vertices):
            j = match_vertex(m @ vec, encoding.vertices)
            img[c, v] = -1 if j is None else j
    return img


def _remap_from(encoding: PolyhedralEncoding, img: np.ndarray, initial, k: int) -> InitialAssignment:
    n = encoding.n
    reached: dict[int, list[int]] = {}
    for x in range(2**n):
        c = x & ((1 << (n - k)) - 1)
        reached.setdefault(int(img[c, initial[x >> (n - k)]]), []).append(x)
    mapping = [0] * 2**n
    free_inputs = []
    for v, xs in reached.items():
        strings = encoding.strings_at(v)
        for x, xp in zip(xs, strings):
            mapping[x] = xp
        free_inputs += xs[len(strings):]
    free_inputs.sort()
    for x, xp in zip(free_inputs, sorted(encoding.free_strings)):
        mapping[x] = xp
    return InitialAssignment(tuple(int(v) for v in initial), RemapTable(n, tuple(mapping)), tuple(free_inputs), 0)


def iter_initial_assignments(
    encoding: PolyhedralEncoding,
    unitaries: RelayUnitaries,
    k: int,
    pinned: dict[int, int] | None = None,
    diagnostics: list | None = None,
) -> Iterator[InitialAssignment]:
    """Every choice of ``A_0``'s ``2**k`` states whose relay orbits reach all encoding states.

    Each vertex must be reached at least as often as it has strings assigned,
    and the surplus must equal the number of free strings.  ``pinned`` fixes
    the vertex for some prefixes.  Solutions come in depth-first order:
    prefix 0 first, vertices by index.

    Inputs reaching a vertex take its strings in increasing order; surplus
    inputs are free and take the free strings in increasing order.
    """
    pinned = pinned or {}
    img = _image_table(encoding, unitaries)
    need = np.zeros(len(encoding.vertices), dtype=int)
    for v in encoding.assignment.values():
        need[v] += 1
    surplus_total = len(encoding.free_strings)
    prefixes = 2**k
    choices = [
        [pinned[p]] if p in pinned else [v for v in range(len(encoding.vertices)) if (img[:, v] >= 0).all()]
        for p in range(prefixes)
    ]
    hits = np.zeros_like(need)
    chosen: list[int] = []

    def rec(p: int):
        if p == prefixes:
            if np.all(hits >= need):
                yield _remap_from(encoding, img, chosen, k)
            return
        for v in choices[p]:
            orbit = img[:, v]
            np.add.at(hits, orbit, 1)
            if np.maximum(hits - need, 0).sum() <= surplus_total:
                chosen.append(v)
                yield from rec(p + 1)
                chosen.pop()
            elif diagnostics is not None and len(diagnostics) < 5:
                diagnostics.append(chosen + [v])
            np.add.at(hits, orbit, -1)

    yield from rec(0)


def search_initial_assignment(
    encoding: PolyhedralEncoding,
    unitaries: RelayUnitaries,
    k: int,
    pinned: dict[int, int] | None = None,
    accept: Callable[[InitialAssignment], bool] | None = None,
    limit: int | None = None,
) -> InitialAssignment:
    """First assignment from :func:`iter_initial_assignments` passing ``accept``.

    ``limit`` bounds how many valid assignments are examined.  The result
    records that count in ``solutions_seen``.
    """
    closest: list = []
    seen = 0
    for sol in iter_initial_assignments(encoding, unitaries, k, pinned, diagnostics=closest):
        seen += 1
        if accept is None or accept(sol):
            return InitialAssignment(sol.initial, sol.remap, sol.free_inputs, seen)
        if limit is not None and seen >= limit:
            break
    what = "no initial states reproduce the encoding" if seen == 0 else f"none of {seen} valid assignments accepted"
    raise AssignmentSearchError(what, closest=closest)


def count_initial_assignments(encoding, unitaries, k, pinned=None) -> int:
    return sum(1 for _ in iter_initial_assignments(encoding, unitaries, k, pinned))


def run_protocol(initial: np.ndarray, unitaries: RelayUnitaries, x: int, n: int, k: int) -> np.ndarray:
    """Bloch vector B receives on input ``x``."""
    bits = bits_of(x, n)
    return unitaries.matrix(bits[k:]) @ np.asarray(initial)[x >> (n - k)]


def final_states(initial: np.ndarray, unitaries: RelayUnitaries, n: int, k: int) -> np.ndarray:
    return np.array([run_protocol(initial, unitaries, x, n, k) for x in range(2**n)])


def optimal_directions(states: np.ndarray, task: RacTask) -> np.ndarray:
    """Per-question Bloch direction maximizing the average success.

    For question ``y`` the best projective measurement is along
    ``sum_x (-1)**f(x, y) r(x)``, outcome 0 meaning "guess 0".
    """
    signs = 1 - 2 * task.table.astype(float)
    sums = signs.T @ np.asarray(states)
    norms = np.linalg.norm(sums, axis=1)
    bad = np.flatnonzero(norms < BLOCH_TOL)
    if bad.size:
        raise DegenerateMeasurementError(f"no preferred direction for questions {bad.tolist()}")
    return sums / norms[:, None]


def optimal_measurements(states: np.ndarray, task: RacTask) -> list[Basis1Q]:
    return [basis_along(d) for d in optimal_directions(states, task)]


def bloch_success_table(states: np.ndarray, directions: np.ndarray, task: RacTask) -> np.ndarray:
    """``(2**n, n)`` Born probabilities ``(1 + (-1)**f d_y . r(x)) / 2``."""
    signs = 1 - 2 * task.table.astype(float)
    return (1 + signs * (np.asarray(states) @ np.asarray(directions).T)) / 2


def protocol_success(
    initial: np.ndarray, unitaries: RelayUnitaries, directions: np.ndarray, task: RacTask
) -> float:
    states = final_states(initial, unitaries, task.n, task.k)
    return float(bloch_success_table(states, directions, task).mean())


def classical_value(task: RacTask, cap: int = DEFAULT_CAP) -> Fraction:
    return enumerate_optimal(task, cap=cap).score


@dataclass(frozen=True, eq=False)
class QracConstruction:
    name: str
    k: int
    encoding: PolyhedralEncoding
    unitaries: RelayUnitaries
    assignment: InitialAssignment

    @property
    def n(self) -> int:
        return self.encoding.n

    @property
    def remap(self) -> RemapTable:
        return self.assignment.remap

    @property
    def initial_states(self) -> np.ndarray:
        return self.encoding.vertices[list(self.assignment.initial)]

    def task(self) -> RacTask:
        return RacTask.from_remap(self.n, self.k, self.remap.mapping, name=f"{self.name}({self.n},{self.k})")

    def final_states(self) -> np.ndarray:
        return final_states(self.initial_states, self.unitaries, self.n, self.k)

    def per_pair(self) -> np.ndarray:
        return bloch_success_table(self.final_states(), self.encoding.directions, self.task())

    def quantum_value(self) -> float:
        return protocol_success(self.initial_states, self.unitaries, self.encoding.directions, self.task())

    def reoptimized_value(self) -> float:
        """Value when B re-fits its measurements to the remapped task instead of keeping the two-party ones."""
        states, task = self.final_states(), self.task()
        return float(bloch_success_table(states, optimal_directions(states, task), task).mean())

    def two_party_value(self) -> float:
        enc = self.encoding
        return float(bloch_success_table(enc.states(), enc.directions, enc.two_party_task()).mean())

    def to_json(self) -> dict:
        f = f"0{self.k}b"
        return {
            "n": self.n,
            "k": self.k,
            "unitaries": self.unitaries.to_json(),
            "initial": [
                {"string": format(p, f), "vertex": int(v),
                 "bloch": [float(f"{c:.12g}") + 0.0 for c in self.encoding.vertices[v]]}
                for p, v in enumerate(self.assignment.initial)
            ],
            "remap": self.remap.to_json(),
        }


def _tetrakis_axis_candidates() -> np.ndarray:
    return cube_vertices()


@lru_cache(maxsize=None)
def tetrakis_construction() -> QracConstruction:
    """(4,2) construction.

    The labelled measurement tetrahedron is fitted to the published remap
    table; ``A_0``'s four states are the images of its ``x_2 x_3 = 00`` rows.
    """
    reference = RemapTable.from_strings(REFERENCE_REMAP_42)
    vertices = tetrakis_vertices()
    fits = fit_directions(vertices, _tetrakis_axis_candidates(), TETRAKIS_UNITARIES, 2, reference)
    if not fits:
        raise AssignmentSearchError("no measurement tetrahedron matches the reference table")
    encoding = build_encoding("tetrakis-hexahedron", vertices, fits[0])
    pinned = {p: encoding.assignment[reference[p << 2]] for p in range(4)}
    assignment = search_initial_assignment(encoding, TETRAKIS_UNITARIES, 2, pinned=pinned)
    return QracConstruction("tetrakis", 2, encoding, TETRAKIS_UNITARIES, assignment)


@lru_cache(maxsize=None)
def pentakis_construction(max_classical: Fraction = PENTAKIS_CLASSICAL_TARGET) -> QracConstruction:
    """(6,3) construction: icosahedral measurement axes.

    Many initial-state choices cover every vertex twice, and they define
    tasks of different classical difficulty.  The first choice in search order
    whose task has classical optimum at most ``max_classical`` is used.
    """
    vertices = pentakis_vertices()
    axes = antipodal_axes(icosahedron_vertices())
    encoding = build_encoding("pentakis-dodecahedron", vertices, axes)

    def hard_enough(sol: InitialAssignment) -> bool:
        return classical_value(RacTask.from_remap(6, 3, sol.remap.mapping)) <= max_classical

    assignment = search_initial_assignment(encoding, PENTAKIS_UNITARIES, 3, accept=hard_enough, limit=256)
    return QracConstruction("pentakis", 3, encoding, PENTAKIS_UNITARIES, assignment)


def load_pentakis_remap() -> RemapTable:
    """The (6,3) remap shipped with the package (regenerate with ``mqrac qrac pentakis --emit-remap``)."""
    data = json.loads(resources.files("mqrac").joinpath("data/pentakis_63.json").read_text())
    return RemapTable.from_strings({row["from"]: row["to"] for row in data["remap"]})


CONSTRUCTIONS = {"tetrakis": tetrakis_construction, "pentakis": pentakis_construction}


def qrac_report(name: str, cap: int = DEFAULT_CAP) -> SuccessReport:
    con = CONSTRUCTIONS[name]()
    task = con.task()
    quantum = con.quantum_value()
    classical = classical_value(task, cap=cap)
    standard = classical_value(RacTask.standard(con.n, con.n), cap=cap)
    meta = {
        "quantum": quantum,
        "two_party_quantum": con.two_party_value(),
        "reoptimized_quantum": con.reoptimized_value(),
        "classical": classical,
        "standard_classical": standard,
        "gap": quantum - float(classical),
        "standard_gap": quantum - float(standard),
        "free_inputs": [format(x, f"0{con.n}b") for x in con.assignment.free_inputs],
    }
    return SuccessReport(task, "qrac", quantum, per_pair=con.per_pair(), metadata=meta)
