"""Small statevector engine: entangled resources, qubit bases, Born rule, Bloch sphere.

Qubit 0 is the leftmost tensor factor, so in a 3-qubit amplitude vector the
index ``4*q0 + 2*q1 + q2`` holds ``<q0 q1 q2|psi>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
BLOCH_TOL = 1e-9
MAX_QUBITS = 3

SQRT2 = np.sqrt(2.0)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
AXES = {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0]), "z": np.array([0, 0, 1.0])}


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on 0..3 qubits.

    A 0-qubit state is the scalar left over once every qubit has been measured
    and discarded.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        q = int(round(np.log2(amps.size))) if amps.size else -1
        if amps.size != 2**q or not 0 <= q <= MAX_QUBITS:
            raise ValueError(f"need 2**q amplitudes with q <= {MAX_QUBITS}, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def qubit_count(self) -> int:
        return int(np.log2(self.amplitudes.size))

    def tensor(self, other: StateVector) -> StateVector:
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def marginal_probabilities(self, qubit: int, basis: Basis1Q) -> tuple[float, float]:
        return tuple(b.probability for b in measure(self, qubit, basis))


@dataclass(frozen=True, eq=False)
class Basis1Q:
    """Orthonormal single-qubit basis; ``v0`` is the outcome-0 vector."""

    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        v0 = np.asarray(self.v0, dtype=complex)
        v1 = np.asarray(self.v1, dtype=complex)
        for v in (v0, v1):
            if v.shape != (2,) or abs(np.vdot(v, v).real - 1) > NORM_TOL:
                raise ValueError("basis vectors must be normalized 2-vectors")
        if abs(np.vdot(v0, v1)) > NORM_TOL:
            raise ValueError("basis vectors are not orthogonal")
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "v1", v1)

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.v0, self.v1

    @property
    def bloch(self) -> np.ndarray:
        """Bloch direction of the outcome-0 vector."""
        return state_to_bloch(self.v0)

    def swapped(self) -> Basis1Q:
        return Basis1Q(self.v1, self.v0)

    def same_measurement(self, other: Basis1Q, tol: float = BLOCH_TOL) -> bool:
        """True if both bases project onto the same pair of rays (any labels)."""
        return abs(abs(np.dot(self.bloch, other.bloch)) - 1) < tol


@dataclass(frozen=True)
class Branch:
    """One measurement outcome.  ``state`` is None for a zero-probability branch."""

    outcome: int
    probability: float
    state: StateVector | None

    @property
    def is_null(self) -> bool:
        return self.state is None


def make_bell() -> StateVector:
    """Singlet ``(|01> - |10>)/sqrt(2)``."""
    return StateVector(np.array([0, 1, -1, 0], dtype=complex) / SQRT2)


def make_ghz() -> StateVector:
    """``(|000> + |111>)/sqrt(2)``."""
    amps = np.zeros(8, dtype=complex)
    amps[0] = amps[7] = 1 / SQRT2
    return StateVector(amps)


def ket(theta: float, phi: float) -> np.ndarray:
    """``cos(theta)|0> + sin(theta) e^{i phi}|1>``."""
    return np.array([np.cos(theta), np.sin(theta) * np.exp(1j * phi)], dtype=complex)


def basis_from_angles(theta: float, phi: float) -> Basis1Q:
    """Outcome 0 along ``ket(theta, phi)``; outcome 1 is ``sin|0> - cos e^{i phi}|1>``."""
    v1 = np.array([np.sin(theta), -np.cos(theta) * np.exp(1j * phi)], dtype=complex)
    return Basis1Q(ket(theta, phi), v1)


COMPUTATIONAL = basis_from_angles(0.0, 0.0)
HADAMARD = basis_from_angles(np.pi / 4, 0.0)
# |0> + i|1> is the +y eigenvector, taken as outcome 0.
CIRCULAR = basis_from_angles(np.pi / 4, np.pi / 2)


def pauli_basis(axis: str) -> Basis1Q:
    return {"x": HADAMARD, "y": CIRCULAR, "z": COMPUTATIONAL}[axis]


def measure(
    state: StateVector, qubit: int, basis: Basis1Q, discard: bool = True
) -> list[Branch]:
    """Projective measurement of one qubit, returning both outcome branches.

    With ``discard`` the measured qubit is removed from the post-measurement
    state; otherwise it is left in the projected basis vector.
    """
    q = state.qubit_count
    if not 0 <= qubit < q:
        raise IndexError(f"qubit {qubit} out of range for a {q}-qubit state")
    psi = state.amplitudes.reshape([2] * q)
    branches = []
    for outcome, v in enumerate(basis.vectors):
        rest = np.tensordot(v.conj(), psi, axes=([0], [qubit]))
        p = float(np.vdot(rest, rest).real)
        if p <= NORM_TOL**2:
            branches.append(Branch(outcome, 0.0, None))
            continue
        rest = rest / np.sqrt(p)
        if discard:
            post = rest.reshape(-1)
        else:
            post = np.moveaxis(np.multiply.outer(v, rest), 0, qubit).reshape(-1)
        branches.append(Branch(outcome, p, StateVector(post)))
    return branches


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Right-handed (counter-clockwise) rotation of Bloch vectors about ``axis``."""
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    raise ValueError(f"unknown axis {axis!r}")


def su2_rotation(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle sigma/2)``, the qubit unitary behind :func:`rotation_matrix`."""
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * PAULI[axis]


def rotate_bloch(v, axis: str, angle: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1) > BLOCH_TOL:
        raise ValueError("rotate_bloch expects a unit Bloch vector")
    return rotation_matrix(axis, angle) @ v


def bloch_to_state(v) -> StateVector:
    """Pure qubit state with Bloch vector ``v``; the |0> amplitude is real and >= 0."""
    x, y, z = np.asarray(v, dtype=float)
    if abs(np.sqrt(x * x + y * y + z * z) - 1) > BLOCH_TOL:
        raise ValueError("bloch_to_state expects a unit vector")
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return StateVector(ket(theta / 2, phi))


def state_to_bloch(state) -> np.ndarray:
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=complex)
    if amps.shape != (2,):
        raise ValueError("Bloch vectors exist only for single-qubit states")
    rho = np.outer(amps, amps.conj())
    return np.array([np.trace(rho @ PAULI[a]).real for a in "xyz"])


def state_overlap(a: StateVector, b: StateVector) -> float:
    """Fidelity ``|<a|b>|^2`` of two pure states."""
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def basis_along(v) -> Basis1Q:
    """Measurement whose outcome 0 projects onto the Bloch direction ``v``."""
    v = np.asarray(v, dtype=float)
    up = bloch_to_state(v).amplitudes
    down = bloch_to_state(-v).amplitudes
    return Basis1Q(up, down)
