"""
Dense qubit primitives.

Conventions used everywhere in qpurify:
- single-qubit basis ordering |1> = (1, 0), |0> = (0, 1)
- qubit 1 is the most significant tensor factor
- global phases are never compared; states are compared through projectors
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from qpurify.errors import CapacityError, DomainError

MAX_QUBITS = 12

NORM_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
PSD_TOLERANCE = 1e-9

# below this a measurement branch is treated as unreachable
PROBABILITY_FLOOR = 1e-14

TWO_PI = 2.0 * math.pi


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _check_capacity(num_qubits: int, max_qubits: int) -> None:
    if num_qubits > max_qubits:
        raise CapacityError(f"{num_qubits} qubits exceed the configured maximum of {max_qubits}")


@dataclass(frozen=True)
class PureQubit:
    """Point (theta, phi) on the Bloch sphere."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not math.isfinite(theta) or not 0.0 <= theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not math.isfinite(phi) or not 0.0 <= phi < TWO_PI:
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def bloch(self) -> np.ndarray:
        s = math.sin(self.theta)
        return np.array([s * math.cos(self.phi), s * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_bloch(cls, vec) -> PureQubit:
        v = np.asarray(vec, dtype=float)
        norm = float(np.linalg.norm(v))
        if v.shape != (3,) or not norm > 0.0:
            raise DomainError(f"cannot build a qubit from Bloch vector {vec!r}")
        x, y, z = v / norm
        theta = math.acos(min(1.0, max(-1.0, z)))
        phi = math.atan2(y, x) % TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        return cls(theta, phi)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise DomainError(f"state dimension must be a power of two, got {dim}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"state is not normalized (squared norm {norm})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def inner(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityOperator:
    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = int(self.num_qubits)
        if m < 0:
            raise DomainError("qubit count must be non-negative")
        mat = np.asarray(self.matrix, dtype=np.complex128)
        dim = 1 << m
        if mat.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix for {m} qubits, got {mat.shape}")
        object.__setattr__(self, "num_qubits", m)
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_state(cls, state: StateVector) -> DensityOperator:
        return cls(state.num_qubits, state.projector())

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> DensityOperator:
        dim = 1 << num_qubits
        return cls(num_qubits, np.eye(dim) / dim)

    @classmethod
    def empty(cls) -> DensityOperator:
        return cls(0, np.ones((1, 1)))

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, state: StateVector) -> float:
        v = state.amplitudes
        return float(np.vdot(v, self.matrix @ v).real)

    def check(self) -> None:
        """Raise DomainError unless the matrix is Hermitian, unit-trace and PSD."""
        mat = self.matrix
        herm = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        if herm > HERMITIAN_TOLERANCE:
            raise DomainError(f"operator is not Hermitian (deviation {herm:.3g})")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOLERANCE:
            raise DomainError(f"operator trace is {tr:.12g}, expected 1")
        lowest = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min())
        if lowest < -PSD_TOLERANCE:
            raise DomainError(f"operator has negative eigenvalue {lowest:.3g}")


@dataclass(frozen=True)
class ProjectionResult:
    probability: float
    state: DensityOperator | None

    @property
    def valid(self) -> bool:
        return self.state is not None


@dataclass(frozen=True)
class DickeBasis:
    m: int
    axis: PureQubit
    vectors: tuple[StateVector, ...]

    @property
    def matrix(self) -> np.ndarray:
        """Rows are the Dicke vectors k = 0..m."""
        return np.stack([v.amplitudes for v in self.vectors])


def bloch_to_state(q: PureQubit) -> StateVector:
    half = q.theta / 2.0
    return StateVector(np.array([math.cos(half), math.sin(half) * np.exp(1j * q.phi)]))


def orthogonal_state(q: PureQubit) -> StateVector:
    half = q.theta / 2.0
    return StateVector(np.array([-math.sin(half) * np.exp(-1j * q.phi), math.cos(half)]))


def measurement_vector(direction: PureQubit, outcome: int) -> StateVector:
    if outcome == 1:
        return bloch_to_state(direction)
    if outcome == 0:
        return orthogonal_state(direction)
    raise DomainError(f"measurement outcome must be 0 or 1, got {outcome!r}")


def local_frame(axis: PureQubit) -> np.ndarray:
    """Unitary mapping |1> -> |1>_axis and |0> -> |0>_axis."""
    return np.column_stack([bloch_to_state(axis).amplitudes, orthogonal_state(axis).amplitudes])


def local_power(u: np.ndarray, m: int, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    _check_capacity(m, max_qubits)
    return reduce(np.kron, [u] * m, np.ones((1, 1), dtype=np.complex128))


def tensor(a: DensityOperator, b: DensityOperator, max_qubits: int = MAX_QUBITS) -> DensityOperator:
    total = a.num_qubits + b.num_qubits
    _check_capacity(total, max_qubits)
    return DensityOperator(total, np.kron(a.matrix, b.matrix))


def partial_trace_to_first(rho: DensityOperator) -> DensityOperator:
    if rho.num_qubits < 1:
        raise DomainError("cannot reduce a zero-qubit operator")
    rest = rho.dim // 2
    block = rho.matrix.reshape(2, rest, 2, rest)
    return DensityOperator(1, np.trace(block, axis1=1, axis2=3))


def apply_single_qubit_projector(
    rho: DensityOperator,
    qubit_index: int,
    direction: PureQubit,
    outcome: int,
) -> ProjectionResult:
    """
    Project qubit `qubit_index` (1-based) onto the outcome state of `direction`.

    Returns the Born probability and the normalized operator on the remaining
    qubits; the state is None when the branch probability is below PROBABILITY_FLOOR.
    """
    m = rho.num_qubits
    if not 1 <= qubit_index <= m:
        raise DomainError(f"qubit index {qubit_index} outside 1..{m}")

    v = measurement_vector(direction, outcome).amplitudes
    left = 1 << (qubit_index - 1)
    right = 1 << (m - qubit_index)

    block = rho.matrix.reshape(left, 2, right, left, 2, right)
    reduced = np.einsum("a,lamkbn,b->lmkn", v.conj(), block, v)
    reduced = reduced.reshape(left * right, left * right)

    probability = float(np.trace(reduced).real)
    probability = min(1.0, max(0.0, probability))
    if probability < PROBABILITY_FLOOR:
        return ProjectionResult(probability, None)

    reduced = reduced / probability
    reduced = (reduced + reduced.conj().T) / 2
    return ProjectionResult(probability, DensityOperator(m - 1, reduced))


@lru_cache(maxsize=None)
def _computational_dicke(m: int) -> np.ndarray:
    # bit set in an index = that qubit sits in |0> (index 1 of the single-qubit basis)
    dim = 1 << m
    counts = np.array([bin(i).count("1") for i in range(dim)])
    rows = np.zeros((m + 1, dim))
    for k in range(m + 1):
        mask = counts == k
        rows[k, mask] = 1.0 / math.sqrt(mask.sum())
    rows.setflags(write=False)
    return rows


def _apply_local(rows: np.ndarray, u: np.ndarray, m: int) -> np.ndarray:
    out = rows.astype(np.complex128).reshape((rows.shape[0],) + (2,) * m)
    for j in range(m):
        out = np.moveaxis(np.tensordot(u, out, axes=([1], [j + 1])), 0, j + 1)
    return out.reshape(rows.shape[0], 1 << m)


def dicke_basis(m: int, axis: PureQubit, max_qubits: int = MAX_QUBITS) -> DickeBasis:
    if m < 0:
        raise DomainError("Dicke basis needs m >= 0")
    _check_capacity(m, max_qubits)
    rows = _apply_local(_computational_dicke(m), local_frame(axis), m)
    return DickeBasis(m=m, axis=axis, vectors=tuple(StateVector(r) for r in rows))


def overlap_fidelity(a: PureQubit, b: PureQubit) -> float:
    value = (1.0 + float(np.dot(a.bloch, b.bloch))) / 2.0
    return min(1.0, max(0.0, value))
