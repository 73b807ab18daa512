"""
Sequential single-qubit projective measurements.

The ensembles are the only objects that know the true axis; estimator code only
ever sees (direction, outcome) pairs.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator
from dataclasses import dataclass, replace

import numpy as np

from qpurify.channel import ChannelSpec
from qpurify.errors import CapacityError, DomainError, EnsembleExhaustedError, UnreachableBranchError
from qpurify.quantum_core import DensityOperator, PureQubit, apply_single_qubit_projector

MAX_TREE_QUBITS = 4


@dataclass(frozen=True)
class Measurement:
    direction: PureQubit
    outcome: int


@dataclass(frozen=True)
class MeasurementRecord:
    """Ordered (direction, outcome) pairs; ``capacity`` caps how many qubits can be measured."""

    capacity: int | None = None
    entries: tuple[Measurement, ...] = ()

    def append(self, direction: PureQubit, outcome: int) -> MeasurementRecord:
        if self.capacity is not None and len(self.entries) >= self.capacity:
            raise EnsembleExhaustedError(f"record already holds {self.capacity} measurements")
        if outcome not in (0, 1):
            raise DomainError(f"measurement outcome must be 0 or 1, got {outcome!r}")
        return replace(self, entries=self.entries + (Measurement(direction, int(outcome)),))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Measurement]:
        return iter(self.entries)


@dataclass
class SeparableEnsemble:
    axis: PureQubit
    channel: ChannelSpec
    remaining: int

    def __post_init__(self):
        if self.remaining < 0:
            raise DomainError("remaining qubit count must be non-negative")


@dataclass
class EntangledEnsemble:
    current: DensityOperator
    measured_count: int = 0

    @classmethod
    def from_state(cls, rho: DensityOperator) -> EntangledEnsemble:
        return cls(current=rho, measured_count=0)

    @property
    def initial_qubits(self) -> int:
        return self.current.num_qubits + self.measured_count

    @property
    def remaining(self) -> int:
        return self.current.num_qubits


def separable_outcome_probability(ens: SeparableEnsemble, direction: PureQubit) -> float:
    if ens.remaining < 1:
        raise EnsembleExhaustedError("no unmeasured qubits left in the ensemble")
    contrast = ens.channel.c1 - ens.channel.c0
    value = (1.0 + contrast * float(np.dot(direction.bloch, ens.axis.bloch))) / 2.0
    return min(1.0, max(0.0, value))


def measure_separable(ens: SeparableEnsemble, direction: PureQubit, rng: np.random.Generator) -> int:
    p1 = separable_outcome_probability(ens, direction)
    outcome = 1 if rng.random() < p1 else 0
    ens.remaining -= 1
    return outcome


def entangled_outcome_probability(ens: EntangledEnsemble, direction: PureQubit) -> float:
    if ens.current.num_qubits < 1:
        raise EnsembleExhaustedError("no unmeasured qubits left in the ensemble")
    return apply_single_qubit_projector(ens.current, 1, direction, 1).probability


def measure_entangled(ens: EntangledEnsemble, direction: PureQubit, rng: np.random.Generator) -> int:
    """Measure the lowest-index unmeasured qubit and collapse the rest."""
    p1 = entangled_outcome_probability(ens, direction)
    outcome = 1 if rng.random() < p1 else 0

    result = apply_single_qubit_projector(ens.current, 1, direction, outcome)
    if not result.valid:
        raise UnreachableBranchError(
            f"outcome {outcome} has probability {result.probability:.3g}; branch is unreachable"
        )

    ens.current = result.state
    ens.measured_count += 1
    return outcome


def exhaustive_outcome_tree(
    state: DensityOperator,
    directions: list[PureQubit],
) -> list[tuple[tuple[int, ...], float]]:
    """
    Enumerate every outcome path of measuring qubits 1..m along `directions`.

    Paths through unreachable branches are reported with probability 0.
    """
    m = state.num_qubits
    if m > MAX_TREE_QUBITS:
        raise CapacityError(f"outcome trees are limited to {MAX_TREE_QUBITS} qubits, got {m}")
    if len(directions) != m:
        raise DomainError(f"need exactly {m} directions, got {len(directions)}")

    paths: list[tuple[tuple[int, ...], float]] = []
    for path in itertools.product((1, 0), repeat=m):
        rho = state
        probability = 1.0
        for direction, outcome in zip(directions, path):
            result = apply_single_qubit_projector(rho, 1, direction, outcome)
            probability *= result.probability
            if not result.valid:
                probability = 0.0
                break
            rho = result.state
        paths.append((path, probability))
    return paths
