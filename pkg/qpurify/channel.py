"""
Depolarizing channel and the probabilistic purification step.

Every ratio that would divide by (c1 - c0) or (c1^(M+1) - c0^(M+1)) is evaluated
through the finite geometric sum sum_k c1^(M-k) c0^k so c1 = 1/2 is handled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import comb

from qpurify.errors import CapacityError, DomainError
from qpurify.quantum_core import (
    MAX_QUBITS,
    DensityOperator,
    PureQubit,
    bloch_to_state,
    dicke_basis,
    local_frame,
    orthogonal_state,
    tensor,
)

MIN_QUADRATURE_POINTS = 64


@dataclass(frozen=True)
class ChannelSpec:
    c1: float

    def __post_init__(self):
        c1 = float(self.c1)
        if not math.isfinite(c1) or not 0.5 <= c1 <= 1.0:
            raise DomainError(f"c1 must lie in [1/2, 1], got {self.c1!r}")
        object.__setattr__(self, "c1", c1)

    @property
    def c0(self) -> float:
        return 1.0 - self.c1


@dataclass(frozen=True)
class PurificationDistribution:
    n_qubits: int
    channel: ChannelSpec
    probs: dict[int, float] = field(default_factory=dict)

    def total(self) -> float:
        return math.fsum(self.probs.values())


@dataclass(frozen=True)
class PurifiedState:
    m: int
    axis: PureQubit
    dicke_weights: np.ndarray
    dense: DensityOperator

    @property
    def is_empty(self) -> bool:
        return self.m == 0


def _powers(channel: ChannelSpec, m: int) -> np.ndarray:
    """c1^(m-k) c0^k for k = 0..m."""
    k = np.arange(m + 1)
    return channel.c1 ** (m - k) * channel.c0**k


def geometric_sum(channel: ChannelSpec, m: int) -> float:
    return float(math.fsum(_powers(channel, m)))


def _binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return int(comb(n, k, exact=True))


def depolarized_qubit(axis: PureQubit, channel: ChannelSpec) -> DensityOperator:
    one = bloch_to_state(axis).projector()
    zero = orthogonal_state(axis).projector()
    return DensityOperator(1, channel.c1 * one + channel.c0 * zero)


def depolarized_product(
    axis: PureQubit,
    channel: ChannelSpec,
    n: int,
    max_qubits: int = MAX_QUBITS,
) -> DensityOperator:
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceed the configured maximum of {max_qubits}")
    single = depolarized_qubit(axis, channel)
    rho = DensityOperator.empty()
    for _ in range(n):
        rho = tensor(rho, single, max_qubits=max_qubits)
    return rho


def purification_distribution(
    n: int,
    channel: ChannelSpec,
    max_qubits: int = MAX_QUBITS,
) -> PurificationDistribution:
    if n < 2 or n % 2:
        raise DomainError(f"the purification protocol needs an even N >= 2, got {n}")
    if n > max_qubits:
        raise CapacityError(f"N = {n} exceeds the configured maximum of {max_qubits}")

    pair_weight = channel.c0 * channel.c1
    probs: dict[int, float] = {}
    for m in range(0, n + 1, 2):
        pairs = (n - m) // 2
        multiplicity = _binomial(n, pairs) - _binomial(n, pairs - 1)
        probs[m] = multiplicity * pair_weight**pairs * geometric_sum(channel, m)

    return PurificationDistribution(n_qubits=n, channel=channel, probs=probs)


def purified_weights(m: int, channel: ChannelSpec) -> np.ndarray:
    if m < 0:
        raise DomainError(f"M must be non-negative, got {m}")
    powers = _powers(channel, m)
    return powers / math.fsum(powers)


def purified_state(
    m: int,
    channel: ChannelSpec,
    axis: PureQubit,
    max_qubits: int = MAX_QUBITS,
) -> PurifiedState:
    """
    Purified M-qubit state, diagonal in the Dicke basis about `axis`.

    The sphere integral of the protocol's output state averages away all
    cross terms between Dicke sectors, leaving weights proportional to
    c1^(M-k) c0^k.
    """
    weights = purified_weights(m, channel)
    if m == 0:
        return PurifiedState(m=0, axis=axis, dicke_weights=weights, dense=DensityOperator.empty())

    vectors = dicke_basis(m, axis, max_qubits=max_qubits).matrix
    dense = (vectors.T * weights) @ vectors.conj()
    return PurifiedState(m=m, axis=axis, dicke_weights=weights, dense=DensityOperator(m, dense))


def purified_state_oracle(
    m: int,
    channel: ChannelSpec,
    axis: PureQubit,
    quadrature_points: int = MIN_QUADRATURE_POINTS,
    max_qubits: int = MAX_QUBITS,
) -> DensityOperator:
    """Integrate the purified state over the sphere numerically (test oracle)."""
    if m < 1:
        raise DomainError(f"the quadrature oracle needs M >= 1, got {m}")
    if quadrature_points < MIN_QUADRATURE_POINTS:
        raise DomainError(f"need at least {MIN_QUADRATURE_POINTS} quadrature points")
    if m > max_qubits:
        raise CapacityError(f"M = {m} exceeds the configured maximum of {max_qubits}")

    c1, c0 = channel.c1, channel.c0
    x, wx = leggauss(quadrature_points)
    n_phi = 4 * m + 4
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi

    half = np.arccos(x) / 2.0
    cos_h = np.repeat(np.cos(half), n_phi)
    sin_h = np.repeat(np.sin(half), n_phi)
    phases = np.exp(1j * np.tile(phi, quadrature_points))

    n_theta = c1 * cos_h**2 + c0 * sin_h**2
    psi_frame = np.stack(
        [
            math.sqrt(c1) * cos_h / np.sqrt(n_theta),
            math.sqrt(c0) * sin_h * phases / np.sqrt(n_theta),
        ],
        axis=1,
    )
    psi = psi_frame @ local_frame(axis).T

    states = psi
    for _ in range(m - 1):
        states = np.einsum("ni,nj->nij", states, psi).reshape(states.shape[0], -1)

    # d(Omega)/4pi = d(cos theta) d(phi) / 4pi
    node_weight = np.repeat(wx, n_phi) * (2.0 * math.pi / n_phi) / (4.0 * math.pi)
    prefactor = (m + 1) / geometric_sum(channel, m)
    weight = prefactor * node_weight * n_theta**m

    dense = (states.T * weight) @ states.conj()
    return DensityOperator(m, dense)


def single_qubit_fidelity(m: int, channel: ChannelSpec) -> float:
    if m < 0:
        raise DomainError(f"M must be non-negative, got {m}")
    if m == 0:
        return 0.5
    powers = _powers(channel, m)
    k = np.arange(m + 1)
    return float(math.fsum(powers * (m - k)) / (m * math.fsum(powers)))


def mean_purified_fidelity(n: int, channel: ChannelSpec, max_qubits: int = MAX_QUBITS) -> float:
    dist = purification_distribution(n, channel, max_qubits=max_qubits)
    return math.fsum(p * single_qubit_fidelity(m, channel) for m, p in dist.probs.items())
