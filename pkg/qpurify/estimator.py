"""
Bayesian estimation of a pure qubit from single-qubit measurement outcomes.

The posterior lives on a discrete SphereGrid in log space. The estimator always
uses the pure-state likelihood (1 +/- m.r)/2, whatever produced the outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import entr, logsumexp

from qpurify.errors import DegeneratePosteriorError
from qpurify.measurement import MeasurementRecord
from qpurify.quantum_core import TWO_PI, PureQubit, overlap_fidelity
from qpurify.sphere import SphereGrid

TIE_TOLERANCE = 1e-12
REFINE_MIN_HALF_WIDTH = 1e-4
REFINE_PATCH = np.linspace(-1.0, 1.0, 5)


@dataclass(frozen=True)
class Posterior:
    grid: SphereGrid
    record: MeasurementRecord
    log_weights: np.ndarray


@dataclass(frozen=True)
class EstimateResult:
    estimate: PureQubit
    posterior_max: float
    fidelity: float | None = None


def uniform_posterior(grid: SphereGrid, capacity: int | None = None) -> Posterior:
    log_weights = np.full(grid.size, -math.log(grid.size))
    log_weights.setflags(write=False)
    return Posterior(grid=grid, record=MeasurementRecord(capacity=capacity), log_weights=log_weights)


def _sign(outcome: int) -> float:
    return 1.0 if outcome == 1 else -1.0


def _likelihoods(points: np.ndarray, direction: PureQubit, outcome: int) -> np.ndarray:
    values = (1.0 + _sign(outcome) * (points @ direction.bloch)) / 2.0
    return np.clip(values, 0.0, 1.0)


def likelihood(candidate: PureQubit, direction: PureQubit, outcome: int) -> float:
    return float(_likelihoods(candidate.bloch[None, :], direction, outcome)[0])


def log_density(record: MeasurementRecord, points: np.ndarray) -> np.ndarray:
    """Unnormalized log posterior (uniform prior) at arbitrary unit vectors."""
    points = np.atleast_2d(points)
    if not record:
        return np.zeros(points.shape[0])
    directions = np.stack([m.direction.bloch for m in record])
    signs = np.array([_sign(m.outcome) for m in record])
    values = np.clip((1.0 + (points @ directions.T) * signs) / 2.0, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return np.log(values).sum(axis=1)


def update(post: Posterior, direction: PureQubit, outcome: int) -> Posterior:
    record = post.record.append(direction, outcome)
    with np.errstate(divide="ignore"):
        log_lik = np.log(_likelihoods(post.grid.points, direction, outcome))

    combined = post.log_weights + log_lik
    norm = logsumexp(combined)
    if not np.isfinite(norm):
        raise DegeneratePosteriorError("every grid point has zero posterior weight")

    log_weights = combined - norm
    log_weights.setflags(write=False)
    return Posterior(
        grid=post.grid,
        record=record,
        log_weights=log_weights,
    )


def posterior_weights(post: Posterior) -> np.ndarray:
    weights = np.exp(post.log_weights - post.log_weights.max())
    return weights / weights.sum()


def posterior_mean_bloch(post: Posterior) -> np.ndarray:
    return posterior_weights(post) @ post.grid.points


def predicted_outcome_probability(post: Posterior, direction: PureQubit, outcome: int = 1) -> float:
    weights = posterior_weights(post)
    value = float(weights @ _likelihoods(post.grid.points, direction, outcome))
    return min(1.0, max(0.0, value))


def binary_entropy(p1):
    """Shannon entropy (nats) of a two-outcome distribution; 0 at p1 = 0 or 1."""
    return entr(p1) + entr(1.0 - p1)


def expected_information_gain(post: Posterior, direction: PureQubit) -> float:
    p1 = predicted_outcome_probability(post, direction)
    return float(binary_entropy(np.float64(p1)))


def information_gain_map(post: Posterior, search_grid: SphereGrid | None = None) -> np.ndarray:
    """Expected information gain S for every direction of `search_grid`."""
    grid = search_grid or post.grid
    mean = posterior_mean_bloch(post)
    p1 = np.clip((1.0 + grid.points @ mean) / 2.0, 0.0, 1.0)
    return binary_entropy(p1)


def select_direction_index(post: Posterior, search_grid: SphereGrid | None = None) -> int:
    # S decreases monotonically in |m.r|, so the most orthogonal direction maximizes it
    grid = search_grid or post.grid
    mean = posterior_mean_bloch(post)
    alignment = np.abs(grid.points @ mean)
    return int(np.flatnonzero(alignment <= alignment.min() + TIE_TOLERANCE)[0])


def select_direction_adaptive(post: Posterior, search_grid: SphereGrid | None = None) -> PureQubit:
    grid = search_grid or post.grid
    return grid.qubit(select_direction_index(post, grid))


def select_direction_random(rng: np.random.Generator) -> PureQubit:
    cos_theta = rng.uniform(-1.0, 1.0)
    phi = TWO_PI * rng.random()
    if phi >= TWO_PI:
        phi = 0.0
    return PureQubit(math.acos(min(1.0, max(-1.0, cos_theta))), phi)


def _tangent_basis(center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0]) if abs(center[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(center, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    return e1, e2


def final_estimate(post: Posterior, min_half_width: float = REFINE_MIN_HALF_WIDTH) -> EstimateResult:
    """
    Posterior maximum: grid argmax, then a shrinking 5x5 patch search on the
    exact record-product density. The incumbent only moves on strict improvement.
    """
    weights = posterior_weights(post)
    index = int(np.argmax(post.log_weights))
    center = post.grid.points[index].copy()

    if post.record:
        value = float(log_density(post.record, center)[0])
        a, b = np.meshgrid(REFINE_PATCH, REFINE_PATCH, indexing="ij")
        a, b = a.reshape(-1, 1), b.reshape(-1, 1)

        half_width = 2.0 * post.grid.spacing
        while half_width >= min_half_width:
            e1, e2 = _tangent_basis(center)
            candidates = center + half_width * (a * e1 + b * e2)
            candidates /= np.linalg.norm(candidates, axis=1, keepdims=True)

            values = log_density(post.record, candidates)
            best = int(np.argmax(values))
            if values[best] > value:
                center, value = candidates[best], float(values[best])
            half_width /= 2.0

    return EstimateResult(estimate=PureQubit.from_bloch(center), posterior_max=float(weights[index]))


def estimation_fidelity(est: EstimateResult, truth: PureQubit) -> float:
    return overlap_fidelity(est.estimate, truth)


def with_fidelity(est: EstimateResult, truth: PureQubit) -> EstimateResult:
    return replace(est, fidelity=estimation_fidelity(est, truth))
