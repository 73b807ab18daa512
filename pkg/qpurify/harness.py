"""
Monte Carlo experiments: purified vs unpurified estimation of random qubits.

Each trial draws its truth and measurement randomness from streams keyed by
(master_seed, trial_index), so compared pipelines see the same truths and results
do not depend on worker count or scheduling.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from qpurify.channel import ChannelSpec, purification_distribution, purified_state
from qpurify.errors import ConfigError, DomainError
from qpurify.estimator import (
    estimation_fidelity,
    final_estimate,
    select_direction_adaptive,
    select_direction_random,
    uniform_posterior,
    update,
)
from qpurify.measurement import EntangledEnsemble, SeparableEnsemble, measure_entangled, measure_separable
from qpurify.quantum_core import MAX_QUBITS, PureQubit
from qpurify.rng import MEASUREMENT_STREAM, TRUTH_STREAM, trial_generator
from qpurify.sphere import DEFAULT_GRID_SIZE, SphereGrid, sphere_grid

STRATEGIES = ("adaptive", "random")
WEIGHTINGS = ("exact", "sampled")
COMPARISONS = ("purify", "strategy", "none")

DEFAULT_SEED = 20020101
MAX_CHUNK = 250

ProgressCallback = Callable[[int], None]


@dataclass(frozen=True)
class ScenarioConfig:
    n_qubits: int = 6
    c1: float = 0.75
    trials: int = 40000
    strategy: str = "adaptive"
    purify: bool = True
    grid_size: int = DEFAULT_GRID_SIZE
    master_seed: int = DEFAULT_SEED
    weighting: str = "exact"
    max_qubits: int = MAX_QUBITS

    def __post_init__(self):
        if self.n_qubits < 2 or self.n_qubits % 2:
            raise ConfigError(f"n must be an even number >= 2, got {self.n_qubits}")
        if self.n_qubits > self.max_qubits:
            raise ConfigError(f"n = {self.n_qubits} exceeds the maximum of {self.max_qubits} qubits")
        if not (isinstance(self.c1, (int, float)) and 0.5 <= self.c1 <= 1.0):
            raise ConfigError(f"c1 must lie in [0.5, 1], got {self.c1}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGIES)}, got {self.strategy!r}")
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"weighting must be one of {', '.join(WEIGHTINGS)}, got {self.weighting!r}")
        if self.grid_size < 2 or self.grid_size % 2:
            raise ConfigError(f"grid size must be an even number >= 2, got {self.grid_size}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.master_seed}")

    @property
    def channel(self) -> ChannelSpec:
        return ChannelSpec(self.c1)


@dataclass(frozen=True)
class TrialTrace:
    truth: PureQubit
    m_weights: dict[int, float]
    step_fidelities: np.ndarray

    @property
    def final_fidelity(self) -> float:
        return float(self.step_fidelities[-1])


@dataclass(frozen=True)
class SweepRow:
    c1: float
    mean_fidelity: float
    std_error: float
    strategy: str
    purify: bool
    trials: int
    n_qubits: int
    seed: int


@dataclass(frozen=True)
class SweepSummary:
    rows: tuple[SweepRow, ...] = ()


@dataclass(frozen=True)
class ScenarioResult:
    row: SweepRow
    step_curve: np.ndarray
    step_std_error: np.ndarray


@dataclass(frozen=True)
class FidelityTrace:
    purified: ScenarioResult
    unpurified: ScenarioResult


@dataclass(frozen=True)
class GainReport:
    per_c1: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    @property
    def mean_gain(self) -> float:
        return float(np.mean([g for _, g in self.per_c1])) if self.per_c1 else 0.0

    @property
    def max_gain(self) -> float:
        return max((g for _, g in self.per_c1), default=0.0)


def sample_true_state(rng: np.random.Generator) -> PureQubit:
    """Uniform on the Bloch sphere: cos(theta) and phi uniform."""
    return select_direction_random(rng)


def _estimate_fidelities(
    cfg: ScenarioConfig,
    truth: PureQubit,
    rng: np.random.Generator,
    grid: SphereGrid,
    measure: Callable[[PureQubit], int],
    count: int,
) -> list[float]:
    post = uniform_posterior(grid, capacity=count)
    fidelities: list[float] = []
    for _ in range(count):
        if cfg.strategy == "adaptive":
            direction = select_direction_adaptive(post)
        else:
            direction = select_direction_random(rng)
        post = update(post, direction, measure(direction))
        fidelities.append(estimation_fidelity(final_estimate(post), truth))
    return fidelities


def _carry_forward(fidelities: list[float], steps: int, prior_fidelity: float) -> np.ndarray:
    out = np.full(steps, fidelities[-1] if fidelities else prior_fidelity)
    out[: len(fidelities)] = fidelities
    return out


def _prior_fidelity(grid: SphereGrid, truth: PureQubit) -> float:
    return estimation_fidelity(final_estimate(uniform_posterior(grid)), truth)


def run_trial_unpurified(
    cfg: ScenarioConfig,
    truth: PureQubit,
    rng: np.random.Generator,
    grid: SphereGrid | None = None,
) -> TrialTrace:
    grid = grid or sphere_grid(cfg.grid_size)
    ens = SeparableEnsemble(axis=truth, channel=cfg.channel, remaining=cfg.n_qubits)
    fidelities = _estimate_fidelities(
        cfg, truth, rng, grid, lambda d: measure_separable(ens, d, rng), cfg.n_qubits
    )
    return TrialTrace(
        truth=truth,
        m_weights={cfg.n_qubits: 1.0},
        step_fidelities=np.asarray(fidelities),
    )


def _purified_branch(
    cfg: ScenarioConfig,
    m: int,
    truth: PureQubit,
    rng: np.random.Generator,
    grid: SphereGrid,
) -> np.ndarray:
    if m == 0:
        return _carry_forward([], cfg.n_qubits, _prior_fidelity(grid, truth))

    state = purified_state(m, cfg.channel, truth, max_qubits=cfg.max_qubits)
    ens = EntangledEnsemble.from_state(state.dense)
    fidelities = _estimate_fidelities(cfg, truth, rng, grid, lambda d: measure_entangled(ens, d, rng), m)
    return _carry_forward(fidelities, cfg.n_qubits, _prior_fidelity(grid, truth))


def run_trial_purified(
    cfg: ScenarioConfig,
    truth: PureQubit,
    rng: np.random.Generator,
    grid: SphereGrid | None = None,
) -> TrialTrace:
    """
    Exact weighting runs every even M and averages the branch traces with p_M;
    sampled weighting draws a single M from p_M.
    """
    grid = grid or sphere_grid(cfg.grid_size)
    dist = purification_distribution(cfg.n_qubits, cfg.channel, max_qubits=cfg.max_qubits)
    total = dist.total()
    weights = {m: p / total for m, p in sorted(dist.probs.items())}

    if cfg.weighting == "sampled":
        ms = list(weights)
        m = int(rng.choice(ms, p=np.array([weights[k] for k in ms])))
        return TrialTrace(
            truth=truth,
            m_weights={m: 1.0},
            step_fidelities=_purified_branch(cfg, m, truth, rng, grid),
        )

    combined = np.zeros(cfg.n_qubits)
    for m, weight in weights.items():
        if weight == 0.0:
            continue
        combined += weight * _purified_branch(cfg, m, truth, rng, grid)

    return TrialTrace(truth=truth, m_weights=weights, step_fidelities=combined)


def run_trial(cfg: ScenarioConfig, trial_index: int) -> TrialTrace:
    truth = sample_true_state(trial_generator(cfg.master_seed, trial_index, TRUTH_STREAM))
    rng = trial_generator(cfg.master_seed, trial_index, MEASUREMENT_STREAM)
    grid = sphere_grid(cfg.grid_size)
    if cfg.purify:
        return run_trial_purified(cfg, truth, rng, grid)
    return run_trial_unpurified(cfg, truth, rng, grid)


def _run_chunk(cfg: ScenarioConfig, indices: range) -> np.ndarray:
    return np.stack([run_trial(cfg, i).step_fidelities for i in indices])


def _chunks(trials: int, workers: int) -> list[range]:
    size = max(1, min(MAX_CHUNK, math.ceil(trials / (workers * 8))))
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def _std_error(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    if n < 2:
        return np.zeros(values.shape[1:]) if values.ndim > 1 else np.float64(0.0)
    return values.std(axis=0, ddof=1) / math.sqrt(n)


def run_scenario(
    cfg: ScenarioConfig,
    workers: int | None = 1,
    on_progress: ProgressCallback | None = None,
) -> ScenarioResult:
    workers = max(1, workers or 1)
    chunks = _chunks(cfg.trials, workers)
    job = partial(_run_chunk, cfg)

    blocks: list[np.ndarray] = []
    if workers == 1 or len(chunks) == 1:
        for chunk in chunks:
            blocks.append(job(chunk))
            if on_progress:
                on_progress(len(chunk))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order: the reduction is ordered by trial index
            for chunk, block in zip(chunks, pool.map(job, chunks)):
                blocks.append(block)
                if on_progress:
                    on_progress(len(chunk))

    steps = np.concatenate(blocks)
    finals = steps[:, -1]
    row = SweepRow(
        c1=cfg.c1,
        mean_fidelity=float(finals.mean()),
        std_error=float(_std_error(finals)),
        strategy=cfg.strategy,
        purify=cfg.purify,
        trials=cfg.trials,
        n_qubits=cfg.n_qubits,
        seed=cfg.master_seed,
    )
    return ScenarioResult(row=row, step_curve=steps.mean(axis=0), step_std_error=_std_error(steps))


def c1_grid(c1_min: float, c1_max: float, steps: int) -> list[float]:
    if steps < 1:
        raise ConfigError(f"c1 steps must be >= 1, got {steps}")
    if not 0.5 <= c1_min <= c1_max <= 1.0:
        raise ConfigError(f"need 0.5 <= c1-min <= c1-max <= 1, got {c1_min}..{c1_max}")
    if steps == 1:
        return [round(c1_min, 10)]
    return [round(float(x), 10) for x in np.linspace(c1_min, c1_max, steps)]


def _variants(cfg: ScenarioConfig, compare: str) -> list[ScenarioConfig]:
    if compare == "purify":
        return [replace(cfg, purify=True), replace(cfg, purify=False)]
    if compare == "strategy":
        return [replace(cfg, strategy="adaptive"), replace(cfg, strategy="random")]
    if compare == "none":
        return [cfg]
    raise ConfigError(f"compare must be one of {', '.join(COMPARISONS)}, got {compare!r}")


def sweep_c1(
    cfg: ScenarioConfig,
    c1_values: Sequence[float],
    compare: str = "purify",
    workers: int | None = 1,
    on_progress: ProgressCallback | None = None,
) -> SweepSummary:
    for c1 in c1_values:
        if not 0.5 <= c1 <= 1.0:
            raise DomainError(f"c1 values must lie in [0.5, 1], got {c1}")

    rows: list[SweepRow] = []
    for c1 in c1_values:
        for variant in _variants(replace(cfg, c1=float(c1)), compare):
            rows.append(run_scenario(variant, workers=workers, on_progress=on_progress).row)
    return SweepSummary(rows=tuple(rows))


def fidelity_trace(
    cfg: ScenarioConfig,
    workers: int | None = 1,
    on_progress: ProgressCallback | None = None,
) -> FidelityTrace:
    purified = run_scenario(replace(cfg, purify=True), workers=workers, on_progress=on_progress)
    unpurified = run_scenario(replace(cfg, purify=False), workers=workers, on_progress=on_progress)
    return FidelityTrace(purified=purified, unpurified=unpurified)


def relative_gains(summary: SweepSummary) -> GainReport:
    """Relative fidelity gain of purified over unpurified rows at equal c1 and strategy."""
    unpurified = {(r.c1, r.strategy): r for r in summary.rows if not r.purify}
    gains = []
    for row in summary.rows:
        base = unpurified.get((row.c1, row.strategy))
        if row.purify and base is not None and base.mean_fidelity > 0:
            gains.append((row.c1, (row.mean_fidelity - base.mean_fidelity) / base.mean_fidelity))
    return GainReport(per_c1=tuple(gains))
