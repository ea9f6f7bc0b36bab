"""Search distribution, sampling and the Naive / MPPI mean updates."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..srbd_model import RobotModel

VARIANTS = ("naive", "mppi")


class DegenerateWeights(ArithmeticError):
    """MPPI normalizer vanished or became non-finite."""


@dataclass(frozen=True)
class OptimizerConfig:
    variant: str = "naive"
    num_samples: int = 10000
    temperature: float = 1.0
    horizon: int = 12
    dt: float = 0.02
    num_knots: int = 4
    std_xy: float = 8.0
    std_z: float = 15.0
    std_scales: tuple = (0.02, 0.1, 0.3, 1.0)  # fixed mixture of Gaussians, per-sample std multiplier
    seed: int = 0
    elite_preservation: bool = True
    gait_adaptation: bool = True
    warm_start_shift: bool = True
    reseed_idle_knots: bool = True
    workers: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.num_samples < 1:
            raise ValueError("need at least one sample")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.horizon < 0 or not self.dt > 0:
            raise ValueError("invalid horizon timing")
        if self.num_knots < 2:
            raise ValueError("need at least two knots")
        if not (self.std_xy > 0 and self.std_z > 0):
            raise ValueError("sampling stds must be positive")
        object.__setattr__(self, "std_scales", tuple(float(c) for c in self.std_scales))
        if not self.std_scales or min(self.std_scales) <= 0:
            raise ValueError("std_scales must be non-empty and positive")

    @property
    def num_elites(self) -> int:
        return 1 if self.variant == "naive" else self.num_samples

    @property
    def horizon_time(self) -> float:
        return self.horizon * self.dt

    def knot_times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon_time, self.num_knots)


@dataclass(frozen=True)
class Sample:
    theta1: int
    theta2: np.ndarray  # (P, 4, 3)


@dataclass(frozen=True)
class SampleBatch:
    theta1: np.ndarray  # (K,) int
    theta2: np.ndarray  # (K, P, 4, 3)

    def __len__(self):
        return self.theta1.shape[0]

    def __getitem__(self, k) -> Sample:
        return Sample(int(self.theta1[k]), self.theta2[k])


@dataclass(frozen=True)
class SamplerState:
    mean: np.ndarray       # (P, 4, 3)
    variances: np.ndarray  # (P, 4, 3), diagonal covariance
    seed: int = 0
    step_index: int = 0

    def __post_init__(self):
        if np.any(np.asarray(self.variances) <= 0):
            raise ValueError("variances must be positive")


def initial_sampler_state(model: RobotModel, cfg: OptimizerConfig) -> SamplerState:
    """Mean at weight/4 per leg, diagonal variances from the configured stds."""
    P = cfg.num_knots
    mean = np.zeros((P, 4, 3))
    mean[..., 2] = model.weight / 4.0
    var = np.empty((P, 4, 3))
    var[..., :2] = cfg.std_xy ** 2
    var[..., 2] = cfg.std_z ** 2
    return SamplerState(mean, var, cfg.seed, 0)


def _rng(state: SamplerState) -> np.random.Generator:
    # counter-based stream keyed by (seed, control step); samples are drawn in index order
    ss = np.random.SeedSequence([int(state.seed) & 0xFFFFFFFFFFFFFFFF, int(state.step_index)])
    return np.random.Generator(np.random.Philox(ss))


def draw_samples(state: SamplerState, cfg: OptimizerConfig, num_options: int = 1, current_index: int = 0) -> SampleBatch:
    K = cfg.num_samples
    rng = _rng(state)
    noise = rng.standard_normal((K,) + state.mean.shape)
    # fixed mixture of Gaussians: sample k uses std scale k mod len(std_scales)
    scales = np.asarray(cfg.std_scales)[np.arange(K) % len(cfg.std_scales)]
    theta2 = state.mean + noise * (scales[:, None, None, None] * np.sqrt(state.variances))
    if cfg.gait_adaptation and num_options > 1:
        theta1 = rng.integers(0, num_options, size=K)
    else:
        theta1 = np.full(K, current_index, dtype=np.int64)
    if cfg.elite_preservation:
        theta2[0] = state.mean
        theta1[0] = current_index
    return SampleBatch(theta1.astype(np.int64), theta2)


@dataclass(frozen=True)
class RolloutResult:
    cost: float
    sample: Sample


@dataclass(frozen=True)
class RolloutBatch:
    costs: np.ndarray
    samples: SampleBatch

    def __len__(self):
        return self.costs.shape[0]

    def __getitem__(self, k) -> RolloutResult:
        return RolloutResult(float(self.costs[k]), self.samples[k])

    def sorted(self) -> "RolloutBatch":
        order = np.argsort(self.costs, kind="stable")
        s = self.samples
        return RolloutBatch(self.costs[order], SampleBatch(s.theta1[order], s.theta2[order]))

    @property
    def is_sorted(self) -> bool:
        c = self.costs
        return bool(np.all(c[:-1] <= c[1:])) if c.size > 1 else True


def update_naive(results: RolloutBatch, state: SamplerState) -> SamplerState:
    """Best sample becomes the new mean; covariance untouched."""
    if not results.is_sorted:
        raise ValueError("results must be sorted by ascending cost")
    return replace(state, mean=np.array(results.samples.theta2[0]), step_index=state.step_index + 1)


def mppi_weights(sorted_costs, temperature: float = 1.0) -> np.ndarray:
    """Normalized exp(-(J_i - J_1)/lambda); infinite costs get zero weight."""
    J = np.asarray(sorted_costs, dtype=float)
    beta = J[0]
    if not np.isfinite(beta):
        raise DegenerateWeights("best cost is not finite")
    w = np.exp(-(J - beta) / temperature)
    assert w[0] == 1.0
    total = w.sum()
    if not (total > 0 and np.isfinite(total)):
        raise DegenerateWeights("weight normalizer is not positive and finite")
    return w / total


def update_mppi(results: RolloutBatch, state: SamplerState, cfg: OptimizerConfig) -> SamplerState:
    """Exponentially weighted mean of all samples; covariance untouched."""
    if not results.is_sorted:
        raise ValueError("results must be sorted by ascending cost")
    w = mppi_weights(results.costs, cfg.temperature)
    mean = np.tensordot(w, results.samples.theta2, axes=1)
    return replace(state, mean=mean, step_index=state.step_index + 1)
