"""One receding-horizon iteration: shift, sample, roll out, sort, update."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from ..cost import CostConfig
from ..gait import GaitParams, GaitPhase
from ..grf_spline import SplineParams, project_friction_cone, shift_knots
from ..srbd_model import ControlInput, FootState, RobotModel
from .rollout import _basis, plan_horizon, rollout_batch
from .sampler import OptimizerConfig, SamplerState, draw_samples, update_mppi, update_naive

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostics:
    best_cost: float
    mean_cost: float
    solve_time: float  # seconds, wall clock
    num_infinite: int
    all_infinite: bool


@dataclass(frozen=True)
class ControlStepResult:
    control: ControlInput
    frequency_index: int
    sampler: SamplerState
    diagnostics: Diagnostics
    plans: tuple


def first_input(mean: np.ndarray, contact: np.ndarray, model: RobotModel) -> ControlInput:
    """Input at t=0 of a knot set: first knot, swing legs zeroed, stance legs projected."""
    grf = np.zeros((4, 3))
    grf[contact] = project_friction_cone(mean[0][contact], model)
    return ControlInput(grf, contact)


def warm_start(sampler: SamplerState, cfg: OptimizerConfig) -> SamplerState:
    if not cfg.warm_start_shift or cfg.horizon == 0:
        return sampler
    shifted = shift_knots(SplineParams(sampler.mean, cfg.knot_times()), cfg.dt)
    return replace(sampler, mean=shifted.knots)


def reseed_idle_knots(mean: np.ndarray, flags: np.ndarray, basis: np.ndarray, nominal_fz: float) -> np.ndarray:
    """Reset knots that cannot influence any stance force of the horizon.

    Such knots receive no cost signal, so the mean update would let them
    drift; they restart from a vertical nominal support force instead.
    """
    out = mean.copy()
    support = np.abs(basis) > 0.0            # (N, P)
    used = support.T.astype(int) @ flags.astype(int)  # (P, 4) stance steps touched by each knot
    idle = used == 0
    out[idle] = (0.0, 0.0, nominal_fz)
    return out


def control_step(x0, phase: GaitPhase, feet: FootState, cmd, sampler: SamplerState,
                 cfg: OptimizerConfig, model: RobotModel, gait: GaitParams,
                 cost_cfg: CostConfig) -> ControlStepResult:
    t_start = time.perf_counter()
    sampler = warm_start(sampler, cfg)
    plans = plan_horizon(x0, phase, feet, cmd, model, gait, cfg.horizon, cfg.dt)
    num_options = gait.num_options if cfg.gait_adaptation else 1
    current = phase.frequency_index if cfg.gait_adaptation else 0

    samples = draw_samples(sampler, cfg, num_options, current)
    batch = rollout_batch(samples, x0, plans, model, cost_cfg, cfg).sorted()

    finite = np.isfinite(batch.costs)
    n_inf = int(np.count_nonzero(~finite))
    if n_inf == len(batch):
        log.warning("all %d rollouts diverged; reusing previous mean", n_inf)
        new_sampler = replace(sampler, step_index=sampler.step_index + 1)
        chosen = current
        best = mean_cost = np.inf
    else:
        if cfg.variant == "naive":
            new_sampler = update_naive(batch, sampler)
        else:
            new_sampler = update_mppi(batch, sampler, cfg)
        # argmin cost == argmax MPPI weight
        chosen = int(batch.samples.theta1[0])
        if cfg.reseed_idle_knots and cfg.horizon > 0:
            nominal = model.weight / (4.0 * gait.duty_factor)
            mean = reseed_idle_knots(new_sampler.mean, plans[chosen].schedule.flags,
                                     _basis(cfg.num_knots, cfg.horizon, cfg.dt), nominal)
            new_sampler = replace(new_sampler, mean=mean)
        best = float(batch.costs[0])
        mean_cost = float(batch.costs[finite].mean())

    contact = plans[chosen].schedule.flags[0] if cfg.horizon > 0 else feet.in_stance
    control = first_input(new_sampler.mean, np.asarray(contact, dtype=bool), model)
    elapsed = time.perf_counter() - t_start
    diag = Diagnostics(best, mean_cost, max(elapsed, 1e-9), n_inf, n_inf == len(batch))
    return ControlStepResult(control, chosen, new_sampler, diag, plans)
