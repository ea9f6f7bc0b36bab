"""Per-sample rollouts over the horizon: sequential reference path and batched kernel."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from ..cost import CostConfig, ReferenceTrajectory, build_reference, gait_regularization, stage_cost
from ..gait import ContactSchedule, GaitParams, GaitPhase, compute_contact_sequence
from ..grf_spline import SplineParams, basis_matrix, materialize_forces
from ..leg_reference import plan_stance_feet
from ..srbd_model import FootState, RobotModel, SingularOrientation, State, step
from . import _kernels
from .sampler import OptimizerConfig, RolloutBatch, RolloutResult, Sample, SampleBatch

DIVERGENCE_BOUND = _kernels.DIVERGENCE_BOUND

# numba falls back to another threading layer by itself; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer requires")


@dataclass(frozen=True)
class HorizonPlan:
    """Everything a rollout needs that depends only on the frequency choice."""

    frequency: float
    schedule: ContactSchedule
    feet: np.ndarray  # (N, 4, 3)
    reference: ReferenceTrajectory


def plan_horizon(x0, phase: GaitPhase, feet: FootState, cmd, model: RobotModel,
                 gait: GaitParams, N: int, dt: float) -> tuple:
    """One HorizonPlan per entry of ``gait.freq_options``."""
    x0 = x0.to_vector() if isinstance(x0, State) else np.asarray(x0, dtype=float)
    cmd = np.asarray(cmd, dtype=float).reshape(4)
    g = float(-model.gravity[2])
    plans = []
    for idx in range(gait.num_options):
        schedule = compute_contact_sequence(idx, phase, gait, N, dt)
        ref = build_reference(x0, cmd, model, schedule, N, dt)
        foot_plan = plan_stance_feet(schedule, feet, ref.states[:N], x0[3:6], cmd[:3], x0[2],
                                     model.hip_offsets, g)
        plans.append(HorizonPlan(gait.frequency(idx), schedule, foot_plan, ref))
    return tuple(plans)


def rollout(sample: Sample, x0, plans, model: RobotModel, cost_cfg: CostConfig,
            cfg: OptimizerConfig) -> RolloutResult:
    """Sequential rollout of one sample, composed from the public model/cost functions."""
    plan = plans[sample.theta1]
    N, dt = cfg.horizon, cfg.dt
    x = x0.to_vector() if isinstance(x0, State) else np.array(x0, dtype=float)
    J = 0.0
    if N > 0:
        spline = SplineParams(sample.theta2, cfg.knot_times())
        forces = materialize_forces(spline, plan.schedule, model, N, dt)
        ref = plan.reference
        try:
            for j in range(N):
                u = (forces[j], plan.schedule.flags[j])
                x = step(x, u, plan.feet[j], model, dt)
                if not np.all(np.abs(x) <= DIVERGENCE_BOUND):
                    return RolloutResult(np.inf, sample)
                # input u_j is charged together with the state it leads to
                J += stage_cost(x, forces[j], ref.states[j + 1], ref.forces[j], cost_cfg)
        except SingularOrientation:
            return RolloutResult(np.inf, sample)
    J += gait_regularization(plan.frequency, cost_cfg)
    return RolloutResult(float(J), sample)


@lru_cache(maxsize=32)
def _basis(num_knots: int, N: int, dt: float) -> np.ndarray:
    knot_times = np.linspace(0.0, N * dt, num_knots)
    return basis_matrix(knot_times, np.arange(N) * dt)


def _stack_plans(plans, N):
    F = len(plans)
    flags = np.zeros((F, N, 4))
    feet = np.zeros((F, N, 4, 3))
    uref = np.zeros((F, N, 12))
    for o, p in enumerate(plans):
        flags[o] = p.schedule.flags[:N]
        feet[o] = p.feet
        uref[o] = p.reference.forces.reshape(N, 12)
    xref = plans[0].reference.states
    return flags, feet, xref, uref


def rollout_batch(samples: SampleBatch, x0, plans, model: RobotModel, cost_cfg: CostConfig,
                  cfg: OptimizerConfig) -> RolloutBatch:
    """Costs of all samples, evaluated in parallel. Order of evaluation never changes results."""
    N, dt = cfg.horizon, cfg.dt
    x0 = x0.to_vector() if isinstance(x0, State) else np.asarray(x0, dtype=float)
    reg = np.array([gait_regularization(p.frequency, cost_cfg) for p in plans])
    K = len(samples)
    if N == 0:
        return RolloutBatch(reg[samples.theta1].astype(float), samples)

    if cfg.workers is not None:
        numba.set_num_threads(max(1, min(cfg.workers, numba.config.NUMBA_NUM_THREADS)))
    flags, feet, xref, uref = _stack_plans(plans, N)
    theta2 = np.ascontiguousarray(samples.theta2.reshape(K, cfg.num_knots, 12))
    costs = _kernels.rollout_costs(
        np.ascontiguousarray(x0, dtype=float), np.ascontiguousarray(samples.theta1, dtype=np.int64), theta2,
        _basis(cfg.num_knots, N, dt), flags, feet, xref, uref,
        cost_cfg.Q, cost_cfg.R, reg,
        float(model.mass), model.inertia, model.inertia_inv, model.gravity,
        float(model.friction_mu), float(model.fz_min), float(model.fz_max), float(dt),
    )
    return RolloutBatch(costs, samples)
