from .controller import ControlStepResult, Diagnostics, control_step, first_input, reseed_idle_knots, warm_start
from .rollout import HorizonPlan, plan_horizon, rollout, rollout_batch
from .sampler import (
    DegenerateWeights,
    OptimizerConfig,
    RolloutBatch,
    RolloutResult,
    Sample,
    SampleBatch,
    SamplerState,
    draw_samples,
    initial_sampler_state,
    mppi_weights,
    update_mppi,
    update_naive,
)

__all__ = [
    "ControlStepResult", "Diagnostics", "control_step", "first_input", "reseed_idle_knots", "warm_start",
    "HorizonPlan", "plan_horizon", "rollout", "rollout_batch",
    "DegenerateWeights", "OptimizerConfig", "RolloutBatch", "RolloutResult", "Sample",
    "SampleBatch", "SamplerState", "draw_samples", "initial_sampler_state", "mppi_weights",
    "update_mppi", "update_naive",
]
