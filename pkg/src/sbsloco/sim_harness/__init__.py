"""Closed-loop experiments: episodes, batches, result files and the command line."""
from .batch import BatchResult, VariantSummary, run_batch, summarize, variant_label
from .config import (ConfigError, ExperimentConfig, Push, RandomWrench, Scenario, dump_config, from_dict,
                     load_config)
from .episode import (Disturbance, EpisodeMetrics, EpisodeTrace, SimulationError, has_fallen, initial_state,
                      run_episode)
from .results import EPISODE_COLUMNS, ResultsError, emit_results

__all__ = [
    "BatchResult", "ConfigError", "Disturbance", "EPISODE_COLUMNS", "EpisodeMetrics", "EpisodeTrace",
    "ExperimentConfig", "Push", "RandomWrench", "ResultsError", "Scenario", "SimulationError",
    "VariantSummary", "dump_config", "emit_results", "from_dict", "has_fallen", "initial_state",
    "load_config", "run_batch", "run_episode", "summarize", "variant_label",
]
