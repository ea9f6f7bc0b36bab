"""Multi-episode batches with paired seeds and Table-I style summaries."""
from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .episode import EpisodeMetrics, run_episode


@dataclass(frozen=True)
class VariantSummary:
    variant: str
    episodes: int
    success_rate: float   # percent
    mean_cost: float      # per-step mean, fallen episodes counted up to the fall
    mean_solve_ms: float


@dataclass
class BatchResult:
    summaries: list
    episodes: dict = field(default_factory=dict)  # variant -> [EpisodeMetrics]

    def summary(self, variant: str) -> VariantSummary:
        for s in self.summaries:
            if s.variant == variant:
                return s
        raise KeyError(variant)


def variant_label(cfg: ExperimentConfig) -> str:
    return cfg.optimizer.variant + ("+gait" if cfg.optimizer.gait_adaptation else "")


def summarize(variant: str, metrics: list) -> VariantSummary:
    E = len(metrics)
    if E == 0:
        return VariantSummary(variant, 0, float("nan"), float("nan"), float("nan"))
    ok = sum(not m.fell for m in metrics)
    costs = np.concatenate([m.trace.stage_cost for m in metrics])
    solve = np.concatenate([m.solve_ms for m in metrics])
    return VariantSummary(variant, E, 100.0 * ok / E, float(costs.mean()), float(solve.mean()))


def _job(args):
    cfg, seed = args
    return run_episode(cfg, seed)


def run_batch(variants, episodes: int | None = None, base_seed: int | None = None,
              jobs: int = 1) -> BatchResult:
    """Run E episodes per variant; episode i uses seed base + i for every variant.

    ``variants`` is a mapping label -> ExperimentConfig or a sequence of
    configs (labelled by variant name and gait adaptation). E and the base
    seed default to the first config's scenario.
    """
    if not isinstance(variants, dict):
        variants = {variant_label(c): c for c in variants}
    if not variants:
        return BatchResult([], {})
    first = next(iter(variants.values()))
    E = first.scenario.episodes if episodes is None else int(episodes)
    base = first.scenario.seed if base_seed is None else int(base_seed)
    if E < 1:
        raise ValueError("need at least one episode")

    tasks = [(name, cfg, base + i) for name, cfg in variants.items() for i in range(E)]
    if jobs > 1:
        # spawn, not fork: numba's thread pool does not survive a fork
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            results = list(pool.map(_job, [(c, s) for _, c, s in tasks]))
    else:
        results = [run_episode(c, s) for _, c, s in tasks]

    by_variant = {name: [] for name in variants}
    for (name, _, _), m in zip(tasks, results):
        by_variant[name].append(m)
    summaries = [summarize(name, ms) for name, ms in by_variant.items()]
    return BatchResult(summaries, by_variant)


__all__ = ["BatchResult", "EpisodeMetrics", "VariantSummary", "run_batch", "summarize", "variant_label"]
