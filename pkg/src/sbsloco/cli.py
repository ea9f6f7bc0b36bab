"""Command line: ``run`` closed-loop experiments and ``bench`` one control step."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .gait import GaitPhase
from .leg_reference import hip_positions
from .sbs_optim import DegenerateWeights, control_step, initial_sampler_state
from .sim_harness import (ConfigError, ResultsError, SimulationError, emit_results, load_config, run_batch,
                          variant_label)
from .sim_harness.episode import initial_state
from .srbd_model import FootState

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

log = logging.getLogger("sbsloco")


def _on_off(text: str) -> bool:
    v = text.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sbsloco", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate closed-loop episodes and write results")
    r.add_argument("--config", required=True, help="YAML file or shipped config name")
    r.add_argument("--variant", choices=("naive", "mppi"))
    r.add_argument("--gait-adapt", type=_on_off, metavar="on|off")
    r.add_argument("--episodes", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--samples", type=int, help="override the number of rollouts K")
    r.add_argument("--jobs", type=int, default=1, help="episodes run in parallel processes")
    r.add_argument("--out", default="results")

    b = sub.add_parser("bench", help="time full control steps")
    b.add_argument("--config", required=True)
    b.add_argument("--rollouts", type=int, required=True, help="samples K per control step")
    b.add_argument("--steps", type=int, default=100, help="timed control steps")
    b.add_argument("--warmup", type=int, default=5)
    b.add_argument("--workers", type=int)
    b.add_argument("--out", help="directory for the timing distribution")
    return p


def cmd_run(args) -> int:
    cfg = load_config(args.config).with_overrides(
        variant=args.variant, gait_adapt=args.gait_adapt, episodes=args.episodes,
        seed=args.seed, num_samples=args.samples)
    label = variant_label(cfg)
    result = run_batch({label: cfg}, jobs=max(1, args.jobs))
    meta = {"variant": label, "seeds": [cfg.scenario.seed + i for i in range(cfg.scenario.episodes)]}
    emit_results(result.summaries, result.episodes, args.out, cfg, meta)
    s = result.summaries[0]
    print(json.dumps({"variant": s.variant, "episodes": s.episodes, "success_rate": s.success_rate,
                      "mean_cost": s.mean_cost, "mean_solve_ms": s.mean_solve_ms, "out": str(args.out)}))
    return EXIT_OK


def bench_control_step(cfg, num_steps: int, warmup: int = 5) -> np.ndarray:
    """Wall time (ms) of repeated control steps from the nominal standing state."""
    opt = cfg.optimizer
    model, gait = cfg.robot, cfg.gait
    x = initial_state(cfg)
    feet = FootState(hip_positions(x[0:3], x[8], model.hip_offsets), np.ones(4, dtype=bool))
    sampler = initial_sampler_state(model, opt)
    cmd = cfg.scenario.command_at(0.0)
    times = []
    for k in range(warmup + num_steps):
        t0 = time.perf_counter()
        res = control_step(x, GaitPhase(0.0, 0), feet, cmd, sampler, opt, model, gait, cfg.cost)
        elapsed = time.perf_counter() - t0
        sampler = res.sampler
        if k >= warmup:
            times.append(elapsed * 1e3)
    return np.array(times)


def cmd_bench(args) -> int:
    cfg = load_config(args.config).with_overrides(num_samples=args.rollouts)
    if args.workers is not None:
        cfg = replace(cfg, optimizer=replace(cfg.optimizer, workers=args.workers))
    ms = bench_control_step(cfg, args.steps, args.warmup)
    q = np.percentile(ms, [0, 25, 50, 75, 100])
    report = {"rollouts": args.rollouts, "horizon": cfg.optimizer.horizon, "steps": int(ms.size),
              "min_ms": q[0], "q1_ms": q[1], "median_ms": q[2], "q3_ms": q[3], "max_ms": q[4]}
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "bench_timing.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["step", "solve_ms"])
                w.writerows([i, repr(float(v))] for i, v in enumerate(ms))
            (out / "bench_summary.json").write_text(json.dumps(report, indent=2) + "\n")
        except OSError as exc:
            raise ResultsError(f"cannot write bench results to {out}: {exc}") from exc
    print(json.dumps(report))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = cmd_run if args.command == "run" else cmd_bench
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, DegenerateWeights, FloatingPointError, ResultsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - any other failure is internal
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
