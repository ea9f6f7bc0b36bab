"""Persisting episode traces, batch summaries and the reproduction metadata."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .. import __version__
from .config import ExperimentConfig, dump_config
from .episode import EpisodeMetrics

STATE_COLUMNS = ("px", "py", "pz", "vx", "vy", "vz", "roll", "pitch", "yaw", "wx", "wy", "wz")
COMMAND_COLUMNS = ("cmd_vx", "cmd_vy", "cmd_vz", "cmd_yaw_rate")
WRENCH_COLUMNS = ("dist_fx", "dist_fy", "dist_fz", "dist_mx", "dist_my", "dist_mz")
EPISODE_COLUMNS = ("t",) + STATE_COLUMNS + COMMAND_COLUMNS + ("theta1", "stage_cost") + WRENCH_COLUMNS
TIMING_COLUMNS = ("t", "solve_ms")
SUMMARY_COLUMNS = ("variant", "episodes", "success_rate", "mean_cost", "mean_solve_ms")


class ResultsError(OSError):
    """Writing an artifact failed; the message names the offending path."""


def _fmt(v) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(v))


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise ResultsError(f"cannot write {path}: {exc}") from exc


def episode_rows(m: EpisodeMetrics):
    tr = m.trace
    for k in range(m.steps):
        vals = [tr.t[k], *tr.states[k], *tr.commands[k], tr.frequency[k], tr.stage_cost[k], *tr.wrench[k]]
        yield [_fmt(v) for v in vals]


def episode_stem(variant: str, index: int) -> str:
    return f"episode_{variant}_{index:03d}"


def write_episode(m: EpisodeMetrics, out_dir, variant: str, index: int) -> Path:
    """Deterministic trace CSV plus a separate wall-clock timing CSV."""
    out = Path(out_dir)
    stem = episode_stem(variant, index)
    path = out / f"{stem}.csv"
    _write_csv(path, EPISODE_COLUMNS, episode_rows(m))
    timing = ([_fmt(t), _fmt(ms)] for t, ms in zip(m.trace.t, m.solve_ms))
    _write_csv(out / f"{stem}_timing.csv", TIMING_COLUMNS, timing)
    return path


def emit_results(summaries, episodes: dict, out_dir, cfg: ExperimentConfig | None = None,
                 meta: dict | None = None) -> dict:
    """Write every artifact of a run into ``out_dir``.

    ``summaries`` is a list of VariantSummary, ``episodes`` maps variant name
    to its EpisodeMetrics list. Returns the written paths by kind.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ResultsError(f"cannot create {out}: {exc}") from exc

    written = {"episodes": [], "summary": out / "summary.csv", "jsonl": out / "episodes.jsonl"}
    for variant, mlist in episodes.items():
        for i, m in enumerate(mlist):
            written["episodes"].append(write_episode(m, out, variant, i))

    rows = [[s.variant, s.episodes, _fmt(s.success_rate), _fmt(s.mean_cost), _fmt(s.mean_solve_ms)]
            for s in summaries]
    _write_csv(written["summary"], SUMMARY_COLUMNS, rows)

    try:
        with open(written["jsonl"], "w") as fh:
            for variant, mlist in episodes.items():
                for i, m in enumerate(mlist):
                    rec = {"variant": variant, "index": i, **m.summary()}
                    fh.write(json.dumps(rec, default=_json_default) + "\n")
    except OSError as exc:
        raise ResultsError(f"cannot write {written['jsonl']}: {exc}") from exc

    if cfg is not None:
        path = out / "metadata.yaml"
        info = {"version": __version__, **(meta or {})}
        try:
            path.write_text(dump_config(cfg, info))
        except OSError as exc:
            raise ResultsError(f"cannot write {path}: {exc}") from exc
        written["metadata"] = path
    return written


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
