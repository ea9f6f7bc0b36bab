"""Experiment configuration: YAML tree with robot / gait / spline / cost / optimizer / scenario."""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..cost import CostConfig
from ..gait import GAIT_OFFSETS, GaitParams
from ..sbs_optim import OptimizerConfig
from ..srbd_model import RobotModel

SECTIONS = ("robot", "gait", "spline", "cost", "optimizer", "scenario")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Push:
    start: float
    duration: float
    wrench: tuple  # (fx, fy, fz, mx, my, mz), world frame


@dataclass(frozen=True)
class RandomWrench:
    """Uniform per-axis wrench, redrawn for each window of length ``period``, on for ``active`` s."""

    force_bound: float = 20.0
    moment_bound: float = 20.0
    period: float = 4.0
    active: float = 2.0
    start: float = 1.0


@dataclass(frozen=True)
class Scenario:
    duration: float = 10.0
    commands: tuple = ((0.0, (0.0, 0.0, 0.0, 0.0)),)  # (start time, (vx, vy, vz, yaw_rate))
    pushes: tuple = ()
    random_wrench: RandomWrench | None = None
    episodes: int = 1
    seed: int = 0
    max_tilt: float = 0.8
    min_height: float = 0.12
    mass_scale: float = 1.0
    inertia_scale: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError("scenario duration must be positive")
        if self.episodes < 1:
            raise ConfigError("need at least one episode")
        for p in self.pushes:
            if p.start < 0 or p.start + p.duration > self.duration + 1e-12 or p.duration <= 0:
                raise ConfigError(f"push window {p} outside [0, duration]")
        rw = self.random_wrench
        if rw is not None and not (0 < rw.active <= rw.period and rw.start >= 0):
            raise ConfigError("random wrench needs 0 < active <= period and start >= 0")

    def command_at(self, t: float) -> np.ndarray:
        cmd = self.commands[0][1]
        for start, c in self.commands:
            if t + 1e-12 >= start:
                cmd = c
        return np.asarray(cmd, dtype=float)


@dataclass(frozen=True)
class ExperimentConfig:
    robot: RobotModel = field(default_factory=RobotModel)
    gait: GaitParams = field(default_factory=GaitParams)
    cost: CostConfig = field(default_factory=CostConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    scenario: Scenario = field(default_factory=Scenario)
    gait_type: str = "trot"
    step_height: float = 0.08

    @property
    def dt(self) -> float:
        return self.optimizer.dt

    def with_overrides(self, variant=None, gait_adapt=None, episodes=None, seed=None, num_samples=None):
        opt, scen = self.optimizer, self.scenario
        if variant is not None:
            opt = replace(opt, variant=variant)
        if gait_adapt is not None:
            opt = replace(opt, gait_adaptation=bool(gait_adapt))
        if num_samples is not None:
            opt = replace(opt, num_samples=int(num_samples))
        if seed is not None:
            opt = replace(opt, seed=int(seed))
            scen = replace(scen, seed=int(seed))
        if episodes is not None:
            scen = replace(scen, episodes=int(episodes))
        return replace(self, optimizer=opt, scenario=scen)

    def to_dict(self) -> dict:
        r, g, c, o, s = self.robot, self.gait, self.cost, self.optimizer, self.scenario
        return {
            "robot": {
                "mass": float(r.mass),
                "inertia": np.asarray(r.inertia).tolist(),
                "gravity": np.asarray(r.gravity).tolist(),
                "friction_mu": float(r.friction_mu),
                "fz_min": float(r.fz_min),
                "fz_max": float(r.fz_max),
                "hip_offsets": np.asarray(r.hip_offsets).tolist(),
                "nominal_height": float(r.nominal_height),
            },
            "gait": {
                "type": self.gait_type,
                "duty_factor": float(g.duty_factor),
                "phase_offsets": list(g.phase_offsets),
                "nominal_freq": float(g.nominal_freq),
                "freq_options": list(g.freq_options),
                "step_height": float(self.step_height),
            },
            "spline": {"num_knots": int(o.num_knots)},
            "cost": {
                "Q": np.asarray(c.Q).tolist(),
                "R": np.asarray(c.R).tolist(),
                "rho": float(c.rho),
                "theta1_ref": float(c.theta1_ref),
            },
            "optimizer": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(o).items() if k != "num_knots"},
            "scenario": {
                "duration": float(s.duration),
                "commands": [{"t": float(t), "cmd": [float(v) for v in cmd]} for t, cmd in s.commands],
                "pushes": [{"start": p.start, "duration": p.duration, "wrench": list(p.wrench)} for p in s.pushes],
                "random_wrench": None if s.random_wrench is None else asdict(s.random_wrench),
                "episodes": int(s.episodes),
                "seed": int(s.seed),
                "max_tilt": float(s.max_tilt),
                "min_height": float(s.min_height),
                "mass_scale": float(s.mass_scale),
                "inertia_scale": float(s.inertia_scale),
            },
        }


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def default_tree() -> dict:
    return ExperimentConfig().to_dict()


def from_dict(tree: dict) -> ExperimentConfig:
    """Build a config from a (possibly partial) tree; missing keys take defaults."""
    unknown = set(tree) - set(SECTIONS) - {"meta"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    t = _merge(default_tree(), {k: v for k, v in tree.items() if k != "meta"})
    try:
        robot = RobotModel(**t["robot"])
        gsec = dict(t["gait"])
        gait_type = gsec.pop("type")
        step_height = float(gsec.pop("step_height"))
        if "phase_offsets" not in (tree.get("gait") or {}):
            if gait_type not in GAIT_OFFSETS:
                raise ConfigError(f"unknown gait type {gait_type!r}")
            gsec["phase_offsets"] = GAIT_OFFSETS[gait_type]
        gait = GaitParams(**gsec)
        cost = CostConfig(**t["cost"])
        opt = OptimizerConfig(num_knots=int(t["spline"]["num_knots"]), **t["optimizer"])
        s = dict(t["scenario"])
        commands = tuple((float(c["t"]), tuple(float(v) for v in c["cmd"])) for c in s.pop("commands"))
        if any(len(c) != 4 for _, c in commands):
            raise ConfigError("commands are (vx, vy, vz, yaw_rate)")
        pushes = tuple(Push(float(p["start"]), float(p["duration"]), tuple(float(v) for v in p["wrench"]))
                       for p in s.pop("pushes"))
        rw = s.pop("random_wrench")
        scen = Scenario(commands=commands, pushes=pushes,
                        random_wrench=None if rw is None else RandomWrench(**rw), **s)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(robot, gait, cost, opt, scen, gait_type, step_height)


def load_config(path) -> ExperimentConfig:
    """Load a YAML (or JSON) config file, or a shipped config by bare name (e.g. "default")."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and (resources.files("sbsloco.configs") / f"{path}.yaml").is_file():
        text = (resources.files("sbsloco.configs") / f"{path}.yaml").read_text()
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        tree = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if not isinstance(tree, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return from_dict(tree)


def dump_config(cfg: ExperimentConfig, meta: dict | None = None) -> str:
    tree = cfg.to_dict()
    if meta:
        tree["meta"] = meta
    return yaml.safe_dump(tree, sort_keys=False)
