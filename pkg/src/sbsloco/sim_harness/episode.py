"""Closed-loop episode: SBS controller driving the SRBD plant under disturbances."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from ..cost import stage_cost
from ..gait import GaitPhase, advance_phase, contact_flags
from ..leg_reference import SwingTrajectory, foothold_reference, hip_positions, swing_trajectory
from ..sbs_optim import control_step, initial_sampler_state
from ..srbd_model import FootState, SingularOrientation, step
from .config import ConfigError, ExperimentConfig, Scenario


class SimulationError(RuntimeError):
    """Plant state became non-finite."""


class Disturbance:
    """Wrench schedule of one episode: scripted pushes plus the seeded random generator."""

    def __init__(self, scenario: Scenario, seed: int):
        self.pushes = scenario.pushes
        self.random = scenario.random_wrench
        self._windows = {}
        self._rng = np.random.default_rng([int(seed), 0xD157])
        if self.random is not None:
            rw = self.random
            n = max(0, int(math.ceil((scenario.duration - rw.start) / rw.period)) + 1)
            bounds = np.array([rw.force_bound] * 3 + [rw.moment_bound] * 3)
            self._draws = self._rng.uniform(-1.0, 1.0, size=(n, 6)) * bounds

    def wrench_at(self, t: float) -> np.ndarray:
        w = np.zeros(6)
        for p in self.pushes:
            if p.start <= t < p.start + p.duration:
                w += np.asarray(p.wrench, dtype=float)
        rw = self.random
        if rw is not None and t >= rw.start:
            i = int((t - rw.start) // rw.period)
            if t - rw.start - i * rw.period < rw.active and i < len(self._draws):
                w += self._draws[i]
        return w


@dataclass
class EpisodeTrace:
    t: np.ndarray
    states: np.ndarray     # (n, 12) state at the start of each control step
    commands: np.ndarray   # (n, 4)
    frequency: np.ndarray  # (n,) chosen step frequency, Hz
    stage_cost: np.ndarray
    solve_ms: np.ndarray
    wrench: np.ndarray     # (n, 6)
    contact: np.ndarray    # (n, 4)

    def disturbance_hash(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.wrench).tobytes()).hexdigest()


@dataclass
class EpisodeMetrics:
    seed: int
    steps: int
    fell: bool
    fall_time: float | None
    velocity_error: np.ndarray  # (n,) |v_xy - cmd_xy|
    mean_velocity_error: float
    mean_cost: float
    solve_ms: np.ndarray
    frequency: np.ndarray
    trace: EpisodeTrace

    @property
    def mean_solve_ms(self) -> float:
        return float(np.mean(self.solve_ms)) if self.solve_ms.size else 0.0

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "steps": self.steps,
            "fell": self.fell,
            "fall_time": self.fall_time,
            "mean_velocity_error": self.mean_velocity_error,
            "mean_cost": self.mean_cost,
            "mean_solve_ms": self.mean_solve_ms,
            "max_frequency": float(self.frequency.max()) if self.frequency.size else None,
            "disturbance_sha256": self.trace.disturbance_hash(),
        }


def initial_state(cfg: ExperimentConfig) -> np.ndarray:
    x = np.zeros(12)
    x[2] = cfg.robot.nominal_height
    return x


def has_fallen(x: np.ndarray, scenario: Scenario) -> bool:
    return bool(abs(x[6]) > scenario.max_tilt or abs(x[7]) > scenario.max_tilt or x[2] < scenario.min_height)


class _Legs:
    """Foot bookkeeping: stance feet stay put, swing feet follow a spline to the foothold."""

    def __init__(self, x, cfg: ExperimentConfig, phase: GaitPhase):
        self.cfg = cfg
        flags = contact_flags(phase.phase, cfg.gait)
        pos = hip_positions(x[0:3], x[8], cfg.robot.hip_offsets)
        self.feet = FootState(pos, flags)
        self.swings = [None] * 4

    def _target(self, x, cmd, freq_index, leg):
        model = self.cfg.robot
        hips = hip_positions(x[0:3], x[8], model.hip_offsets)
        T_st = self.cfg.gait.stance_time(freq_index)
        return foothold_reference(hips[leg], x[3:6], cmd[:3], max(x[2], 1e-3), T_st, -model.gravity[2])

    def update(self, x, cmd, phase: GaitPhase, t: float) -> FootState:
        gait = self.cfg.gait
        flags = contact_flags(phase.phase, gait)
        pos = self.feet.positions.copy()
        for leg in range(4):
            was, now = self.feet.in_stance[leg], flags[leg]
            if was and not now:
                target = self._target(x, cmd, phase.frequency_index, leg)
                t_sw = gait.swing_time(phase.frequency_index)
                self.swings[leg] = SwingTrajectory(pos[leg], t, target, t + t_sw, self.cfg.step_height)
            elif not was and now:
                pos[leg] = self._target(x, cmd, phase.frequency_index, leg)
                self.swings[leg] = None
            elif not now and self.swings[leg] is not None:
                sw = self.swings[leg]
                sw = replace(sw, touchdown_point=self._target(x, cmd, phase.frequency_index, leg))
                self.swings[leg] = sw
                tt = min(max(t, sw.liftoff_time), sw.touchdown_time)
                pos[leg] = swing_trajectory(sw, tt)[0]
        self.feet = FootState(pos, flags)
        return self.feet


def run_episode(cfg: ExperimentConfig, seed: int | None = None) -> EpisodeMetrics:
    """Simulate one episode; one control step per plant step."""
    opt, scen, model = cfg.optimizer, cfg.scenario, cfg.robot
    seed = scen.seed if seed is None else int(seed)
    opt = replace(opt, seed=seed)
    dt = opt.dt
    n_steps = int(round(scen.duration / dt))
    if n_steps < 1 or abs(n_steps * dt - scen.duration) > 1e-9:
        raise ConfigError("scenario duration must be a positive multiple of the control period")
    plant = model.scaled(scen.mass_scale, scen.inertia_scale)
    disturbance = Disturbance(scen, seed)

    x = initial_state(cfg)
    phase = GaitPhase(0.0, 0)
    legs = _Legs(x, cfg, phase)
    sampler = initial_sampler_state(model, opt)

    rec = {k: [] for k in ("t", "x", "cmd", "f", "cost", "ms", "w", "c")}
    fell, fall_time = False, None
    for k in range(n_steps):
        t = k * dt
        cmd = scen.command_at(t)
        feet = legs.update(x, cmd, phase, t)
        res = control_step(x, phase, feet, cmd, sampler, opt, model, cfg.gait, cfg.cost)
        u = res.control
        plan = res.plans[res.frequency_index]
        if opt.horizon > 0:
            c = stage_cost(x, u, plan.reference.states[0], plan.reference.forces[0], cfg.cost)
        else:
            c = 0.0
        w = disturbance.wrench_at(t)

        rec["t"].append(t)
        rec["x"].append(x)
        rec["cmd"].append(cmd)
        rec["f"].append(cfg.gait.frequency(res.frequency_index))
        rec["cost"].append(c)
        rec["ms"].append(res.diagnostics.solve_time * 1e3)
        rec["w"].append(w)
        rec["c"].append(u.contact.astype(float))

        try:
            x = step(x, u, feet, plant, dt, w)
        except SingularOrientation:
            x = np.full(12, np.nan)
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"plant state became non-finite at t={t + dt:.3f}")
        phase = advance_phase(GaitPhase(phase.phase, res.frequency_index), cfg.gait, dt)
        sampler = res.sampler
        if has_fallen(x, scen):
            fell, fall_time = True, (k + 1) * dt
            break

    trace = EpisodeTrace(
        t=np.array(rec["t"]),
        states=np.array(rec["x"]).reshape(-1, 12),
        commands=np.array(rec["cmd"]).reshape(-1, 4),
        frequency=np.array(rec["f"]),
        stage_cost=np.array(rec["cost"]),
        solve_ms=np.array(rec["ms"]),
        wrench=np.array(rec["w"]).reshape(-1, 6),
        contact=np.array(rec["c"]).reshape(-1, 4),
    )
    verr = np.linalg.norm(trace.states[:, 3:5] - trace.commands[:, 0:2], axis=1)
    return EpisodeMetrics(
        seed=seed,
        steps=len(trace.t),
        fell=fell,
        fall_time=fall_time,
        velocity_error=verr,
        mean_velocity_error=float(verr.mean()),
        mean_cost=float(trace.stage_cost.mean()),
        solve_ms=trace.solve_ms,
        frequency=trace.frequency,
        trace=trace,
    )
