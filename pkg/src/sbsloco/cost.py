"""Quadratic tracking cost, gait-frequency regularization and reference generation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gait import ContactSchedule
from .srbd_model import ControlInput, RobotModel, State

YAW = 8

DEFAULT_Q = (1500.0, 1500.0, 3000.0,
             200.0, 200.0, 200.0,
             500.0, 500.0, 500.0,
             20.0, 20.0, 20.0)
DEFAULT_R = (1e-4,) * 12


@dataclass(frozen=True)
class CostConfig:
    Q: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_Q))
    R: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_R))
    rho: float = 200.0  # gait regularization, comparable to one horizon of stage cost
    theta1_ref: float = 1.3

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float).reshape(12)
        R = np.asarray(self.R, dtype=float).reshape(12)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        if np.any(Q < 0) or np.any(R < 0) or self.rho < 0:
            raise ValueError("cost weights must be non-negative")

    def scaled(self, c: float) -> "CostConfig":
        return CostConfig(self.Q * c, self.R * c, self.rho, self.theta1_ref)


@dataclass(frozen=True)
class ReferenceTrajectory:
    states: np.ndarray  # (N + 1, 12), at t = 0, dt, ..., N dt
    forces: np.ndarray  # (N, 4, 3)

    @property
    def horizon(self) -> int:
        return self.forces.shape[0]


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def reference_states(x0, cmd, model: RobotModel, N: int, dt: float) -> np.ndarray:
    """Reference states from the commanded velocity (vx, vy, vz, yaw_rate), world frame."""
    x0 = x0.to_vector() if isinstance(x0, State) else np.asarray(x0, dtype=float)
    cmd = np.asarray(cmd, dtype=float).reshape(4)
    t = np.arange(N) * dt
    ref = np.zeros((N, 12))
    ref[:, 0] = x0[0] + cmd[0] * t
    ref[:, 1] = x0[1] + cmd[1] * t
    ref[:, 2] = model.nominal_height
    ref[:, 3:6] = cmd[:3]
    ref[:, 8] = x0[8] + cmd[3] * t
    ref[:, 11] = cmd[3]
    return ref


def reference_forces(schedule: ContactSchedule, model: RobotModel, N: int) -> np.ndarray:
    """Weight shared equally by the stance legs of each step."""
    flags = schedule.flags[:N]
    n_stance = np.maximum(1, flags.sum(axis=1))
    forces = np.zeros((N, 4, 3))
    forces[:, :, 2] = flags * (model.weight / n_stance)[:, None]
    return forces


def build_reference(x0, cmd, model: RobotModel, schedule: ContactSchedule, N: int, dt: float) -> ReferenceTrajectory:
    """State reference at the N + 1 horizon nodes, force reference at the N input steps."""
    if N < 0:
        raise ValueError("horizon must be non-negative")
    return ReferenceTrajectory(reference_states(x0, cmd, model, N + 1, dt), reference_forces(schedule, model, N))


def stage_cost(x, u, x_r, u_r, cfg: CostConfig) -> float:
    """(x - x_r)' Q (x - x_r) + (u - u_r)' R (u - u_r) with diagonal weights."""
    x = x.to_vector() if isinstance(x, State) else np.asarray(x, dtype=float)
    x_r = x_r.to_vector() if isinstance(x_r, State) else np.asarray(x_r, dtype=float)
    grf = u.grf if isinstance(u, ControlInput) else np.asarray(u, dtype=float)
    ex = x - x_r
    ex[YAW] = wrap_angle(ex[YAW])
    eu = grf.reshape(12) - np.asarray(u_r, dtype=float).reshape(12)
    return float(np.dot(cfg.Q * ex, ex) + np.dot(cfg.R * eu, eu))


def gait_regularization(theta1: float, cfg: CostConfig) -> float:
    d = theta1 - cfg.theta1_ref
    return cfg.rho * d * d
