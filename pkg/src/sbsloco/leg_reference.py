"""Footholds, swing-foot trajectories and the stance torque map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grf_spline import OutOfRange

TERRAIN_HEIGHT = 0.0


def hip_positions(p_c, yaw: float, hip_offsets) -> np.ndarray:
    """Hip locations rotated by yaw and projected onto the terrain plane, (4, 3)."""
    c, s = np.cos(yaw), np.sin(yaw)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    hips = np.asarray(p_c, dtype=float)[None, :] + np.asarray(hip_offsets, dtype=float) @ rz.T
    hips[:, 2] = TERRAIN_HEIGHT
    return hips


def foothold_reference(p_hip, v_c, v_c_d, p_cz: float, T_st: float, g: float) -> np.ndarray:
    """Neutral point plus capture-point correction for velocity error."""
    if not p_cz > 0 or not g > 0:
        raise ValueError("CoM height and gravity must be positive")
    v_c = np.asarray(v_c, dtype=float)
    v_c_d = np.asarray(v_c_d, dtype=float)
    p = np.asarray(p_hip, dtype=float) + 0.5 * T_st * v_c_d + np.sqrt(p_cz / g) * (v_c - v_c_d)
    p[..., 2] = TERRAIN_HEIGHT
    return p


@dataclass(frozen=True)
class SwingTrajectory:
    liftoff_point: np.ndarray
    liftoff_time: float
    touchdown_point: np.ndarray
    touchdown_time: float
    apex_height: float = 0.08

    def __post_init__(self):
        object.__setattr__(self, "liftoff_point", np.asarray(self.liftoff_point, dtype=float).reshape(3))
        object.__setattr__(self, "touchdown_point", np.asarray(self.touchdown_point, dtype=float).reshape(3))
        if not self.touchdown_time > self.liftoff_time:
            raise ValueError("touchdown must come after liftoff")
        if not self.apex_height > 0:
            raise ValueError("apex height must be positive")


def _hermite(a, b, s, T):
    # cubic with zero end velocities; returns value and d/dt over a span of length T
    return a + (b - a) * (3 * s * s - 2 * s ** 3), (b - a) * (6 * s - 6 * s * s) / T


def swing_trajectory(traj: SwingTrajectory, t: float):
    """Foot position and velocity at time t of the swing."""
    t0, t1 = traj.liftoff_time, traj.touchdown_time
    if t < t0 or t > t1:
        raise OutOfRange(f"t={t} outside swing window [{t0}, {t1}]")
    T = t1 - t0
    s = (t - t0) / T
    p0, p1 = traj.liftoff_point, traj.touchdown_point
    pos, vel = _hermite(p0, p1, s, T)
    pos, vel = np.array(pos, dtype=float), np.array(vel, dtype=float)

    apex = TERRAIN_HEIGHT + traj.apex_height
    half = 0.5 * T
    if s <= 0.5:
        z, vz = _hermite(p0[2], apex, 2 * s, half)
    else:
        z, vz = _hermite(apex, p1[2], 2 * s - 1, half)
    pos[2], vel[2] = z, vz
    if s == 0.0:
        pos = p0.copy()
    elif s == 1.0:
        pos = p1.copy()
    return pos, vel


def stance_torque(jacobian, grf) -> np.ndarray:
    """Joint torques tau = -J^T grf for a stance leg."""
    return -np.asarray(jacobian, dtype=float).T @ np.asarray(grf, dtype=float)


def plan_stance_feet(schedule, feet, ref_states, v_c, v_des, p_cz: float, hip_offsets, g: float) -> np.ndarray:
    """Foot positions for every horizon step, (N, 4, 3).

    Feet already on the ground keep their position; a leg touching down at
    step j lands on the foothold computed from the reference hip at step j.
    Entries for swing steps hold the last known position and are unused.
    """
    N = schedule.horizon
    cur = np.array(feet.positions, dtype=float)
    prev = np.array(feet.in_stance, dtype=bool)
    p_cz = max(float(p_cz), 1e-3)
    out = np.empty((N, 4, 3))
    for j in range(N):
        row = schedule.flags[j]
        landing = row & ~prev
        if np.any(landing):
            hips = hip_positions(ref_states[j, 0:3], ref_states[j, 8], hip_offsets)
            targets = foothold_reference(hips, v_c, v_des, p_cz, schedule.stance_time, g)
            cur[landing] = targets[landing]
        prev = row
        out[j] = cur
    return out
