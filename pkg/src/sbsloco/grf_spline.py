"""Catmull-Rom force splines and friction-cone projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gait import ContactSchedule
from .srbd_model import ControlInput, RobotModel


class OutOfRange(ValueError):
    """Evaluation time outside the spline or swing window."""


def uniform_knot_times(num_knots: int, horizon_time: float) -> np.ndarray:
    return np.linspace(0.0, horizon_time, num_knots)


@dataclass(frozen=True)
class SplineParams:
    knots: np.ndarray       # (P, 4, 3) forces
    knot_times: np.ndarray  # (P,) strictly increasing, [0, N*dt]

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        times = np.asarray(self.knot_times, dtype=float)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "knot_times", times)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least two knots")
        if knots.shape[0] != times.size:
            raise ValueError("knot values and knot times disagree on P")
        if np.any(np.diff(times) <= 0) or times[0] != 0.0:
            raise ValueError("knot times must start at 0 and increase strictly")
        if not np.all(np.isfinite(knots)):
            raise ValueError("knot values must be finite")

    @property
    def duration(self) -> float:
        return float(self.knot_times[-1])


def _segment(times, t):
    if t < times[0] or t > times[-1]:
        raise OutOfRange(f"t={t} outside [{times[0]}, {times[-1]}]")
    j = int(np.searchsorted(times, t, side="right")) - 1
    return min(j, times.size - 2)


def _tangents(times, values):
    # end knots duplicated: phantom neighbour equals the end value, spaced one interval out
    P = times.size
    t_ext = np.concatenate([[2 * times[0] - times[1]], times, [2 * times[-1] - times[-2]]])
    v_ext = np.concatenate([values[:1], values, values[-1:]], axis=0)
    m = np.empty_like(values)
    for j in range(P):
        m[j] = (v_ext[j + 2] - v_ext[j]) / (t_ext[j + 2] - t_ext[j])
    return m


def spline_eval(params: SplineParams, t: float, derivative: bool = False) -> np.ndarray:
    """Force array of shape knots.shape[1:] at time t (or its time derivative)."""
    times, vals = params.knot_times, params.knots
    j = _segment(times, t)
    h = times[j + 1] - times[j]
    s = (t - times[j]) / h
    m = _tangents(times, vals)
    if derivative:
        d00 = (6 * s * s - 6 * s) / h
        d10 = 3 * s * s - 4 * s + 1
        d01 = (-6 * s * s + 6 * s) / h
        d11 = 3 * s * s - 2 * s
        return d00 * vals[j] + d10 * m[j] + d01 * vals[j + 1] + d11 * m[j + 1]
    if s == 0.0:
        return vals[j].copy()
    if s == 1.0:
        return vals[j + 1].copy()
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * vals[j] + h10 * h * m[j] + h01 * vals[j + 1] + h11 * h * m[j + 1]


def basis_matrix(knot_times, eval_times) -> np.ndarray:
    """W with spline(t_j) = sum_p W[j, p] * knot_p, exploiting linearity in the knots."""
    knot_times = np.asarray(knot_times, dtype=float)
    P = knot_times.size
    eye = SplineParams(np.eye(P), knot_times)
    return np.array([spline_eval(eye, float(t)) for t in eval_times])


def shift_knots(params: SplineParams, dt: float) -> SplineParams:
    """Receding-horizon shift: resample the spline at t_knot + dt, holding the last value."""
    T = params.duration
    shifted = np.array([spline_eval(params, min(float(t) + dt, T)) for t in params.knot_times])
    return SplineParams(shifted, params.knot_times)


def project_friction_cone(force, model: RobotModel) -> np.ndarray:
    """Clamp f_z to [fz_min, fz_max], then f_x, f_y to +-mu*f_z. Works on (..., 3)."""
    f = np.asarray(force, dtype=float)
    fz = np.clip(f[..., 2], model.fz_min, model.fz_max)
    lim = model.friction_mu * fz
    out = np.empty(f.shape)
    out[..., 0] = np.clip(f[..., 0], -lim, lim)
    out[..., 1] = np.clip(f[..., 1], -lim, lim)
    out[..., 2] = fz
    return out


def materialize_forces(params: SplineParams, schedule: ContactSchedule, model: RobotModel, N: int, dt: float) -> np.ndarray:
    """(N, 4, 3) admissible forces: evaluate, mask swing legs, project stance legs."""
    if schedule.horizon < N:
        raise ValueError("schedule shorter than horizon")
    out = np.zeros((N, 4, 3))
    for j in range(N):
        raw = spline_eval(params, j * dt)
        stance = schedule.flags[j]
        out[j, stance] = project_friction_cone(raw[stance], model)
    return out


def materialize_controls(params: SplineParams, schedule: ContactSchedule, model: RobotModel, N: int, dt: float) -> list:
    forces = materialize_forces(params, schedule, model, N, dt)
    return [ControlInput(forces[j], schedule.flags[j]) for j in range(N)]
