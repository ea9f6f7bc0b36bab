"""Single rigid body dynamics (SRBD) of a quadruped trunk.

State vector layout (12):
    [0:3]  p_c    CoM position, world frame
    [3:6]  v_c    CoM velocity, world frame
    [6:9]  Phi    roll, pitch, yaw (ZYX convention)
    [9:12] omega  angular velocity, body frame

Ground reaction forces and foot positions are expressed in the world frame.
Angular dynamics are evaluated in the body frame so the inertia tensor stays
constant; forces and lever arms are rotated by R(Phi)^T.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PITCH_MARGIN = 1e-3
NUM_LEGS = 4
STATE_DIM = 12

POS = slice(0, 3)
VEL = slice(3, 6)
EULER = slice(6, 9)
OMEGA = slice(9, 12)


class SingularOrientation(ValueError):
    """Pitch too close to +-pi/2 for the Euler-rate map."""


@dataclass(frozen=True)
class State:
    p_c: np.ndarray
    v_c: np.ndarray
    Phi: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        for name in ("p_c", "v_c", "Phi", "omega"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))

    @classmethod
    def from_vector(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        return cls(x[POS], x[VEL], x[EULER], x[OMEGA])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.p_c, self.v_c, self.Phi, self.omega])

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.to_vector())))


def _default_hips():
    return np.array([[0.24, 0.11, 0.0],
                     [0.24, -0.11, 0.0],
                     [-0.24, 0.11, 0.0],
                     [-0.24, -0.11, 0.0]])


@dataclass(frozen=True)
class RobotModel:
    """Rigid-body and contact parameters. Defaults are Aliengo-like placeholders."""

    mass: float = 21.0
    inertia: np.ndarray = field(default_factory=lambda: np.diag([0.135, 0.54, 0.58]))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    friction_mu: float = 0.5
    fz_min: float = 5.0
    fz_max: float = 180.0
    hip_offsets: np.ndarray = field(default_factory=_default_hips)
    nominal_height: float = 0.30

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape == (3,):
            inertia = np.diag(inertia)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float).reshape(3))
        object.__setattr__(self, "hip_offsets", np.asarray(self.hip_offsets, dtype=float).reshape(NUM_LEGS, 3))
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.min(np.linalg.eigvalsh(inertia)) <= 0:
            raise ValueError("inertia must be positive definite")
        if not self.friction_mu > 0:
            raise ValueError("friction_mu must be positive")
        if not 0 <= self.fz_min < self.fz_max:
            raise ValueError("need 0 <= fz_min < fz_max")
        object.__setattr__(self, "_inertia_inv", np.linalg.inv(inertia))

    @property
    def inertia_inv(self) -> np.ndarray:
        return self._inertia_inv

    @property
    def weight(self) -> float:
        return self.mass * float(-self.gravity[2])

    def scaled(self, mass_scale: float = 1.0, inertia_scale: float = 1.0) -> "RobotModel":
        """Copy with perturbed mass/inertia (plant mismatch studies)."""
        return RobotModel(
            mass=self.mass * mass_scale,
            inertia=self.inertia * inertia_scale,
            gravity=self.gravity,
            friction_mu=self.friction_mu,
            fz_min=self.fz_min,
            fz_max=self.fz_max,
            hip_offsets=self.hip_offsets,
            nominal_height=self.nominal_height,
        )


@dataclass(frozen=True)
class ControlInput:
    grf: np.ndarray      # (4, 3) world-frame forces
    contact: np.ndarray  # (4,) bool

    def __post_init__(self):
        object.__setattr__(self, "grf", np.asarray(self.grf, dtype=float).reshape(NUM_LEGS, 3))
        object.__setattr__(self, "contact", np.asarray(self.contact, dtype=bool).reshape(NUM_LEGS))

    def is_admissible(self, model: RobotModel, tol: float = 0.0) -> bool:
        """Swing legs carry zero force, stance legs lie in the pyramid cone."""
        f = self.grf
        if np.any(f[~self.contact] != 0.0):
            return False
        st = f[self.contact]
        fz = st[:, 2]
        lim = model.friction_mu * fz
        return bool(
            np.all(fz >= model.fz_min - tol)
            and np.all(fz <= model.fz_max + tol)
            and np.all(np.abs(st[:, 0]) <= lim + tol)
            and np.all(np.abs(st[:, 1]) <= lim + tol)
        )


@dataclass(frozen=True)
class FootState:
    positions: np.ndarray  # (4, 3) world frame
    in_stance: np.ndarray  # (4,) bool

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(NUM_LEGS, 3))
        object.__setattr__(self, "in_stance", np.asarray(self.in_stance, dtype=bool).reshape(NUM_LEGS))


def rotation_matrix(Phi) -> np.ndarray:
    """Body-to-world rotation R = Rz(yaw) Ry(pitch) Rx(roll)."""
    r, p, y = Phi
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def euler_rate_map(Phi) -> np.ndarray:
    """Matrix M with Phi_dot = M @ omega_body (ZYX roll-pitch-yaw)."""
    r, p, _ = Phi
    if abs(p) >= np.pi / 2 - PITCH_MARGIN:
        raise SingularOrientation(f"pitch {p:.6f} rad is at the Euler-rate singularity")
    cr, sr = np.cos(r), np.sin(r)
    cp, tp = np.cos(p), np.tan(p)
    return np.array([
        [1.0, sr * tp, cr * tp],
        [0.0, cr, -sr],
        [0.0, sr / cp, cr / cp],
    ])


def _unpack(x):
    if isinstance(x, State):
        return x.to_vector(), True
    return np.asarray(x, dtype=float), False


def _forces(u):
    if isinstance(u, ControlInput):
        return u.grf, u.contact
    grf, contact = u
    return np.asarray(grf, dtype=float), np.asarray(contact, dtype=bool)


def _foot_positions(feet):
    if isinstance(feet, FootState):
        return feet.positions
    return np.asarray(feet, dtype=float)


def _derivative(x, grf, contact, feet, model, wrench):
    Phi = x[EULER]
    omega = x[OMEGA]
    R = rotation_matrix(Phi)
    active = grf * contact[:, None]

    force = active.sum(axis=0)
    moment = np.cross(feet - x[POS], active).sum(axis=0)
    if wrench is not None:
        force = force + wrench[:3]
        moment = moment + wrench[3:]

    I = model.inertia
    xdot = np.empty(STATE_DIM)
    xdot[POS] = x[VEL]
    xdot[VEL] = force / model.mass + model.gravity
    xdot[EULER] = euler_rate_map(Phi) @ omega
    xdot[OMEGA] = model.inertia_inv @ (R.T @ moment - np.cross(omega, I @ omega))
    return xdot


def continuous_dynamics(x, u, feet, model: RobotModel, wrench=None) -> np.ndarray:
    """Time derivative of the 12-dim state.

    ``u`` is a ControlInput or a ``(grf, contact)`` pair, ``feet`` a FootState
    or a (4, 3) array of foot positions. ``wrench`` is an optional external
    6-vector (world force, world moment about the CoM).
    """
    vec, _ = _unpack(x)
    grf, contact = _forces(u)
    w = None if wrench is None else np.asarray(wrench, dtype=float)
    return _derivative(vec, grf, contact, _foot_positions(feet), model, w)


def step(x, u, feet, model: RobotModel, dt: float, wrench=None):
    """One RK4 step with input and feet held constant. Returns the type of ``x``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    vec, as_state = _unpack(x)
    grf, contact = _forces(u)
    pf = _foot_positions(feet)
    w = None if wrench is None else np.asarray(wrench, dtype=float)

    k1 = _derivative(vec, grf, contact, pf, model, w)
    k2 = _derivative(vec + 0.5 * dt * k1, grf, contact, pf, model, w)
    k3 = _derivative(vec + 0.5 * dt * k2, grf, contact, pf, model, w)
    k4 = _derivative(vec + dt * k3, grf, contact, pf, model, w)
    out = vec + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return State.from_vector(out) if as_state else out
