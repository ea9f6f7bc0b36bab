"""Periodic gait clock and contact schedules over the prediction horizon."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEG_NAMES = ("FL", "FR", "RL", "RR")

GAIT_OFFSETS = {
    "trot": (0.0, 0.5, 0.5, 0.0),
    "pace": (0.0, 0.5, 0.0, 0.5),
    "full_stance": (0.0, 0.0, 0.0, 0.0),
}


@dataclass(frozen=True)
class GaitParams:
    duty_factor: float = 0.65
    phase_offsets: tuple = GAIT_OFFSETS["trot"]
    nominal_freq: float = 1.3
    freq_options: tuple = (1.3, 2.0, 2.4)

    def __post_init__(self):
        object.__setattr__(self, "phase_offsets", tuple(float(o) for o in self.phase_offsets))
        object.__setattr__(self, "freq_options", tuple(float(f) for f in self.freq_options))
        if not 0 < self.duty_factor <= 1:
            raise ValueError("duty_factor must lie in (0, 1]")
        if len(self.phase_offsets) != 4 or not all(0 <= o < 1 for o in self.phase_offsets):
            raise ValueError("need four phase offsets in [0, 1)")
        opts = self.freq_options
        if not opts or any(b <= a for a, b in zip(opts, opts[1:])):
            raise ValueError("freq_options must be non-empty and strictly increasing")
        if opts[0] != self.nominal_freq:
            raise ValueError("freq_options[0] must equal nominal_freq")

    @classmethod
    def named(cls, gait: str, **kwargs) -> "GaitParams":
        return cls(phase_offsets=GAIT_OFFSETS[gait], **kwargs)

    @property
    def num_options(self) -> int:
        return len(self.freq_options)

    def frequency(self, index: int) -> float:
        return self.freq_options[index]

    def stance_time(self, index: int) -> float:
        return self.duty_factor / self.freq_options[index]

    def swing_time(self, index: int) -> float:
        return (1.0 - self.duty_factor) / self.freq_options[index]


@dataclass(frozen=True)
class GaitPhase:
    phase: float = 0.0
    frequency_index: int = 0


@dataclass(frozen=True)
class ContactSchedule:
    flags: np.ndarray          # (N, 4) bool, row j is the contact state at t = j*dt
    stance_time: float
    swing_time: float
    dt: float
    liftoffs: tuple = field(default=())    # per leg: step indices with a 1 -> 0 transition
    touchdowns: tuple = field(default=())  # per leg: step indices with a 0 -> 1 transition

    @property
    def horizon(self) -> int:
        return self.flags.shape[0]

    def liftoff_times(self, leg: int) -> np.ndarray:
        return np.asarray(self.liftoffs[leg], dtype=float) * self.dt

    def touchdown_times(self, leg: int) -> np.ndarray:
        return np.asarray(self.touchdowns[leg], dtype=float) * self.dt


def contact_flags(phase: float, params: GaitParams) -> np.ndarray:
    """Current contact state implied by the gait clock alone."""
    leg_phase = np.mod(phase + np.asarray(params.phase_offsets), 1.0)
    return leg_phase < params.duty_factor


def compute_contact_sequence(theta1: int, phase: GaitPhase, params: GaitParams, N: int, dt: float) -> ContactSchedule:
    """Contact flags for N steps assuming step frequency ``freq_options[theta1]``.

    Leg i is in stance at step j iff frac(phase + f*j*dt + offset_i) < D_f.
    """
    if not 0 <= theta1 < params.num_options:
        raise IndexError(f"frequency index {theta1} out of range")
    f = params.frequency(theta1)
    t = np.arange(N) * dt
    leg_phase = np.mod(phase.phase + f * t[:, None] + np.asarray(params.phase_offsets)[None, :], 1.0)
    flags = leg_phase < params.duty_factor

    liftoffs, touchdowns = [], []
    for leg in range(4):
        d = np.diff(flags[:, leg].astype(np.int8))
        liftoffs.append(tuple(int(j) + 1 for j in np.flatnonzero(d < 0)))
        touchdowns.append(tuple(int(j) + 1 for j in np.flatnonzero(d > 0)))
    return ContactSchedule(
        flags=flags,
        stance_time=params.stance_time(theta1),
        swing_time=params.swing_time(theta1),
        dt=dt,
        liftoffs=tuple(liftoffs),
        touchdowns=tuple(touchdowns),
    )


def advance_phase(phase: GaitPhase, params: GaitParams, dt: float) -> GaitPhase:
    if not dt > 0:
        raise ValueError("dt must be positive")
    f = params.frequency(phase.frequency_index)
    return GaitPhase(float(np.mod(phase.phase + f * dt, 1.0)), phase.frequency_index)
