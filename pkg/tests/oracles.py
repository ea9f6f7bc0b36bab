"""Independent reference implementations used only by the tests.

None of these import the package's numerical code; they re-derive each
quantity by a different route (rotation matrices instead of Euler rates,
explicit polynomials instead of Hermite blending, scalar loops instead of
vectorized expressions).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial.transform import Rotation


def _skew(w):
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def _orthonormalize(R):
    u, _, vt = np.linalg.svd(R)
    return u @ vt


def rigid_body_fine(x, grf, contact, feet, mass, inertia, gravity, dt, substeps=2000, wrench=None):
    """Integrate the trunk with the attitude carried as a rotation matrix.

    Uses classical RK4 on (p, v, R, omega_body) with ``substeps`` sub-steps,
    then converts R back to roll-pitch-yaw. No Euler-rate map is involved.
    """
    p = np.array(x[0:3], dtype=float)
    v = np.array(x[3:6], dtype=float)
    R = Rotation.from_euler("ZYX", [x[8], x[7], x[6]]).as_matrix()
    w = np.array(x[9:12], dtype=float)
    I = np.asarray(inertia, dtype=float)
    Iinv = np.linalg.inv(I)
    f = np.asarray(grf, dtype=float) * np.asarray(contact, dtype=float)[:, None]
    feet = np.asarray(feet, dtype=float)
    wr = np.zeros(6) if wrench is None else np.asarray(wrench, dtype=float)

    def deriv(p, v, R, w):
        F = f.sum(axis=0) + wr[:3]
        M = sum(np.cross(feet[i] - p, f[i]) for i in range(4)) + wr[3:]
        dv = F / mass + np.asarray(gravity, dtype=float)
        dR = R @ _skew(w)
        dw = Iinv @ (R.T @ M - np.cross(w, I @ w))
        return v, dv, dR, dw

    h = dt / substeps
    for _ in range(substeps):
        k1 = deriv(p, v, R, w)
        k2 = deriv(p + 0.5 * h * k1[0], v + 0.5 * h * k1[1], R + 0.5 * h * k1[2], w + 0.5 * h * k1[3])
        k3 = deriv(p + 0.5 * h * k2[0], v + 0.5 * h * k2[1], R + 0.5 * h * k2[2], w + 0.5 * h * k2[3])
        k4 = deriv(p + h * k3[0], v + h * k3[1], R + h * k3[2], w + h * k3[3])
        p = p + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v = v + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        R = R + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        w = w + h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    R = _orthonormalize(R)
    yaw, pitch, roll = Rotation.from_matrix(R).as_euler("ZYX")
    return np.concatenate([p, v, [roll, pitch, yaw], w])


def body_rate_from_euler_rates(Phi):
    """Forward map E with omega_body = E(Phi) @ Phi_dot (ZYX), written out by hand."""
    r, p, _ = Phi
    return np.array([
        [1.0, 0.0, -math.sin(p)],
        [0.0, math.cos(r), math.sin(r) * math.cos(p)],
        [0.0, -math.sin(r), math.cos(r) * math.cos(p)],
    ])


def contact_by_phase_stepping(phase, freq, duty, offsets, N, dt):
    """Scalar clock: advance each leg's phase one step at a time, wrapping at 1."""
    flags = np.zeros((N, 4), dtype=bool)
    for leg in range(4):
        ph = math.fmod(phase + offsets[leg], 1.0)
        for j in range(N):
            flags[j, leg] = ph < duty
            ph += freq * dt
            if ph >= 1.0:
                ph -= 1.0
    return flags


def catmull_rom_polynomial(times, values, t):
    """Catmull-Rom value at t, built as an explicit cubic a + b*u + c*u^2 + d*u^3 on the segment.

    End tangents use a duplicated end knot placed one interval beyond the end.
    Scalar knot values only.
    """
    times = list(map(float, times))
    values = list(map(float, values))
    P = len(times)
    j = max(0, min(P - 2, int(np.searchsorted(times, t, side="right")) - 1))

    def tangent(i):
        if i == 0:
            return (values[1] - values[0]) / (times[1] - (2 * times[0] - times[1]))
        if i == P - 1:
            return (values[-1] - values[-2]) / ((2 * times[-1] - times[-2]) - times[-2])
        return (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1])

    h = times[j + 1] - times[j]
    y0, y1 = values[j], values[j + 1]
    m0, m1 = tangent(j) * h, tangent(j + 1) * h
    # solve for the cubic in u in [0, 1] from value/slope at both ends
    A = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 1, 1], [0, 1, 2, 3]], dtype=float)
    a, b, c, d = np.linalg.solve(A, [y0, m0, y1, m1])
    u = (t - times[j]) / h
    return a + b * u + c * u * u + d * u ** 3


def quadratic_form_cost(x, u, x_r, u_r, Q, R):
    """Stage cost via dense matrices, yaw error wrapped with atan2."""
    ex = np.asarray(x, dtype=float) - np.asarray(x_r, dtype=float)
    ex[8] = math.atan2(math.sin(ex[8]), math.cos(ex[8]))
    eu = np.asarray(u, dtype=float).ravel() - np.asarray(u_r, dtype=float).ravel()
    return float(ex @ np.diag(Q) @ ex + eu @ np.diag(R) @ eu)
