"""Batched rollout kernel (numba). Mirrors srbd_model.step + cost.stage_cost.

Stage j charges the input u_j together with the state it produces, x_{j+1}.

Each sample is integrated by its own loop with a fixed summation order, so
the cost of sample k does not depend on the number of threads.
"""
import math

import numpy as np
from numba import njit, prange

DIVERGENCE_BOUND = 1e6
PITCH_LIMIT = math.pi / 2 - 1e-3


@njit(cache=True, inline="always")
def _deriv(x, f, fl, feet, mass, I, Iinv, g, out):
    px, py, pz = x[0], x[1], x[2]
    Fx = 0.0
    Fy = 0.0
    Fz = 0.0
    Mx = 0.0
    My = 0.0
    Mz = 0.0
    for leg in range(4):
        if fl[leg] != 0.0:
            fx = f[3 * leg]
            fy = f[3 * leg + 1]
            fz = f[3 * leg + 2]
            rx = feet[leg, 0] - px
            ry = feet[leg, 1] - py
            rz = feet[leg, 2] - pz
            Fx += fx
            Fy += fy
            Fz += fz
            Mx += ry * fz - rz * fy
            My += rz * fx - rx * fz
            Mz += rx * fy - ry * fx

    out[0] = x[3]
    out[1] = x[4]
    out[2] = x[5]
    out[3] = Fx / mass + g[0]
    out[4] = Fy / mass + g[1]
    out[5] = Fz / mass + g[2]

    roll, pitch, yaw = x[6], x[7], x[8]
    if abs(pitch) >= PITCH_LIMIT:
        return False
    cr = math.cos(roll)
    sr = math.sin(roll)
    cp = math.cos(pitch)
    sp = math.sin(pitch)
    cy = math.cos(yaw)
    sy = math.sin(yaw)
    tp = sp / cp
    wx, wy, wz = x[9], x[10], x[11]
    out[6] = wx + sr * tp * wy + cr * tp * wz
    out[7] = cr * wy - sr * wz
    out[8] = (sr * wy + cr * wz) / cp

    # body moment = R^T M
    r00 = cy * cp
    r01 = cy * sp * sr - sy * cr
    r02 = cy * sp * cr + sy * sr
    r10 = sy * cp
    r11 = sy * sp * sr + cy * cr
    r12 = sy * sp * cr - cy * sr
    r20 = -sp
    r21 = cp * sr
    r22 = cp * cr
    bx = r00 * Mx + r10 * My + r20 * Mz
    by = r01 * Mx + r11 * My + r21 * Mz
    bz = r02 * Mx + r12 * My + r22 * Mz

    Iwx = I[0, 0] * wx + I[0, 1] * wy + I[0, 2] * wz
    Iwy = I[1, 0] * wx + I[1, 1] * wy + I[1, 2] * wz
    Iwz = I[2, 0] * wx + I[2, 1] * wy + I[2, 2] * wz
    tx = bx - (wy * Iwz - wz * Iwy)
    ty = by - (wz * Iwx - wx * Iwz)
    tz = bz - (wx * Iwy - wy * Iwx)
    out[9] = Iinv[0, 0] * tx + Iinv[0, 1] * ty + Iinv[0, 2] * tz
    out[10] = Iinv[1, 0] * tx + Iinv[1, 1] * ty + Iinv[1, 2] * tz
    out[11] = Iinv[2, 0] * tx + Iinv[2, 1] * ty + Iinv[2, 2] * tz
    return True


@njit(cache=True)
def _rk4(x, f, fl, feet, mass, I, Iinv, g, dt, k1, k2, k3, k4, tmp):
    if not _deriv(x, f, fl, feet, mass, I, Iinv, g, k1):
        return False
    for i in range(12):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    if not _deriv(tmp, f, fl, feet, mass, I, Iinv, g, k2):
        return False
    for i in range(12):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    if not _deriv(tmp, f, fl, feet, mass, I, Iinv, g, k3):
        return False
    for i in range(12):
        tmp[i] = x[i] + dt * k3[i]
    if not _deriv(tmp, f, fl, feet, mass, I, Iinv, g, k4):
        return False
    c = dt / 6.0
    for i in range(12):
        x[i] = x[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return True


@njit(cache=True)
def _wrap(a):
    w = (a + math.pi) % (2.0 * math.pi) - math.pi
    if w == -math.pi:
        w = math.pi
    return w


@njit(cache=True)
def _rollout_one(k, x0, theta1, theta2, W, flags, feet, xref, uref, Q, R, reg,
                 mass, I, Iinv, g, mu, fz_min, fz_max, dt):
    N = W.shape[0]
    P = W.shape[1]
    o = theta1[k]
    x = x0.copy()
    f = np.zeros(12)
    k1 = np.empty(12)
    k2 = np.empty(12)
    k3 = np.empty(12)
    k4 = np.empty(12)
    tmp = np.empty(12)
    J = 0.0
    for j in range(N):
        fl = flags[o, j]
        for leg in range(4):
            if fl[leg] != 0.0:
                for a in range(3):
                    s = 0.0
                    for p in range(P):
                        s += W[j, p] * theta2[k, p, 3 * leg + a]
                    f[3 * leg + a] = s
                fz = min(max(f[3 * leg + 2], fz_min), fz_max)
                lim = mu * fz
                f[3 * leg] = min(max(f[3 * leg], -lim), lim)
                f[3 * leg + 1] = min(max(f[3 * leg + 1], -lim), lim)
                f[3 * leg + 2] = fz
            else:
                f[3 * leg] = 0.0
                f[3 * leg + 1] = 0.0
                f[3 * leg + 2] = 0.0

        su = 0.0
        for i in range(12):
            e = f[i] - uref[o, j, i]
            su += R[i] * e * e

        if not _rk4(x, f, fl, feet[o, j], mass, I, Iinv, g, dt, k1, k2, k3, k4, tmp):
            return math.inf
        sx = 0.0
        for i in range(12):
            e = x[i] - xref[j + 1, i]
            if i == 8:
                e = _wrap(e)
            sx += Q[i] * e * e
        J += sx + su
        for i in range(12):
            if not abs(x[i]) <= DIVERGENCE_BOUND:
                return math.inf
    return J + reg[o]


@njit(cache=True, parallel=True)
def rollout_costs(x0, theta1, theta2, W, flags, feet, xref, uref, Q, R, reg,
                  mass, I, Iinv, g, mu, fz_min, fz_max, dt):
    K = theta2.shape[0]
    costs = np.empty(K)
    for k in prange(K):
        costs[k] = _rollout_one(k, x0, theta1, theta2, W, flags, feet, xref, uref, Q, R, reg,
                                mass, I, Iinv, g, mu, fz_min, fz_max, dt)
    return costs
