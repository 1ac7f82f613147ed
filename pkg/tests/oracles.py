"""Independent reference computations used by the tests.

Nothing here calls the package's root finder or stationarity function; the
single-letter optimum is found by brute force over the z axis.
"""

import numpy as np


def xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    m = p > 0
    out[m] = p[m] * np.log2(p[m])
    return out


def q_parts(p_h, p_v, up, down):
    """Coherent information of the diagonal input with weights ``up/2``, ``down/2``."""
    a, b = p_h * up / 2, p_v * down / 2
    return (-(xlogx(a) + xlogx(b) + xlogx(1 - a - b))
            + xlogx(a + b) + xlogx((1 - p_h) * up / 2) + xlogx((1 - p_v) * down / 2))


def q_z(p_h, p_v, z):
    z = np.asarray(z, dtype=float)
    return q_parts(p_h, p_v, 1 + z, 1 - z)


def golden_max(f, lo, hi, iterations=100):
    g = (np.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


Z_GRID = np.linspace(-1, 1, 2_000_001)
LOG_U = np.linspace(-300, -6, 5881)


def q1_oracle(p_h, p_v):
    """Return ``(q1, z)`` from a 1e-6 z grid, a log grid near both poles and golden refinement."""
    qs = q_z(p_h, p_v, Z_GRID)
    i = int(qs.argmax())
    lo, hi = Z_GRID[max(i - 1, 0)], Z_GRID[min(i + 1, Z_GRID.size - 1)]
    z_best, best = golden_max(lambda z: float(q_z(p_h, p_v, z)), lo, hi)
    for sign in (1.0, -1.0):
        u = 10.0 ** LOG_U
        up, down = (2 - u, u) if sign > 0 else (u, 2 - u)
        edge = q_parts(p_h, p_v, up, down)
        j = int(edge.argmax())
        if edge[j] > best:
            def f(t, sign=sign):
                w = 10.0 ** t
                return float(q_parts(p_h, p_v, *((2 - w, w) if sign > 0 else (w, 2 - w))))
            t_lo, t_hi = LOG_U[max(j - 1, 0)], LOG_U[min(j + 1, LOG_U.size - 1)]
            t, val = golden_max(f, t_lo, t_hi)
            if val > best:
                best, z_best = val, sign * (1 - 10.0 ** t)
    return max(best, 0.0), z_best
