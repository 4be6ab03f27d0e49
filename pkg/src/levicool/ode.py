"""Adaptive Dormand-Prince 5(4) integrator for real or complex array states.

One integrator serves the amplitude equations, the occupation rate
equations, and the truncated-Fock master equation (on the flattened
density matrix).  Dense output at requested sample times uses cubic
Hermite interpolation between accepted steps.
"""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR = _B5 - _B4


def _hermite(t, t0, t1, y0, y1, f0, f1):
    """Cubic Hermite value at t within [t0, t1]."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate_adaptive(
    rhs,
    t0: float,
    y0,
    t1: float,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval=None,
    fixed_step: float | None = None,
    max_steps: int = 2_000_000,
    first_step: float | None = None,
):
    """Integrate dy/dt = rhs(t, y) from t0 to t1 (t1 > t0).

    Returns (t_samples, y_samples, y_final) where t_samples/y_samples follow
    ``t_eval`` (or the accepted step points when t_eval is None).  Raises
    IntegrationError on step underflow or step-budget exhaustion, carrying
    the partial samples in ``partial``.
    """
    y = np.asarray(y0).copy()
    t = float(t0)
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    eval_times = None if t_eval is None else np.asarray(t_eval, dtype=float)
    if eval_times is not None:
        if eval_times.size and (
            eval_times[0] < t0 - 1e-12 or eval_times[-1] > t1 * (1 + 1e-12) + 1e-300
        ):
            raise ValueError("t_eval must lie within [t0, t1]")
        out_y = []
        next_idx = 0
    else:
        ts_acc = [t]
        ys_acc = [y.copy()]

    k = [None] * 7
    k[0] = np.asarray(rhs(t, y))
    if fixed_step is not None:
        h = float(fixed_step)
    elif first_step is not None:
        h = float(first_step)
    else:
        scale = atol + rtol * np.abs(y)
        d0 = _norm(y, scale)
        d1 = _norm(k[0], scale)
        h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6 * (t1 - t0)
        h = min(h, t1 - t0)

    hmin = 16 * np.finfo(float).eps * max(abs(t0), abs(t1))

    def emit(t_prev, t_new, y_prev, y_new, f_prev, f_new):
        nonlocal next_idx
        while next_idx < eval_times.size and eval_times[next_idx] <= t_new + 1e-15 * abs(t_new):
            tq = eval_times[next_idx]
            if tq <= t_prev:
                out_y.append(y_prev.copy())
            else:
                out_y.append(_hermite(tq, t_prev, t_new, y_prev, y_new, f_prev, f_new))
            next_idx += 1

    steps = 0
    while t < t1:
        if steps >= max_steps:
            raise IntegrationError(
                f"step budget exhausted after {steps} steps at t={t:g}",
                partial=_partial(eval_times, out_y if eval_times is not None else ys_acc),
            )
        h = min(h, t1 - t)
        if h <= hmin and fixed_step is None:
            raise IntegrationError(
                f"step size underflow at t={t:g}",
                partial=_partial(eval_times, out_y if eval_times is not None else ys_acc),
            )
        for i in range(1, 7):
            yi = y + h * sum(_A[i][j] * k[j] for j in range(i))
            k[i] = np.asarray(rhs(t + _C[i] * h, yi))
        y_new = y + h * sum(_B5[i] * k[i] for i in range(7) if _B5[i] != 0.0)
        if fixed_step is None:
            err_vec = h * sum(_ERR[i] * k[i] for i in range(7) if _ERR[i] != 0.0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _norm(err_vec, scale)
        else:
            err = 0.0
        if err <= 1.0:
            t_new = t + h
            f_new = k[6]  # FSAL: stage 7 is rhs at (t_new, y_new)
            if eval_times is not None:
                emit(t, t_new, y, y_new, k[0], f_new)
            else:
                ts_acc.append(t_new)
                ys_acc.append(y_new.copy())
            t, y = t_new, y_new
            k[0] = f_new
            steps += 1
            if fixed_step is None:
                factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h *= factor
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            steps += 1

    if eval_times is not None:
        while next_idx < eval_times.size:  # endpoint round-off stragglers
            out_y.append(y.copy())
            next_idx += 1
        return eval_times, np.asarray(out_y), y
    return np.asarray(ts_acc), np.asarray(ys_acc), y


def _norm(v, scale):
    r = np.abs(v) / scale
    return float(np.sqrt(np.mean(r * r)))


def _partial(eval_times, ys):
    arr = np.asarray(ys)
    if eval_times is not None:
        return eval_times[: len(ys)], arr
    return arr
