"""Adaptive Dormand-Prince 4(5) integrator shared by every solver.

Works on complex ndarrays of any shape.  The controller lands exactly on the
requested sample times (steps are clipped, never interpolated) and hands each
sampled state to a callback.  Tolerances default to the values used for the
master-equation runs so cross-method timings are comparable.

For master-equation-sized states the stage combinations are as expensive as
the derivative evaluations, so they go through the fused kernels in
kernels.py; small systems use plain numpy.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import kernels
from .model import IntegrationError

ATOL = 1e-9
RTOL = 1e-7

# Dormand-Prince coefficients (FSAL pair, 5th-order propagation)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([], dtype=complex),
    np.array([1 / 5], dtype=complex),
    np.array([3 / 40, 9 / 40], dtype=complex),
    np.array([44 / 45, -56 / 15, 32 / 9], dtype=complex),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729], dtype=complex),
    np.array(
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656], dtype=complex
    ),
    np.array(
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84], dtype=complex
    ),
]
_B5 = _A[6]
_B5_PAD = np.concatenate([_B5, [0.0]])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40],
    dtype=complex,
)
_E = _B5_PAD - _B4

_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAFETY = 0.9
_FUSE_THRESHOLD = 4096  # below this, plain numpy is faster than a kernel call


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


def _initial_step(rhs, t0, y0, f0, atol, rtol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    sample_times: np.ndarray,
    on_sample: Callable[[float, np.ndarray], None],
    atol: float = ATOL,
    rtol: float = RTOL,
    max_step: float | None = None,
    rhs_into: Callable[[float, np.ndarray, np.ndarray], None] | None = None,
) -> None:
    """Integrate dy/dt = rhs(t, y) over sorted sample_times, reporting the
    state at every sample time (the first entry is y0 itself).

    rhs_into, when given, must write the derivative into its third argument;
    it saves one full-state copy per stage on large systems.
    """
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("sample_times must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample_times must be strictly increasing")

    t = float(times[0])
    y = np.array(y0, dtype=np.complex128, copy=True, order="C")
    shape = y.shape
    on_sample(t, y.copy())
    if times.size == 1:
        return

    t_end = float(times[-1])
    span = t_end - t
    fused = y.size >= _FUSE_THRESHOLD
    k = np.empty((7,) + shape, dtype=np.complex128)
    k[0] = rhs(t, y)
    stage = np.empty_like(y)
    kf = k.reshape(7, -1)
    yf = y.reshape(-1)
    stagef = stage.reshape(-1)

    h = _initial_step(rhs, t, y, k[0], atol, rtol)
    if max_step is not None:
        h = min(h, max_step)
    min_step = max(1e-14 * span, 1e-14)

    next_idx = 1
    while next_idx < times.size:
        t_target = float(times[next_idx])
        clipped = t + h >= t_target - 1e-12 * span
        h_step = (t_target - t) if clipped else h
        if h_step < min_step:
            raise IntegrationError(f"step size underflow at t={t:.6g} (h={h_step:.3g})")

        for i in range(1, 7):
            if fused:
                kernels.stage_combine(stagef, yf, kf, _A[i], h_step, i)
            else:
                acc = _A[i][0] * k[0]
                for j in range(1, i):
                    acc = acc + _A[i][j] * k[j]
                stage[...] = y + h_step * acc
            if rhs_into is not None:
                rhs_into(t + _C[i] * h_step, stage, k[i])
            else:
                k[i] = rhs(t + _C[i] * h_step, stage)
        # 5th-order solution sits in the last stage combination (b5 == a7)
        if fused:
            norm = kernels.finish_step(stagef, yf, kf, _B5_PAD, _E, h_step, atol, rtol)
        else:
            acc = _B5[0] * k[0]
            for j in range(2, 6):
                acc = acc + _B5[j] * k[j]
            stage[...] = y + h_step * acc
            err = _E[0] * k[0]
            for j in range(2, 7):
                err = err + _E[j] * k[j]
            err = err * h_step
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(stage))
            norm = _rms(err / scale)

        if norm <= 1.0:
            t = t_target if clipped else t + h_step
            y, stage = stage, y
            yf, stagef = stagef, yf
            k[0] = k[6]  # FSAL
            if clipped:
                on_sample(t, y.copy())
                next_idx += 1
            factor = _MAX_FACTOR if norm == 0.0 else min(
                _MAX_FACTOR, _SAFETY * norm ** -0.2
            )
            # a clipped step says nothing about the natural step size
            h = max(h_step * max(factor, 1.0), h) if clipped else h_step * factor
        else:
            h = h_step * max(_MIN_FACTOR, _SAFETY * norm ** -0.2)
        if max_step is not None:
            h = min(h, max_step)
