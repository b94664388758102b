"""Explicit Runge-Kutta steppers for autonomous-or-not systems ``y' = f(t, y)``."""
from __future__ import annotations

import numpy as np


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = f(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def dopri_step(f, t: float, y: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """One Dormand-Prince step; returns the 5th-order solution and the error estimate."""
    ks = []
    for c, row in zip(_C, _A):
        yi = y
        for a, k in zip(row, ks):
            if a:
                yi = yi + (h * a) * k
        ks.append(f(t + c * h, yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b)
    err = h * sum(e * k for e, k in zip(_E, ks) if e)
    return y5, err


class AdaptiveController:
    """Standard step-size control for an embedded pair of order 5(4)."""

    safety = 0.9
    min_factor = 0.2
    max_factor = 5.0

    def __init__(self, rel_tol: float, abs_tol: float):
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    def error_norm(self, y: np.ndarray, y_new: np.ndarray, err: np.ndarray) -> float:
        scale = self.abs_tol + self.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        return float(np.max(np.abs(err / scale))) if len(y) else 0.0

    def next_step(self, h: float, err_norm: float) -> float:
        if err_norm == 0.0:
            return h * self.max_factor
        factor = self.safety * err_norm ** (-1 / 5)
        return h * min(self.max_factor, max(self.min_factor, factor))
