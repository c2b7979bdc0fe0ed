"""Exponential decay fits for randomized benchmarking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares


@dataclass(frozen=True)
class RbFit:
    a: float
    alpha: float
    b: float
    num_qubits: int
    residual: float = 0.0
    ok: bool = True

    @property
    def process_fidelity(self) -> float:
        return process_fidelity(self.alpha, self.num_qubits)


def process_fidelity(alpha: float, num_qubits: int) -> float:
    """Entanglement fidelity of the depolarizing channel with decay ``alpha``."""
    d2 = 4**num_qubits
    return ((d2 - 1) * alpha + 1) / d2


def fit_rb_decay(lengths: Sequence[float], success: Sequence[float], num_qubits: int) -> RbFit:
    """Fit ``a * alpha**l + b`` with the asymptote ``b`` fixed at ``2**-m``.

    A log-linear regression on the points above ``b`` seeds a bounded
    least-squares refinement with ``0 <= alpha <= 1``. Fewer than two usable
    points gives ``alpha = 0`` and ``ok = False``.
    """
    lengths = np.asarray(lengths, dtype=float)
    success = np.asarray(success, dtype=float)
    if lengths.shape != success.shape:
        raise ValueError("lengths and success must have the same shape")
    b = 2.0**-num_qubits
    above = success - b
    usable = above > 1e-12
    if usable.sum() < 2:
        return RbFit(a=0.0, alpha=0.0, b=b, num_qubits=num_qubits, residual=float(np.sum((success - b) ** 2)), ok=False)
    slope, intercept = np.polyfit(lengths[usable], np.log(above[usable]), 1)
    alpha0 = float(np.clip(np.exp(slope), 0.0, 1.0))
    a0 = float(np.clip(np.exp(intercept), 0.0, 1.0 - b))

    def residual(params):
        a, alpha = params
        return a * alpha**lengths + b - success

    fit = least_squares(
        residual,
        x0=[a0, alpha0],
        bounds=([0.0, 0.0], [1.0, 1.0]),
        method="trf",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    a, alpha = (float(v) for v in fit.x)
    residual = float(np.sum(fit.fun**2))
    return RbFit(a=a, alpha=alpha, b=b, num_qubits=num_qubits, residual=residual, ok=bool(fit.success))
