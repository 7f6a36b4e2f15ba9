"""Shared numerical kernels: fixed-step RK4, quadrature, finite differences.

Everything here is deterministic and pure; the rest of the toolkit builds on
these three kernels so that integration order and difference stencils are
fixed in exactly one place.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InsufficientSamples, NumericalBlowup


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with `count` nodes spanning [start, stop]."""

    count: int
    start: float = 0.0
    stop: float = 1.0

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 nodes, got {self.count}")
        if not np.isfinite(self.start) or not np.isfinite(self.stop):
            raise ValueError("grid endpoints must be finite")
        if self.stop <= self.start:
            raise ValueError("grid span must have positive length")

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.count - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds standing in for the theory's strict inequalities.

    fd_step   central finite-difference step (at unit scale)
    reg_eps   minimum tangent norm for a path to count as regular
    b_eps     below this, the control-effectiveness scalar b is treated as zero
    diss_tol  slack allowed when checking the dissipation inequality
    """

    fd_step: float = 1e-6
    reg_eps: float = 1e-9
    b_eps: float = 1e-12
    diss_tol: float = 1e-3

    def __post_init__(self):
        for name in ("fd_step", "reg_eps", "b_eps", "diss_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def rk4_step(vector_field: Callable[[np.ndarray], np.ndarray],
             state: np.ndarray, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of size `dt`."""
    x = np.asarray(state, dtype=float)
    k1 = np.asarray(vector_field(x))
    k2 = np.asarray(vector_field(x + 0.5 * dt * k1))
    k3 = np.asarray(vector_field(x + 0.5 * dt * k2))
    k4 = np.asarray(vector_field(x + dt * k3))
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowup(
            f"rk4_step produced non-finite values from state={x!r}, dt={dt}")
    return out


def trapezoid_integral(samples, step: float) -> float:
    """Composite trapezoid rule over uniformly spaced samples."""
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise InsufficientSamples(
            f"trapezoid rule needs >= 2 samples, got {y.size}")
    return float(np.trapezoid(y, dx=step))


def finite_diff_jacobian(fn: Callable[[np.ndarray], np.ndarray],
                         point: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Jacobian of `fn` at `point`, O(step^2) accurate."""
    x = np.asarray(point, dtype=float)
    cols = []
    with np.errstate(invalid="ignore", over="ignore"):
        for k in range(x.size):
            e = np.zeros_like(x)
            e[k] = step
            cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e)))
                        / (2.0 * step))
    jac = np.column_stack(cols) if cols else np.zeros((0, 0))
    if not np.all(np.isfinite(jac)):
        raise NumericalBlowup(
            f"finite_diff_jacobian produced non-finite entries at {x!r}")
    return jac
