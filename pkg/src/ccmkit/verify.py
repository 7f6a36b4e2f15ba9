"""Numerical verification of the synthesis hypotheses and run guarantees.

Four checks:

* the kernel implication (where the gain has no authority, the drift must
  already dissipate),
* boundedness of the input-sensitivity ratio on compact boxes,
* the dissipation inequality dV/dt <= -alpha(V) along recorded runs,
* fitted decay rate and overshoot against the predicted envelope.

Universally quantified conditions are probed by seeded sampling, augmented
with box corners and explicit kernel parametrizations where available.
Kernel membership is decided by a `kernel_tol` threshold on |B^T dV/ddelta|;
this convention is surfaced in every report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .controller import RateSpec, Trajectory
from .errors import RateNotExponential
from .metrics import FinslerMetric
from .numerics import DEFAULT_TOL
from .systems import Box, ControlAffineSystem

_MAX_LISTED = 20  # witnesses kept per report; totals are still exact


@dataclass
class VerificationReport:
    """Outcome of one sampled check."""

    name: str
    checked_samples: int
    violations: list = field(default_factory=list)
    violation_count: int = 0
    max_ratio: Optional[float] = None
    ratio_cap: Optional[float] = None
    kernel_samples: Optional[int] = None
    seed: Optional[int] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.violation_count > 0:
            return False
        if self.max_ratio is not None and self.ratio_cap is not None:
            if not np.isfinite(self.max_ratio) or self.max_ratio > self.ratio_cap:
                return False
        return True

    def add_violation(self, witness: dict) -> None:
        self.violation_count += 1
        if len(self.violations) < _MAX_LISTED:
            self.violations.append(witness)

    def summary_lines(self):
        yield (f"[{'pass' if self.passed else 'FAIL'}] {self.name}: "
               f"checked={self.checked_samples}, violations={self.violation_count}"
               + (f", kernel_hits={self.kernel_samples}"
                  if self.kernel_samples is not None else "")
               + (f", max_ratio={self.max_ratio:.6g}"
                  if self.max_ratio is not None else ""))
        for note in self.notes:
            yield f"    note: {note}"
        for w in self.violations:
            yield f"    witness: {w}"


def _unit_sphere(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = rng.normal(size=(count, dim))
    norms = np.linalg.norm(v, axis=1)
    small = norms < 1e-12
    while np.any(small):
        v[small] = rng.normal(size=(int(small.sum()), dim))
        norms = np.linalg.norm(v, axis=1)
        small = norms < 1e-12
    return v / norms[:, None]


KernelSampler = Callable[[np.random.Generator, int],
                         tuple[Optional[np.ndarray], np.ndarray]]


def kernel_sampler_for(sys: ControlAffineSystem,
                       metric: FinslerMetric) -> Optional[KernelSampler]:
    """Explicit kernel parametrization for built-in pairings, if one exists.

    Returns a sampler producing (x_overrides, deltas) with every delta a unit
    tangent in the zero set of B^T dV/ddelta; x_overrides of None keeps the
    caller's box samples.
    """
    if sys.name == "example1" and metric.name == "quartic2d":
        # gain channel reads 4 d1^3: kernel is d1 = 0
        def sampler(rng, count):
            signs = rng.choice([-1.0, 1.0], size=count)
            deltas = np.zeros((count, 2))
            deltas[:, 1] = signs
            return None, deltas
        return sampler
    if sys.name == "example3":
        # input gain x^2 dies exactly at x = 0 for any scalar metric
        def sampler(rng, count):
            signs = rng.choice([-1.0, 1.0], size=count)
            return np.zeros((count, 1)), signs[:, None]
        return sampler
    return None


def check_th1(sys: ControlAffineSystem, metric: FinslerMetric, rate: RateSpec,
              box: Box, u_box: Box, samples: int = 10000,
              kernel_tol: float = 1e-6, seed: int = 0,
              margin_eps: float = 1e-6,
              kernel_sampler: Optional[KernelSampler] = None,
              ) -> VerificationReport:
    """Sampled check of the kernel implication.

    Wherever |B^T dV/ddelta| < kernel_tol on unit tangents, the drift term
    dV/dx (f + Bu) + dV/ddelta A delta must undercut -alpha(V) by at least
    margin_eps.  With a kernel sampler, tangents (and possibly states) are
    drawn from the known zero set instead of filtered.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    xs = box.sample(rng, samples)
    us = u_box.sample(rng, samples)
    if kernel_sampler is not None:
        x_override, deltas = kernel_sampler(rng, samples)
        if x_override is not None:
            xs = x_override
    else:
        deltas = _unit_sphere(rng, samples, sys.n)

    report = VerificationReport(
        name=f"kernel implication ({sys.name} + {metric.name}, "
             f"alpha={rate.describe()})",
        checked_samples=samples, kernel_samples=0, seed=seed)
    report.notes.append(
        f"kernel membership decided by |B^T dV/ddelta| < {kernel_tol:g} "
        "on unit tangents")
    if kernel_sampler is not None:
        report.notes.append("kernel sampled from explicit parametrization")

    for x, u, d in zip(xs, us, deltas):
        f = np.asarray(sys.f(x), dtype=float)
        B = np.asarray(sys.B(x), dtype=float)
        A = sys.jac_f(x)
        if sys.db_dx is not None:
            A = A + sum(u[i] * sys.jac_b(i, x) for i in range(sys.m))
        v = float(metric.V(x, d))
        gx = np.asarray(metric.dV_dx(x, d), dtype=float)
        gd = np.asarray(metric.dV_ddelta(x, d), dtype=float)
        if np.linalg.norm(B.T @ gd) >= kernel_tol:
            continue
        report.kernel_samples += 1
        lhs = float(gx @ (f + B @ u) + gd @ (A @ d))
        bound = -rate.alpha(v)
        if lhs > bound - margin_eps:
            report.add_violation({
                "x": x.tolist(), "u": u.tolist(), "delta": d.tolist(),
                "lhs": lhs, "bound": bound})
    if report.kernel_samples == 0:
        report.notes.append("no sampled point reached the kernel; "
                            "condition is vacuous on this box")
    return report


def _with_corners(box: Box, rng: np.random.Generator, samples: int) -> np.ndarray:
    pts = box.sample(rng, samples)
    if box.bounded and box.dim <= 6:
        pts = np.vstack([box.corners(), pts])
    return pts


def check_ratio_bound(sys: ControlAffineSystem, metric: FinslerMetric,
                      box: Box, delta_box: Box, samples: int = 1000,
                      seed: int = 0, cap: float = 1e9) -> VerificationReport:
    """Largest sampled input-sensitivity ratio |d(dV/dt)/du_i| / b on a box.

    The tangent box must exclude a neighbourhood of zero.  Box corners are
    always included, so monotone ratios attain their extremes exactly.  The
    report fails when the ratio exceeds `cap` or b underflows under a
    nonzero numerator.
    """
    if np.all(delta_box.lo <= 0) and np.all(delta_box.hi >= 0):
        raise ValueError("tangent box must exclude a ball around zero")
    rng = np.random.default_rng(seed)
    xs = _with_corners(box, rng, samples)
    deltas = _with_corners(delta_box, rng, samples)
    count = min(len(xs), len(deltas))

    report = VerificationReport(
        name=f"input-sensitivity ratio ({sys.name} + {metric.name})",
        checked_samples=count, max_ratio=0.0, ratio_cap=cap, seed=seed)
    report.notes.append("box corners included alongside random samples")

    max_ratio = 0.0
    for x, d in zip(xs[:count], deltas[:count]):
        B = np.asarray(sys.B(x), dtype=float)
        gx = np.asarray(metric.dV_dx(x, d), dtype=float)
        gd = np.asarray(metric.dV_ddelta(x, d), dtype=float)
        num = gx @ B
        if sys.db_dx is not None:
            num = num + np.array([float(gd @ (sys.jac_b(i, x) @ d))
                                  for i in range(sys.m)])
        bt_gd = B.T @ gd
        b = float(bt_gd @ bt_gd)
        num_max = float(np.max(np.abs(num)))
        if b <= 1e-300:
            if num_max > 0.0:
                max_ratio = np.inf
                report.add_violation({
                    "x": x.tolist(), "delta": d.tolist(),
                    "reason": "b underflow with nonzero numerator"})
                break
            continue
        ratio = num_max / b
        if ratio > max_ratio:
            max_ratio = ratio
    report.max_ratio = float(max_ratio)
    if not np.isfinite(max_ratio) or max_ratio > cap:
        report.notes.append(f"ratio exceeds cap {cap:g}: "
                            "control integration may fail near this region")
    return report


def dissipation_monitor(traj: Trajectory, rate: RateSpec,
                        diss_tol: float = DEFAULT_TOL.diss_tol,
                        ) -> VerificationReport:
    """Check dV/dt <= -alpha(V) + diss_tol on the recorded node series.

    Central time differences at interior time steps, interior path nodes
    only (endpoint tangent stencils are one-sided and noisier).
    """
    report = VerificationReport(name="dissipation inequality",
                                checked_samples=0)
    V = traj.node_V
    t = traj.times
    if V.shape[0] < 3 or V.shape[1] < 3:
        report.notes.append("trajectory too short to difference; "
                            "nothing checked")
        return report
    mid = V[1:-1, 1:-1]
    vdot = (V[2:, 1:-1] - V[:-2, 1:-1]) / (t[2:] - t[:-2])[:, None]
    if rate.kind == "zero":
        alpha_v = np.zeros_like(mid)
    elif rate.kind == "linear":
        alpha_v = rate.lam * mid
    else:
        alpha_v = np.vectorize(rate.fn)(mid)
    excess = vdot + alpha_v - diss_tol
    report.checked_samples = int(excess.size)
    bad = np.argwhere(excess > 0.0)
    for kk, jj in bad:
        report.add_violation({
            "t": float(t[kk + 1]), "node": int(jj + 1),
            "vdot": float(vdot[kk, jj]),
            "bound": float(-alpha_v[kk, jj] + diss_tol)})
    report.violation_count = int(bad.shape[0])
    return report


@dataclass(frozen=True)
class ConvergenceReport:
    """Fitted exponential decay of the path energy vs the predicted envelope."""

    fitted_rate: float
    predicted_rate: float
    overshoot_observed: float
    overshoot_bound: float
    window: tuple
    rate_ok: bool
    overshoot_ok: bool

    @property
    def passed(self) -> bool:
        return self.rate_ok and self.overshoot_ok

    def summary_lines(self):
        yield (f"[{'pass' if self.rate_ok else 'FAIL'}] decay rate: "
               f"fitted={self.fitted_rate:.4f} vs predicted>={self.predicted_rate:.4f}"
               f" (fit window t in [{self.window[0]:.3g}, {self.window[1]:.3g}])")
        yield (f"[{'pass' if self.overshoot_ok else 'FAIL'}] overshoot: "
               f"observed={self.overshoot_observed:.4f} vs "
               f"bound={self.overshoot_bound:.4f}")


def convergence_report(traj: Trajectory, metric: FinslerMetric,
                       rate: RateSpec) -> ConvergenceReport:
    """Fit log(energy) vs t after the transient and compare with lam/p.

    The guarantee is one-sided: the fitted decay must reach at least 90% of
    lam/p, and the peak energy ratio must stay within 5% of (c2/c1)^(1/p).
    """
    if rate.kind != "linear":
        raise RateNotExponential(
            f"rate kind {rate.kind!r} has no exponential envelope")
    if traj.times.size < 10:
        raise ValueError("need at least 10 recorded samples to fit a rate")
    t = traj.times
    e = traj.energies
    t_lo = t[0] + (t[-1] - t[0]) / 5.0
    mask = (t >= t_lo) & (e > 0.0)
    if mask.sum() < 2:
        raise ValueError("not enough positive energy samples in fit window")
    slope = np.polyfit(t[mask], np.log(e[mask]), 1)[0]
    fitted = -float(slope)
    predicted = rate.lam / metric.p
    overshoot = float(np.max(e) / e[0]) if e[0] > 0 else np.inf
    bound = (metric.c2 / metric.c1) ** (1.0 / metric.p)
    return ConvergenceReport(
        fitted_rate=fitted, predicted_rate=predicted,
        overshoot_observed=overshoot, overshoot_bound=bound,
        window=(float(t_lo), float(t[-1])),
        rate_ok=fitted >= 0.9 * predicted,
        overshoot_ok=overshoot <= 1.05 * bound,
    )
