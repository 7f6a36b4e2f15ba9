"""Differential feedback synthesis and open-loop tracking runs.

The construction: along a path c(s) from the target state to the current
state, a pointwise gain shapes the tangent dynamics to dissipate V.  The two
scalars

    a = dV/dx (f + B u) + dV/ddelta A delta + alpha(V)
    b = | B^T (dV/ddelta)^T |^2

feed a universal-formula gain rho, the differential feedback
k_delta = -rho B^T (dV/ddelta)^T, and the path control v(s) solving
dv/ds = k_delta(c(s), c_s(s), v(s)) with v(0) = u*.  Advancing every path
node one time step under its own v(s) produces the forward image; the input
actually applied to the plant is v(1).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (ConditionViolated, NonSmoothAtZero, NumericalBlowup,
                     ShapeError)
from .geometry import (DiscretizedPath, energy_integral, make_straight_path,
                       path_from_nodes)
from .metrics import FinslerMetric
from .numerics import DEFAULT_TOL, Grid1D, ToleranceConfig, rk4_step
from .systems import ControlAffineSystem, TargetTrajectory


class RhoVariant(enum.Enum):
    """Gain formula selection.

    SONTAG_SMOOTH applies the universal formula whenever b is meaningfully
    positive, regardless of the sign of a; it is smooth there.  The piecewise
    alternative zeroes the gain for a < 0, which is discontinuous across
    a = 0 when b > 0, and is kept for comparison.
    """

    SONTAG_SMOOTH = "sontag"
    PAPER_PIECEWISE = "piecewise"


@dataclass(frozen=True)
class RateSpec:
    """Dissipation rate alpha: zero, linear alpha(V) = lam*V, or a class-K fn."""

    kind: str
    lam: float = 0.0
    fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "class_k"):
            raise ValueError(f"unknown rate kind {self.kind!r}")
        if self.kind == "linear" and self.lam <= 0:
            raise ValueError("linear rate needs lam > 0")
        if self.kind == "class_k":
            if self.fn is None:
                raise ValueError("class_k rate needs a function")
            if abs(self.fn(0.0)) > 1e-12:
                raise ValueError("class-K function must vanish at 0")
            probes = [self.fn(v) for v in (0.1, 0.5, 1.0, 5.0, 10.0)]
            if any(b <= a for a, b in zip(probes, probes[1:])):
                raise ValueError("class-K function must be strictly increasing")

    @classmethod
    def zero(cls) -> "RateSpec":
        return cls(kind="zero")

    @classmethod
    def linear(cls, lam: float) -> "RateSpec":
        return cls(kind="linear", lam=lam)

    @classmethod
    def class_k(cls, fn: Callable[[float], float]) -> "RateSpec":
        return cls(kind="class_k", fn=fn)

    def alpha(self, v: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear":
            return self.lam * v
        return self.fn(v)  # type: ignore[misc]

    def describe(self) -> str:
        if self.kind == "linear":
            return f"linear(lam={self.lam:g})"
        return self.kind


@dataclass(frozen=True)
class ControlProfile:
    """Path control v(s_j) on the path grid; v at s=0 equals the supplied u*."""

    s_grid: Grid1D
    values: np.ndarray


def _ab_terms(sys: ControlAffineSystem, metric: FinslerMetric, rate: RateSpec,
              x: np.ndarray, delta: np.ndarray, u: np.ndarray):
    """(a, b, B^T dV/ddelta) without argument validation; hot path."""
    f = np.asarray(sys.f(x), dtype=float)
    B = np.asarray(sys.B(x), dtype=float)
    A = sys.jac_f(x)
    if sys.db_dx is not None:
        A = A + sum(u[i] * sys.jac_b(i, x) for i in range(sys.m))
    if metric.requires_nonzero_delta and not np.any(delta):
        raise NonSmoothAtZero(
            f"metric {metric.name!r} has no gradient at delta = 0")
    v = float(metric.V(x, delta))
    gx = np.asarray(metric.dV_dx(x, delta), dtype=float)
    gd = np.asarray(metric.dV_ddelta(x, delta), dtype=float)
    a = float(gx @ (f + B @ u) + gd @ (A @ delta) + rate.alpha(v))
    bt_gd = B.T @ gd
    b = float(bt_gd @ bt_gd)
    return a, b, bt_gd


def eval_ab(sys: ControlAffineSystem, metric: FinslerMetric, rate: RateSpec,
            x: np.ndarray, delta: np.ndarray, u: np.ndarray,
            ) -> tuple[float, float]:
    """The drift scalar a and control-effectiveness scalar b at (x, delta, u)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape != (sys.n,) or delta.shape != (sys.n,) or u.shape != (sys.m,):
        raise ShapeError(
            f"shapes x={x.shape}, delta={delta.shape}, u={u.shape} do not "
            f"match n={sys.n}, m={sys.m}")
    a, b, _ = _ab_terms(sys, metric, rate, x, delta, u)
    return a, b


def eval_rho(a: float, b: float,
             variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
             b_eps: float = DEFAULT_TOL.b_eps) -> float:
    """Universal-formula gain rho >= 0.

    b below b_eps certifies the gain cannot act; that is only admissible
    where the drift is already dissipative (a effectively negative), so
    b ~ 0 together with a >= b_eps raises ConditionViolated.
    """
    if b <= b_eps:
        if a >= b_eps:
            raise ConditionViolated(
                f"b = {b:.3e} ~ 0 while a = {a:.3e} >= 0: "
                "no gain can make this point dissipative", a=a, b=b)
        return 0.0
    if variant is RhoVariant.PAPER_PIECEWISE and a < 0.0:
        return 0.0
    return (a + math.sqrt(a * a + b * b)) / b


def eval_k_delta(sys: ControlAffineSystem, metric: FinslerMetric,
                 rate: RateSpec, x: np.ndarray, delta: np.ndarray,
                 u: np.ndarray,
                 variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
                 tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Differential feedback k_delta = -rho(x, delta, u) B^T (dV/ddelta)^T."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    a, b, bt_gd = _ab_terms(sys, metric, rate, x, delta, u)
    rho = eval_rho(a, b, variant, tol.b_eps)
    return -rho * bt_gd


def _march_profile(kd: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
                   path: DiscretizedPath, u0: np.ndarray) -> np.ndarray:
    """RK4 march of dv/ds = kd(c, c_s, v) along the path grid."""
    count = path.count
    h = path.s_grid.step
    values = np.empty((count, u0.size))
    v = u0.astype(float).copy()
    values[0] = v
    nodes, tangents = path.nodes, path.tangents
    for j in range(count - 1):
        c0, t0 = nodes[j], tangents[j]
        c1, t1 = nodes[j + 1], tangents[j + 1]
        cm, tm = 0.5 * (c0 + c1), 0.5 * (t0 + t1)
        try:
            k1 = kd(c0, t0, v)
            k2 = kd(cm, tm, v + 0.5 * h * k1)
            k3 = kd(cm, tm, v + 0.5 * h * k2)
            k4 = kd(c1, t1, v + h * k3)
        except ConditionViolated as e:
            raise ConditionViolated(
                f"stabilizability condition failed between path nodes {j} and "
                f"{j + 1} (s = {j * h:.4f}): {e}",
                a=e.a, b=e.b, x=c0.copy(), delta=t0.copy(),
                node_index=j, s=j * h) from e
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(v)):
            raise NumericalBlowup(
                f"path control marched to non-finite values at node {j + 1}")
        values[j + 1] = v
    return values


def integrate_kp(sys: ControlAffineSystem, metric: FinslerMetric,
                 rate: RateSpec, path: DiscretizedPath, u_star: np.ndarray,
                 variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
                 tol: ToleranceConfig = DEFAULT_TOL) -> ControlProfile:
    """Solve the path-control initial-value problem v(0) = u* along the path."""
    u0 = np.atleast_1d(np.asarray(u_star, dtype=float))
    if u0.shape != (sys.m,):
        raise ShapeError(f"u* has shape {u0.shape}, expected ({sys.m},)")
    b_eps = tol.b_eps

    def kd(c, t, v):
        a, b, bt_gd = _ab_terms(sys, metric, rate, c, t, v)
        rho = eval_rho(a, b, variant, b_eps)
        return -rho * bt_gd

    return ControlProfile(path.s_grid, _march_profile(kd, path, u0))


def _advance_nodes(sys: ControlAffineSystem, path: DiscretizedPath,
                   profile: ControlProfile, dt: float,
                   tol: ToleranceConfig) -> DiscretizedPath:
    """One RK4 time step of every node under its own path control value."""
    new_nodes = np.empty_like(path.nodes)
    f, B = sys.f, sys.B
    for j in range(path.count):
        v = profile.values[j]
        new_nodes[j] = rk4_step(
            lambda y: np.asarray(f(y), dtype=float)
            + np.asarray(B(y), dtype=float) @ v,
            path.nodes[j], dt)
    clamped = False
    if sys.domain.bounded:
        clipped = sys.domain.clip(new_nodes)
        clamped = bool(np.any(clipped != new_nodes))
        new_nodes = clipped
    return path_from_nodes(new_nodes, tol, strict=False, clamped=clamped)


def propagate_forward_image(sys: ControlAffineSystem, metric: FinslerMetric,
                            rate: RateSpec, path: DiscretizedPath,
                            u_star_t: np.ndarray, dt: float,
                            variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
                            tol: ToleranceConfig = DEFAULT_TOL,
                            ) -> tuple[DiscretizedPath, np.ndarray]:
    """Advance the whole path by dt and return it with the applied control.

    The applied control is the path control at s = 1 (the current-state end).
    A dt of zero returns the path unchanged, control still computed.  Loss of
    regularity or a domain clamp is flagged on the returned path rather than
    raised.
    """
    profile = integrate_kp(sys, metric, rate, path, u_star_t, variant, tol)
    applied = profile.values[-1].copy()
    if dt == 0.0:
        return path, applied
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    return _advance_nodes(sys, path, profile, dt, tol), applied


@dataclass
class Trajectory:
    """Time series recorded by a tracking run.

    ``node_V`` holds V(c(t, s_j), c_s(t, s_j)) for every path node j at every
    recorded time; ``states`` is the current-state end of the path (s = 1).
    ``dist_est`` is the distance upper bound c1^(-1/p) * energy.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    energies: np.ndarray
    node_V: np.ndarray
    dist_est: np.ndarray
    final_path: Optional[DiscretizedPath] = None
    sample_events: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    aborted: Optional[str] = None
    meta: dict = field(default_factory=dict)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def peak_control(self) -> float:
        return float(np.max(np.abs(self.controls)))


def _record_nodes(metric: FinslerMetric, path: DiscretizedPath,
                  out_row: np.ndarray) -> None:
    V = metric.V
    for j in range(path.count):
        out_row[j] = V(path.nodes[j], path.tangents[j])


def _simulate(sys: ControlAffineSystem, metric: FinslerMetric, rate: RateSpec,
              target: TargetTrajectory, x0: np.ndarray, horizon: float,
              dt: float, path_count: int, variant: RhoVariant,
              tol: ToleranceConfig,
              sample_indices: Optional[set] = None,
              policy_fn: Optional[Callable[[DiscretizedPath], DiscretizedPath]] = None,
              ) -> Trajectory:
    """Shared stepping loop for open-loop and sampled closed-loop runs.

    When ``sample_indices`` is given, the path reaching such a step is the
    forward image; ``policy_fn`` proposes a replacement that is adopted only
    if its energy does not exceed the forward image's.
    """
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    if path_count < 2:
        raise ValueError("path needs at least 2 nodes")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    path = make_straight_path(target.x_star(0.0), x0, path_count, tol)

    steps = int(round(horizon / dt))
    times = np.arange(steps + 1) * dt
    states = np.empty((steps + 1, sys.n))
    controls = np.zeros((steps + 1, sys.m))
    energies = np.empty(steps + 1)
    node_V = np.empty((steps + 1, path_count))
    events: list = []
    notes: list = []
    aborted = None
    inv_p = 1.0 / metric.p
    h = path.s_grid.step
    w = np.full(path_count, h)
    w[0] = w[-1] = h / 2.0
    flagged_irregular = False
    flagged_clamped = False
    k_done = -1

    for k in range(steps + 1):
        t = times[k]
        if (sample_indices and k in sample_indices and k > 0
                and policy_fn is not None):
            forward = path
            energy_forward = energy_integral(forward, metric, tol)
            try:
                candidate = policy_fn(forward)
                energy_candidate = energy_integral(candidate, metric, tol)
            except (NonSmoothAtZero, NumericalBlowup) as e:
                candidate, energy_candidate = forward, energy_forward
                notes.append(f"t={t:.6g}: path replacement failed ({e}); "
                             "forward image kept")
            adopted = energy_candidate <= energy_forward
            if adopted:
                path = candidate
            events.append(SampleEvent(t, adopted, energy_forward,
                                      energy_candidate))
        _record_nodes(metric, path, node_V[k])
        energies[k] = float(np.dot(w, node_V[k] ** inv_p))
        states[k] = path.nodes[-1]
        try:
            profile = integrate_kp(sys, metric, rate, path,
                                   np.atleast_1d(np.asarray(target.u_star(t),
                                                            dtype=float)),
                                   variant, tol)
            controls[k] = profile.values[-1]
            if k < steps:
                path = _advance_nodes(sys, path, profile, dt, tol)
                if path.clamped and not flagged_clamped:
                    notes.append(f"t={t:.6g}: state clamped to domain boundary")
                    flagged_clamped = True
                if not path.regular and not flagged_irregular:
                    notes.append(f"t={t:.6g}: path regularity lost "
                                 "(tangent below floor)")
                    flagged_irregular = True
        except (ConditionViolated, NonSmoothAtZero, NumericalBlowup) as e:
            if (isinstance(e, NonSmoothAtZero)
                    and energies[k] <= 1e-6 * (1.0 + energies[0])):
                # tangents vanished because the path collapsed onto the
                # target; tracking finished rather than failed
                controls[k] = 0.0
                notes.append(f"t={t:.6g}: path energy ~ 0; converged to "
                             "target, stopping early")
            else:
                aborted = f"run aborted at t={t:.6g}: {e}"
            k_done = k
            break
        k_done = k

    last = k_done + 1
    c1_fac = metric.c1 ** (-inv_p)
    return Trajectory(
        times=times[:last], states=states[:last], controls=controls[:last],
        energies=energies[:last], node_V=node_V[:last],
        dist_est=c1_fac * energies[:last],
        final_path=path, sample_events=events, notes=notes, aborted=aborted,
        meta={"system": sys.name, "metric": metric.name,
              "rate": rate.describe(), "variant": variant.value,
              "dt": dt, "horizon": horizon, "path_count": path_count},
    )


@dataclass(frozen=True)
class SampleEvent:
    """Outcome of one path-replacement decision at a sample time."""

    time: float
    adopted: bool
    energy_forward: float
    energy_candidate: float


def open_loop_run(sys: ControlAffineSystem, metric: FinslerMetric,
                  rate: RateSpec, target: TargetTrajectory, x0: np.ndarray,
                  horizon: float, dt: float, path_count: int = 50,
                  variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
                  tol: ToleranceConfig = DEFAULT_TOL) -> Trajectory:
    """Track the target from x0: straight initial path, then forward imaging.

    Records, at every time step, the current state (path end), the applied
    control, the path's energy integral, and V at every path node.  A
    stabilizability failure aborts the run and leaves the partial trajectory
    with a diagnostic in ``aborted``.
    """
    return _simulate(sys, metric, rate, target, x0, horizon, dt, path_count,
                     variant, tol)
