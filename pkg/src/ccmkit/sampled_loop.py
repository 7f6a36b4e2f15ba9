"""Sampled-data closed loop: open-loop control between sample times, path
replacement at each sample time under an energy non-increase guard.

The guard compares the candidate path against the forward image at the same
instant; keeping the forward image always satisfies it with equality, so the
closed loop inherits every open-loop decrease property across sample
boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import RateSpec, RhoVariant, Trajectory, _simulate
from .geometry import DiscretizedPath, shorten_path
from .metrics import FinslerMetric
from .numerics import DEFAULT_TOL, ToleranceConfig
from .systems import ControlAffineSystem, TargetTrajectory


@dataclass(frozen=True)
class SampleSchedule:
    """Strictly increasing sample times; the first one is the run start."""

    sample_times: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.sample_times, dtype=float))
        if t.size < 1 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "sample_times", t)

    @classmethod
    def uniform(cls, start: float, horizon: float, period: float,
                ) -> "SampleSchedule":
        if period <= 0:
            raise ValueError("sample period must be positive")
        count = int(np.floor(horizon / period + 1e-9))
        return cls(start + period * np.arange(count + 1))


@dataclass(frozen=True)
class PathUpdatePolicy:
    """What to do with the forward image at a sample time."""

    kind: str  # "keep" or "shorten"
    iters: int = 0

    def __post_init__(self):
        if self.kind not in ("keep", "shorten"):
            raise ValueError(f"unknown path update policy {self.kind!r}")
        if self.kind == "shorten" and self.iters < 1:
            raise ValueError("shorten policy needs iters >= 1")

    @classmethod
    def keep_forward_image(cls) -> "PathUpdatePolicy":
        return cls(kind="keep")

    @classmethod
    def local_shorten(cls, iters: int) -> "PathUpdatePolicy":
        return cls(kind="shorten", iters=iters)


def closed_loop_run(sys: ControlAffineSystem, metric: FinslerMetric,
                    rate: RateSpec, target: TargetTrajectory, x0: np.ndarray,
                    schedule: SampleSchedule, policy: PathUpdatePolicy,
                    horizon: float, dt: float, path_count: int = 50,
                    variant: RhoVariant = RhoVariant.SONTAG_SMOOTH,
                    tol: ToleranceConfig = DEFAULT_TOL) -> Trajectory:
    """Run the sampled-data loop over `horizon` with time step `dt`.

    Sample times are snapped to the step grid.  At each one the policy
    proposes a candidate path; it replaces the forward image only when its
    energy integral is no larger (recorded per sample in
    ``trajectory.sample_events``).  With the keep policy the run is
    step-for-step identical to the open-loop run.
    """
    t = schedule.sample_times
    if abs(t[0]) > 1e-12:
        raise ValueError("schedule must start at the run start time 0")
    if t[-1] > horizon + 1e-9:
        raise ValueError("schedule extends past the horizon")
    steps = int(round(horizon / dt))
    sample_indices = set()
    for tk in t[1:]:
        idx = int(round(tk / dt))
        if abs(idx * dt - tk) > 1e-9 * max(1.0, abs(tk)):
            raise ValueError(
                f"sample time {tk:g} is not aligned with the step grid dt={dt:g}")
        if 0 < idx <= steps:
            sample_indices.add(idx)

    if policy.kind == "keep":
        def policy_fn(path: DiscretizedPath) -> DiscretizedPath:
            return path
    else:
        def policy_fn(path: DiscretizedPath) -> DiscretizedPath:
            return shorten_path(path, metric, policy.iters, tol=tol)

    traj = _simulate(sys, metric, rate, target, x0, horizon, dt, path_count,
                     variant, tol, sample_indices=sample_indices,
                     policy_fn=policy_fn)
    traj.meta["schedule"] = [float(v) for v in t]
    traj.meta["policy"] = (policy.kind if policy.kind == "keep"
                           else f"shorten({policy.iters})")
    return traj
