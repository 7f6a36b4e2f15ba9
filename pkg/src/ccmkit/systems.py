"""Control-affine systems dx/dt = f(x) + B(x) u and their linearizations.

Ships three built-in systems used throughout the tests and the CLI:

``example1``   planar saddle, f = diag(1, -1) x, single input on the first axis
``pendulum``   overdamped pendulum d(theta)/dt = -sin(theta) + u on [0, pi]
``example3``   scalar dx/dt = -x + x^2 u, whose input gain dies at the origin
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ShapeError, UnknownExample
from .numerics import DEFAULT_TOL, finite_diff_jacobian


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in R^n; entries may be +-inf for unbounded axes."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box has lo > hi on some axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> "Box":
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)))

    @classmethod
    def unbounded(cls, dim: int) -> "Box":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform samples, shape (count, dim). Requires a bounded box."""
        if not self.bounded:
            raise ValueError("cannot sample an unbounded box")
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def corners(self) -> np.ndarray:
        """All 2^dim vertices (bounded boxes only), shape (2^dim, dim)."""
        if not self.bounded:
            raise ValueError("an unbounded box has no corners")
        grids = np.meshgrid(*[(self.lo[k], self.hi[k]) for k in range(self.dim)],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class ControlAffineSystem:
    """Dynamics f, input matrix B, and their state Jacobians.

    ``df_dx`` maps x to the n x n Jacobian of f.  ``db_dx`` holds one Jacobian
    function per input column, or None when every column of B is constant in x
    (the common case; it lets hot loops skip the sum entirely).  When analytic
    Jacobians are not supplied, central differences are used.
    """

    name: str
    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    B: Callable[[np.ndarray], np.ndarray]
    df_dx: Optional[Callable[[np.ndarray], np.ndarray]] = None
    db_dx: Optional[Sequence[Callable[[np.ndarray], np.ndarray]]] = None
    domain: Box = None  # type: ignore[assignment]
    fd_step: float = DEFAULT_TOL.fd_step

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("state and input dimensions must be positive")
        if self.domain is None:
            object.__setattr__(self, "domain", Box.unbounded(self.n))
        if self.domain.dim != self.n:
            raise ValueError("domain dimension does not match state dimension")

    def jac_f(self, x: np.ndarray) -> np.ndarray:
        if self.df_dx is not None:
            return np.asarray(self.df_dx(x), dtype=float)
        return finite_diff_jacobian(self.f, x, self.fd_step)

    def jac_b(self, i: int, x: np.ndarray) -> np.ndarray:
        """Jacobian of the i-th column of B; zeros when db_dx is None."""
        if self.db_dx is None:
            return np.zeros((self.n, self.n))
        return np.asarray(self.db_dx[i](x), dtype=float)


@dataclass(frozen=True)
class TargetTrajectory:
    """Feasible reference (x*(t), u*(t)) the controller steers toward."""

    x_star: Callable[[float], np.ndarray]
    u_star: Callable[[float], np.ndarray]


def constant_target(x: np.ndarray, u: np.ndarray) -> TargetTrajectory:
    """Target pinned at a fixed state/control pair (must be an equilibrium)."""
    xc = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    uc = np.atleast_1d(np.asarray(u, dtype=float)).copy()
    return TargetTrajectory(lambda t: xc, lambda t: uc)


def _check_shapes(sys: ControlAffineSystem, x: np.ndarray,
                  u: Optional[np.ndarray] = None) -> None:
    if x.shape != (sys.n,):
        raise ShapeError(f"state has shape {x.shape}, expected ({sys.n},)")
    if u is not None and u.shape != (sys.m,):
        raise ShapeError(f"control has shape {u.shape}, expected ({sys.m},)")


def eval_dynamics(sys: ControlAffineSystem, x: np.ndarray,
                  u: np.ndarray) -> np.ndarray:
    """dx/dt = f(x) + B(x) u."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_shapes(sys, x, u)
    return np.asarray(sys.f(x), dtype=float) + np.asarray(sys.B(x), dtype=float) @ u


def eval_A(sys: ControlAffineSystem, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Differential-dynamics matrix A = df/dx + sum_i (db_i/dx) u_i."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_shapes(sys, x, u)
    A = sys.jac_f(x)
    if sys.db_dx is not None:
        A = A + sum(u[i] * sys.jac_b(i, x) for i in range(sys.m))
    return A


def eval_differential(sys: ControlAffineSystem, x: np.ndarray, u: np.ndarray,
                      delta_x: np.ndarray, delta_u: np.ndarray) -> np.ndarray:
    """Tangent dynamics d(delta_x)/dt = A(x, u) delta_x + B(x) delta_u."""
    delta_x = np.atleast_1d(np.asarray(delta_x, dtype=float))
    delta_u = np.atleast_1d(np.asarray(delta_u, dtype=float))
    if delta_x.shape != (sys.n,) or delta_u.shape != (sys.m,):
        raise ShapeError(
            f"tangent shapes {delta_x.shape}/{delta_u.shape} do not match "
            f"n={sys.n}, m={sys.m}")
    A = eval_A(sys, x, u)
    B = np.asarray(sys.B(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float)
    return A @ delta_x + B @ delta_u


def trajectory_residual(sys: ControlAffineSystem, target: TargetTrajectory,
                        t: float, fd_step: float = 1e-6) -> float:
    """Norm of d(x*)/dt - f(x*) - B(x*) u* at time t (finite differences in t)."""
    xdot = (np.asarray(target.x_star(t + fd_step), dtype=float)
            - np.asarray(target.x_star(t - fd_step), dtype=float)) / (2 * fd_step)
    rhs = eval_dynamics(sys, target.x_star(t), target.u_star(t))
    return float(np.linalg.norm(xdot - rhs))


def load_example(name: str) -> ControlAffineSystem:
    """Return one of the built-in systems by name."""
    if name == "example1":
        A0 = np.diag([1.0, -1.0])
        B0 = np.array([[1.0], [0.0]])
        return ControlAffineSystem(
            name="example1", n=2, m=1,
            f=lambda x: A0 @ x,
            B=lambda x: B0,
            df_dx=lambda x: A0,
            db_dx=None,
        )
    if name == "pendulum":
        return ControlAffineSystem(
            name="pendulum", n=1, m=1,
            f=lambda x: np.array([-np.sin(x[0])]),
            B=lambda x: np.array([[1.0]]),
            df_dx=lambda x: np.array([[-np.cos(x[0])]]),
            db_dx=None,
            domain=Box(np.array([0.0]), np.array([np.pi])),
        )
    if name == "example3":
        return ControlAffineSystem(
            name="example3", n=1, m=1,
            f=lambda x: -x,
            B=lambda x: np.array([[x[0] ** 2]]),
            df_dx=lambda x: np.array([[-1.0]]),
            db_dx=[lambda x: np.array([[2.0 * x[0]]])],
        )
    raise UnknownExample(f"no built-in system named {name!r}")


def uncontrollable_line() -> ControlAffineSystem:
    """Diagnostic fixture: unstable dx/dt = x with a dead input channel."""
    return ControlAffineSystem(
        name="uncontrollable", n=1, m=1,
        f=lambda x: x.copy(),
        B=lambda x: np.zeros((1, 1)),
        df_dx=lambda x: np.array([[1.0]]),
        db_dx=None,
    )


FIXTURE_SYSTEMS = {
    "uncontrollable": uncontrollable_line,
}


def resolve_system(name: str) -> ControlAffineSystem:
    """Built-in systems plus the diagnostic fixtures, by name."""
    if name in FIXTURE_SYSTEMS:
        return FIXTURE_SYSTEMS[name]()
    return load_example(name)
