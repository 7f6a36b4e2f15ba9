"""Candidate Finsler-Lyapunov functions V(x, delta) and their structure F.

A metric bundles V, its gradients, the structure F (defaulting to V^(1/p)),
and the sandwich constants c1 <= c2 tying V to F^p.  Built-ins:

``quartic2d``           V = d1^4 + d2^4, F = V^(1/4)
``euclidean2d``         V = |d|^2, F = |d|
``quadratic_pendulum``  V = 4 d^2 against the Euclidean structure F = |d|
``randers_pendulum``    V = (2|d| - d)^2, the square of an asymmetric
                        Randers-type structure F = 2|d| - d
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import InvalidMetric, NonSmoothAtZero, UnknownMetric
from .systems import Box


@dataclass(frozen=True)
class FinslerMetric:
    """V, its gradients, and the Finsler structure it is sandwiched by."""

    name: str
    dim: int
    p: float
    c1: float
    c2: float
    V: Callable[[np.ndarray, np.ndarray], float]
    dV_dx: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dV_ddelta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    F: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    requires_nonzero_delta: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("homogeneity degree p must be >= 1")
        if not (0 < self.c1 <= self.c2):
            raise ValueError("need 0 < c1 <= c2")


class MetricEval(NamedTuple):
    V: float
    dV_dx: np.ndarray
    dV_ddelta: np.ndarray


def eval_metric(metric: FinslerMetric, x: np.ndarray,
                delta: np.ndarray) -> MetricEval:
    """Value and both gradients of V at (x, delta)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if metric.requires_nonzero_delta and not np.any(delta):
        raise NonSmoothAtZero(
            f"metric {metric.name!r} has no gradient at delta = 0")
    return MetricEval(
        float(metric.V(x, delta)),
        np.asarray(metric.dV_dx(x, delta), dtype=float),
        np.asarray(metric.dV_ddelta(x, delta), dtype=float),
    )


def eval_F(metric: FinslerMetric, x: np.ndarray, delta: np.ndarray) -> float:
    """Finsler structure F(x, delta); defaults to V^(1/p)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if metric.F is not None:
        return float(metric.F(x, delta))
    v = float(metric.V(x, delta))
    if v < 0:
        raise InvalidMetric(
            f"metric {metric.name!r} returned V = {v} < 0 at delta = {delta!r}")
    return v ** (1.0 / metric.p)


@dataclass(frozen=True)
class AxiomSampleSpec:
    """Where and how much to sample when probing the structure axioms."""

    x_box: Box
    delta_box: Box
    count: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be >= 1")

    @classmethod
    def cube(cls, dim: int, half_width: float = 2.0, count: int = 1000,
             seed: int = 0) -> "AxiomSampleSpec":
        box = Box.cube(-half_width, half_width, dim)
        return cls(x_box=box, delta_box=box, count=count, seed=seed)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    checked: int
    worst: float
    witness: Optional[dict] = None


@dataclass(frozen=True)
class AxiomReport:
    metric_name: str
    checks: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def summary_lines(self):
        for name, c in self.checks.items():
            status = "pass" if c.passed else "FAIL"
            line = f"{name:<14} {status}  checked={c.checked}  worst={c.worst:.3e}"
            if c.witness is not None:
                line += f"  witness={c.witness}"
            yield line


_REL_TOL = 1e-9
_PARALLEL_SIN = 1e-3  # pairs closer than ~1 mrad to a common line are skipped


def _nonzero_deltas(spec: AxiomSampleSpec, rng: np.random.Generator,
                    count: int, floor: float = 1e-3) -> np.ndarray:
    box = spec.delta_box
    reach = float(np.linalg.norm(np.maximum(np.abs(box.lo), np.abs(box.hi))))
    if reach <= 0.0:
        raise ValueError("tangent sample box is degenerate at zero")
    floor = min(floor, 0.25 * reach)
    deltas = box.sample(rng, count)
    bad = np.linalg.norm(deltas, axis=1) < floor
    while np.any(bad):
        deltas[bad] = box.sample(rng, int(bad.sum()))
        bad = np.linalg.norm(deltas, axis=1) < floor
    return deltas


def check_finsler_axioms(metric: FinslerMetric,
                         spec: AxiomSampleSpec) -> AxiomReport:
    """Sampled pass/fail verdicts for the four structure axioms plus the
    c1 F^p <= V <= c2 F^p sandwich.

    Violations are reported, never raised; each check records its worst
    offending sample.
    """
    rng = np.random.default_rng(spec.seed)
    xs = spec.x_box.sample(rng, spec.count)
    deltas = _nonzero_deltas(spec, rng, spec.count)
    lambdas = rng.uniform(0.0, 10.0, size=spec.count)
    lambdas[lambdas == 0.0] = 10.0  # lambda drawn from (0, 10]
    deltas_b = _nonzero_deltas(spec, rng, spec.count)

    checks: dict = {}

    # axiom 1: F is C1 away from delta = 0 -- probed as finiteness of F and
    # of a small central-difference gradient in delta
    worst, witness, bad = 0.0, None, 0
    for x, d in zip(xs, deltas):
        vals = [eval_F(metric, x, d)]
        h = 1e-6 * max(1.0, float(np.linalg.norm(d)))
        for k in range(metric.dim):
            e = np.zeros(metric.dim)
            e[k] = h
            vals.append((eval_F(metric, x, d + e) - eval_F(metric, x, d - e)) / (2 * h))
        if not np.all(np.isfinite(vals)):
            bad += 1
            worst = np.inf
            witness = witness or {"x": x.tolist(), "delta": d.tolist()}
    checks["smooth_c1"] = CheckResult(bad == 0, len(xs), worst, witness)

    # axiom 2: F(x, delta) > 0 for delta != 0
    worst, witness, bad = 0.0, None, 0
    for x, d in zip(xs, deltas):
        fv = eval_F(metric, x, d)
        viol = -fv
        if fv <= 0.0:
            bad += 1
            if viol > worst or witness is None:
                worst, witness = viol, {"x": x.tolist(), "delta": d.tolist(), "F": fv}
    checks["positivity"] = CheckResult(bad == 0, len(xs), max(worst, 0.0),
                                       witness if bad else None)

    # axiom 3: positive homogeneity F(x, lam d) = lam F(x, d)
    worst, witness, bad = 0.0, None, 0
    for x, d, lam in zip(xs, deltas, lambdas):
        f1 = eval_F(metric, x, d)
        f2 = eval_F(metric, x, lam * d)
        viol = abs(f2 - lam * f1) - _REL_TOL * (1.0 + lam * abs(f1))
        if viol > 0.0:
            bad += 1
            if viol > worst:
                worst, witness = viol, {"x": x.tolist(), "delta": d.tolist(),
                                        "lambda": float(lam)}
    checks["homogeneity"] = CheckResult(bad == 0, len(xs), max(worst, 0.0),
                                        witness if bad else None)

    # axiom 4: strict subadditivity for non-parallel tangent pairs
    worst, witness, bad, used = 0.0, None, 0, 0
    for x, da, db in zip(xs, deltas, deltas_b):
        na, nb = np.linalg.norm(da), np.linalg.norm(db)
        cos = float(da @ db) / (na * nb)
        if 1.0 - cos * cos < _PARALLEL_SIN ** 2:
            continue
        used += 1
        fa, fb = eval_F(metric, x, da), eval_F(metric, x, db)
        fs = eval_F(metric, x, da + db)
        viol = fs - (fa + fb) * (1.0 - _REL_TOL)
        if viol > 0.0:
            bad += 1
            if viol > worst:
                worst, witness = viol, {"x": x.tolist(), "da": da.tolist(),
                                        "db": db.tolist()}
    checks["subadditivity"] = CheckResult(bad == 0, used, max(worst, 0.0),
                                          witness if bad else None)

    # sandwich bounds c1 F^p <= V <= c2 F^p with declared constants
    worst, witness, bad = 0.0, None, 0
    for x, d in zip(xs, deltas):
        fv = eval_F(metric, x, d)
        v = float(metric.V(x, d))
        slack = _REL_TOL * (1.0 + abs(v))
        viol = max(metric.c1 * fv ** metric.p - v - slack,
                   v - metric.c2 * fv ** metric.p - slack)
        if viol > 0.0:
            bad += 1
            if viol > worst:
                worst, witness = viol, {"x": x.tolist(), "delta": d.tolist(),
                                        "V": v, "F": fv}
    checks["bounds"] = CheckResult(bad == 0, len(xs), max(worst, 0.0),
                                   witness if bad else None)

    return AxiomReport(metric.name, checks)


def _zero_grad(dim: int):
    return lambda x, d: np.zeros(dim)


def load_metric(name: str) -> FinslerMetric:
    """Return one of the built-in metrics by name."""
    if name == "quartic2d":
        return FinslerMetric(
            name="quartic2d", dim=2, p=4.0, c1=1.0, c2=1.0,
            V=lambda x, d: float(d[0] ** 4 + d[1] ** 4),
            dV_dx=_zero_grad(2),
            dV_ddelta=lambda x, d: 4.0 * d ** 3,
        )
    if name == "euclidean2d":
        return FinslerMetric(
            name="euclidean2d", dim=2, p=2.0, c1=1.0, c2=1.0,
            V=lambda x, d: float(d @ d),
            dV_dx=_zero_grad(2),
            dV_ddelta=lambda x, d: 2.0 * d,
            F=lambda x, d: float(np.linalg.norm(d)),
        )
    if name == "quadratic_pendulum":
        return FinslerMetric(
            name="quadratic_pendulum", dim=1, p=2.0, c1=4.0, c2=4.0,
            V=lambda x, d: float(4.0 * d[0] ** 2),
            dV_dx=_zero_grad(1),
            dV_ddelta=lambda x, d: 8.0 * d,
            F=lambda x, d: float(abs(d[0])),
        )
    if name == "randers_pendulum":
        # c1, c2 sandwich V against the Euclidean structure |d|; against its
        # own F = sqrt(V) the bounds hold with constants 1.
        return FinslerMetric(
            name="randers_pendulum", dim=1, p=2.0, c1=1.0, c2=9.0,
            V=_randers_V,
            dV_dx=_zero_grad(1),
            dV_ddelta=_randers_dV,
            F=lambda x, d: float(2.0 * abs(d[0]) - d[0]),
            requires_nonzero_delta=True,
        )
    raise UnknownMetric(f"no built-in metric named {name!r}")


def _randers_V(x, d):
    r = 2.0 * abs(d[0]) - d[0]
    return float(r * r)


def _randers_dV(x, d):
    s = np.sign(d[0])
    return np.array([2.0 * (2.0 * abs(d[0]) - d[0]) * (2.0 * s - 1.0)])


def quadratic_line() -> FinslerMetric:
    """V = d^2 on the line; the textbook scalar storage function."""
    return FinslerMetric(
        name="quadratic_line", dim=1, p=2.0, c1=1.0, c2=1.0,
        V=lambda x, d: float(d[0] ** 2),
        dV_dx=_zero_grad(1),
        dV_ddelta=lambda x, d: 2.0 * d,
        F=lambda x, d: float(abs(d[0])),
    )


def broken_signed_line() -> FinslerMetric:
    """Deliberately ill-formed fixture whose F can go negative."""
    return FinslerMetric(
        name="broken_signed_line", dim=1, p=2.0, c1=1.0, c2=1.0,
        V=lambda x, d: float(d[0] ** 2),
        dV_dx=_zero_grad(1),
        dV_ddelta=lambda x, d: 2.0 * d,
        F=lambda x, d: float(d[0]),
    )


FIXTURE_METRICS = {
    "quadratic_line": quadratic_line,
    "broken_signed_line": broken_signed_line,
}


def resolve_metric(name: str) -> FinslerMetric:
    """Built-in metrics plus the diagnostic fixtures, by name."""
    if name in FIXTURE_METRICS:
        return FIXTURE_METRICS[name]()
    return load_metric(name)
