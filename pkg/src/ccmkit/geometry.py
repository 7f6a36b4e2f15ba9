"""Discretized curves, path integrals, distance bounds, and local shortening.

A path is a sampled regular curve c(s) on s in [0, 1] whose first node is the
source endpoint and whose last node is the target endpoint.  Distances are
always reported as upper bounds obtained by optimizing such a path; no claim
of exactness is made.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (DegeneratePath, InvalidMetric, NonSmoothAtZero,
                     NumericalBlowup)
from .metrics import FinslerMetric, eval_F
from .numerics import DEFAULT_TOL, Grid1D, ToleranceConfig, trapezoid_integral
from .systems import Box


@dataclass(frozen=True)
class DiscretizedPath:
    """Curve samples c(s_j) with tangents c_s(s_j) on a uniform s-grid.

    ``regular`` is False when some tangent fell below the regularity floor at
    construction (diagnostic paths only; strict constructors raise instead).
    ``clamped`` is set when nodes were clipped into a system domain box.
    """

    s_grid: Grid1D
    nodes: np.ndarray
    tangents: np.ndarray
    regular: bool = True
    clamped: bool = False

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        tangents = np.atleast_2d(np.asarray(self.tangents, dtype=float))
        if nodes.shape != tangents.shape or nodes.shape[0] != self.s_grid.count:
            raise ValueError("nodes/tangents must be (count, dim) arrays")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "tangents", tangents)

    @property
    def count(self) -> int:
        return self.nodes.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def start(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def end(self) -> np.ndarray:
        return self.nodes[-1]


def _fd_tangents(nodes: np.ndarray, step: float) -> np.ndarray:
    """Central-difference tangents, 2nd-order one-sided at the endpoints."""
    t = np.empty_like(nodes)
    t[1:-1] = (nodes[2:] - nodes[:-2]) / (2.0 * step)
    t[0] = (-3.0 * nodes[0] + 4.0 * nodes[1] - nodes[2]) / (2.0 * step)
    t[-1] = (3.0 * nodes[-1] - 4.0 * nodes[-2] + nodes[-3]) / (2.0 * step)
    return t


def path_from_nodes(nodes: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL,
                    strict: bool = True, clamped: bool = False) -> DiscretizedPath:
    """Build a path from node positions, tangents by finite differences.

    With ``strict`` a sub-regular tangent raises DegeneratePath; otherwise the
    path is returned flagged ``regular=False``.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    if nodes.shape[0] < 3:
        # one-sided stencils need 3 nodes; fall back to the chord
        chord = np.tile(nodes[-1] - nodes[0], (nodes.shape[0], 1))
        tangents = chord
    else:
        tangents = _fd_tangents(nodes, 1.0 / (nodes.shape[0] - 1))
    regular = bool(np.min(np.linalg.norm(tangents, axis=1)) >= tol.reg_eps)
    if strict and not regular:
        raise DegeneratePath(
            "tangent norm below regularity floor "
            f"{tol.reg_eps:g} (degenerate or self-folding node layout)")
    return DiscretizedPath(Grid1D(nodes.shape[0]), nodes, tangents,
                           regular=regular, clamped=clamped)


def make_straight_path(x_a: np.ndarray, x_b: np.ndarray, count: int,
                       tol: ToleranceConfig = DEFAULT_TOL) -> DiscretizedPath:
    """Chord from x_a to x_b with `count` nodes and constant tangent x_b - x_a."""
    x_a = np.atleast_1d(np.asarray(x_a, dtype=float))
    x_b = np.atleast_1d(np.asarray(x_b, dtype=float))
    if count < 2:
        raise ValueError("a path needs at least 2 nodes")
    chord = x_b - x_a
    if np.linalg.norm(chord) < tol.reg_eps:
        raise DegeneratePath(
            f"endpoints coincide to within {tol.reg_eps:g}; "
            "a straight path between them has zero tangent")
    s = np.linspace(0.0, 1.0, count)[:, None]
    nodes = x_a[None, :] + s * chord[None, :]
    tangents = np.tile(chord, (count, 1))
    return DiscretizedPath(Grid1D(count), nodes, tangents)


def make_parametric_path(fn: Callable[[float], np.ndarray],
                         dfn: Callable[[float], np.ndarray],
                         count: int,
                         tol: ToleranceConfig = DEFAULT_TOL) -> DiscretizedPath:
    """Sample a smooth parametric curve with its analytic tangent."""
    s_vals = np.linspace(0.0, 1.0, count)
    nodes = np.array([np.atleast_1d(fn(s)) for s in s_vals], dtype=float)
    tangents = np.array([np.atleast_1d(dfn(s)) for s in s_vals], dtype=float)
    if np.min(np.linalg.norm(tangents, axis=1)) < tol.reg_eps:
        raise DegeneratePath("parametric curve has a vanishing tangent")
    return DiscretizedPath(Grid1D(count), nodes, tangents)


def _integrand_samples(path: DiscretizedPath, value_fn) -> np.ndarray:
    vals = np.empty(path.count)
    for j in range(path.count):
        vals[j] = value_fn(path.nodes[j], path.tangents[j])
    return vals


def energy_integral(path: DiscretizedPath, metric: FinslerMetric,
                    tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Trapezoid approximation of the integral of V(c, c_s)^(1/p) over s."""
    inv_p = 1.0 / metric.p
    V = metric.V

    def sample(x, d):
        if metric.requires_nonzero_delta and not np.any(d):
            raise NonSmoothAtZero(
                f"metric {metric.name!r} sampled at a zero tangent")
        v = V(x, d)
        if v < 0:
            raise InvalidMetric(f"V = {v} < 0 along path")
        return v ** inv_p

    vals = _integrand_samples(path, sample)
    return trapezoid_integral(vals, path.s_grid.step)


def length_integral(path: DiscretizedPath, metric: FinslerMetric,
                    tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Trapezoid approximation of the integral of F(c, c_s) over s."""
    vals = _integrand_samples(path, lambda x, d: eval_F(metric, x, d))
    return trapezoid_integral(vals, path.s_grid.step)


@dataclass(frozen=True)
class DistanceOptions:
    """Discretization and descent budget for distance upper bounds."""

    count: int = 50
    iters: int = 100
    step: float = 0.1
    domain: Optional[Box] = None


def _polygon_length(nodes: np.ndarray, metric: FinslerMetric) -> np.ndarray:
    """Per-segment Finsler lengths F(midpoint, chord) of the node polygon.

    With F positively 1-homogeneous this equals the midpoint-rule value of
    the length integral, and for state-independent F it is exactly the
    length of the polygonal curve, so minimizing it cannot dip below the
    distance the way a node-tangent stencil can (stencils average out
    sawtooth wiggles; chords do not).
    """
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    chords = nodes[1:] - nodes[:-1]
    vals = np.empty(len(chords))
    for j in range(len(chords)):
        vals[j] = eval_F(metric, mids[j], chords[j])
    return vals


def _polygon_gradient(nodes: np.ndarray, seg_vals: np.ndarray,
                      metric: FinslerMetric, fd: float) -> np.ndarray:
    """Central-difference gradient of the polygon length w.r.t. interior nodes.

    Node j only enters segments j-1 and j, so each perturbation re-evaluates
    at most two segment terms.
    """
    count, dim = nodes.shape
    grad = np.zeros((count, dim))
    work = nodes.copy()
    for j in range(1, count - 1):
        segs = (j - 1, j)
        for k in range(dim):
            orig = work[j, k]
            sides = []
            for sign in (1.0, -1.0):
                work[j, k] = orig + sign * fd
                total = 0.0
                for i in segs:
                    mid = 0.5 * (work[i] + work[i + 1])
                    total += (eval_F(metric, mid, work[i + 1] - work[i])
                              - seg_vals[i])
                sides.append(total)
            work[j, k] = orig
            grad[j, k] = (sides[0] - sides[1]) / (2.0 * fd)
    return grad


def approx_distance(x1: np.ndarray, x2: np.ndarray, metric: FinslerMetric,
                    opts: DistanceOptions = DistanceOptions(),
                    tol: ToleranceConfig = DEFAULT_TOL,
                    ) -> tuple[float, DiscretizedPath]:
    """Upper bound on the Finsler distance d(x1, x2) by path optimization.

    Starts from the straight chord and runs projected gradient descent on the
    interior nodes (endpoints pinned, optional domain clamp), accepting only
    non-increasing steps of the polygonal length.  Returns the best length
    found and its path.
    """
    path = make_straight_path(x1, x2, opts.count, tol)
    nodes = path.nodes.copy()
    seg_vals = _polygon_length(nodes, metric)
    best = float(seg_vals.sum())
    if not np.isfinite(best):
        raise NumericalBlowup("path length objective is non-finite")

    min_seg = tol.reg_eps / max(opts.count - 1, 1)
    step = opts.step
    scale = max(1.0, float(np.linalg.norm(np.asarray(x2, dtype=float)
                                          - np.asarray(x1, dtype=float))))
    for _ in range(opts.iters):
        grad = _polygon_gradient(nodes, seg_vals, metric, fd=1e-6 * scale)
        gmax = float(np.max(np.abs(grad)))
        if gmax < 1e-12:
            break
        accepted = False
        while step * gmax > 1e-12 * scale:
            cand = nodes - step * grad
            cand[0], cand[-1] = nodes[0], nodes[-1]
            if opts.domain is not None:
                cand[1:-1] = opts.domain.clip(cand[1:-1])
            cand_vals = _polygon_length(cand, metric)
            cand_len = float(cand_vals.sum())
            if not np.isfinite(cand_len):
                raise NumericalBlowup("path length objective is non-finite")
            chord_ok = np.min(np.linalg.norm(cand[1:] - cand[:-1], axis=1))
            if cand_len <= best and chord_ok >= min_seg:
                nodes, best, seg_vals = cand, cand_len, cand_vals
                step *= 1.5
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return best, path_from_nodes(nodes, tol)


def shorten_path(path: DiscretizedPath, metric: FinslerMetric, iters: int,
                 eta: float = 0.5,
                 tol: ToleranceConfig = DEFAULT_TOL) -> DiscretizedPath:
    """Neighbour-averaging smoothing sweeps guarded by energy non-increase.

    Each sweep moves every interior node toward the mean of its neighbours by
    factor ``eta``; the sweep is kept only if the path stays regular and the
    energy integral does not increase.  Endpoints never move.  With no
    accepted sweep the input path is returned unchanged.
    """
    if iters <= 0 or path.count < 3:
        return path
    nodes = path.nodes.copy()
    energy = energy_integral(path, metric, tol)
    h = path.s_grid.step
    accepted_any = False
    for _ in range(iters):
        cand = nodes.copy()
        cand[1:-1] += eta * (0.5 * (nodes[:-2] + nodes[2:]) - nodes[1:-1])
        tangents = _fd_tangents(cand, h)
        if np.min(np.linalg.norm(tangents, axis=1)) < tol.reg_eps:
            break
        cand_path = DiscretizedPath(path.s_grid, cand, tangents)
        try:
            cand_energy = energy_integral(cand_path, metric, tol)
        except NonSmoothAtZero:
            break
        if cand_energy > energy:
            break
        nodes, energy = cand, cand_energy
        accepted_any = True
    if not accepted_any:
        return path
    return path_from_nodes(nodes, tol)
