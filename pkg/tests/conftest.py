"""Shared fixtures: canonical runs reused across modules (built once)."""
import time

import numpy as np
import pytest

from ccmkit import (RateSpec, constant_target, load_example, load_metric,
                    open_loop_run)


@pytest.fixture(scope="session")
def e1_runs():
    """Planar saddle + quartic metric, T=5, dt=0.01, 50 nodes, both rates.

    Returns dict with the zero-rate run, the linear-rate run, and the wall
    time the pair took (the acceptance gate bounds it).
    """
    system = load_example("example1")
    metric = load_metric("quartic2d")
    target = constant_target([0.0, 0.0], [0.0])
    x0 = np.array([1.0, 1.0])
    t0 = time.perf_counter()
    run_zero = open_loop_run(system, metric, RateSpec.zero(), target, x0,
                             horizon=5.0, dt=0.01, path_count=50)
    run_linear = open_loop_run(system, metric, RateSpec.linear(1.0), target,
                               x0, horizon=5.0, dt=0.01, path_count=50)
    elapsed = time.perf_counter() - t0
    return {"zero": run_zero, "linear": run_linear, "elapsed": elapsed,
            "system": system, "metric": metric}


@pytest.fixture(scope="session")
def pendulum_runs():
    """Up (0 -> pi) and down (pi -> 0) swings under both pendulum metrics."""
    system = load_example("pendulum")
    rate = RateSpec.linear(1.0)
    out = {}
    for mname, key in (("randers_pendulum", "asym"),
                       ("quadratic_pendulum", "sym")):
        metric = load_metric(mname)
        for tag, x0, xt in (("up", 0.0, np.pi), ("down", np.pi, 0.0)):
            target = constant_target([xt], [0.0])
            out[f"{key}_{tag}"] = open_loop_run(
                system, metric, rate, target, np.array([x0]),
                horizon=3.0, dt=0.01, path_count=40)
    return out
