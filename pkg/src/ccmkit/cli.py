"""Command-line front end.

Subcommands::

    ccmkit simulate --config run.cfg [--mode open|closed] [--out DIR] [--seed N]
    ccmkit verify   --config run.cfg [--out DIR] [--seed N]
    ccmkit distance METRIC X1 X2 [--nodes N] [--iters K] [--step S]
    ccmkit axioms   METRIC [--samples N] [--seed N] [--half-width W]

Exit codes: 0 success, 2 usage/config error, 3 verification or
stabilizability-condition failure, 4 numerical blowup.
"""
from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from .controller import Trajectory, open_loop_run
from .errors import (CcmError, ConditionViolated, ConfigError, DegeneratePath,
                     NumericalBlowup, UnknownExample, UnknownMetric)
from .geometry import DistanceOptions, approx_distance
from .metrics import AxiomSampleSpec, check_finsler_axioms, resolve_metric
from .runconfig import RunConfig, load_config, write_resolved
from .sampled_loop import PathUpdatePolicy, SampleSchedule, closed_loop_run
from .systems import constant_target, resolve_system, trajectory_residual
from .verify import (check_ratio_bound, check_th1, convergence_report,
                     dissipation_monitor, kernel_sampler_for)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_BLOWUP = 4


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    n = traj.states.shape[1]
    m = traj.controls.shape[1]
    node_count = traj.node_V.shape[1]
    header = (["t"] + [f"x{k + 1}" for k in range(n)]
              + [f"u{k + 1}" for k in range(m)]
              + ["energy", "dist_est"]
              + [f"V_{j:03d}" for j in range(node_count)])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(traj.times.size):
            row = ([_fmt(traj.times[k])]
                   + [_fmt(v) for v in traj.states[k]]
                   + [_fmt(v) for v in traj.controls[k]]
                   + [_fmt(traj.energies[k]), _fmt(traj.dist_est[k])]
                   + [_fmt(v) for v in traj.node_V[k]])
            fh.write(",".join(row) + "\n")


def _simulate_report(cfg: RunConfig, traj: Trajectory, metric, path: Path,
                     ratio=None) -> None:
    diss = dissipation_monitor(traj, cfg.rate)
    conv = None
    if cfg.rate.kind == "linear" and traj.times.size >= 10:
        conv = convergence_report(traj, metric, cfg.rate)
    lines = [f"simulation report: {cfg.system} + {cfg.metric}, "
             f"rate={cfg.rate.describe()}, variant={cfg.rho_variant.value}",
             f"horizon={cfg.horizon:g}  dt={cfg.dt:g}  "
             f"path_nodes={cfg.path_nodes}",
             ""]
    if traj.aborted:
        lines.append(f"ABORTED: {traj.aborted}")
    for note in traj.notes:
        lines.append(f"note: {note}")
    for ev in traj.sample_events:
        lines.append(
            f"sample t={ev.time:.6g}: "
            f"{'adopted' if ev.adopted else 'kept forward image'} "
            f"(forward={ev.energy_forward:.6g}, "
            f"candidate={ev.energy_candidate:.6g})")
    lines.append("")
    lines.extend(diss.summary_lines())
    if conv is not None:
        lines.extend(conv.summary_lines())
    if ratio is not None:
        lines.extend(ratio.summary_lines())
    lines.append("")
    lines.append("-- machine-readable --")
    kv = {
        "system": cfg.system,
        "metric": cfg.metric,
        "rate": cfg.rate.describe(),
        "aborted": str(bool(traj.aborted)),
        "steps_recorded": str(traj.times.size),
        "energy.initial": _fmt(traj.energies[0]),
        "energy.final": _fmt(traj.energies[-1]),
        "energy.peak_ratio": _fmt(float(np.max(traj.energies)
                                        / traj.energies[0])),
        "control.peak": _fmt(traj.peak_control),
        "state.final": " ".join(_fmt(v) for v in traj.final_state),
        "dissipation.passed": str(diss.passed),
        "dissipation.checked": str(diss.checked_samples),
        "dissipation.violations": str(diss.violation_count),
    }
    if conv is not None:
        kv.update({
            "convergence.fitted_rate": _fmt(conv.fitted_rate),
            "convergence.predicted_rate": _fmt(conv.predicted_rate),
            "convergence.overshoot": _fmt(conv.overshoot_observed),
            "convergence.overshoot_bound": _fmt(conv.overshoot_bound),
            "convergence.passed": str(conv.passed),
        })
    if ratio is not None:
        kv["ratio.max"] = _fmt(ratio.max_ratio)
        kv["ratio.passed"] = str(ratio.passed)
    lines.extend(f"{k} = {v}" for k, v in kv.items())
    path.write_text("\n".join(lines) + "\n")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    system = resolve_system(cfg.system)
    metric = resolve_metric(cfg.metric)
    target = constant_target(cfg.target_state, cfg.target_control)
    residual = trajectory_residual(system, target, cfg.horizon / 2.0)
    if residual > 1e-6:
        raise ConfigError(
            f"target (state={cfg.target_state}, control={cfg.target_control}) "
            f"is not a trajectory of {cfg.system}: residual {residual:.3e}")

    if args.mode == "open":
        traj = open_loop_run(system, metric, cfg.rate, target, cfg.x0,
                             cfg.horizon, cfg.dt, cfg.path_nodes,
                             cfg.rho_variant)
    else:
        schedule = SampleSchedule.uniform(0.0, cfg.horizon, cfg.period)
        policy = (PathUpdatePolicy.keep_forward_image()
                  if cfg.policy == "keep"
                  else PathUpdatePolicy.local_shorten(cfg.shorten_iters))
        traj = closed_loop_run(system, metric, cfg.rate, target, cfg.x0,
                               schedule, policy, cfg.horizon, cfg.dt,
                               cfg.path_nodes, cfg.rho_variant)

    ratio = None
    if cfg.verify is not None:
        # pre-run guard: the run proceeds regardless, the bound is logged
        ratio = check_ratio_bound(system, metric, cfg.verify.x_box,
                                  cfg.verify.delta_box,
                                  samples=cfg.verify.ratio_samples,
                                  seed=cfg.seed, cap=cfg.verify.ratio_cap)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out_dir / "config_resolved.cfg")
    _write_trajectory_csv(traj, out_dir / "trajectory.csv")
    _simulate_report(cfg, traj, metric, out_dir / "report.txt", ratio)

    from .plots import plot_energy, plot_states
    plot_states(traj, out_dir / "state_vs_time.svg")
    plot_energy(traj, cfg.rate, metric.p, out_dir / "energy_vs_time.svg")

    if traj.aborted:
        print(traj.aborted, file=_sys.stderr)
        return EXIT_VERIFY
    print(f"wrote {out_dir}/trajectory.csv ({traj.times.size} steps), "
          "report.txt, state_vs_time.svg, energy_vs_time.svg")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.verify is None:
        raise ConfigError("verify command needs a [verify] section")
    system = resolve_system(cfg.system)
    metric = resolve_metric(cfg.metric)
    vf = cfg.verify

    th1 = check_th1(system, metric, cfg.rate, vf.x_box, vf.u_box,
                    samples=vf.samples, kernel_tol=vf.kernel_tol,
                    seed=cfg.seed, margin_eps=vf.margin,
                    kernel_sampler=kernel_sampler_for(system, metric))
    ratio = check_ratio_bound(system, metric, vf.x_box, vf.delta_box,
                              samples=vf.ratio_samples, seed=cfg.seed,
                              cap=vf.ratio_cap)

    lines = [f"verification report: {cfg.system} + {cfg.metric}, "
             f"rate={cfg.rate.describe()}", ""]
    lines.extend(th1.summary_lines())
    lines.extend(ratio.summary_lines())
    lines.append("")
    lines.append("-- machine-readable --")
    lines.append(f"th1.passed = {th1.passed}")
    lines.append(f"th1.kernel_hits = {th1.kernel_samples}")
    lines.append(f"th1.violations = {th1.violation_count}")
    lines.append(f"ratio.passed = {ratio.passed}")
    lines.append(f"ratio.max = {_fmt(ratio.max_ratio)}")
    lines.append(f"ratio.cap = {_fmt(ratio.ratio_cap)}")
    text = "\n".join(lines) + "\n"

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out_dir / "config_resolved.cfg")
    (out_dir / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if th1.passed and ratio.passed else EXIT_VERIFY


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ConfigError(f"cannot parse point {text!r}") from e


def cmd_distance(args) -> int:
    metric = resolve_metric(args.metric)
    x1 = _parse_point(args.x1)
    x2 = _parse_point(args.x2)
    if x1.size != metric.dim or x2.size != metric.dim:
        raise ConfigError(
            f"points must have dimension {metric.dim} for {args.metric}")
    opts = DistanceOptions(count=args.nodes, iters=args.iters, step=args.step)
    d12, _ = approx_distance(x1, x2, metric, opts)
    d21, _ = approx_distance(x2, x1, metric, opts)
    print(f"d(x1 -> x2) = {d12:.6f}")
    print(f"d(x2 -> x1) = {d21:.6f}")
    return EXIT_OK


def cmd_axioms(args) -> int:
    metric = resolve_metric(args.metric)
    spec = AxiomSampleSpec.cube(metric.dim, half_width=args.half_width,
                                count=args.samples, seed=args.seed)
    report = check_finsler_axioms(metric, spec)
    print(f"structure axioms for {metric.name} "
          f"({spec.count} samples, seed {spec.seed}):")
    for line in report.summary_lines():
        print("  " + line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccmkit",
        description="Contraction-metric controller synthesis and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a tracking simulation")
    sim.add_argument("--config", required=True)
    sim.add_argument("--mode", choices=("open", "closed"), default="open")
    sim.add_argument("--out", default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.set_defaults(fn=cmd_simulate)

    ver = sub.add_parser("verify", help="check synthesis hypotheses on boxes")
    ver.add_argument("--config", required=True)
    ver.add_argument("--out", default=None)
    ver.add_argument("--seed", type=int, default=None)
    ver.set_defaults(fn=cmd_verify)

    dist = sub.add_parser("distance",
                          help="distance upper bound between two points")
    dist.add_argument("metric")
    dist.add_argument("x1")
    dist.add_argument("x2")
    dist.add_argument("--nodes", type=int, default=50)
    dist.add_argument("--iters", type=int, default=100)
    dist.add_argument("--step", type=float, default=0.1)
    dist.set_defaults(fn=cmd_distance)

    ax = sub.add_parser("axioms", help="sampled Finsler structure axiom check")
    ax.add_argument("metric")
    ax.add_argument("--samples", type=int, default=1000)
    ax.add_argument("--seed", type=int, default=0)
    ax.add_argument("--half-width", type=float, default=2.0)
    ax.set_defaults(fn=cmd_axioms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, UnknownMetric, UnknownExample, DegeneratePath) as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    except ConditionViolated as e:
        print(f"stabilizability condition violated: {e}", file=_sys.stderr)
        return EXIT_VERIFY
    except NumericalBlowup as e:
        print(f"numerical blowup: {e}", file=_sys.stderr)
        return EXIT_BLOWUP
    except CcmError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
