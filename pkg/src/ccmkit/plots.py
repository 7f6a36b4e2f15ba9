"""Figure rendering for simulation runs (SVG files, non-interactive backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .controller import RateSpec, Trajectory  # noqa: E402


def plot_states(traj: Trajectory, out_path: Path) -> None:
    """State components and applied controls against time."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for k in range(traj.states.shape[1]):
        ax.plot(traj.times, traj.states[:, k], label=f"x{k + 1}")
    for k in range(traj.controls.shape[1]):
        ax.plot(traj.times, traj.controls[:, k], "--", label=f"u{k + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("state / control")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_energy(traj: Trajectory, rate: RateSpec, p: float,
                out_path: Path) -> None:
    """Path energy against time, with the exponential envelope for linear rates."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(traj.times, traj.energies, label="path energy")
    if rate.kind == "linear" and traj.energies.size:
        envelope = traj.energies[0] * np.exp(-(rate.lam / p)
                                             * (traj.times - traj.times[0]))
        ax.plot(traj.times, envelope, ":",
                label=f"envelope exp(-{rate.lam:g}/{p:g} t)")
    ax.set_xlabel("t")
    ax.set_ylabel("integral of V^(1/p) along path")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
