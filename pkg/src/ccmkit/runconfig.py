"""Run configuration: plain key = value files with sections (configparser).

A minimal file::

    [run]
    system = example1
    metric = quartic2d
    rate = linear
    lambda = 1.0
    x0 = 1, 1
    target_state = 0, 0
    target_control = 0
    horizon = 5.0
    dt = 0.01
    path_nodes = 50

Optional sections ``[closed_loop]`` (period, policy, shorten_iters) and
``[verify]`` (boxes and sample budgets) drive the closed-loop mode and the
verify command.  Boxes are per-axis ``lo:hi`` ranges joined by commas.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .controller import RateSpec, RhoVariant
from .errors import ConfigError
from .systems import Box


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        vec = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ConfigError(f"{name}: cannot parse vector {text!r}") from e
    if vec.size == 0 or not np.all(np.isfinite(vec)):
        raise ConfigError(f"{name}: vector {text!r} must be finite and non-empty")
    return vec


def _parse_box(text: str, name: str) -> Box:
    los, his = [], []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ConfigError(f"{name}: box axis {part!r} is not 'lo:hi'")
        try:
            los.append(float(pieces[0]))
            his.append(float(pieces[1]))
        except ValueError as e:
            raise ConfigError(f"{name}: cannot parse box {text!r}") from e
    try:
        return Box(np.array(los), np.array(his))
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from e


@dataclass(frozen=True)
class VerifySpec:
    x_box: Box
    u_box: Box
    delta_box: Box
    samples: int = 10000
    kernel_tol: float = 1e-6
    margin: float = 1e-6
    ratio_cap: float = 1e9
    ratio_samples: int = 2000


@dataclass
class RunConfig:
    """Everything a simulate/verify command needs, already validated."""

    system: str
    metric: str
    rate: RateSpec
    x0: np.ndarray
    target_state: np.ndarray
    target_control: np.ndarray
    horizon: float
    dt: float
    path_nodes: int
    rho_variant: RhoVariant
    seed: int
    out_dir: str
    period: float = 0.1
    policy: str = "keep"
    shorten_iters: int = 20
    verify: Optional[VerifySpec] = None

    def validate(self) -> None:
        for name in ("horizon", "dt", "period"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {v}")
        if self.path_nodes < 2:
            raise ConfigError("path_nodes must be at least 2")
        if self.policy not in ("keep", "shorten"):
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.shorten_iters < 1:
            raise ConfigError("shorten_iters must be >= 1")


def _get(section, key, cast, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = section[key]
    try:
        return cast(raw)
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from e


def load_config(path: str) -> RunConfig:
    """Parse and validate a configuration file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(p)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if "run" not in parser:
        raise ConfigError(f"{path}: missing [run] section")
    run = parser["run"]

    rate_kind = _get(run, "rate", str, default="zero").strip().lower()
    if rate_kind == "zero":
        rate = RateSpec.zero()
    elif rate_kind == "linear":
        lam = _get(run, "lambda", float, required=True)
        try:
            rate = RateSpec.linear(lam)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    else:
        raise ConfigError(f"rate must be 'zero' or 'linear', got {rate_kind!r}")

    variant_name = _get(run, "rho_variant", str, default="sontag").strip().lower()
    try:
        variant = RhoVariant(variant_name)
    except ValueError as e:
        raise ConfigError(
            f"rho_variant must be 'sontag' or 'piecewise', got {variant_name!r}"
        ) from e

    cfg = RunConfig(
        system=_get(run, "system", str, required=True).strip(),
        metric=_get(run, "metric", str, required=True).strip(),
        rate=rate,
        x0=_get(run, "x0", lambda s: _parse_vector(s, "x0"), required=True),
        target_state=_get(run, "target_state",
                          lambda s: _parse_vector(s, "target_state"),
                          required=True),
        target_control=_get(run, "target_control",
                            lambda s: _parse_vector(s, "target_control"),
                            required=True),
        horizon=_get(run, "horizon", float, required=True),
        dt=_get(run, "dt", float, required=True),
        path_nodes=_get(run, "path_nodes", int, default=50),
        rho_variant=variant,
        seed=_get(run, "seed", int, default=0),
        out_dir=_get(run, "out", str, default="ccmkit_out").strip(),
    )

    if "closed_loop" in parser:
        cl = parser["closed_loop"]
        cfg.period = _get(cl, "period", float, default=0.1)
        cfg.policy = _get(cl, "policy", str, default="keep").strip().lower()
        cfg.shorten_iters = _get(cl, "shorten_iters", int, default=20)

    if "verify" in parser:
        vf = parser["verify"]
        cfg.verify = VerifySpec(
            x_box=_get(vf, "x_box", lambda s: _parse_box(s, "x_box"),
                       required=True),
            u_box=_get(vf, "u_box", lambda s: _parse_box(s, "u_box"),
                       required=True),
            delta_box=_get(vf, "delta_box",
                           lambda s: _parse_box(s, "delta_box"), required=True),
            samples=_get(vf, "samples", int, default=10000),
            kernel_tol=_get(vf, "kernel_tol", float, default=1e-6),
            margin=_get(vf, "margin", float, default=1e-6),
            ratio_cap=_get(vf, "ratio_cap", float, default=1e9),
            ratio_samples=_get(vf, "ratio_samples", int, default=2000),
        )

    cfg.validate()
    return cfg


def _fmt_vector(vec: np.ndarray) -> str:
    return ", ".join(f"{v:.12g}" for v in np.atleast_1d(vec))


def _fmt_box(box: Box) -> str:
    return ", ".join(f"{lo:.12g}:{hi:.12g}" for lo, hi in zip(box.lo, box.hi))


def write_resolved(cfg: RunConfig, path: Path) -> None:
    """Echo the fully resolved configuration so outputs are self-describing."""
    out = configparser.ConfigParser()
    out["run"] = {
        "system": cfg.system,
        "metric": cfg.metric,
        "rate": cfg.rate.kind,
        "lambda": f"{cfg.rate.lam:.12g}",
        "x0": _fmt_vector(cfg.x0),
        "target_state": _fmt_vector(cfg.target_state),
        "target_control": _fmt_vector(cfg.target_control),
        "horizon": f"{cfg.horizon:.12g}",
        "dt": f"{cfg.dt:.12g}",
        "path_nodes": str(cfg.path_nodes),
        "rho_variant": cfg.rho_variant.value,
        "seed": str(cfg.seed),
        "out": cfg.out_dir,
    }
    out["closed_loop"] = {
        "period": f"{cfg.period:.12g}",
        "policy": cfg.policy,
        "shorten_iters": str(cfg.shorten_iters),
    }
    if cfg.verify is not None:
        out["verify"] = {
            "x_box": _fmt_box(cfg.verify.x_box),
            "u_box": _fmt_box(cfg.verify.u_box),
            "delta_box": _fmt_box(cfg.verify.delta_box),
            "samples": str(cfg.verify.samples),
            "kernel_tol": f"{cfg.verify.kernel_tol:.12g}",
            "margin": f"{cfg.verify.margin:.12g}",
            "ratio_cap": f"{cfg.verify.ratio_cap:.12g}",
            "ratio_samples": str(cfg.verify.ratio_samples),
        }
    with open(path, "w", newline="\n") as fh:
        out.write(fh)
