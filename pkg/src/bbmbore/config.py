"""Run configuration files (TOML or JSON) and their validation.

Layout::

    pipeline = "bore1d"            # direct | bore1d | bore2d
    [grid]     length, points      # scalars (1D) or two-element lists (2D)
    [params]   b, d, eps, beta
    [init]     kind, eta_minus, eta_plus, steepness, center
    [init.perturbation] amplitude, width
    [init.noise] amplitude         # seeded white noise on eta (seed from --seed)
    [solver]   dt, t_end, m, dealias, stop_on_threshold,
               abort_on_contamination, leak_tol, checkpoint_stride
    [ledger]   stride, s, r        # r may be "inf"
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError
from .solver import ModelParams, SolverConfig
from .spectral import GridSpec

__all__ = ["InitConfig", "RunConfig", "load_config", "parse_config"]

PIPELINES = ("direct", "bore1d", "bore2d")
INIT_KINDS = ("tanh", "smoothed-step", "zero")


def _section(raw: dict, name: str, required=True) -> dict:
    if name not in raw:
        if required:
            raise ConfigurationError("missing required section", name)
        return {}
    sec = raw[name]
    if not isinstance(sec, dict):
        raise ConfigurationError("expected a table", name)
    return sec


def _number(sec: dict, key: str, where: str, default=None, required=False, integer=False):
    if key not in sec:
        if required:
            raise ConfigurationError("missing required field", f"{where}.{key}")
        return default
    v = sec[key]
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"expected a number, got {v!r}", f"{where}.{key}")
    if integer:
        if int(v) != v:
            raise ConfigurationError(f"expected an integer, got {v!r}", f"{where}.{key}")
        return int(v)
    return float(v)


def _flag(sec: dict, key: str, where: str, default: bool) -> bool:
    v = sec.get(key, default)
    if not isinstance(v, bool):
        raise ConfigurationError(f"expected true/false, got {v!r}", f"{where}.{key}")
    return v


def _per_axis(sec: dict, key: str, integer: bool):
    if key not in sec:
        raise ConfigurationError("missing required field", f"grid.{key}")
    v = sec[key]
    vals = v if isinstance(v, list) else [v]
    out = []
    for x in vals:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigurationError(f"expected number(s), got {v!r}", f"grid.{key}")
        out.append(int(x) if integer else float(x))
    return tuple(out)


@dataclass(frozen=True)
class InitConfig:
    kind: str = "tanh"
    eta_minus: float = -0.5
    eta_plus: float = 0.5
    steepness: float = 1.0
    center: float = 0.0
    amplitude: float = 0.0
    width: float = 1.0
    noise: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    pipeline: str
    grid: GridSpec
    params: ModelParams
    init: InitConfig
    solver: SolverConfig
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded config mapping; errors name the offending field."""
    if not isinstance(raw, dict):
        raise ConfigurationError("top level must be a table", "config")
    pipeline = raw.get("pipeline", "direct")
    if pipeline not in PIPELINES:
        raise ConfigurationError(f"must be one of {PIPELINES}, got {pipeline!r}", "pipeline")

    g = _section(raw, "grid")
    lengths, points = _per_axis(g, "length", False), _per_axis(g, "points", True)
    dim = _number(g, "dim", "grid", default=len(points), integer=True)
    if dim != len(points) or dim != len(lengths):
        raise ConfigurationError("dim does not match length/points", "grid.dim")
    grid = GridSpec(lengths, points)

    p = _section(raw, "params")
    params = ModelParams(
        b=_number(p, "b", "params", required=True),
        d=_number(p, "d", "params", required=True),
        eps=_number(p, "eps", "params", required=True),
        beta=_number(p, "beta", "params", default=1.0),
        bbm_sum=_flag(p, "bbm_sum", "params", False),
    )

    i = _section(raw, "init", required=False)
    kind = i.get("kind", "zero")
    if kind not in INIT_KINDS:
        raise ConfigurationError(f"must be one of {INIT_KINDS}, got {kind!r}", "init.kind")
    pert = i.get("perturbation", {})
    if not isinstance(pert, dict):
        raise ConfigurationError("expected a table", "init.perturbation")
    init = InitConfig(
        kind=kind,
        eta_minus=_number(i, "eta_minus", "init", default=-0.5),
        eta_plus=_number(i, "eta_plus", "init", default=0.5),
        steepness=_number(i, "steepness", "init", default=1.0),
        center=_number(i, "center", "init", default=0.0),
        amplitude=_number(pert, "amplitude", "init.perturbation", default=0.0),
        width=_number(pert, "width", "init.perturbation", default=1.0),
    )
    noise = i.get("noise", {})
    if not isinstance(noise, dict):
        raise ConfigurationError("expected a table", "init.noise")
    init = replace(init, noise=_number(noise, "amplitude", "init.noise", default=0.0))
    if init.width <= 0:
        raise ConfigurationError("must be positive", "init.perturbation.width")
    if pipeline == "bore1d" and grid.dim != 1:
        raise ConfigurationError("bore1d needs a 1D grid", "grid.points")
    if pipeline == "bore2d" and grid.dim != 2:
        raise ConfigurationError("bore2d needs a 2D grid", "grid.points")

    s = _section(raw, "solver")
    led = _section(raw, "ledger", required=False)
    m = _number(s, "m", "solver")
    checkpoint = _number(s, "checkpoint_stride", "solver")
    solver = SolverConfig(
        dt=_number(s, "dt", "solver", required=True),
        t_end=_number(s, "t_end", "solver", required=True),
        friedrichs_m=m,
        dealias=_flag(s, "dealias", "solver", True),
        ledger_stride=_number(led, "stride", "ledger", default=0.05),
        s=_number(led, "s", "ledger", default=2.0),
        r=_number(led, "r", "ledger", default=2.0),
        stop_on_threshold=_flag(s, "stop_on_threshold", "solver", True),
        abort_on_contamination=_flag(s, "abort_on_contamination", "solver", True),
        leak_tol=_number(s, "leak_tol", "solver", default=1e-4),
        checkpoint_stride=checkpoint,
    )
    if solver.r < 1:
        raise ConfigurationError("must be >= 1", "ledger.r")
    return RunConfig(pipeline, grid, params, init, solver, raw)


def load_config(path) -> RunConfig:
    """Read a ``.toml`` or ``.json`` config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", str(path)) from exc
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"line {exc.lineno}: {exc.msg}", str(path)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(str(exc), str(path)) from exc
    return parse_config(raw)
