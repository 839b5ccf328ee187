"""Run configuration: defaults, config-file parsing, and flag overrides.

Config files are flat ``key = value`` text with ``#`` comments and dotted
section keys (``grid.K = 600``).  Command-line flags override file values,
which override per-command defaults.  All numeric fields are validated at
parse time; violations raise ConfigError (CLI exit code 1).
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import ConfigError
from .presets import CASE_PRESETS

COMMANDS = ("density", "correlation", "epsilons", "convergence", "gibbs")

#: Per-command defaults for fields that depend on the run type.
_COMMAND_DEFAULTS = {
    "density": {"K": 1200, "mass_ratio": 1000.0},
    "correlation": {"K": 600, "mass_ratio": 100.0},
    "epsilons": {"K": 6000, "mass_ratio": 100.0},
    "convergence": {"K": 1200, "mass_ratio": 100.0,
                    "m_list": (100.0, 200.0, 400.0, 800.0)},
    "gibbs": {"K": 600, "mass_ratio": 10000.0, "m_list": None},
}


@dataclass
class RunConfig:
    command: str
    case: Optional[str] = None
    beta: Optional[float] = None
    c: Optional[float] = None
    delta: Optional[float] = None
    mass_ratio: Optional[float] = None
    m_list: Optional[tuple] = None
    x_min: float = -6.0
    x_max: float = 6.0
    K: Optional[int] = None
    p_max: Optional[float] = None
    L: int = 240
    dt: float = 0.005
    tau_max: float = 20.0
    d_tau: float = 0.05
    observable: str = "p"
    scalar_variants: bool = False
    n_paths: int = 100_000
    n_steps: int = 256
    seed: int = 0
    x: float = 0.3
    p: float = 0.5
    q1_target: Optional[float] = None
    output: Optional[str] = None
    threads: Optional[int] = None


#: config-file key -> RunConfig attribute and parser.
def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple:
    return tuple(float(part) for part in text.split(",") if part.strip())


_FILE_KEYS = {
    "command": ("command", str),
    "case": ("case", str),
    "beta": ("beta", float),
    "c": ("c", float),
    "delta": ("delta", float),
    "M": ("mass_ratio", float),
    "M_list": ("m_list", _parse_float_list),
    "grid.x_min": ("x_min", float),
    "grid.x_max": ("x_max", float),
    "grid.K": ("K", int),
    "phase.p_max": ("p_max", float),
    "phase.L": ("L", int),
    "time.dt": ("dt", float),
    "time.tau_max": ("tau_max", float),
    "time.d_tau": ("d_tau", float),
    "observable": ("observable", str),
    "scalar_variants": ("scalar_variants", _parse_bool),
    "paths.n_paths": ("n_paths", int),
    "paths.n_steps": ("n_steps", int),
    "paths.seed": ("seed", int),
    "point.x": ("x", float),
    "point.p": ("p", float),
    "q1_target": ("q1_target", float),
    "output": ("output", str),
    "threads": ("threads", int),
}


def read_config_file(path: str) -> dict:
    """Parse a flat key = value config file into RunConfig attribute overrides."""
    overrides = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FILE_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        attr, parse = _FILE_KEYS[key]
        try:
            overrides[attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return overrides


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mfmd", add_help=True,
        description="Canonical mean-field molecular dynamics simulator")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="run type (may also come from the config file)")
    parser.add_argument("--config", metavar="FILE", help="key = value config file")
    parser.add_argument("--case", choices=sorted(CASE_PRESETS))
    parser.add_argument("--beta", type=float)
    parser.add_argument("--c", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--M", dest="mass_ratio", type=float)
    parser.add_argument("--M-list", dest="m_list", type=_parse_float_list,
                        metavar="M1,M2,...")
    parser.add_argument("--x-min", dest="x_min", type=float)
    parser.add_argument("--x-max", dest="x_max", type=float)
    parser.add_argument("--K", type=int)
    parser.add_argument("--p-max", dest="p_max", type=float)
    parser.add_argument("--L", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--tau-max", dest="tau_max", type=float)
    parser.add_argument("--d-tau", dest="d_tau", type=float)
    parser.add_argument("--observable", choices=("p", "x"))
    parser.add_argument("--scalar-variants", dest="scalar_variants",
                        action="store_const", const=True)
    parser.add_argument("--n-paths", dest="n_paths", type=int)
    parser.add_argument("--n-steps", dest="n_steps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--x", type=float, help="gibbs evaluation position")
    parser.add_argument("--p", type=float, help="gibbs evaluation momentum")
    parser.add_argument("--q1-target", dest="q1_target", type=float)
    parser.add_argument("--output", metavar="FILE")
    parser.add_argument("--threads", type=int,
                        help="worker cap (falls back to env MFMD_THREADS)")
    return parser


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cfg.command!r}")
    if cfg.case is not None:
        if cfg.case not in CASE_PRESETS:
            raise ConfigError(f"unknown case {cfg.case!r}")
        preset = CASE_PRESETS[cfg.case]
        cfg.beta = preset.beta if cfg.beta is None else cfg.beta
        cfg.c = preset.c if cfg.c is None else cfg.c
        cfg.delta = preset.delta if cfg.delta is None else cfg.delta
    if cfg.command != "epsilons" and (cfg.beta is None or cfg.c is None or cfg.delta is None):
        raise ConfigError("need --case or explicit --beta/--c/--delta")
    for name, value, positive in (
            ("beta", cfg.beta, True), ("M", cfg.mass_ratio, True),
            ("grid.K", cfg.K, True), ("phase.L", cfg.L, True),
            ("time.dt", cfg.dt, True), ("time.tau_max", cfg.tau_max, True),
            ("time.d_tau", cfg.d_tau, True), ("paths.n_paths", cfg.n_paths, True),
            ("paths.n_steps", cfg.n_steps, True), ("phase.p_max", cfg.p_max, True),
            ("q1_target", cfg.q1_target, True), ("threads", cfg.threads, True)):
        if value is not None and positive and value <= 0:
            raise ConfigError(f"{name} must be positive, got {value}")
    if cfg.delta is not None and cfg.delta < 0:
        raise ConfigError(f"delta must be >= 0, got {cfg.delta}")
    if not cfg.x_min < cfg.x_max:
        raise ConfigError(f"grid range [{cfg.x_min}, {cfg.x_max}] is not increasing")
    if cfg.K is not None and cfg.K < 8:
        raise ConfigError(f"grid.K must be >= 8, got {cfg.K}")
    if cfg.L % 2:
        raise ConfigError(f"phase.L must be even for Simpson quadrature, got {cfg.L}")
    if cfg.n_steps < 2:
        raise ConfigError(f"paths.n_steps must be >= 2, got {cfg.n_steps}")
    if cfg.m_list is not None and any(m <= 0 for m in cfg.m_list):
        raise ConfigError("all entries of M_list must be positive")
    ratio = cfg.d_tau / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ConfigError(f"time.d_tau={cfg.d_tau} must be a positive multiple of time.dt={cfg.dt}")
    return cfg


def parse_config(argv) -> RunConfig:
    """Resolve a validated RunConfig from argv (flags plus optional config file)."""
    parser = _build_arg_parser()
    args = parser.parse_args(argv)
    overrides = read_config_file(args.config) if args.config else {}
    command = args.command or overrides.get("command")
    if command is None:
        raise ConfigError("no command given (flag or 'command = ...' in the config file)")
    cfg = RunConfig(command=command)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    for spec_field in fields(RunConfig):
        flag_value = getattr(args, spec_field.name, None)
        if flag_value is not None and spec_field.name != "command":
            setattr(cfg, spec_field.name, flag_value)
    for name, value in _COMMAND_DEFAULTS[command].items():
        if getattr(cfg, name) is None:
            setattr(cfg, name, value)
    if cfg.output is None:
        cfg.output = f"{command}.csv"
    return _validate(cfg)


def config_echo_lines(cfg: RunConfig) -> list[str]:
    """The resolved configuration as '# key = value' comment lines."""
    reverse = {attr: key for key, (attr, _) in _FILE_KEYS.items()}
    lines = [f"# mfmd {cfg.command}"]
    for spec_field in fields(RunConfig):
        if spec_field.name == "command":
            continue
        value = getattr(cfg, spec_field.name)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(f"{v:g}" for v in value)
        key = reverse.get(spec_field.name, spec_field.name)
        lines.append(f"# {key} = {value}")
    return lines
