"""Run configuration files.

Grammar, one item per line::

    # comment
    [section]
    key = value

Every key must belong to a section and be listed in :data:`SCHEMA`.
Relative paths resolve against the config file's directory. Input files
must exist and output directories must exist when the file is parsed.

Example::

    [grid]
    shape = 16x16
    [kernel]
    source = random-antihermitian   # builtin name, .cfld file or core text file
    seed = 3
    t = 1.0
    [network]
    model = curnn
    activation = identity
    steps = 1000
    [initial]
    mode = random
    seed = 1
    [output]
    record = norm
    norms = trace.csv
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .field import delta, load_field, parse_shape
from .kernels import BUILTINS, builtin_kernel, embed, parse_core
from .rnn import NetworkState, Recurrence, activation


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


SCHEMA: dict[str, dict[str, str]] = {
    "grid": {"shape": "shape"},
    "kernel": {"source": "str", "seed": "int", "t": "float", "scale": "float"},
    "network": {
        "model": "str",
        "activation": "str",
        "psi": "str",
        "steps": "int",
        "require_unitary": "bool",
    },
    "input": {"mode": "str", "value": "complex", "amplitude": "float", "seed": "int"},
    "initial": {"mode": "str", "seed": "int", "file": "inpath", "amplitude": "float"},
    "output": {"record": "str", "norms": "outpath", "states": "outpath"},
}

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_ITEM = re.compile(r"^([A-Za-z_][\w-]*)\s*=\s*(.*)$")


@dataclass
class RunConfig:
    values: dict[tuple[str, str], object] = field(default_factory=dict)
    lines: dict[tuple[str, str], int] = field(default_factory=dict)
    base: Path = Path(".")

    def get(self, section: str, key: str, default=None):
        return self.values.get((section, key), default)

    def require(self, section: str, key: str):
        if (section, key) not in self.values:
            raise ConfigError(f"missing required key {key!r} in [{section}]")
        return self.values[(section, key)]


def _convert(kind: str, raw: str, base: Path, line: int):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "complex":
            return complex(raw.replace(" ", ""))
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(f"not a boolean: {raw!r}")
            return low in ("true", "yes", "1")
        if kind == "shape":
            return parse_shape(raw)
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None
    if kind == "inpath":
        p = (base / raw).resolve()
        if not p.exists():
            raise ConfigError(f"file not found: {raw}", line)
        return p
    if kind == "outpath":
        p = (base / raw).resolve()
        if not p.parent.is_dir():
            raise ConfigError(f"output directory does not exist: {p.parent}", line)
        return p
    return raw


def parse_run_config(text: str, base: Path | str = ".") -> RunConfig:
    base = Path(base)
    cfg = RunConfig(base=base)
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _SECTION.match(line):
            section = m.group(1).lower()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        m = _ITEM.match(line)
        if m is None:
            raise ConfigError(f"cannot parse {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key = m.group(1).lower()
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if (section, key) in cfg.values:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno)
        value = m.group(2).strip()
        if key == "source" and section == "kernel":
            name = value.lower()
            if name not in BUILTINS and name != "zero-kernel":
                value = _convert("inpath", value, base, lineno)
        else:
            value = _convert(SCHEMA[section][key], value, base, lineno)
        cfg.values[(section, key)] = value
        cfg.lines[(section, key)] = lineno
    return cfg


def load_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(path.read_text(), path.parent)


def load_kernel_source(source, shape, seed: int = 0) -> np.ndarray:
    """Kernel from a builtin name, a CFLD file, or a kernel-core text file."""
    if isinstance(source, str) and not Path(source).exists():
        return builtin_kernel(source, shape, seed)
    path = Path(source)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"CFLD":
        K = load_field(path)
        if shape is not None and K.shape != tuple(shape):
            raise ValueError(f"kernel file {path} has shape {K.shape}, grid is {tuple(shape)}")
        return K
    return embed(parse_core(path.read_text()), shape)


@dataclass
class RunPlan:
    recurrence: Recurrence
    initial: NetworkState
    steps: int
    record: str
    norms_path: Path | None
    states_path: Path | None


def _optional_activation(spec):
    return None if spec is None else activation(spec)


def build_run(cfg: RunConfig) -> RunPlan:
    """Turn a parsed config into a recurrence, initial state and outputs."""
    shape = cfg.require("grid", "shape")
    try:
        K = load_kernel_source(cfg.require("kernel", "source"), shape, cfg.get("kernel", "seed", 0))
        K = K * cfg.get("kernel", "scale", 1.0)
        rec = Recurrence(
            model=cfg.get("network", "model", "curnn"),
            kernel=K,
            t=cfg.get("kernel", "t", 1.0),
            phi=_optional_activation(cfg.get("network", "activation")),
            psi=activation(cfg.get("network", "psi", "identity")),
            input_mode=cfg.get("input", "mode", "zero"),
            input_value=cfg.get("input", "value", 0.0),
            input_amplitude=cfg.get("input", "amplitude", 1.0),
            seed=cfg.get("input", "seed", 0),
            require_unitary=cfg.get("network", "require_unitary", False),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    steps = cfg.get("network", "steps", 0)
    if steps < 0:
        raise ConfigError("steps must be >= 0", cfg.lines.get(("network", "steps")))
    record = cfg.get("output", "record", "norm")
    if record not in ("norm", "full"):
        raise ConfigError(f"unknown record mode {record!r}", cfg.lines.get(("output", "record")))
    return RunPlan(
        recurrence=rec,
        initial=initial_state(cfg, rec),
        steps=steps,
        record=record,
        norms_path=cfg.get("output", "norms"),
        states_path=cfg.get("output", "states"),
    )


def initial_state(cfg: RunConfig, rec: Recurrence) -> NetworkState:
    mode = cfg.get("initial", "mode", "random")
    shape = rec.shape
    if mode == "random":
        rng = np.random.default_rng(cfg.get("initial", "seed", 0))
        a = cfg.get("initial", "amplitude", 1.0)
        if rec.model == "curnn":
            return NetworkState(z=a * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))
        return NetworkState(x=a * rng.standard_normal(shape), p=a * rng.standard_normal(shape))
    if mode == "delta":
        d = delta(shape)
        if rec.model == "curnn":
            return NetworkState(z=d)
        return NetworkState(x=d.real.copy(), p=np.zeros(shape))
    if mode == "file":
        f = load_field(cfg.require("initial", "file"))
        if rec.model == "curnn":
            return NetworkState(z=f.reshape(shape))
        if f.shape != (2, *shape):
            raise ConfigError(f"coRNN initial file must have shape {(2, *shape)}, got {f.shape}")
        return NetworkState(x=f[0].real.copy(), p=f[1].real.copy())
    raise ConfigError(f"unknown initial mode {mode!r}", cfg.lines.get(("initial", "mode")))
