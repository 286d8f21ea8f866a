"""Run configuration read from an INI-style text file.

Sections and keys (all quantities SI)::

    [grid]     ni nj nk dx dy depth  (or dz = comma list)
    [physics]  g f nu_h viscosity nu_z l0 kappa nu_min friction k_lin chezy advection
    [forcing]  tau_x tau_y (N/m^2)  rho (kg/m^3)
    [time]     dt t_end cg_tol cg_max_iter coupling check_system
    [output]   directory series probes every snapshot_every
    [initial]  type = rest | standing-wave | snapshot ; amplitude ; path

Wind stress is given as a dynamic stress and divided by ``rho`` here, once;
everything downstream works with kinematic stresses.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .explicit import ExplicitParams
from .grid import GridSpec
from .stepper import StepConfig

REQUIRED_SECTIONS = ("grid", "physics", "forcing", "time", "output")
INITIAL_TYPES = ("rest", "standing-wave", "snapshot")

_KNOWN_KEYS = {
    "grid": {"ni", "nj", "nk", "dx", "dy", "depth", "dz"},
    "physics": {"g", "f", "nu_h", "viscosity", "nu_z", "l0", "kappa", "nu_min",
                "friction", "k_lin", "chezy", "advection"},
    "forcing": {"tau_x", "tau_y", "rho"},
    "time": {"dt", "t_end", "cg_tol", "cg_max_iter", "coupling", "check_system"},
    "output": {"directory", "series", "probes", "every", "snapshot_every"},
    "initial": {"type", "amplitude", "path"},
}


class ConfigError(ValueError):
    """Raised for missing, malformed or inconsistent configuration."""


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("output")
    series: str = "series.csv"
    probes: tuple = ((0, 0),)
    every: int = 1
    snapshot_every: int = 0          # 0: only the final snapshot


@dataclass(frozen=True)
class InitialConfig:
    type: str = "rest"
    amplitude: float = 0.1
    path: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    params: ExplicitParams
    step: StepConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    rho: float = 1000.0


def _parse_probes(text, ni, nj):
    probes = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            i, j = (int(s) for s in item.split(","))
        except ValueError:
            raise ConfigError(f"probe {item!r} must be 'i,j'") from None
        if not (0 <= i < ni and 0 <= j < nj):
            raise ConfigError(f"probe ({i}, {j}) lies outside the {ni}x{nj} grid")
        probes.append((i, j))
    if not probes:
        raise ConfigError("at least one probe point is required")
    return tuple(probes)


class _Section:
    """Typed access to one section, turning every failure into ConfigError."""

    def __init__(self, parser, name):
        self.name = name
        self.sec = parser[name] if parser.has_section(name) else {}

    def _get(self, key, conv, default):
        if key not in self.sec:
            if default is _REQUIRED:
                raise ConfigError(f"[{self.name}] is missing '{key}'")
            return default
        raw = self.sec[key].strip()
        try:
            return conv(raw)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} = {raw!r} is not a valid value") from None

    def float(self, key, default=None):
        return self._get(key, float, default)

    def int(self, key, default=None):
        return self._get(key, int, default)

    def str(self, key, default=None):
        return self._get(key, str, default)

    def bool(self, key, default=None):
        return self._get(key, _to_bool, default)


_REQUIRED = object()


def _to_bool(raw):
    value = configparser.ConfigParser.BOOLEAN_STATES.get(raw.lower())
    if value is None:
        raise ValueError(raw)
    return value


def parse_config(text: str, base_dir: Path | str = ".") -> RunConfig:
    """Build a :class:`RunConfig` from configuration text.

    Relative paths (output directory, initial snapshot) are resolved against
    ``base_dir``.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    missing = [s for s in REQUIRED_SECTIONS if not parser.has_section(s)]
    if missing:
        raise ConfigError(f"missing section(s): {', '.join(missing)}")
    for name in parser.sections():
        if name not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - _KNOWN_KEYS[name]
        if unknown:
            raise ConfigError(f"[{name}] has unknown key(s): {', '.join(sorted(unknown))}")
    base_dir = Path(base_dir)
    R = _REQUIRED

    g_ = _Section(parser, "grid")
    ph = _Section(parser, "physics")
    fo = _Section(parser, "forcing")
    ti = _Section(parser, "time")
    ou = _Section(parser, "output")
    ini = _Section(parser, "initial")

    ni, nj, nk = g_.int("ni", R), g_.int("nj", R), g_.int("nk", R)
    dx, dy = g_.float("dx", R), g_.float("dy", R)
    if min(ni, nj, nk) < 1:
        raise ConfigError("[grid] ni, nj and nk must be at least 1")
    if not (dx > 0 and dy > 0):
        raise ConfigError("[grid] dx and dy must be positive")
    dz_text = g_.str("dz")
    if dz_text is not None:
        try:
            dz = np.array([float(s) for s in dz_text.split(",")])
        except ValueError:
            raise ConfigError(f"[grid] dz = {dz_text!r} is not a list of numbers") from None
        if dz.size != nk or np.any(dz <= 0):
            raise ConfigError(f"[grid] dz needs {nk} positive thicknesses")
        depth = g_.float("depth", float(dz.sum()))
    else:
        depth = g_.float("depth", R)
        dz = np.full(nk, depth / nk)
    if not depth > 0:
        raise ConfigError("[grid] depth must be positive")
    spec = GridSpec(ni, nj, nk, dx, dy, dz, np.full((ni, nj), depth),
                    g=ph.float("g", 9.81), f=ph.float("f", 0.0))

    rho = fo.float("rho", 1000.0)
    if not rho > 0:
        raise ConfigError("[forcing] rho must be positive")
    try:
        params = ExplicitParams(
            nu_h=ph.float("nu_h", 0.0),
            tau_wx=fo.float("tau_x", 0.0) / rho,
            tau_wy=fo.float("tau_y", 0.0) / rho,
            friction=ph.str("friction", "none"),
            k_lin=ph.float("k_lin", 0.0),
            chezy=ph.float("chezy"),
            viscosity=ph.str("viscosity", "constant"),
            nu_z=ph.float("nu_z", 0.0),
            l0=ph.float("l0"),
            kappa=ph.float("kappa", 0.41),
            nu_min=ph.float("nu_min", 1e-6),
            advection=ph.bool("advection", True),
        )
        step = StepConfig(
            dt=ti.float("dt", R),
            t_end=ti.float("t_end", R),
            cg_tol=ti.float("cg_tol", 1e-10),
            cg_max_iter=ti.int("cg_max_iter"),
            coupling=ti.str("coupling", "recursive"),
            check_system=ti.bool("check_system", False),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    output = OutputConfig(
        directory=base_dir / ou.str("directory", "output"),
        series=ou.str("series", "series.csv"),
        probes=_parse_probes(ou.str("probes", f"{ni // 2},{nj // 2}"), ni, nj),
        every=ou.int("every", 1),
        snapshot_every=ou.int("snapshot_every", 0),
    )
    if output.every < 1 or output.snapshot_every < 0:
        raise ConfigError("[output] every must be >= 1 and snapshot_every >= 0")

    kind = ini.str("type", "rest")
    if kind not in INITIAL_TYPES:
        raise ConfigError(f"[initial] type must be one of {', '.join(INITIAL_TYPES)}")
    path = ini.str("path")
    if kind == "snapshot" and path is None:
        raise ConfigError("[initial] type = snapshot needs a path")
    initial = InitialConfig(kind, ini.float("amplitude", 0.1),
                            None if path is None else base_dir / path)
    return RunConfig(spec, params, step, output, initial, rho)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
