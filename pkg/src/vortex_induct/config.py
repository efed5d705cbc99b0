"""Strict JSON configuration for the command-line tool."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core_model import ElectronState, Tube
from .errors import ConfigError
from .numerics import QuadratureSpec

BUNDLED = ("fig2.json",)


@dataclass(frozen=True)
class ElectronConfig:
    energy_ev: float
    oam: int
    waist_m: float


@dataclass(frozen=True)
class TubeConfig:
    radius_m: float
    thickness_m: float
    length_m: float
    conductivity_s_per_m: float
    rel_permeability: float


@dataclass(frozen=True)
class SamplingConfig:
    z_min_m: float
    z_max_m: float
    n_samples: int


@dataclass(frozen=True)
class CircuitConfig:
    inductance_h: float
    resistance_ohm: float | None = None


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float
    rel_tol: float
    max_depth: int


@dataclass(frozen=True)
class FieldMapConfig:
    n_r: int = 200
    n_z: int = 200
    r_max_m: float | None = None
    z_pad_m: float | None = None


@dataclass(frozen=True)
class ComplementarityConfig:
    hilbert_dim: int = 16
    relative_phase: float = 0.0
    coupling_values: tuple[float, ...] = tuple(np.round(np.linspace(0.0, 3.0, 31), 12))


@dataclass(frozen=True)
class SimulationConfig:
    electron: ElectronConfig
    tube: TubeConfig
    sampling: SamplingConfig
    circuit: CircuitConfig
    quadrature: QuadratureConfig
    field_map: FieldMapConfig = field(default_factory=FieldMapConfig)
    complementarity: ComplementarityConfig = field(default_factory=ComplementarityConfig)

    def electron_state(self, oam: int | None = None) -> ElectronState:
        e = self.electron
        return ElectronState(e.energy_ev, e.oam if oam is None else oam, e.waist_m)

    def tube_model(self) -> Tube:
        t = self.tube
        return Tube(t.radius_m, t.thickness_m, t.length_m, t.conductivity_s_per_m,
                    t.rel_permeability)

    def quadrature_spec(self) -> QuadratureSpec:
        q = self.quadrature
        return QuadratureSpec(q.abs_tol, q.rel_tol, q.max_depth)

    def z_samples(self) -> np.ndarray:
        s = self.sampling
        return np.linspace(s.z_min_m, s.z_max_m, s.n_samples)


# key -> (kind, required); kinds: pos (float > 0), real, int, posint, oddint3, optpos, reals
_SCHEMA = {
    "electron": ({"energy_ev": "pos", "oam": "int", "waist_m": "pos"}, True),
    "tube": ({"radius_m": "pos", "thickness_m": "pos", "length_m": "pos",
              "conductivity_s_per_m": "pos", "rel_permeability": "pos"}, True),
    "sampling": ({"z_min_m": "real", "z_max_m": "real", "n_samples": "oddint3"}, True),
    "circuit": ({"inductance_h": "nonneg", "resistance_ohm": "optpos"}, True),
    "quadrature": ({"abs_tol": "pos", "rel_tol": "pos", "max_depth": "posint"}, True),
    "field_map": ({"n_r": "posint", "n_z": "posint", "r_max_m": "optpos",
                   "z_pad_m": "optpos"}, False),
    "complementarity": ({"hilbert_dim": "posint", "relative_phase": "real",
                         "coupling_values": "reals"}, False),
}
_OPTIONAL_KEYS = {"resistance_ohm", "r_max_m", "z_pad_m", "n_r", "n_z",
                  "hilbert_dim", "relative_phase", "coupling_values"}
_SECTION_TYPES = {"electron": ElectronConfig, "tube": TubeConfig, "sampling": SamplingConfig,
                  "circuit": CircuitConfig, "quadrature": QuadratureConfig,
                  "field_map": FieldMapConfig, "complementarity": ComplementarityConfig}


def _line_of(text: str, path: list[str]) -> int:
    pos = 0
    for key in path:
        hit = text.find(f'"{key}"', pos)
        if hit < 0:
            break
        pos = hit
    return text.count("\n", 0, pos) + 1


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_value(kind: str, value, where: str):
    def fail(msg):
        raise ConfigError(f"{where}: {msg} (got {value!r})")

    if kind == "optpos":
        if value is None:
            return None
        kind = "pos"
    if kind == "reals":
        if not isinstance(value, list) or not value or not all(_is_number(v) for v in value):
            fail("expected a non-empty list of numbers")
        return tuple(float(v) for v in value)
    if kind in ("int", "posint", "oddint3"):
        if not isinstance(value, int) or isinstance(value, bool):
            fail("expected an integer")
        if kind == "posint" and value < 1:
            fail("must be >= 1")
        if kind == "oddint3" and (value < 3 or value % 2 == 0):
            fail("must be an odd integer >= 3")
        return value
    if not _is_number(value) or not np.isfinite(value):
        fail("expected a finite number")
    if kind == "pos" and not value > 0:
        fail("must be positive")
    if kind == "nonneg" and value < 0:
        fail("must be non-negative")
    return float(value)


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be an object")
    for key in raw:
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{_line_of(text, [key])}: unknown key '{key}'")
    sections = {}
    for name, (fields, required) in _SCHEMA.items():
        if name not in raw:
            if required:
                raise ConfigError(f"{source}: missing required section '{name}'")
            continue
        body = raw[name]
        if not isinstance(body, dict):
            raise ConfigError(f"{source}:{_line_of(text, [name])}: '{name}' must be an object")
        for key in body:
            if key not in fields:
                raise ConfigError(
                    f"{source}:{_line_of(text, [name, key])}: unknown key '{name}.{key}'")
        values = {}
        for key, kind in fields.items():
            where = f"{source}:{_line_of(text, [name, key])}: {name}.{key}"
            if key not in body:
                if key in _OPTIONAL_KEYS:
                    continue
                raise ConfigError(f"{source}:{_line_of(text, [name])}: missing key '{name}.{key}'")
            values[key] = _check_value(kind, body[key], where)
        sections[name] = _SECTION_TYPES[name](**values)
    s = sections["sampling"]
    if not s.z_max_m > s.z_min_m:
        raise ConfigError(f"{source}: sampling.z_max_m must exceed sampling.z_min_m")
    return SimulationConfig(**sections)


def load_config(path: str | Path | None = None) -> SimulationConfig:
    """Load a config file; ``None`` or the bare name of a bundled file loads the bundled copy."""
    if path is None:
        path = "fig2.json"
    p = Path(path)
    if p.is_file():
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {p}: {exc}") from None
        return parse_config(text, str(p))
    if p.name == str(path) and p.name in BUNDLED:
        text = resources.files("vortex_induct.data").joinpath(p.name).read_text(encoding="utf-8")
        return parse_config(text, p.name)
    raise ConfigError(f"config file not found: {path}")
