"""Run configuration: flat ``section.key = value`` text files.

Lines starting with ``#`` are comments.  Values are parsed as numbers where the
field is numeric; lists are comma separated.  Physical inputs are SI units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .light import Protocol
from .simulation import SimulationMode


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


# key -> (attribute, type)
_KEYS = {
    "imaging.f_m": ("f_m", float),
    "imaging.lambda_m": ("lambda_m", float),
    "imaging.d_m": ("d_m", float),
    "imaging.Y_m": ("Y_m", float),
    "source.protocol": ("protocol", str),
    "source.M": ("M", int),
    "source.N": ("N", float),
    "source.tau": ("tau", float),
    "source.r": ("r", float),
    "source.alpha": ("alpha", float),
    "reconstruction.Q": ("Q", int),
    "reconstruction.exact_sum": ("exact_sum", bool),
    "reconstruction.N_avg": ("N_avg", int),
    "simulation.trials": ("trials", int),
    "simulation.seed": ("seed", int),
    "simulation.grid_points": ("grid_points", int),
    "simulation.mode": ("mode", str),
    "simulation.object": ("object", str),
    "simulation.object_peak_rad": ("object_peak_rad", float),
    "optimize.protocols": ("protocols", list),
    "optimize.tau_list": ("tau_list", list),
    "output.directory": ("directory", str),
    "output.formats": ("formats", str),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}
OBJECTS = ("three-lobe", "zero")


@dataclass
class RunConfig:
    f_m: float = 10e-3
    lambda_m: float = 780e-9
    d_m: float = 50.8e-3
    Y_m: float = 300e-9
    protocol: str = "MEMSL"
    M: int = 8
    N: float | None = 6.0
    tau: float = 1.0
    r: float | None = None
    alpha: float | None = None
    Q: int | None = None
    exact_sum: bool = False
    N_avg: int = 1
    trials: int = 1000
    seed: int | None = None
    grid_points: int = 257
    mode: str = "coefficient-space"
    object: str = "three-lobe"
    object_peak_rad: float | None = None
    protocols: list = field(default_factory=lambda: ["MEMSL", "IndependentSqueezed", "Coherent"])
    tau_list: list = field(default_factory=lambda: [1.0])
    directory: str | None = None
    formats: str = "csv"

    @property
    def explicit_source(self) -> bool:
        return self.r is not None or self.alpha is not None

    def validate(self) -> "RunConfig":
        for key in ("f_m", "lambda_m", "d_m", "Y_m"):
            val = getattr(self, key)
            if not (math.isfinite(val) and val > 0):
                raise ConfigError(f"{_ATTR_TO_KEY[key]} must be positive, got {val}")
        try:
            self.protocol = Protocol.parse(self.protocol).value
            self.mode = SimulationMode.parse(self.mode).value
            self.protocols = [Protocol.parse(p).value for p in self.protocols]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.M < 1:
            raise ConfigError(f"source.M must be >= 1, got {self.M}")
        if not 0 < self.tau <= 1:
            raise ConfigError(f"source.tau must lie in (0, 1], got {self.tau}")
        if self.explicit_source:
            if self.N is not None:
                raise ConfigError("source.N and explicit source.r/source.alpha are mutually exclusive")
            if self.alpha is None or self.alpha <= 0:
                raise ConfigError("explicit sources need source.alpha > 0")
            if self.r is None:
                self.r = 0.0
            if self.r < 0:
                raise ConfigError("source.r must be >= 0")
            if self.protocol == Protocol.COHERENT.value and self.r != 0:
                raise ConfigError("coherent light requires source.r = 0")
        elif self.N is None or not self.N > 0:
            raise ConfigError("source.N must be positive (or give source.r and source.alpha)")
        if self.trials < 1:
            raise ConfigError(f"simulation.trials must be >= 1, got {self.trials}")
        if self.grid_points < 3:
            raise ConfigError("simulation.grid_points must be >= 3")
        if self.object not in OBJECTS:
            raise ConfigError(f"simulation.object must be one of {OBJECTS}")
        if self.N_avg < 1:
            raise ConfigError(f"reconstruction.N_avg must be >= 1, got {self.N_avg}")
        if self.Q is not None and self.Q < 0:
            raise ConfigError("reconstruction.Q must be >= 0")
        if not self.tau_list:
            raise ConfigError("optimize.tau_list is empty")
        for t in self.tau_list:
            if not 0 < t <= 1:
                raise ConfigError(f"optimize.tau_list entry {t} outside (0, 1]")
        if self.formats != "csv":
            raise ConfigError("only csv output is supported")
        return self

    def to_text(self, include_output: bool = True) -> str:
        lines = []
        for key, (attr, kind) in _KEYS.items():
            if key.startswith("output.") and not include_output:
                continue
            val = getattr(self, attr)
            if val is None:
                continue
            if kind is list:
                text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            elif kind is float:
                text = repr(float(val))
            elif kind is bool:
                text = "true" if val else "false"
            else:
                text = str(val)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def _convert(key: str, raw: str):
    attr, kind = _KEYS[key]
    raw = raw.strip()
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            val = float(raw)
            if val != int(val):
                raise ValueError
            return int(val)
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind is list:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            return [float(x) for x in items] if attr == "tau_list" else items
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return values


def build_config(values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then file values, then command-line overrides (all keyed by dotted name)."""
    cfg = RunConfig()
    merged = dict(values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    explicit = any(k in merged for k in ("source.r", "source.alpha"))
    if explicit and "source.N" not in merged:
        cfg.N = None
    for key, val in merged.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        if isinstance(val, str) and _KEYS[key][1] is not str:
            val = _convert(key, val)
        setattr(cfg, _KEYS[key][0], val)
    return cfg.validate()


def load_config(path, overrides: dict | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_config_text(text), overrides)


def config_keys() -> list[str]:
    return list(_KEYS)

