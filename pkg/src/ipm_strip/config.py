"""Simulation configuration: a flat ``key = value`` file with sections."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .exceptions import ConfigError

INITIAL_KINDS = ("single_mode", "random_decay", "from_file")
STEPPERS = ("rk4", "etd")
NORM_STYLES = ("full", "endpoint")


def _section(name):
    return {"section": name}


@dataclass(frozen=True)
class SimConfig:
    # [grid]
    P: int = field(default=32, metadata=_section("grid"))
    Q: int = field(default=32, metadata=_section("grid"))
    m: int = field(default=32, metadata=_section("grid"))
    n_x: int | None = field(default=None, metadata=_section("grid"))
    n_y: int | None = field(default=None, metadata=_section("grid"))
    # [time]
    t_end: float = field(default=10.0, metadata=_section("time"))
    dt: float | None = field(default=None, metadata=_section("time"))
    cfl: float = field(default=0.5, metadata=_section("time"))
    out_every: int = field(default=10, metadata=_section("time"))
    stepper: str = field(default="rk4", metadata=_section("time"))
    snapshot_every: int | None = field(default=None, metadata=_section("time"))
    # [initial]
    initial_kind: str = field(default="random_decay", metadata=_section("initial"))
    epsilon: float = field(default=1e-2, metadata=_section("initial"))
    seed: int = field(default=0, metadata=_section("initial"))
    mode_p: int = field(default=1, metadata=_section("initial"))
    mode_q: int = field(default=1, metadata=_section("initial"))
    decay_exponent: float = field(default=4.0, metadata=_section("initial"))
    initial_path: str | None = field(default=None, metadata=_section("initial"))
    # [model]
    nonlinear: bool = field(default=True, metadata=_section("model"))
    gamma: int = field(default=1, metadata=_section("model"))
    gamma_tilde: int = field(default=2, metadata=_section("model"))
    # [monitor]
    monitors: tuple = field(default=(0, 3, 5, 13), metadata=_section("monitor"))
    norm_style: str = field(default="endpoint", metadata=_section("monitor"))
    bkm_threshold: float = field(default=50.0, metadata=_section("monitor"))

    def __post_init__(self):
        self.validate()

    @property
    def kappa(self) -> int:
        """Regularity index 3 + 2 (gamma + 2 gamma_tilde)."""
        return 3 + 2 * (self.gamma + 2 * self.gamma_tilde)

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.P >= 1 and self.Q >= 1, "P and Q must be >= 1")
        need(1 <= self.m <= min(self.P, self.Q), f"m={self.m} must lie in [1, min(P, Q)]")
        need(self.t_end >= 0, "t_end must be non-negative")
        need(self.dt is None or self.dt > 0, "dt must be positive")
        need(self.cfl > 0, "cfl must be positive")
        need(self.out_every >= 1, "out_every must be >= 1")
        need(self.snapshot_every is None or self.snapshot_every >= 1, "snapshot_every must be >= 1")
        need(self.stepper in STEPPERS, f"stepper must be one of {STEPPERS}")
        need(self.initial_kind in INITIAL_KINDS, f"initial_kind must be one of {INITIAL_KINDS}")
        need(self.epsilon > 0, "epsilon must be positive")
        need(self.gamma >= 1, "gamma must be >= 1")
        need(self.gamma_tilde >= 2, "gamma_tilde must be >= 2")
        need(self.norm_style in NORM_STYLES, f"norm_style must be one of {NORM_STYLES}")
        need(self.bkm_threshold > 0, "bkm_threshold must be positive")
        need(all(k >= 0 for k in self.monitors), "monitor orders must be non-negative")
        need(len(self.monitors) > 0, "at least one monitor order is required")
        if self.initial_kind == "single_mode":
            need(
                self.mode_q >= 1 and abs(self.mode_p) <= self.m and self.mode_q <= self.m,
                f"mode ({self.mode_p}, {self.mode_q}) is outside the truncation m={self.m}",
            )
        if self.initial_kind == "from_file":
            need(bool(self.initial_path), "from_file initial data needs initial_path")

    # -- text round trip ----------------------------------------------------

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        for f in fields(self):
            section = f.metadata["section"]
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, f.name, _format(getattr(self, f.name)))
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "SimConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        values = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                f = _lookup(key)
                if f.metadata["section"] != section:
                    raise ConfigError(f"key {key!r} belongs in [{f.metadata['section']}], not [{section}]")
                values[key] = _parse(f, raw)
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_ini(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def with_overrides(self, assignments) -> "SimConfig":
        """Apply ``key=value`` strings (``section.key`` also accepted)."""
        values = {}
        for item in assignments:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, raw = (s.strip() for s in item.split("=", 1))
            key = key.rsplit(".", 1)[-1]
            values[key] = _parse(_lookup(key), raw)
        return replace(self, **values)


_FIELDS = {f.name: f for f in fields(SimConfig)}


def _lookup(key):
    try:
        return _FIELDS[key]
    except KeyError:
        raise ConfigError(f"unknown config key {key!r}") from None


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(f, raw: str):
    raw = raw.strip()
    kind = f.type
    try:
        if raw.lower() == "none" and "None" in kind:
            return None
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "tuple":
            return tuple(int(v) for v in raw.replace(";", ",").split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {f.name}") from None
