"""Flat ``key = value`` scenario documents.

One setting per line, ``#`` starts a comment.  Lists are comma separated.
Output files echo the resolved settings as ``#: key = value`` lines; when a
file contains any such lines only those are read, so an output file can be
fed back in to reproduce its payload.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

SCENARIOS = (
    "spectrum_hermitian",
    "spectrum_isotropic",
    "spectrum_nh",
    "zero_mode",
    "evolve",
    "stabilization_sweep",
    "eigenstate_entropy",
    "validate",
    "figures",
)

RECORDS = ("auto", "observables", "distribution", "spectrum", "profiles")


@dataclass
class ScenarioConfig:
    scenario: str = "spectrum_nh"
    J1: float = 1.0
    J2: float = 0.2
    gamma: float = 0.0
    n_max: int | None = None
    tail_tol: float = 1e-10
    n_levels: int | None = None
    ep_tol: float = 1e-9
    # initial state: fock |n, spin>, coherent |init_alpha, spin>, or displaced D(init_alpha)|n, spin>
    init: str = "fock"
    init_n: int = 0
    init_spin: str = "down"
    init_alpha: float | None = None
    t_start: float = 0.0
    t_end: float = 100.0
    samples: int = 201
    propagator: str = "analytic"
    gammas: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)  # J1/J2 sweep for the Hermitian spectra
    n_inits: list[int] = field(default_factory=list)
    threshold: float = 0.999999
    t_max: float = 2.0e4
    top_k: int = 5
    cells: int = 50
    # what a scenario writes when it can write more than one thing; "auto" picks its default
    record: str = "auto"
    figure: str = "fig3"
    output: str = "-"
    format: str = "csv"
    timestamp: bool = False

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown value {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if self.init not in ("fock", "coherent", "displaced"):
            raise ConfigError(f"init: expected fock, coherent or displaced, got {self.init!r}")
        if self.init_spin not in ("up", "down"):
            raise ConfigError(f"init_spin: expected up or down, got {self.init_spin!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected csv or json, got {self.format!r}")
        if self.propagator not in ("analytic", "oracle"):
            raise ConfigError(f"propagator: expected analytic or oracle, got {self.propagator!r}")
        if self.record not in RECORDS:
            raise ConfigError(f"record: expected one of {', '.join(RECORDS)}, got {self.record!r}")
        if self.figure not in ("fig2", "fig3", "fig4", "figA1"):
            raise ConfigError(f"figure: expected fig2, fig3, fig4 or figA1, got {self.figure!r}")
        if self.scenario == "evolve" and self.samples < 2:
            raise ConfigError("samples: evolve needs at least 2 time samples")
        if self.scenario == "evolve" and not self.t_end > self.t_start >= 0:
            raise ConfigError("t_start/t_end: need 0 <= t_start < t_end")
        if self.scenario == "stabilization_sweep" and not (self.gammas and self.n_inits):
            raise ConfigError("gammas/n_inits: stabilization_sweep needs nonempty lists")
        if self.J2 == 0:
            raise ConfigError("J2: must be nonzero")
        if self.gamma < 0 or any(g < 0 for g in self.gammas):
            raise ConfigError("gamma: must be non-negative")
        return self

    def as_items(self) -> list[tuple[str, str]]:
        return [(f.name, format_value(getattr(self, f.name))) for f in fields(self)]


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def _field_types() -> dict[str, str]:
    return {f.name: str(f.type) for f in fields(ScenarioConfig)}


def _coerce(key: str, raw: str, type_name: str, where: str):
    raw = raw.strip()
    try:
        if "None" in type_name and raw.lower() in ("none", ""):
            return None
        if type_name.startswith("list[float]"):
            return [float(x) for x in raw.split(",") if x.strip()]
        if type_name.startswith("list[int]"):
            return [int(x) for x in raw.split(",") if x.strip()]
        if type_name.startswith("bool"):
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if type_name.startswith("int"):
            return int(raw)
        if type_name.startswith("float"):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: field {key!r} expects {type_name}, got {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    lines = text.splitlines()
    echoed = any(line.startswith("#:") for line in lines)
    types = _field_types()
    values = {}
    for lineno, line in enumerate(lines, start=1):
        if echoed:
            if not line.startswith("#:"):
                continue
            line = line[2:]
        else:
            line = line.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown field {key!r}")
        values[key] = _coerce(key, raw, types[key], f"{source}:{lineno}")
    return values


def _from_json(text: str, source: str) -> dict:
    """Config echoed in a JSON output file, under its ``config`` key."""
    import json

    try:
        echoed = json.loads(text)["config"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{source}: not a JSON output file with a 'config' block ({exc})") from None
    types = _field_types()
    values = {}
    for key, raw in echoed.items():
        if key not in types:
            raise ConfigError(f"{source}: unknown field {key!r}")
        values[key] = _coerce(key, raw, types[key], source)
    return values


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        if text.lstrip().startswith("{"):
            values.update(_from_json(text, str(p)))
        else:
            values.update(parse_config_text(text, str(p)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return dataclasses.replace(ScenarioConfig(), **values).validate()
