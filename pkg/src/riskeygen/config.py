"""Flat INI-style run configuration.

Keys may be written as ``section.key = value`` at top level or as
``key = value`` under a ``[section]`` header. ``#`` starts a comment.
An empty file yields the simulation-table defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field

from .errors import ConfigError
from .keygen import ProtocolParams
from .scene import PathLossSpec, Position, ScenarioConfig

SWEEP_VARIABLES = ("N", "T_s", "T_k", "Q", "snr_db", "eve_x", "L")

_TOP = "__top__"
_KEY_LINE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def _position(text):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) not in (2, 3):
        raise ValueError(f"expected 'x,y[,z]', got {text!r}")
    return Position(*(float(p) for p in parts))


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    return int(text.strip(), 0)


def _floats(text):
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _fmt_pos(p: Position):
    return f"{p.x!r},{p.y!r},{p.z!r}"


# section -> key -> (parser, formatter)
_SCENARIO_KEYS = {
    "carrier_hz": (float, repr),
    "tx_power_dbm": (float, repr),
    "noise_dbm": (float, repr),
    "alice": (_position, _fmt_pos),
    "bob": (_position, _fmt_pos),
    "eve": (_position, _fmt_pos),
    "ris_center": (_position, _fmt_pos),
    "ris_cols": (_int, str),
    "ris_rows": (_int, str),
    "ris_spacing_wl": (float, repr),
    "ris_enabled": (_bool, lambda b: "true" if b else "false"),
    "antenna_gain_mode": (str.strip, str),
    "correlation": (str.strip, str),
    "rho_mode": (str.strip, str),
    "rho": (float, repr),
}
_PATH_LOSS_KEYS = {
    "fixed_loss_db": (float, repr),
    "exponent_ris": (float, repr),
    "exponent_direct": (float, repr),
    "antenna_gain_db": (float, repr),
    "penetration_loss_db": (float, repr),
}
_PROTOCOL_KEYS = {k: (_int, str) for k in ("t_total", "t_key", "t_switch", "q_levels", "n_blocks")}
_SWEEP_KEYS = {
    "variable": (str.strip, str),
    "values": (_floats, lambda v: ",".join(repr(x) for x in v)),
    "metrics": (_names, ",".join),
}
_RUN_KEYS = {
    "trials": (_int, str),
    "master_seed": (_int, str),
    "output_path": (str.strip, str),
    "workers": (_int, str),
}
SCHEMA = {
    "scenario": {**_SCENARIO_KEYS, **_PATH_LOSS_KEYS},
    "protocol": _PROTOCOL_KEYS,
    "sweep": _SWEEP_KEYS,
    "run": _RUN_KEYS,
}


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    protocol: ProtocolParams = ProtocolParams()
    sweep_variable: str | None = None
    sweep_values: tuple = ()
    metrics: tuple = ("skr_lb",)
    trials: int = 100
    master_seed: int = 0
    output_path: str = "results.csv"
    workers: int = 1
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def points(self):
        """``(x, scenario, protocol)`` for every sweep value (one point when
        no sweep is configured)."""
        from .sweep import apply_sweep

        if self.sweep_variable is None:
            return [(0.0, self.scenario, self.protocol)]
        return [(v, *apply_sweep(self.scenario, self.protocol, self.sweep_variable, v)) for v in self.sweep_values]


def _line_index(text):
    """Map ``(section, key)`` to its 1-based line number."""
    index = {}
    section = _TOP
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_LINE.match(line)
        if m:
            section = m.group(1).strip()
            continue
        m = _KEY_LINE.match(line)
        if m:
            index[(section, m.group(1).lower())] = n
    return index


def _flatten(parser, index):
    """Yield ``(section, key, raw_value, lineno)`` with dotted top-level keys split."""
    for section in parser.sections():
        for key, raw in parser.items(section):
            lineno = index.get((section, key))
            if section == _TOP:
                if "." not in key:
                    raise ConfigError(f"key {key!r} needs a section", lineno)
                sec, _, sub = key.partition(".")
            else:
                sec, sub = section, key
            yield sec, sub, raw, lineno


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; errors carry the offending line number."""
    index = _line_index(text)
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",), delimiters=("=",)
    )
    parser.optionxform = str.lower
    try:
        parser.read_string(f"[{_TOP}]\n{text}")
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], None if lineno is None else lineno - 1) from None

    values = {s: {} for s in SCHEMA}
    lines = {}
    for sec, key, raw, lineno in _flatten(parser, index):
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key {sec}.{key}", lineno)
        try:
            values[sec][key] = SCHEMA[sec][key][0](raw)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"bad value for {sec}.{key}: {exc}", lineno) from None
        lines[f"{sec}.{key}"] = lineno

    def where(*keys):
        for k in keys:
            if k in lines:
                return lines[k]
        return None

    sc = values["scenario"]
    try:
        pl = PathLossSpec(**{k: sc.pop(k) for k in list(sc) if k in _PATH_LOSS_KEYS})
        scenario = ScenarioConfig(path_loss=pl, **sc)
    except (ConfigError, TypeError) as exc:
        raise ConfigError(str(exc), where(*(f"scenario.{k}" for k in SCHEMA["scenario"]))) from None
    try:
        protocol = ProtocolParams(**values["protocol"])
    except ConfigError as exc:
        raise ConfigError(str(exc), where(*(f"protocol.{k}" for k in ("t_switch", "t_key", "t_total", "q_levels", "n_blocks")))) from None

    sw = values["sweep"]
    variable = sw.get("variable")
    if variable is not None and variable not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}", where("sweep.variable"))
    sweep_values = sw.get("values", ())
    if variable is not None and not sweep_values:
        raise ConfigError("sweep.values is empty", where("sweep.values", "sweep.variable"))

    run = values["run"]
    if run.get("trials", 1) < 1:
        raise ConfigError("run.trials must be >= 1", where("run.trials"))
    if run.get("workers", 1) < 1:
        raise ConfigError("run.workers must be >= 1", where("run.workers"))
    if not 0 <= run.get("master_seed", 0) < 2**64:
        raise ConfigError("run.master_seed must be a 64-bit unsigned integer", where("run.master_seed"))

    cfg = RunConfig(
        scenario=scenario,
        protocol=protocol,
        sweep_variable=variable,
        sweep_values=tuple(sweep_values),
        metrics=sw.get("metrics", RunConfig.metrics),
        lines=lines,
        **run,
    )
    try:
        cfg.points()
    except ConfigError as exc:
        raise ConfigError(str(exc), where("sweep.values", "sweep.variable")) from None
    from .sweep import check_metrics

    try:
        check_metrics(cfg)
    except ConfigError as exc:
        raise ConfigError(str(exc), where("sweep.metrics", "sweep.variable")) from None
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Render a config that :func:`parse_config` maps back to an equal value."""
    sc = cfg.scenario
    sections = {
        "scenario": {**{k: getattr(sc, k) for k in _SCENARIO_KEYS}, **{k: getattr(sc.path_loss, k) for k in _PATH_LOSS_KEYS}},
        "protocol": {k: getattr(cfg.protocol, k) for k in _PROTOCOL_KEYS},
        "sweep": {"metrics": cfg.metrics},
        "run": {k: getattr(cfg, k) for k in _RUN_KEYS},
    }
    if cfg.sweep_variable is not None:
        sections["sweep"] = {"variable": cfg.sweep_variable, "values": cfg.sweep_values, "metrics": cfg.metrics}
    out = []
    for name, entries in sections.items():
        out.append(f"[{name}]")
        for key, value in entries.items():
            out.append(f"{key} = {SCHEMA[name][key][1](value)}")
        out.append("")
    return "\n".join(out)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
