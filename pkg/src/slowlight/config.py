"""Run configuration: sectioned ``key = value unit`` text with strict SI units.

Example::

    [run]
    scenario = figure2b

    [flow]
    kind = tanh-ramp
    left = 298.4924 m/s
    right = 298.5 m/s
    center = 0.002 m
    width = 1e-4 m

Every dimensional value must carry its unit; dimensionless values must not.
Number lists are comma separated (``u = 0, 150, 300 m/s``) or written as
``start:stop:count`` ranges. Unknown sections and keys are rejected.
"""
from __future__ import annotations

import configparser
import copy
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .dispersion import Branch
from .medium import PROFILE_KINDS, MediumProfiles, MediumSpec, PhysicalConstants, make_profile


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line, self.column = line, column


# value kinds: float, int, bool, str, floats (list), auto-float (number or keyword)
@dataclass(frozen=True)
class Key:
    kind: str
    unit: str = ""
    choices: tuple = ()
    keywords: tuple = ()


SCHEMA: dict[str, dict[str, Key]] = {
    "run": {"scenario": Key("str", choices=("figure1", "figure2a", "figure2b", "figure3", "sonar", "none"))},
    "medium": {
        "omega0": Key("float", "rad/s"),
        "epsilon": Key("float"),
        "c": Key("float", "m/s"),
        "hbar": Key("float", "J*s"),
    },
    "launch": {
        "z": Key("float", "m"),
        "branch": Key("str", choices=("plus", "minus")),
        "delta": Key("float", keywords=("resonant",)),
        "detuning_factor": Key("float"),
    },
    "grid": {"z_min": Key("float", "m"), "z_max": Key("float", "m"), "n": Key("int")},
    "wave": {
        "enabled": Key("bool"),
        "sigma": Key("float", "m"),
        "t_end": Key("float", "s"),
        "sample_every": Key("float", "s"),
        "dt": Key("float", "s", keywords=("auto",)),
        "boundary": Key("str", choices=("periodic", "absorbing")),
        "mask_width": Key("float", "m"),
        "stepper": Key("str", choices=("split-step", "crank-nicolson")),
        "z_ref": Key("float", "m", keywords=("auto",)),
        "snapshot_every": Key("int"),
        "crosscheck_steps": Key("int"),
    },
    "integrator": {
        "dt": Key("float", "s"),
        "rel_tol": Key("float"),
        "max_steps": Key("int"),
        "event_refine_tol": Key("float", "m"),
        "max_step": Key("float", "s"),
        "t_end": Key("float", "s"),
    },
    "dispersion": {
        "delta": Key("floats"),
        "u": Key("floats", "m/s"),
        "v_g": Key("floats", "m/s"),
        "branch": Key("str", choices=("plus", "minus", "both")),
    },
    "sweep": {
        "axis": Key("str", choices=("flow-drop", "group-velocity")),
        "min": Key("float", "m/s"),
        "max": Key("float", "m/s"),
        "count": Key("int"),
    },
    "freeze": {"enabled": Key("bool"), "t_end": Key("float", "s")},
}

PROFILE_SECTIONS = ("flow", "group_velocity")
PROFILE_KEYS = {
    "uniform": {"value": Key("float", "m/s")},
    "step": {"left": Key("float", "m/s"), "right": Key("float", "m/s"),
             "center": Key("float", "m"), "smoothing": Key("float", "m")},
    "tanh-ramp": {"left": Key("float", "m/s"), "right": Key("float", "m/s"),
                  "center": Key("float", "m"), "width": Key("float", "m")},
    "linear-ramp": {"left": Key("float", "m/s"), "right": Key("float", "m/s"),
                    "z_start": Key("float", "m"), "z_end": Key("float", "m")},
    "table": {"z": Key("floats", "m"), "values": Key("floats", "m/s")},
}

SECTION_ORDER = ("run", "medium", "flow", "group_velocity", "launch", "grid", "wave", "freeze",
                 "integrator", "dispersion", "sweep")


# ---------------------------------------------------------------------------
# defaults

C_LIGHT = 3.0e8
V_G = 300.0
U0 = 0.995 * V_G
FIG2A_FLOW_INCREASE = 0.0115
FIG2B_FLOW_DROP = 0.0076  # total drop of the ramp; the turn happens at ~3.77 mm/s


def _base() -> dict:
    return {
        "run": {"scenario": "none"},
        "medium": {"omega0": 3.0e15, "epsilon": 1.0e-3, "c": C_LIGHT, "hbar": 1.054571817e-34},
        "flow": {"kind": "uniform", "value": U0},
        "group_velocity": {"kind": "uniform", "value": V_G},
        "launch": {"z": 3.0e-3, "branch": "minus", "delta": "resonant", "detuning_factor": 1.0},
        "grid": {"z_min": 0.0, "z_max": 4.0e-3, "n": 4096},
        "wave": {"enabled": True, "sigma": 1.0e-4, "t_end": 1.0e-3, "sample_every": 5.0e-6, "dt": "auto",
                 "boundary": "periodic", "mask_width": 2.0e-4, "stepper": "split-step", "z_ref": "auto",
                 "snapshot_every": 0, "crosscheck_steps": 0},
        "integrator": {"dt": 1.0e-6, "rel_tol": 1.0e-10, "max_steps": 200000, "event_refine_tol": 1.0e-10,
                       "max_step": 1.0e-5, "t_end": 5.0e-3},
    }


# optional sections seeded when a raw-mode config names them without every key
OPTIONAL_DEFAULTS = {
    "dispersion": {"delta": [0.0], "u": ("range", -2 * V_G, 2 * V_G, 401), "v_g": [V_G], "branch": "both"},
    "sweep": {"axis": "flow-drop", "min": 0.0, "max": 0.01, "count": 21},
    "freeze": {"enabled": False, "t_end": 2.5e-3},
}


def scenario_defaults(name: str) -> dict:
    d = _base()
    d["run"]["scenario"] = name
    if name == "figure1":
        d["wave"]["enabled"] = False
        d["dispersion"] = {"delta": [0.0, -V_G / (2 * C_LIGHT), -V_G / C_LIGHT],
                           "u": ("range", -2 * V_G, 2 * V_G, 401), "v_g": [V_G], "branch": "both"}
    elif name == "figure2a":
        d["flow"] = {"kind": "step", "left": U0 + FIG2A_FLOW_INCREASE, "right": U0,
                     "center": 2.0e-3, "smoothing": 1.0e-4}
        d["grid"].update(z_min=-1.0e-3, z_max=4.0e-3)
        d["wave"].update(t_end=1.1e-3, z_ref=2.0e-3)
        d["integrator"]["t_end"] = 1.1e-3
    elif name == "figure2b":
        d["flow"] = {"kind": "tanh-ramp", "left": U0 - FIG2B_FLOW_DROP, "right": U0,
                     "center": 2.0e-3, "width": 1.0e-4}
        d["wave"].update(t_end=1.4e-3, z_ref=1.7e-3, crosscheck_steps=5000)
        d["integrator"]["t_end"] = 5.0e-3
    elif name == "figure3":
        d["flow"] = {"kind": "uniform", "value": U0}
        d["group_velocity"] = {"kind": "tanh-ramp", "left": 297.0, "right": V_G, "center": 1.5e-3, "width": 2.0e-4}
        d["launch"].update(z=2.6e-3, detuning_factor=1.00001)
        d["grid"]["n"] = 2048
        d["wave"].update(t_end=3.0e-3, sample_every=1.0e-5, z_ref=1.4e-3)
        d["integrator"]["t_end"] = 1.0e-2
        d["freeze"] = {"enabled": True, "t_end": 2.5e-3}
    elif name == "sonar":
        d["flow"] = {"kind": "tanh-ramp", "left": U0 - FIG2B_FLOW_DROP, "right": U0,
                     "center": 2.0e-3, "width": 1.0e-4}
        d["wave"]["enabled"] = False
        d["sweep"] = {"axis": "flow-drop", "min": 0.0, "max": 0.01, "count": 21}
    elif name != "none":
        raise ConfigError(f"unknown scenario {name!r}")
    return d


# ---------------------------------------------------------------------------
# resolved configuration


@dataclass
class RunConfig:
    """Fully resolved configuration; ``values[section][key]`` in SI units."""

    values: dict = field(default_factory=dict)

    @property
    def scenario(self) -> str:
        return self.values["run"]["scenario"]

    def __getitem__(self, section):
        return self.values[section]

    def section(self, name: str) -> dict:
        return self.values.get(name, {})

    # builders -------------------------------------------------------------
    def medium(self) -> MediumSpec:
        m = self.values["medium"]
        return MediumSpec(omega0=m["omega0"], epsilon=m["epsilon"],
                          constants=PhysicalConstants(c=m["c"], hbar=m["hbar"]))

    def profiles(self) -> MediumProfiles:
        return MediumProfiles(flow=_profile_from(self.values["flow"]),
                              group_velocity=_profile_from(self.values["group_velocity"]))

    def branch(self) -> Branch:
        return Branch.parse(self.values["launch"]["branch"])

    def launch_delta(self) -> float:
        """Launch detuning; ``resonant`` means +/-u(z_launch)/c times the factor."""
        launch = self.values["launch"]
        if launch["delta"] == "resonant":
            u = self.profiles().flow(launch["z"])
            return launch["detuning_factor"] * self.branch() * u / self.values["medium"]["c"]
        return launch["delta"] * launch["detuning_factor"]


def _profile_from(sec: dict):
    params = {k: v for k, v in sec.items() if k != "kind"}
    if sec["kind"] == "table":
        params = {"z": tuple(params["z"]), "values": tuple(params["values"])}
    return make_profile(sec["kind"], **params)


# ---------------------------------------------------------------------------
# parsing

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RANGE_RE = re.compile(rf"^({_NUM})\s*:\s*({_NUM})\s*:\s*(\d+)$")


def _split_unit(raw: str) -> tuple[str, str]:
    parts = raw.rsplit(None, 1)
    if len(parts) == 2 and not re.fullmatch(_NUM + r",?", parts[1]) and not _RANGE_RE.match(parts[1]):
        return parts[0].strip(), parts[1]
    return raw.strip(), ""


def _convert(raw: str, key: Key, where) -> object:
    text = raw.strip()
    if key.kind == "str":
        if key.choices and text not in key.choices:
            raise ConfigError(f"expected one of {', '.join(key.choices)}, got {text!r}", *where)
        return text
    if key.kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}", *where)
    if text in key.keywords:
        return text
    body, unit = _split_unit(text)
    if unit != key.unit:
        if key.unit:
            raise ConfigError(f"unit mismatch: expected {key.unit!r}, got {unit or 'none'!r}", *where)
        raise ConfigError(f"dimensionless value must not carry a unit, got {unit!r}", *where)
    try:
        if key.kind == "int":
            return int(body)
        if key.kind == "float":
            v = float(body)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key.kind == "floats":
            m = _RANGE_RE.match(body)
            if m:
                return ("range", float(m.group(1)), float(m.group(2)), int(m.group(3)))
            return [float(x) for x in body.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"cannot parse {body!r} as {key.kind}", *where) from None
    raise AssertionError(key.kind)


def expand_floats(value) -> np.ndarray:
    if isinstance(value, tuple) and value and value[0] == "range":
        _, a, b, n = value
        return np.linspace(a, b, int(n))
    return np.asarray(value, dtype=float)


def _locate(text: str, section: str, key: str | None = None,
            at_key: bool = False) -> tuple[int | None, int | None]:
    """1-based (line, column) of a section header, a key's value, or (``at_key``) the key itself."""
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return i, line.index("[") + 1
            continue
        if current == section and key is not None:
            m = re.match(r"\s*([^=:\s]+)\s*[=:]\s*", line)
            if m and m.group(1) == key:
                return i, (m.start(1) if at_key else m.end()) + 1
    return None, None


def parse_config(text: str, scenario: str | None = None) -> RunConfig:
    """Parse config text into a resolved :class:`RunConfig`.

    Scenario defaults (``[run] scenario`` or the ``scenario`` argument) are
    applied first, then every key in the text overrides them.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected key = value)", lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, 1) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    for sec in cp.sections():
        if sec not in SCHEMA and sec not in PROFILE_SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", *_locate(text, sec))

    name = scenario
    if cp.has_option("run", "scenario"):
        name_in_file = _convert(cp.get("run", "scenario"), SCHEMA["run"]["scenario"],
                                _locate(text, "run", "scenario"))
        if scenario is not None and name_in_file != scenario:
            raise ConfigError(f"config declares scenario {name_in_file!r} but {scenario!r} was requested",
                              *_locate(text, "run", "scenario"))
        name = name_in_file
    values = scenario_defaults(name or "none")

    for sec in cp.sections():
        items = dict(cp.items(sec))
        if sec in PROFILE_SECTIONS:
            target = values.setdefault(sec, {})
            if "kind" in items:
                kind = items["kind"].strip()
                if kind not in PROFILE_KINDS:
                    raise ConfigError(f"unknown profile kind {kind!r}", *_locate(text, sec, "kind"))
                if kind != target.get("kind"):
                    target.clear()
                target["kind"] = kind
            kind = target.get("kind")
            schema = PROFILE_KEYS[kind]
        else:
            target = values.setdefault(sec, copy.deepcopy(OPTIONAL_DEFAULTS.get(sec, {})))
            schema = SCHEMA[sec]
        for key, raw in items.items():
            if key == "kind" and sec in PROFILE_SECTIONS:
                continue
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", *_locate(text, sec, key, at_key=True))
            target[key] = _convert(raw, schema[key], _locate(text, sec, key))
        if sec in PROFILE_SECTIONS:
            missing = set(schema) - set(target) - {"kind"}
            if missing:
                raise ConfigError(f"[{sec}] kind {target['kind']} needs {', '.join(sorted(missing))}",
                                  *_locate(text, sec))

    cfg = RunConfig(values)
    validate(cfg, text)
    return cfg


def validate(cfg: RunConfig, text: str = "") -> None:
    try:
        spec = cfg.medium()
    except ValueError as exc:
        raise ConfigError(f"[medium] {exc}", *_locate(text, "medium")) from None
    try:
        profiles = cfg.profiles()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"profile: {exc}") from None
    try:
        profiles.check(spec)
    except ValueError as exc:
        sec = "group_velocity" if "group velocity" in str(exc) else "flow"
        raise ConfigError(f"constraint violation: {exc}", *_locate(text, sec)) from None
    g = cfg.values["grid"]
    n = g["n"]
    if n < 8 or n & (n - 1):
        raise ConfigError("grid n must be a power of two >= 8", *_locate(text, "grid", "n"))
    if not g["z_max"] > g["z_min"]:
        raise ConfigError("grid needs z_max > z_min", *_locate(text, "grid"))
    w = cfg.values["wave"]
    for key in ("sigma", "t_end", "sample_every"):
        if not w[key] > 0:
            raise ConfigError(f"[wave] {key} must be positive", *_locate(text, "wave", key))
    if w["dt"] != "auto" and not w["dt"] > 0:
        raise ConfigError("[wave] dt must be positive", *_locate(text, "wave", "dt"))
    integ = cfg.values["integrator"]
    if not integ["dt"] > 0 or not 0 < integ["rel_tol"] < 1 or integ["max_steps"] < 1:
        raise ConfigError("[integrator] needs dt > 0, 0 < rel_tol < 1, max_steps >= 1", *_locate(text, "integrator"))
    if "dispersion" in cfg.values:
        vg = expand_floats(cfg.values["dispersion"].get("v_g", [V_G]))
        if np.any(vg <= 0):
            raise ConfigError("constraint violation: v_g must be positive", *_locate(text, "dispersion", "v_g"))
    if "sweep" in cfg.values and cfg.values["sweep"]["count"] < 1:
        raise ConfigError("[sweep] count must be >= 1", *_locate(text, "sweep", "count"))


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Overlay ``{section: {key: value}}`` (SI values, already typed) and re-validate."""
    values = copy.deepcopy(cfg.values)
    for sec, items in overrides.items():
        if sec not in SCHEMA and sec not in PROFILE_SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        target = values.setdefault(sec, copy.deepcopy(OPTIONAL_DEFAULTS.get(sec, {})))
        if sec in PROFILE_SECTIONS and "kind" in items and items["kind"] != target.get("kind"):
            target.clear()
        for key, val in items.items():
            schema = PROFILE_KEYS[items.get("kind", target.get("kind"))] if sec in PROFILE_SECTIONS else SCHEMA[sec]
            if key != "kind" and key not in schema:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            if key != "kind":
                _typecheck(val, schema[key], sec, key)
            target[key] = val
    out = RunConfig(values)
    validate(out)
    return out


def _typecheck(val, key: Key, sec: str, name: str) -> None:
    if isinstance(val, str) and (val in key.keywords or key.kind == "str"):
        if key.kind == "str" and key.choices and val not in key.choices:
            raise ConfigError(f"[{sec}] {name}: expected one of {key.choices}")
        return
    ok = {
        "float": isinstance(val, (int, float)) and not isinstance(val, bool),
        "int": isinstance(val, int) and not isinstance(val, bool),
        "bool": isinstance(val, bool),
        "floats": isinstance(val, (list, tuple)),
        "str": False,
    }[key.kind]
    if not ok:
        raise ConfigError(f"[{sec}] {name}: expected {key.kind}, got {val!r}")


# ---------------------------------------------------------------------------
# serialisation


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _format(val, key: Key) -> str:
    if isinstance(val, str):
        return val
    if isinstance(val, bool):
        return "true" if val else "false"
    if key.kind == "floats":
        if isinstance(val, tuple) and val and val[0] == "range":
            body = f"{_fmt_float(val[1])}:{_fmt_float(val[2])}:{int(val[3])}"
        else:
            body = ", ".join(_fmt_float(v) for v in val)
    elif key.kind == "int":
        body = str(int(val))
    else:
        body = _fmt_float(val)
    return f"{body} {key.unit}" if key.unit else body


def serialize(cfg: RunConfig) -> str:
    lines = []
    for sec in SECTION_ORDER:
        if sec not in cfg.values:
            continue
        items = cfg.values[sec]
        lines.append(f"[{sec}]")
        if sec in PROFILE_SECTIONS:
            lines.append(f"kind = {items['kind']}")
            schema = PROFILE_KEYS[items["kind"]]
        else:
            schema = SCHEMA[sec]
        for key, val in items.items():
            if key == "kind" and sec in PROFILE_SECTIONS:
                continue
            lines.append(f"{key} = {_format(val, schema[key])}")
        lines.append("")
    return "\n".join(lines)


def scale_resolution(cfg: RunConfig, factor: float) -> RunConfig:
    """Scale the wave grid by ``factor`` (rounded to a power of two).

    Refining lets an ``auto`` time step shrink with the grid. Coarsening
    pins dt at the base grid's value, so time-stepping error (and the
    stepper cross-check) stays comparable to the full-resolution run.
    """
    if not factor > 0:
        raise ConfigError("resolution scale must be positive")
    g = cfg.values["grid"]
    n = g["n"]
    new_n = max(8, 2 ** int(round(math.log2(n * factor))))
    over = {"grid": {"n": new_n}}
    if cfg.values["wave"]["dt"] == "auto" and new_n < n:
        spec = cfg.medium()
        v_g = cfg.profiles().group_velocity(cfg.values["launch"]["z"])
        kappa = v_g * spec.c / (2.0 * spec.omega0)
        k_nyq = math.pi * n / (g["z_max"] - g["z_min"])
        over["wave"] = {"dt": 0.5 / (kappa * k_nyq ** 2)}
    return apply_overrides(cfg, over)
