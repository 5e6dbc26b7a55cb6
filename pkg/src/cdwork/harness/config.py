"""Scenario configuration: JSON parsing, validation, overrides and presets."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from ..counterdiabatic import CDConvention
from ..errors import ConfigInvalid, UnknownPreset
from ..models import PROTOCOL_KINDS, LandauZener, Protocol
from ..propagation import DEFAULT_STEPS, MIN_STEPS, STEPPERS

OUTPUT_KINDS = ("timeseries", "qsl", "work", "spectra")
CD_CHOICES = ("off", "standard", "tau_d_fixed")
FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self) -> list[float]:
        if self.spacing == "log":
            vals = np.geomspace(self.start, self.stop, self.count)
        else:
            vals = np.linspace(self.start, self.stop, self.count)
        return [float(v) for v in vals]

    def to_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "count": self.count,
                "spacing": self.spacing}


@dataclass(frozen=True)
class ScenarioConfig:
    """One unit of work for the harness. Fully deterministic (no seeds).

    ``tau`` is a number, an explicit list, or a Sweep. ``protocol`` may also
    be a list, in which case every protocol is run for every tau.
    ``tau_d`` is a number, ``"tau"`` (each run uses its own tau), or None
    (meaning ``"tau"`` for single runs; required for tau_d_fixed sweeps).
    """

    model: str = "lz"
    J: float = 5.0
    B_i: float = -50.0
    B_f: float = 50.0
    protocol: str | tuple[str, ...] = "smoothstep"
    cd: str = "standard"
    tau: float | tuple[float, ...] | Sweep = 0.1
    tau_d: float | str | None = None
    steps: int = DEFAULT_STEPS
    stepper: str = "magnus4"
    tolerance: float = 1e-8
    outputs: tuple[str, ...] = ("timeseries",)
    figure: str | None = None
    workers: int | None = None

    # -- resolution -------------------------------------------------------
    def tau_values(self) -> list[float]:
        if isinstance(self.tau, Sweep):
            vals = self.tau.values()
        elif isinstance(self.tau, tuple):
            vals = list(self.tau)
        else:
            vals = [float(self.tau)]
        return sorted(vals)

    def protocol_kinds(self) -> list[str]:
        return list(self.protocol) if isinstance(self.protocol, tuple) else [self.protocol]

    def model_for(self, kind: str) -> LandauZener:
        return LandauZener(self.J, Protocol(kind, self.B_i, self.B_f))

    def tau_d_for(self, tau: float) -> float:
        if self.tau_d is None or self.tau_d == "tau":
            return float(tau)
        return float(self.tau_d)

    def convention_for(self, tau: float) -> CDConvention | None:
        if self.cd == "off":
            return None
        if self.cd == "standard":
            return CDConvention("standard")
        return CDConvention("tau_d_fixed", self.tau_d_for(tau))

    # -- (de)serialization ------------------------------------------------
    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, Sweep):
                val = val.to_dict()
            elif isinstance(val, tuple):
                val = list(val)
            out[f.name] = val
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        return _validate(data)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
        return cls.from_dict(data)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _positive(x) -> bool:
    return _is_number(x) and x > 0


def _validate(data: dict) -> ScenarioConfig:
    errors: list[str] = []
    known = {f.name for f in fields(ScenarioConfig)}
    for key in sorted(set(data) - known):
        errors.append(f"{key}: unknown field")
    d = {**ScenarioConfig().to_dict(), **{k: v for k, v in data.items() if k in known}}

    if d["model"] != "lz":
        errors.append("model: only 'lz' is supported")
    if not _positive(d["J"]):
        errors.append("J: must be a positive number")
    for key in ("B_i", "B_f"):
        if not _is_number(d[key]):
            errors.append(f"{key}: must be a finite number")

    protocol = d["protocol"]
    kinds = protocol if isinstance(protocol, list) else [protocol]
    if not kinds or any(k not in PROTOCOL_KINDS for k in kinds):
        errors.append(f"protocol: must be one of {list(PROTOCOL_KINDS)} or a non-empty list of them")
    elif len(set(kinds)) != len(kinds):
        errors.append("protocol: duplicate entries")
    protocol = tuple(kinds) if isinstance(protocol, list) else protocol

    if d["cd"] not in CD_CHOICES:
        errors.append(f"cd: must be one of {list(CD_CHOICES)}")

    tau = d["tau"]
    multi = False
    if isinstance(tau, dict):
        sweep_keys = {"start", "stop", "count", "spacing"}
        extra = set(tau) - sweep_keys
        if extra:
            errors.append(f"tau: unknown sweep keys {sorted(extra)}")
        spacing = tau.get("spacing", "linear")
        count = tau.get("count")
        start, stop = tau.get("start"), tau.get("stop")
        if not (isinstance(count, int) and not isinstance(count, bool) and count >= 1):
            errors.append("tau.count: must be an integer >= 1")
        if spacing not in ("linear", "log"):
            errors.append("tau.spacing: must be 'linear' or 'log'")
        if not (_positive(start) and _positive(stop)):
            errors.append("tau.start/tau.stop: must be positive numbers")
        if not errors or not any(e.startswith("tau") for e in errors):
            tau = Sweep(float(start), float(stop), int(count), spacing)
            multi = count > 1
    elif isinstance(tau, list):
        if not tau or not all(_positive(t) for t in tau):
            errors.append("tau: list must be non-empty and contain positive numbers")
        elif len(set(tau)) != len(tau):
            errors.append("tau: duplicate values")
        else:
            tau = tuple(float(t) for t in tau)
            multi = len(tau) > 1
    elif _positive(tau):
        tau = float(tau)
    else:
        errors.append("tau: must be a positive number, a list, or a sweep object")

    tau_d = d["tau_d"]
    if tau_d is not None and tau_d != "tau" and not _positive(tau_d):
        errors.append("tau_d: must be a positive number, 'tau', or null")
    if d["cd"] != "tau_d_fixed" and tau_d is not None:
        errors.append("tau_d: only meaningful when cd is 'tau_d_fixed'")
    if d["cd"] == "tau_d_fixed" and multi and tau_d is None:
        errors.append("tau_d: required when cd is 'tau_d_fixed' and tau is swept "
                      "(give a number, or 'tau' to follow each swept value)")
    if _is_number(tau_d):
        tau_d = float(tau_d)

    steps = d["steps"]
    if not (isinstance(steps, int) and not isinstance(steps, bool) and steps >= MIN_STEPS):
        errors.append(f"steps: must be an integer >= {MIN_STEPS}")
    if d["stepper"] not in STEPPERS:
        errors.append(f"stepper: must be one of {list(STEPPERS)}")
    if not _positive(d["tolerance"]):
        errors.append("tolerance: must be a positive number")

    outputs = d["outputs"]
    if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
        errors.append(f"outputs: must be a list drawn from {list(OUTPUT_KINDS)}")
    elif len(set(outputs)) != len(outputs):
        errors.append("outputs: duplicate entries")
    if d["figure"] is not None and d["figure"] not in FIGURES:
        errors.append(f"figure: must be null or one of {list(FIGURES)}")
    workers = d["workers"]
    if workers is not None and not (isinstance(workers, int) and not isinstance(workers, bool)
                                    and workers >= 1):
        errors.append("workers: must be null or an integer >= 1")

    if errors:
        raise ConfigInvalid(errors)
    return ScenarioConfig(
        model=d["model"], J=float(d["J"]), B_i=float(d["B_i"]), B_f=float(d["B_f"]),
        protocol=protocol, cd=d["cd"], tau=tau, tau_d=tau_d, steps=steps,
        stepper=d["stepper"], tolerance=float(d["tolerance"]), outputs=tuple(outputs),
        figure=d["figure"], workers=workers,
    )


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(config: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply ``key=value`` overrides; dotted keys address nested fields (``tau.count=5``).

    Values are parsed as JSON when possible and taken as strings otherwise.
    """
    data = copy.deepcopy(config.to_dict())
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip().lstrip("-")
        if not sep or not key:
            raise ConfigInvalid(f"override {item!r}: expected key=value")
        path = key.split(".")
        node = data
        for part in path[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[path[-1]] = _parse_value(raw)
    return ScenarioConfig.from_dict(data)


PRESETS: dict[str, dict] = {
    "fig1": {
        "protocol": "smoothstep", "B_i": -50.0, "B_f": 50.0, "J": 5.0, "cd": "standard",
        "tau": [0.05, 0.1, 0.5], "outputs": ["timeseries"], "figure": "fig1",
    },
    # the MT bound is saturated here; 16000 steps keep the trapezoid error below 1e-9 relative
    "fig2": {
        "protocol": "linear", "B_i": -50.0, "B_f": 50.0, "J": 5.0, "cd": "tau_d_fixed",
        "tau": {"start": 0.02, "stop": 2.0, "count": 20, "spacing": "log"}, "tau_d": "tau",
        "steps": 16000, "outputs": ["qsl"], "figure": "fig2",
    },
    "fig3": {
        "protocol": ["smoothstep", "linear"], "B_i": -50.0, "B_f": 50.0, "J": 5.0,
        "cd": "tau_d_fixed", "tau": {"start": 0.05, "stop": 1.0, "count": 10, "spacing": "log"},
        "tau_d": "tau", "outputs": ["work"], "figure": "fig3",
    },
    "fig4": {
        "protocol": "smoothstep", "B_i": -50.0, "B_f": 50.0, "J": 5.0, "cd": "standard",
        "tau": 0.1, "outputs": ["spectra"], "figure": "fig4",
    },
    "fig5": {
        "protocol": "smoothstep", "B_i": -50.0, "B_f": 50.0, "J": 5.0, "cd": "standard",
        "tau": [0.05, 0.1, 0.5, 1.0], "outputs": ["spectra"], "figure": "fig5",
    },
    "fig6": {
        "protocol": "smoothstep", "B_i": -50.0, "B_f": 50.0, "J": 5.0, "cd": "tau_d_fixed",
        "tau": 0.1, "tau_d": 0.1, "outputs": ["spectra"], "figure": "fig6",
    },
}


def preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return ScenarioConfig.from_dict(PRESETS[name])
