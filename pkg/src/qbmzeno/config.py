"""Run configuration for the figure/sweep drivers.

Configs are YAML documents with the sections ``oscillator``, ``bath``,
``measurement``, ``series`` (optional), ``sweep`` and ``output``
(optional).  Unknown keys are rejected.  Sweep values use the figure
units: gamma in omega0, mu in omega0 / 2 pi, elapsed time in 1 / omega0,
outcomes and slit width in sigma_GS (position) or M omega0 sigma_GS
(momentum).  See README.md for the full schema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .correlators import Observable
from .errors import ConfigError
from .params import TERMS_ENV, OscillatorParams, SeriesControl, SeriesMode

BATH_KINDS = ("ohmic", "drude")
FORMATS = ("csv", "json")

DEFAULT_T_BAR = {"start": 0.0, "stop": 12 * 2 * math.pi, "num": 600}
DEFAULT_X_FINAL = {"start": -8.0, "stop": 8.0, "num": 400}


@dataclass(frozen=True)
class Grid:
    """Either an evenly spaced ``start``/``stop``/``num`` axis or explicit ``values``."""

    start: float | None = None
    stop: float | None = None
    num: int | None = None
    values: tuple | None = None

    def array(self) -> np.ndarray:
        if self.values is not None:
            return np.array(self.values, dtype=float)
        return np.linspace(self.start, self.stop, self.num)

    def to_dict(self):
        if self.values is not None:
            return list(self.values)
        return {"start": self.start, "stop": self.stop, "num": self.num}

    @classmethod
    def parse(cls, raw, where: str) -> "Grid":
        if isinstance(raw, (list, tuple)):
            try:
                grid = cls(values=tuple(float(v) for v in raw))
            except (TypeError, ValueError):
                raise ConfigError("grid values must be numbers", where) from None
        elif isinstance(raw, dict):
            _check_keys(raw, {"start", "stop", "num"}, where, required={"start", "stop", "num"})
            num = raw["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 1:
                raise ConfigError("num must be a positive integer", f"{where}.num")
            grid = cls(start=_num(raw["start"], f"{where}.start"),
                       stop=_num(raw["stop"], f"{where}.stop"), num=num)
        else:
            raise ConfigError("expected a list of values or {start, stop, num}", where)
        arr = grid.array()
        if arr.size == 0:
            raise ConfigError("grid must not be empty", where)
        if np.any(np.diff(arr) <= 0):
            raise ConfigError("grid must be strictly increasing", where)
        return grid


def _num(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", where)
    return float(value)


def _check_keys(section, allowed, where, required=()):
    if not isinstance(section, dict):
        raise ConfigError("expected a mapping", where)
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", where)
    missing = sorted(set(required) - set(section))
    if missing:
        raise ConfigError(f"missing key(s) {missing}", where)


def _axis(raw, where, positive=False, nonneg=False):
    if not isinstance(raw, (list, tuple)):
        raise ConfigError("expected a list", where)
    vals = tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(raw))
    if positive and any(v <= 0 for v in vals):
        raise ConfigError("entries must be > 0 (use 'unmonitored: true' for the n = 0 mode)", where)
    if nonneg and any(v < 0 for v in vals):
        raise ConfigError("entries must be >= 0", where)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("entries must be strictly increasing", where)
    return vals


@dataclass(frozen=True)
class RunConfig:
    params: OscillatorParams = field(default_factory=OscillatorParams)
    bath_kinds: tuple = ("ohmic",)
    drude_cutoff: float = 100.0
    observable: Observable = Observable.POSITION
    slit_width: float = 0.5
    first_outcome: float = 0.0
    series: SeriesControl | None = None
    gammas: tuple = (0.0,)
    mus: tuple = ()
    unmonitored: bool = True
    t_bar: Grid = Grid(**DEFAULT_T_BAR)
    x_final: Grid = Grid(**DEFAULT_X_FINAL)
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        if not self.gammas:
            raise ConfigError("gamma axis must not be empty", "sweep.gamma")
        if not self.mus and not self.unmonitored:
            raise ConfigError("no monitoring rates: give mu values or set unmonitored: true",
                              "sweep.mu")
        if np.any(self.t_bar.array() < 0):
            raise ConfigError("elapsed times must be >= 0", "sweep.t_bar")

    @property
    def rates(self) -> tuple:
        """Monitoring-rate axis in figure units; 0.0 marks the unmonitored mode."""
        return ((0.0,) if self.unmonitored else ()) + tuple(self.mus)

    @property
    def series_control(self) -> SeriesControl:
        if self.series is not None:
            return self.series
        try:
            return SeriesControl.default()
        except ValueError as exc:
            raise ConfigError(str(exc), TERMS_ENV) from None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        _check_keys(raw, {"oscillator", "bath", "measurement", "series", "sweep", "output"},
                    "<root>", required={"sweep"})
        osc = raw.get("oscillator", {}) or {}
        _check_keys(osc, {"mass", "frequency", "temperature", "hbar", "boltzmann"}, "oscillator")
        try:
            params = OscillatorParams(**{k: _num(v, f"oscillator.{k}") for k, v in osc.items()})
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "oscillator") from None

        bath = raw.get("bath", {}) or {}
        _check_keys(bath, {"kinds", "drude_cutoff"}, "bath")
        kinds = bath.get("kinds", ["ohmic"])
        if not isinstance(kinds, list) or not kinds or len(set(kinds)) != len(kinds) \
                or any(k not in BATH_KINDS for k in kinds):
            raise ConfigError(f"expected a non-empty list of distinct entries from {BATH_KINDS}",
                              "bath.kinds")
        cutoff = _num(bath.get("drude_cutoff", 100.0), "bath.drude_cutoff")
        if cutoff <= 0:
            raise ConfigError("must be > 0", "bath.drude_cutoff")

        meas = raw.get("measurement", {}) or {}
        _check_keys(meas, {"observable", "slit_width", "first_outcome"}, "measurement")
        try:
            observable = Observable(meas.get("observable", "position"))
        except ValueError:
            raise ConfigError("expected 'position' or 'momentum'", "measurement.observable") from None
        slit = _num(meas.get("slit_width", 0.5), "measurement.slit_width")
        if slit <= 0:
            raise ConfigError("must be > 0 (projective measurements are excluded)",
                              "measurement.slit_width")
        x0 = _num(meas.get("first_outcome", 0.0), "measurement.first_outcome")

        series = None
        if raw.get("series") is not None:
            ser = raw["series"]
            _check_keys(ser, {"mode", "max_terms", "relative_tolerance"}, "series")
            try:
                series = SeriesControl(
                    max_terms=ser.get("max_terms", 20000),
                    relative_tolerance=_num(ser.get("relative_tolerance", 1e-10),
                                            "series.relative_tolerance"),
                    mode=SeriesMode(ser.get("mode", "adaptive")),
                )
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(str(exc), "series") from None

        sweep = raw["sweep"]
        _check_keys(sweep, {"gamma", "mu", "unmonitored", "t_bar", "x_final"}, "sweep",
                    required={"gamma"})
        gammas = _axis(sweep["gamma"], "sweep.gamma", nonneg=True)
        mus = _axis(sweep.get("mu", []), "sweep.mu", positive=True)
        unmon = sweep.get("unmonitored", True)
        if not isinstance(unmon, bool):
            raise ConfigError("expected true or false", "sweep.unmonitored")
        t_bar = Grid.parse(sweep.get("t_bar", DEFAULT_T_BAR), "sweep.t_bar")
        x_final = Grid.parse(sweep.get("x_final", DEFAULT_X_FINAL), "sweep.x_final")

        out = raw.get("output", {}) or {}
        _check_keys(out, {"format", "path"}, "output")
        fmt = out.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"expected one of {FORMATS}", "output.format")
        path = out.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("expected a string", "output.path")

        return cls(params=params, bath_kinds=tuple(kinds), drude_cutoff=cutoff,
                   observable=observable, slit_width=slit, first_outcome=x0, series=series,
                   gammas=gammas, mus=mus, unmonitored=unmon, t_bar=t_bar, x_final=x_final,
                   output_format=fmt, output_path=path)

    def to_dict(self) -> dict:
        p = self.params
        out = {
            "oscillator": {"mass": p.mass, "frequency": p.frequency, "temperature": p.temperature,
                           "hbar": p.hbar, "boltzmann": p.boltzmann},
            "bath": {"kinds": list(self.bath_kinds), "drude_cutoff": self.drude_cutoff},
            "measurement": {"observable": self.observable.value, "slit_width": self.slit_width,
                            "first_outcome": self.first_outcome},
        }
        if self.series is not None:
            out["series"] = {"mode": self.series.mode.value, "max_terms": self.series.max_terms,
                             "relative_tolerance": self.series.relative_tolerance}
        out["sweep"] = {"gamma": list(self.gammas), "mu": list(self.mus),
                        "unmonitored": self.unmonitored, "t_bar": self.t_bar.to_dict(),
                        "x_final": self.x_final.to_dict()}
        out["output"] = {"format": self.output_format, "path": self.output_path}
        return out


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}", str(path)) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", str(path))
    return RunConfig.from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
