"""Sweep drivers producing figure data as tables.

Rows are emitted in the declared axis order (gamma, mu, t_bar, x_F)
regardless of how many worker threads evaluate the sweep cells.  All
columns are dimensionless: times in 1/omega0, rates in omega0/2pi,
outcomes in the ground-state width of the observable.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import correlators as corr
from .config import RunConfig
from .correlators import Observable, make_correlators
from .dynamics import (
    MeasurementProtocol,
    asymptotic_variance,
    conditional_density,
    conditional_variance,
    small_tau_variance,
    spacing_from_rate,
)
from .errors import ConfigError
from .params import BathKind, BathSpec

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Table:
    columns: tuple
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _scales(cfg: RunConfig):
    p = cfg.params
    if cfg.observable is Observable.POSITION:
        return p.sigma_gs, "sigma_GS"
    return p.momentum_gs, "M*w0*sigma_GS"


def _bath(kind: str, gamma_phys: float, cfg: RunConfig) -> BathSpec:
    if kind == "drude":
        return BathSpec.drude(gamma_phys, cfg.drude_cutoff * cfg.params.frequency)
    return BathSpec.ohmic(gamma_phys)


def _protocol(cfg: RunConfig, mu: float) -> MeasurementProtocol:
    scale, _ = _scales(cfg)
    spacing = math.inf if mu == 0 else spacing_from_rate(mu, cfg.params)
    return MeasurementProtocol(cfg.slit_width * scale, cfg.observable,
                               cfg.first_outcome * scale, spacing)


def _cells(cfg: RunConfig):
    return [(g, mu) for g in cfg.gammas for mu in cfg.rates]


def _run_cells(fn, cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def run_density_surface(cfg: RunConfig, threads: int = 1) -> Table:
    """Conditional density over (t_bar, x_F) for every (gamma, mu) cell."""
    if cfg.observable is not Observable.POSITION:
        raise ConfigError("density surfaces are defined for position measurements",
                          "measurement.observable")
    p = cfg.params
    scale, unit = _scales(cfg)
    t_cfg = cfg.t_bar.array()
    x_cfg = cfg.x_final.array()
    t_phys = t_cfg / p.frequency
    kind = cfg.bath_kinds[0]

    def cell(c):
        g, mu = c
        cs = make_correlators(p, _bath(kind, g * p.frequency, cfg), cfg.observable,
                              cfg.series_control)
        dens = conditional_density(x_cfg[None, :] * scale, t_phys[:, None], _protocol(cfg, mu), cs)
        block = np.empty((t_cfg.size * x_cfg.size, 5))
        block[:, 0] = g
        block[:, 1] = mu
        block[:, 2] = np.repeat(t_cfg, x_cfg.size)
        block[:, 3] = np.tile(x_cfg, t_cfg.size)
        block[:, 4] = (dens * scale).ravel()
        return block

    blocks = _run_cells(cell, _cells(cfg), threads)
    cols = ("gamma[w0]", "mu[w0/2pi]", "t_bar[1/w0]", f"x_F[{unit}]", f"P[1/{unit}]")
    return Table(cols, np.vstack(blocks))


def run_variance_curve(cfg: RunConfig, threads: int = 1) -> Table:
    """Exact conditional variance with its small-tau and long-time companions.

    The small-tau and asymptotic columns are NaN where those closed forms
    do not apply (momentum, Drude primary bath, no monitoring, gamma = 0
    for the asymptote).  A second bath kind adds a ``variance_<kind>``
    comparison column.
    """
    p = cfg.params
    scale, unit = _scales(cfg)
    t_cfg = cfg.t_bar.array()
    t_phys = t_cfg / p.frequency
    primary, others = cfg.bath_kinds[0], cfg.bath_kinds[1:]
    s2 = scale * scale
    sq = f"{unit}^2" if unit == "sigma_GS" else f"({unit})^2"

    def cell(c):
        g, mu = c
        proto = _protocol(cfg, mu)
        gp = g * p.frequency
        cs = make_correlators(p, _bath(primary, gp, cfg), cfg.observable, cfg.series_control)
        var = conditional_variance(t_phys, proto, cs)
        nan = np.full(t_cfg.shape, np.nan)
        closed_ok = (cfg.observable is Observable.POSITION
                     and cs.bath.kind is not BathKind.DRUDE and mu > 0)
        small = small_tau_variance(t_phys, proto, cs, require_aligned=False) if closed_ok else nan
        asym = np.full(t_cfg.shape, asymptotic_variance(proto, cs)) if closed_ok and g > 0 else nan
        cols = [np.full(t_cfg.shape, g), np.full(t_cfg.shape, mu), t_cfg,
                var / s2, small / s2, asym / s2]
        for kind in others:
            other = make_correlators(p, _bath(kind, gp, cfg), cfg.observable, cfg.series_control)
            cols.append(conditional_variance(t_phys, proto, other) / s2)
        return np.column_stack(cols)

    blocks = _run_cells(cell, _cells(cfg), threads)
    cols = ["gamma[w0]", "mu[w0/2pi]", "t_bar[1/w0]", f"variance[{sq}]",
            f"variance_small_tau[{sq}]", f"variance_asymptotic[{sq}]"]
    cols += [f"variance_{k}[{sq}]" for k in others]
    return Table(tuple(cols), np.vstack(blocks))


def dump_correlators(cfg: RunConfig, threads: int = 1) -> Table:
    """S and A on the elapsed-time grid for each gamma and bath kind.

    Drude kinds also carry the momentum pair S_pp, A_pp.
    """
    p = cfg.params
    x2 = p.sigma_gs**2
    p2 = p.momentum_gs**2
    t_cfg = cfg.t_bar.array()
    t_phys = t_cfg / p.frequency
    ctrl = cfg.series_control

    def cell(g):
        cols = [np.full(t_cfg.shape, g), t_cfg]
        for kind in cfg.bath_kinds:
            bath = _bath(kind, g * p.frequency, cfg)
            cols.append(corr.position_S(t_phys, p, bath, ctrl) / x2)
            cols.append(corr.position_A(t_phys, p, bath) / x2)
            if kind == "drude":
                cols.append(corr.momentum_S(t_phys, p, bath, ctrl) / p2)
                cols.append(corr.momentum_A(t_phys, p, bath) / p2)
        return np.column_stack(cols)

    blocks = _run_cells(cell, list(cfg.gammas), threads)
    cols = ["gamma[w0]", "t[1/w0]"]
    for kind in cfg.bath_kinds:
        cols += [f"S_{kind}[sigma_GS^2]", f"A_{kind}[sigma_GS^2]"]
        if kind == "drude":
            cols += [f"S_pp_{kind}[(M*w0*sigma_GS)^2]", f"A_pp_{kind}[(M*w0*sigma_GS)^2]"]
    return Table(tuple(cols), np.vstack(blocks))


# ------------------------------------------------------------------ I/O

def format_csv(table: Table) -> str:
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    # adding 0.0 folds -0 into 0
    np.savetxt(buf, table.data + 0.0, delimiter=",", fmt=FLOAT_FORMAT)
    return buf.getvalue()


def format_json(table: Table) -> str:
    rows = [[None if math.isnan(v) else float(v) for v in row] for row in table.data.tolist()]
    return json.dumps({"columns": list(table.columns), "data": rows}, allow_nan=False) + "\n"


def write_table(table: Table, path=None, fmt: str = "csv") -> str:
    text = format_csv(table) if fmt == "csv" else format_json(table)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_table(path) -> Table:
    """Inverse of :func:`write_table` for either format."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
        data = np.array([[np.nan if v is None else v for v in row] for row in raw["data"]],
                        dtype=float).reshape(-1, len(raw["columns"]))
        return Table(tuple(raw["columns"]), data)
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    return Table(tuple(header), data.reshape(-1, len(header)))
