from pathlib import Path

import numpy as np
import pytest
import yaml

from qbmzeno.config import Grid, RunConfig, dump_config, load_config
from qbmzeno.correlators import Observable
from qbmzeno.errors import ConfigError
from qbmzeno.params import SeriesControl

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL = {"sweep": {"gamma": [0.0, 0.2]}}


def _with(path, value, base=None):
    raw = yaml.safe_load(yaml.safe_dump(base or {
        "oscillator": {"temperature": 0.1},
        "measurement": {"observable": "position", "slit_width": 0.5},
        "sweep": {"gamma": [0.0, 0.2], "mu": [2.0, 16.0], "t_bar": {"start": 0, "stop": 10, "num": 11}},
    }))
    node = raw
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value
    return raw


def test_minimal_config_defaults():
    cfg = RunConfig.from_dict(MINIMAL)
    assert cfg.rates == (0.0,)
    assert cfg.observable is Observable.POSITION
    assert cfg.t_bar.array().size == 600 and cfg.t_bar.array()[-1] == pytest.approx(24 * np.pi)
    assert cfg.x_final.array()[0] == -8.0 and cfg.x_final.array().size == 400
    assert cfg.series is None and cfg.series_control == SeriesControl.adaptive()


def test_environment_override(monkeypatch):
    monkeypatch.setenv("QBMZENO_MATSUBARA_TERMS", "321")
    assert RunConfig.from_dict(MINIMAL).series_control == SeriesControl.fixed(321)
    monkeypatch.setenv("QBMZENO_MATSUBARA_TERMS", "lots")
    with pytest.raises(ConfigError, match="QBMZENO_MATSUBARA_TERMS"):
        RunConfig.from_dict(MINIMAL).series_control
    explicit = _with(["series"], {"mode": "fixed", "max_terms": 150})
    assert RunConfig.from_dict(explicit).series_control == SeriesControl.fixed(150)


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.yaml")))
def test_round_trip(name):
    cfg = load_config(CONFIGS / name)
    assert RunConfig.from_dict(yaml.safe_load(dump_config(cfg))) == cfg


def test_grid_values_round_trip():
    g = Grid.parse([0.0, 1.5, 4.0], "x")
    assert Grid.parse(g.to_dict(), "x") == g
    np.testing.assert_array_equal(g.array(), [0.0, 1.5, 4.0])


@pytest.mark.parametrize("path,value,field", [
    (["sweep", "bogus"], 1, "sweep"),
    (["extra"], {}, "<root>"),
    (["oscillator", "temperature"], -1.0, "oscillator"),
    (["oscillator", "temperature"], "hot", "oscillator.temperature"),
    (["bath", "kinds"], ["lorentz"], "bath.kinds"),
    (["bath", "kinds"], ["ohmic", "ohmic"], "bath.kinds"),
    (["bath", "drude_cutoff"], 0.0, "bath.drude_cutoff"),
    (["measurement", "observable"], "spin", "measurement.observable"),
    (["measurement", "slit_width"], 0.0, "measurement.slit_width"),
    (["series", "mode"], "magic", "series"),
    (["series", "max_terms"], 0, "series"),
    (["sweep", "gamma"], [], "sweep.gamma"),
    (["sweep", "gamma"], [0.2, 0.1], "sweep.gamma"),
    (["sweep", "gamma"], [-0.1], "sweep.gamma"),
    (["sweep", "mu"], [0.0, 2.0], "sweep.mu"),
    (["sweep", "mu"], [4.0, 2.0], "sweep.mu"),
    (["sweep", "unmonitored"], "yes", "sweep.unmonitored"),
    (["sweep", "t_bar"], [], "sweep.t_bar"),
    (["sweep", "t_bar"], {"start": 0, "stop": 1, "num": 0}, "sweep.t_bar.num"),
    (["sweep", "t_bar"], {"start": 0, "stop": 1}, "sweep.t_bar"),
    (["sweep", "t_bar"], [0.0, 2.0, 1.0], "sweep.t_bar"),
    (["sweep", "t_bar"], [-1.0, 2.0], "sweep.t_bar"),
    (["sweep", "x_final"], {"start": 1, "stop": -1, "num": 5}, "sweep.x_final"),
    (["output", "format"], "xlsx", "output.format"),
])
def test_invalid_configs_name_the_field(path, value, field):
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict(_with(path, value))
    assert err.value.field == field


def test_no_rates_at_all():
    with pytest.raises(ConfigError, match="sweep.mu"):
        RunConfig.from_dict(_with(["sweep", "unmonitored"], False, {"sweep": {"gamma": [0.0]}}))


def test_bad_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("sweep: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(path)


def test_shipped_recipes_cover_every_panel_family():
    surfaces = [load_config(CONFIGS / n) for n in ("fig2_density_surface.yaml",
                                                    "fig3_density_surface_offset.yaml")]
    for cfg in surfaces:
        assert len(cfg.gammas) == 3 and len(cfg.rates) == 3
        assert cfg.series_control == SeriesControl.fixed(150)
    assert surfaces[0].first_outcome == 0.0 and surfaces[1].first_outcome == -5.0
    for name, obs in (("fig4_position_variance.yaml", Observable.POSITION),
                      ("fig5_momentum_variance.yaml", Observable.MOMENTUM)):
        cfg = load_config(CONFIGS / name)
        assert len(cfg.gammas) == 3 and cfg.rates == (2.0, 4.0, 8.0, 16.0)
        assert cfg.observable is obs and cfg.slit_width == 0.5
        assert cfg.series_control == SeriesControl.fixed(2000)
    assert load_config(CONFIGS / "fig4_position_variance.yaml").bath_kinds == ("ohmic", "drude")
