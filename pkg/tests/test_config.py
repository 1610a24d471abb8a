import pytest
import yaml

from alrd_doa.config import dump_scenario, load_config, parse_config
from alrd_doa.errors import ConfigError
from alrd_doa.signal_model import DEFAULT_DOAS_DEG, SourceScenario, UlaGeometry


def test_defaults_mirror_large_array_setup():
    cfg = parse_config({})
    assert cfg.geometry.num_sensors == 60
    assert cfg.scenario.doas_deg == DEFAULT_DOAS_DEG
    assert cfg.scenario.num_snapshots == 20
    assert cfg.scenario.correlated_pair == (0, 1) and cfg.scenario.correlation_coeff == 0.7
    assert cfg.trials == 100 and cfg.grid == (0.3, 179.7, 0.3)
    assert [e.label for e in cfg.estimators] == ["malrd", "alrd", "music", "capon", "esprit"]
    rls = cfg.estimators[0].rls
    assert (rls.basis_len, rls.rank, rls.forget) == (12, 5, 0.998)


def test_full_config(tmp_path):
    doc = {
        "geometry": {"M": 20, "spacing_ratio": 0.45},
        "scenario": {"doas": [30, 60], "snr_list": [0, 5], "N": 40, "correlated_pair": None, "seed": 9},
        "estimators": [
            {"method": "alrd", "I": 5, "D": 2, "alpha": 0.99, "delta": 2.0, "label": "alrd-small"},
            {"method": "capon", "fba": False, "K": 2},
        ],
        "harness": {"trials": 7, "grid_start": 1.0, "grid_stop": 179.0, "grid_step": 0.5},
        "output": {"directory": str(tmp_path), "emit_plot_script": True},
    }
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(doc))
    cfg = load_config(path, seed_override=4)
    assert cfg.scenario.rng_seed == 4 and cfg.snr_list == [0.0, 5.0]
    assert cfg.scenario.correlated_pair is None
    assert cfg.estimator("alrd-small").rls.init_scale == 2.0
    assert cfg.estimator("alrd").label == "alrd-small"
    assert cfg.estimator("capon").use_fba is False
    assert cfg.estimator("music").method == "music"
    assert cfg.emit_plot_script and cfg.trials == 7


@pytest.mark.parametrize(
    "doc, key",
    [
        ({"geomtry": {}}, "geomtry"),
        ({"scenario": {"snr_db": 3}}, "snr_db"),
        ({"harness": {"trialz": 3}}, "trialz"),
        ({"estimators": [{"method": "malrd", "lambda": 0.9}]}, "lambda"),
        ({"estimators": [{"method": "music", "I": 4}]}, "'I'"),
    ],
)
def test_unknown_keys_are_named(doc, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(doc)


@pytest.mark.parametrize(
    "doc",
    [
        {"harness": {"trials": 0}},
        {"harness": {"trials": 2.5}},
        {"geometry": {"M": 1}},
        {"scenario": {"doas": []}},
        {"scenario": {"doas": [200]}},
        {"scenario": {"N": "many"}},
        {"estimators": [{"method": "jio"}]},
        {"estimators": [{"method": "alrd", "alpha": 1.5}]},
        {"estimators": [{"method": "music"}, {"method": "music"}]},
        {"estimators": [{"method": "capon", "fba": "yes"}]},
        {"harness": {"grid_step": 0}},
        {"geometry": {"M": 10}},
        [1, 2],
    ],
)
def test_invalid_configs(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_missing_or_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("geometry: [unclosed")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_scenario_round_trip():
    g = UlaGeometry(16, 0.5)
    sc = SourceScenario((25.0, 50.0, 75.0), 33, source_power=2.0, snr_db=7.5, correlated_pair=(1, 2),
                        correlation_coeff=0.3, rng_seed=5)
    cfg = parse_config(yaml.safe_load(dump_scenario(sc, g)))
    assert cfg.scenario == sc
    assert cfg.geometry == g
