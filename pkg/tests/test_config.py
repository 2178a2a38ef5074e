from importlib import resources

import pytest
import yaml

from vibqed.config import EXPERIMENTS, ConfigError, config_from_dict, load_config

CONFIG_DIR = resources.files("vibqed") / "configs"


def _base(**extra):
    raw = {
        "experiment": "splitting-map",
        "splitting_map": {"case": "c", "nu": [0.2], "eta_g": {"start": 0.01, "stop": 0.05, "points": 3}},
    }
    raw.update(extra)
    return raw


def test_shipped_examples_cover_every_family():
    names = {yaml.safe_load(p.read_text())["experiment"] for p in CONFIG_DIR.iterdir() if p.name.endswith(".yaml")}
    assert names == set(EXPERIMENTS)
    for p in CONFIG_DIR.iterdir():
        if p.name.endswith(".yaml"):
            cfg = load_config(p)
            assert cfg.workers >= 1


def test_minimal_config():
    cfg = config_from_dict(_base(), output_dir="x")
    assert cfg.experiment == "splitting-map"
    assert cfg.params is None
    assert str(cfg.output_dir) == "x"
    assert cfg.block_name == "splitting_map"


@pytest.mark.parametrize(
    ("mutate", "key"),
    [
        (lambda r: r.update(experiment="nope"), "experiment"),
        (lambda r: r.pop("experiment"), "experiment"),
        (lambda r: r.update(bogus=1), "bogus"),
        (lambda r: r["splitting_map"].update(case="z"), "splitting_map.case"),
        (lambda r: r["splitting_map"].update(nu=[]), "splitting_map.nu"),
        (lambda r: r["splitting_map"]["eta_g"].update(points=0), "splitting_map.eta_g.points"),
        (lambda r: r["splitting_map"]["eta_g"].update(stop=0.0), "splitting_map.eta_g"),
        (lambda r: r.update(workers=0), "workers"),
        (lambda r: r.update(params={"nu": 0.2, "eta_g": 0.06, "spin": 1}), "params.spin"),
        (lambda r: r.update(params={"nu": -0.2, "eta_g": 0.06}), "params.nu"),
        (lambda r: r.update(params={"nu": 0.2, "eta_g": "big"}), "params.eta_g"),
        (lambda r: r.update(interaction="cubic"), "interaction"),
        (lambda r: r.update(basis={"n_ions": 0, "photon_cutoff": 1, "phonon_cutoff": 1}), "basis.n_ions"),
    ],
)
def test_errors_name_the_offending_key(mutate, key):
    raw = _base()
    mutate(raw)
    with pytest.raises(ConfigError) as info:
        config_from_dict(raw)
    assert info.value.key == key


def test_experiment_blocks():
    params = {"nu": 0.15, "eta_g": 0.06}
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "dynamics", "params": params, "dynamics": {"initial": "e,0,1", "t_final": 1.0, "dt": 0.1}})
    assert info.value.key == "dynamics.case"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "dynamics", "params": params, "dynamics": {"initial": "x,0,1", "t_final": 1.0, "dt": 0.1, "omega_c": 0.4}})
    assert info.value.key == "dynamics.initial"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "dynamics", "params": params,
                          "dynamics": {"initial": "e,0,1", "t_final": 1.0, "dt": 0.1, "omega_c": 0.4, "pulse": {"amplitude": 1.0, "tau": -1}}})
    assert info.value.key == "dynamics.pulse.tau"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "protocol", "params": {"eta_g": 0.03}, "protocol": {"kind": "noon3", "k": [-1]}})
    assert info.value.key == "protocol.k"
    cfg = config_from_dict({"experiment": "protocol", "params": {"eta_g": 0.03}, "protocol": {"kind": "ghz4"}})
    assert cfg.params.nu == 0.5
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "perturbation-check", "perturbation_check": {"cases": ["a", "q"]}})
    assert info.value.key == "perturbation_check.cases[1]"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "landau-zener", "params": params,
                          "landau_zener": {"sweep": {"omega_c_start": 0.28, "speed": 1e-6, "t_final": 0}, "initial": "e,0,0", "dt": 1.0}})
    assert info.value.key == "landau_zener.sweep.t_final"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "spectrum-scan", "params": params,
                          "spectrum_scan": {"omega_c": [0.4], "pairs": [{"states": ["g,3,0"]}]}})
    assert info.value.key == "spectrum_scan.pairs[0].states"
    with pytest.raises(ConfigError) as info:
        config_from_dict({"experiment": "dynamics", "params": params, "interaction": "full_sine",
                          "dynamics": {"initial": "e,0,1", "t_final": 1.0, "dt": 0.1, "omega_c": 0.4}})
    assert info.value.key == "params.eta"


def test_yaml_errors(tmp_path):
    f = tmp_path / "bad.yaml"
    f.write_text("experiment: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(f)
    f.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(f)
