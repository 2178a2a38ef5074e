import json
import textwrap

import pytest
import yaml

from vibqed.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main, verify_manifest


def _config(tmp_path, body: str, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return path


ORACLE = """
experiment: perturbation-check
perturbation_check:
  cases: [a, f, no_phonon]
  points: 5
"""

SMALL_MAP = """
experiment: splitting-map
splitting_map:
  case: c
  nu: [0.15, 0.2]
  eta_g: [0.02, 0.04]
  coarse_points: 41
"""


def test_validate_ok_and_bad(tmp_path, capsys):
    good = _config(tmp_path, ORACLE)
    assert main(["validate", str(good)]) == EXIT_OK
    bad = _config(tmp_path, "experiment: perturbation-check\nperturbation_check:\n  cases: [zz]\n", "bad.yaml")
    assert main(["validate", str(bad)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_validate_rejects_malformed_yaml(tmp_path):
    bad = _config(tmp_path, "experiment: [unclosed\n", "bad.yaml")
    assert main(["validate", str(bad)]) == EXIT_CONFIG


def test_perturbation_run_manifest_and_integrity(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(_config(tmp_path, ORACLE)), "--output-dir", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["diagnostics"]["max_rel_error"] < 1e-9
    assert {f["path"] for f in manifest["files"]} == {"oracle.csv", "oracle.svg"}
    assert verify_manifest(out / "manifest.json") == []
    (out / "oracle.csv").write_text((out / "oracle.csv").read_text() + "\n")
    assert verify_manifest(out / "manifest.json") == ["oracle.csv"]


def test_rerun_is_byte_identical(tmp_path):
    cfg = _config(tmp_path, ORACLE)
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "b")]) == EXIT_OK
    for name in ("oracle.csv", "oracle.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_worker_count_does_not_change_results(tmp_path):
    cfg = _config(tmp_path, SMALL_MAP)
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "w1"), "--workers", "1"]) == EXIT_OK
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "w2"), "--workers", "2"]) == EXIT_OK
    a = (tmp_path / "w1" / "splitting_map.csv").read_bytes()
    b = (tmp_path / "w2" / "splitting_map.csv").read_bytes()
    assert a == b
    assert len(a.decode().strip().splitlines()) == 5
    assert (tmp_path / "w1" / "splitting_map.svg").exists()


def test_numerical_failure_exit_code(tmp_path):
    # a bracket that cannot contain the crossing: the gap minimum sits on its edge
    cfg = _config(tmp_path, """
        experiment: spectrum-scan
        params: {nu: 0.2, eta_g: 0.06}
        basis: {n_ions: 1, photon_cutoff: 4, phonon_cutoff: 3}
        spectrum_scan:
          omega_c: {start: 0.3, stop: 0.32, points: 3}
          n_levels: 4
        """)
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "ok")]) == EXIT_OK
    failing = _config(tmp_path, """
        experiment: dynamics
        params: {nu: 0.2, eta_g: 0.06}
        basis: {n_ions: 1, photon_cutoff: 4, phonon_cutoff: 3}
        dynamics:
          case: b
          initial: "e,0,0"
          t_final: 10.0
          dt: 1.0
          K: 10
        """, "fail.yaml")
    out = tmp_path / "fail"
    code = main(["run", str(failing), "--output-dir", str(out)])
    assert code == EXIT_NUMERICAL
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert manifest["failures"]


def test_io_failure_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main(["run", str(_config(tmp_path, ORACLE)), "--output-dir", str(blocker)]) == EXIT_IO


def test_workers_must_be_positive(tmp_path):
    assert main(["run", str(_config(tmp_path, ORACLE)), "--workers", "0"]) == EXIT_CONFIG


def test_plot_subcommand(tmp_path):
    csv_path = tmp_path / "t.csv"
    csv_path.write_text("omega_c,gap\n0.1,1e-3\n0.2,2e-3\n0.3,1.5e-3\n")
    spec = tmp_path / "spec.yaml"
    spec.write_text(yaml.safe_dump({"kind": "line", "x": "omega_c", "y": ["gap"]}))
    out = tmp_path / "fig.svg"
    assert main(["plot", str(csv_path), str(spec), "--output", str(out)]) == EXIT_OK
    assert out.read_text().lstrip().startswith("<?xml")
    spec.write_text(yaml.safe_dump({"kind": "line", "x": "omega_c", "y": ["missing"]}))
    out2 = tmp_path / "fig2.svg"
    assert main(["plot", str(csv_path), str(spec), "--output", str(out2)]) == EXIT_CONFIG
    assert not out2.exists()


@pytest.mark.parametrize("name", ["spectrum_scan", "splitting_map", "perturbation_check", "dynamics",
                                  "dynamics_damped", "landau_zener", "protocol"])
def test_shipped_configs_validate(name):
    from importlib import resources

    path = resources.files("vibqed") / "configs" / f"{name}.yaml"
    assert main(["validate", str(path)]) == EXIT_OK
