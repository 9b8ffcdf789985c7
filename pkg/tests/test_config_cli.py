import json

import pytest
from click.testing import CliRunner

from nlsrelax.cli import main
from nlsrelax.config import ConfigError, config_from_mapping, load_config


BASE = {
    "problem": "one_soliton",
    "equation": "nls",
    "operator_kind": "fourier",
    "operator_n": 64,
    "tableau": "kc43",
    "dt": 0.05,
    "t_end": 0.2,
}


def write_yaml(path, mapping):
    lines = []
    for key, value in mapping.items():
        if isinstance(value, list):
            lines.append(f"{key}: [{', '.join(str(v) for v in value)}]")
        else:
            lines.append(f"{key}: {value}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_config_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    write_yaml(path, {**BASE, "relaxation": "mass_energy"})
    config = load_config(path)
    assert config.problem == "one_soliton"
    assert config.dt == 0.05
    assert config.relaxation == "mass_energy"


def test_config_rejects_unknown_and_missing_keys():
    with pytest.raises(ConfigError, match="unknown"):
        config_from_mapping({**BASE, "typo_key": 1})
    with pytest.raises(ConfigError, match="missing"):
        config_from_mapping({"problem": "one_soliton"})


def test_config_validation_rules():
    with pytest.raises(ConfigError, match="dt"):
        config_from_mapping({**BASE, "dt": -1.0})
    with pytest.raises(ConfigError, match="tau"):
        config_from_mapping(
            {**BASE, "equation": "nls_hyperbolic", "operator_kind": "upwind",
             "operator_order": 4}
        )
    with pytest.raises(ConfigError, match="upwind"):
        config_from_mapping(
            {**BASE, "equation": "nls_hyperbolic", "operator_order": 4, "tau": 0.1}
        )
    with pytest.raises(ConfigError, match="operator_order"):
        config_from_mapping({**BASE, "operator_kind": "central"})
    with pytest.raises(ConfigError, match="relaxation"):
        config_from_mapping({**BASE, "relaxation": "sometimes"})


def test_load_config_reports_file_and_yaml_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("problem: [unclosed\n")
    with pytest.raises(ConfigError, match="bad.yaml"):
        load_config(bad)


def test_cli_run_writes_outputs(tmp_path):
    config = write_yaml(
        tmp_path / "run.yaml",
        {**BASE, "relaxation": "mass_energy", "snapshot_times": [0.1, 0.2]},
    )
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--config", config, "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "invariants.csv").exists()
    assert (out / "snapshots.csv").exists()
    metadata = json.loads((out / "metadata.json").read_text())
    assert metadata["steps"] == 4
    assert metadata["config"]["tableau"] == "kc43"
    assert "final L2 error" in result.output


def test_cli_run_is_deterministic(tmp_path):
    config = write_yaml(tmp_path / "run.yaml", {**BASE, "relaxation": "mass_energy"})
    runner = CliRunner()
    outputs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        result = runner.invoke(main, ["run", "--config", config, "--output", str(out)])
        assert result.exit_code == 0, result.output
        outputs.append((out / "invariants.csv").read_text())
    assert outputs[0] == outputs[1]


def test_cli_run_without_snapshot_times_writes_no_snapshots(tmp_path):
    config = write_yaml(tmp_path / "run.yaml", BASE)
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--config", config, "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert not (out / "snapshots.csv").exists()


def test_cli_converge(tmp_path):
    config = write_yaml(
        tmp_path / "conv.yaml",
        {
            **BASE,
            "relaxation": "mass_energy",
            "sweep_axis": "time",
            "sweep_values": [0.05, 0.025, 0.0125],
        },
    )
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(main, ["converge", "--config", config, "--output", str(out)])
    assert result.exit_code == 0, result.output
    text = (out / "convergence.csv").read_text()
    assert text.count("\n") == 4  # header + one row per dt + observed orders


def test_cli_error_growth(tmp_path):
    config = write_yaml(
        tmp_path / "growth.yaml",
        {**BASE, "t_end": 0.4, "sample_times": [0.1, 0.2, 0.4], "reference_dt": 0.01},
    )
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(
        main, ["error-growth", "--config", config, "--output", str(out)]
    )
    assert result.exit_code == 0, result.output
    lines = (out / "error_growth.csv").read_text().strip().splitlines()
    assert len(lines) == 4  # header + one row per sample time


def test_cli_bench(tmp_path):
    config_a = write_yaml(tmp_path / "a.yaml", BASE)
    config_b = write_yaml(tmp_path / "b.yaml", {**BASE, "tableau": "ars343"})
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["bench", "--config", config_a, "--config", config_b, "--output", str(out)],
    )
    assert result.exit_code == 0, result.output
    lines = (out / "bench.csv").read_text().strip().splitlines()
    assert len(lines) == 3


def test_cli_conformance(tmp_path):
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(main, ["conformance", "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert "all operator families conform" in result.output
    assert (out / "conformance.csv").exists()


def test_cli_rejects_bad_config(tmp_path):
    config = write_yaml(tmp_path / "bad.yaml", {**BASE, "problem": "absent"})
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--config", config, "--output", str(tmp_path)])
    assert result.exit_code != 0
