import json
import math

from click.testing import CliRunner

from create_scenario import create_scenario
from core.scenario_service import load_config
from main import EXIT_CONFIG_OR_SOLVER, EXIT_INVARIANT_FAILED, EXIT_OK, cli


def write_config(directory, name, **fields):
    path = directory / f"{name}.json"
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


def test_run_bell_swap(tmp_path):
    config = write_config(tmp_path, "bell", preset="bell-swap", k="quantized(0)", grid={"n_steps": 100, "ode_steps": 2000})
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_OK, result.output
    assert "FALLA" not in result.output
    assert f"{math.pi / 3:.6f}"[:6] in result.output
    report = json.loads((tmp_path / "out" / "bell" / "report.json").read_text(encoding="utf-8"))
    assert report["files"] == ["trajectory.csv", "report.json"]


def test_run_steps_override_and_quiet(tmp_path):
    config = write_config(tmp_path, "osc", preset="oscillator", k=2.0, grid={"ode_steps": 500})
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out"), "--steps", "10", "--quiet"])
    assert result.exit_code == EXIT_OK
    assert result.output == ""
    lines = (tmp_path / "out" / "osc" / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 12


def test_run_reports_invariant_failure(tmp_path):
    # Con tol = 0.5 el punto fijo se detiene en ΔT = 0.1 y el estado no llega al objetivo
    c, s = math.cos(0.1), math.sin(0.1)
    config = write_config(
        tmp_path, "loose",
        custom={"h0": [[[0, 0], [0, 1]], [[0, -1], [0, 0]]], "psi_i": [[1, 0], [0, 0]], "psi_f": [[c, 0], [s, 0]]},
        k=2.0, solver={"tol": 0.5}, grid={"n_steps": 20, "ode_steps": 200},
    )
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_INVARIANT_FAILED
    assert "[FALLA] arrival_fidelity" in result.output


def test_run_rejects_invalid_config(tmp_path):
    config = write_config(
        tmp_path, "bad",
        custom={"h0": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]], "psi_i": [[1, 0], [0, 0]], "psi_f": [[0, 0], [1, 0]]},
        k=1.0,
    )
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_CONFIG_OR_SOLVER
    assert not (tmp_path / "out").exists()


def test_run_degenerate_exits_zero(tmp_path):
    config = write_config(
        tmp_path, "same",
        custom={"h0": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]], "psi_i": [[0, 0], [1, 0]], "psi_f": [[0, 0], [0, 1]]},
        k=1.0,
    )
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_OK
    assert "degenerado" in result.output


def test_run_zero_target_energy_exits_zero(tmp_path):
    config = write_config(
        tmp_path, "flat", preset="bell-swap", k=1.0, parameters={"j_x": 1.0, "j_y": 0.0, "j_z": 1.0},
        grid={"n_steps": 20, "ode_steps": 2000},
    )
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads((tmp_path / "out" / "flat" / "report.json").read_text(encoding="utf-8"))
    assert report["eps_f"] == 0.0
    assert report["zeeman_realizable"] is None

    config = write_config(
        tmp_path, "flat_table", preset="bell-swap", k=1.0, parameters={"j_x": 1.0, "j_y": 0.0, "j_z": 1.0},
        outputs=["quantization-table"],
    )
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_CONFIG_OR_SOLVER


def test_run_unwritable_output_dir(tmp_path):
    config = write_config(tmp_path, "osc", preset="oscillator", k=2.0, grid={"n_steps": 10, "ode_steps": 500})
    blocker = tmp_path / "archivo"
    blocker.write_text("no es un directorio", encoding="utf-8")
    # click acepta la ruta porque no existe; mkdir falla al escribir
    result = CliRunner().invoke(cli, ["run", config, "--output-dir", str(blocker / "resultados")])
    assert result.exit_code == EXIT_CONFIG_OR_SOLVER
    assert isinstance(result.exception, SystemExit)


def test_batch_exit_code(tmp_path):
    scenarios = tmp_path / "scenarios"
    scenarios.mkdir()
    write_config(scenarios, "osc", preset="oscillator", k=2.0, grid={"n_steps": 20, "ode_steps": 500})
    runner = CliRunner()
    ok = runner.invoke(cli, ["batch", str(scenarios), "--output-dir", str(tmp_path / "out"), "--workers", "2"])
    assert ok.exit_code == EXIT_OK
    assert "OK     osc.json" in ok.output

    write_config(scenarios, "broken", preset="oscillator")
    failed = runner.invoke(cli, ["batch", str(scenarios), "--output-dir", str(tmp_path / "out")])
    assert failed.exit_code == EXIT_CONFIG_OR_SOLVER
    assert "ERROR  broken.json" in failed.output


def test_table_command(tmp_path):
    output = tmp_path / "table.csv"
    result = CliRunner().invoke(cli, ["table", "--eps-f", "1.5", "--rows", "3", "--output", str(output)])
    assert result.exit_code == EXIT_OK
    lines = output.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,k,delta_t"
    assert lines[1].startswith("0,4.5,")
    assert len(lines) == 4


def test_table_rejects_zero_energy(tmp_path):
    result = CliRunner().invoke(cli, ["table", "--eps-f", "0", "--output", str(tmp_path / "t.csv")])
    assert result.exit_code == EXIT_CONFIG_OR_SOLVER


def test_table_unwritable_output(tmp_path):
    blocker = tmp_path / "archivo"
    blocker.write_text("", encoding="utf-8")
    result = CliRunner().invoke(cli, ["table", "--eps-f", "1.5", "--output", str(blocker / "t.csv")])
    assert result.exit_code == EXIT_CONFIG_OR_SOLVER


def test_create_scenario_writes_valid_config(tmp_path):
    path = tmp_path / "nuevo" / "flip.json"
    assert create_scenario("spin-flip", "quantized(2)", str(path))
    ok, cfg = load_config(path)
    assert ok
    assert cfg.preset == "spin-flip" and cfg.quantized_n == 2
    assert not create_scenario("spin-flip", "1.0", str(path))
    assert not create_scenario("helium", "1.0", str(tmp_path / "x.json"))
