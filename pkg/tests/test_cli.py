import logging

import pytest

import qclose
from resources import parameters
from tools import files

MODEL_TEXT = """\
lambda = 0:20, 1:30
mu1 = 1
mu2 = 0.2
beta = 2
p = 0.5
n = 25
x1_0 = 20
horizon = 2
"""

FAST = ["--step", "0.01", "--grid", "0.1", "--workers", "1"]


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(MODEL_TEXT)
    return str(path)


def run(argv, out):
    return qclose.cli_main([*argv, "--out", str(out), *FAST])


def test_unknown_subcommand_is_usage_error():
    assert qclose.cli_main(["bogus"]) == 2


def test_unknown_flag_is_usage_error(model_file):
    assert qclose.cli_main(["fluid", model_file, "--bogus"]) == 2


def test_missing_config(tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        assert run(["fluid", str(tmp_path / "missing.cfg")], tmp_path) == 1
    assert "missing.cfg" in caplog.text


def test_bad_config_reports_line(tmp_path, caplog):
    path = tmp_path / "bad.cfg"
    path.write_text(MODEL_TEXT.replace("mu2 = 0.2", "mu2 = fast"))
    with caplog.at_level(logging.ERROR):
        assert run(["diffusion", str(path)], tmp_path) == 1
    assert f"{path}:3:" in caplog.text


def test_fluid_writes_mean(model_file, tmp_path):
    out = tmp_path / "out"
    assert run(["fluid", model_file, "--method", "adjusted"], out) == 0
    frame = files.read_frame(str(out / "small_fluid_adjusted.csv"))
    assert list(frame.columns) == ["t", *parameters.QUANTITIES]
    assert frame["var_x1"].isna().all()
    assert frame["t"].iloc[-1] == 2.0


@pytest.mark.parametrize("method", ["classic", "adjusted"])
def test_diffusion_writes_moments(model_file, tmp_path, method):
    assert run(["diffusion", model_file, "--method", method], tmp_path) == 0
    frame = files.read_frame(str(tmp_path / f"small_diffusion_{method}.csv"))
    assert list(frame.columns) == ["t", *parameters.QUANTITIES]
    assert len(frame) == 21


def test_simulate_writes_ensemble(model_file, tmp_path):
    assert run(["simulate", model_file, "--reps", "40", "--seed", "3"], tmp_path) == 0
    path = tmp_path / "small_simulation.csv"
    with open(path) as f:
        assert f.readline().strip() == "# reps=40 seed=3"
    frame = files.read_frame(str(path))
    assert list(frame.columns) == ["t", *parameters.QUANTITIES, "se_mean_x1", "se_mean_x2"]


def test_simulate_is_deterministic(model_file, tmp_path):
    assert run(["simulate", model_file, "--reps", "20"], tmp_path / "a") == 0
    assert run(["simulate", model_file, "--reps", "20"], tmp_path / "b") == 0
    assert (tmp_path / "a" / "small_simulation.csv").read_bytes() == (tmp_path / "b" / "small_simulation.csv").read_bytes()


def test_compare_needs_a_target(tmp_path):
    assert run(["compare"], tmp_path) == 1


def test_compare_horizon_before_report_window(model_file, tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        assert run(["compare", model_file, "--reps", "4"], tmp_path) == 1
    assert "no report time" in caplog.text
    assert not (tmp_path / "small_comparison.csv").exists()


def test_compare_model_file(tmp_path, caplog):
    path = tmp_path / "week.cfg"
    path.write_text(MODEL_TEXT.replace("horizon = 2", "horizon = 7"))
    with caplog.at_level(logging.INFO):
        assert run(["compare", str(path), "--reps", "4"], tmp_path) == 0
    for method in ("adjusted", "classic"):
        assert f"week {method}: Var[x1] spike ratio" in caplog.text
    assert "lingers near n" in caplog.text
    assert "mean x1 reaches n at t=" in caplog.text
    frame = files.read_frame(str(tmp_path / "week_comparison.csv"))
    assert sorted(set(frame["time"])) == [6.0, 7.0]
    assert len(frame) == 2 * len(parameters.QUANTITIES) * 2
    table = files.read_frame(str(tmp_path / "week_table_mean_x2.csv"))
    assert list(table.columns) == ["exp", "type", "6", "7"]


def test_figures_of_experiment(tmp_path):
    assert run(["figures", "--exp", "7", "--reps", "2"], tmp_path) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert len([n for n in names if n.endswith(".csv")]) == 5
    assert len([n for n in names if n.endswith(".svg")]) == 5
    frame = files.read_frame(str(tmp_path / "exp7_mean_x1.csv"))
    assert len(frame) == 201


def test_experiment_list_parsing():
    assert qclose.parse_experiment_ids("1-3") == [1, 2, 3]
    assert qclose.parse_experiment_ids("1..2,7") == [1, 2, 7]
    assert qclose.cli_main(["tables", "--exps", "0-3"]) == 2


def test_tables_of_one_experiment(tmp_path):
    assert run(["tables", "--exps", "7", "--reps", "2"], tmp_path) == 0
    for quantity in parameters.QUANTITIES:
        frame = files.read_frame(str(tmp_path / f"table_{quantity}.csv"))
        assert list(frame.columns) == ["exp", "type", *(str(t) for t in range(6, 16))]
        assert len(frame) == 2
    assert (tmp_path / "average_differences.csv").exists()


@pytest.mark.slow
def test_tables_layout(tmp_path):
    assert run(["tables", "--exps", "1-10", "--reps", "2"], tmp_path) == 0
    for quantity in parameters.QUANTITIES:
        frame = files.read_frame(str(tmp_path / f"table_{quantity}.csv"))
        assert frame.shape == (20, 12)
