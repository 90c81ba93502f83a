import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from tuckervar.cli import main, run_fit, run_gc, run_metrics, run_simulate
from tuckervar.dataio import (
    DataError,
    find_subject_files,
    read_checkpoint,
    read_config,
    read_matrix,
    read_panel,
    read_table,
    write_checkpoint,
    write_config,
    write_dot,
    write_matrix,
    write_panel,
    write_table,
)
from tuckervar.var import PanelData


# ---------------------------------------------------------------------------
# readers / writers round-trip


def test_panel_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    data = PanelData(y=rng.standard_normal((2, 15, 3)), series_names=["a", "b", "c"])
    paths = write_panel(data, tmp_path)
    loaded = read_panel(paths, holdout=0)
    np.testing.assert_array_equal(loaded.y, data.y)
    assert loaded.series_names == ["a", "b", "c"]


def test_read_panel_header_mismatch(tmp_path):
    (tmp_path / "subject_001.csv").write_text("a,b\n1,2\n3,4\n")
    (tmp_path / "subject_002.csv").write_text("a,c\n1,2\n3,4\n")
    with pytest.raises(DataError) as err:
        read_panel(find_subject_files(tmp_path))
    assert "subject_001" in str(err.value) and "subject_002" in str(err.value)


def test_read_panel_bad_cell_names_location(tmp_path):
    (tmp_path / "subject_001.csv").write_text("a,b\n1,2\n3,oops\n")
    with pytest.raises(DataError) as err:
        read_panel([tmp_path / "subject_001.csv"])
    msg = str(err.value)
    assert "row 3" in msg and "'b'" in msg and "oops" in msg


def test_read_panel_ragged_row(tmp_path):
    (tmp_path / "subject_001.csv").write_text("a,b\n1,2\n3\n")
    with pytest.raises(DataError) as err:
        read_panel([tmp_path / "subject_001.csv"])
    assert "row 3" in str(err.value)


def test_matrix_roundtrip(tmp_path):
    m = np.random.default_rng(1).standard_normal((3, 4))
    write_matrix(tmp_path / "m.csv", m, row_labels=list("abc"), col_labels=list("wxyz"))
    back = read_matrix(tmp_path / "m.csv", has_row_labels=True, has_col_labels=True)
    np.testing.assert_array_equal(back, m)


def test_table_roundtrip(tmp_path):
    write_table(tmp_path / "t.csv", {"x": [1.5, 2.5], "name": ["u", "v"]})
    back = read_table(tmp_path / "t.csv")
    assert back["name"] == ["u", "v"]
    assert [float(v) for v in back["x"]] == [1.5, 2.5]


def test_config_roundtrip(tmp_path):
    values = {"mode": "fit", "n_lags": 3, "ranks": "2,2,1", "seed": 7}
    write_config(tmp_path / "c.txt", values)
    back = read_config(tmp_path / "c.txt")
    assert back == {k: str(v) for k, v in values.items()}


def test_config_rejects_garbage(tmp_path):
    (tmp_path / "c.txt").write_text("mode fit\n")
    with pytest.raises(DataError):
        read_config(tmp_path / "c.txt")
    (tmp_path / "d.txt").write_text("a = 1\na = 2\n")
    with pytest.raises(DataError):
        read_config(tmp_path / "d.txt")


def test_dot_export(tmp_path):
    adj = np.array([[False, True], [False, False]])
    write_dot(tmp_path / "g.dot", adj, node_labels=["u", "v"])
    text = (tmp_path / "g.dot").read_text()
    assert '"v" -> "u";' in text
    assert text.startswith("digraph")


def test_dot_empty_network_keeps_nodes(tmp_path):
    write_dot(tmp_path / "g.dot", np.zeros((2, 2), bool), node_labels=["u", "v"])
    text = (tmp_path / "g.dot").read_text()
    assert '"u";' in text and "->" not in text


def test_checkpoint_roundtrip(tmp_path):
    payload = {"a": np.arange(5.0), "b": np.ones((2, 2), dtype=np.uint64)}
    write_checkpoint(tmp_path / "c.npz", payload, {"mode": "fit", "seed": 3})
    back, echo = read_checkpoint(tmp_path / "c.npz")
    np.testing.assert_array_equal(back["a"], payload["a"])
    np.testing.assert_array_equal(back["b"], payload["b"])
    assert echo == {"mode": "fit", "seed": "3"}


# ---------------------------------------------------------------------------
# pipeline runs (kept tiny)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    sim_dir, fit_dir, gc_dir, metrics_dir = (root / n for n in ("sim", "fit", "gc", "metrics"))
    run_simulate({
        "scenario": "block", "n_series": "4", "n_lags_true": "1", "n_subjects": "2",
        "n_times": "60", "seed": "3", "holdout": "6", "random_scale": "0.05",
        "alpha_scale": "0.1",
    }, sim_dir)
    run_fit({
        "data_dir": str(sim_dir), "holdout": "6", "n_lags": "2", "ranks": "2,2,1",
        "iterations": "120", "burn_in": "60", "thin": "3", "seed": "1",
        "prune_enabled": "false",
    }, fit_dir)
    run_gc({"fit_dir": str(fit_dir), "c": "1.0"}, gc_dir)
    run_metrics({
        "gc_dir": str(gc_dir), "truth_dir": str(sim_dir), "fit_dir": str(fit_dir),
        "data_dir": str(sim_dir), "holdout": "6",
    }, metrics_dir)
    return sim_dir, fit_dir, gc_dir, metrics_dir


def test_simulate_outputs(pipeline):
    sim_dir = pipeline[0]
    files = find_subject_files(sim_dir)
    assert len(files) == 2
    data = read_panel(files)
    assert data.y.shape == (2, 60, 4)
    truth = read_matrix(sim_dir / "truth_gc_lag1.csv", has_row_labels=True,
                        has_col_labels=True)
    assert truth.shape == (4, 4)
    assert set(np.unique(truth)) <= {0.0, 1.0}
    assert (sim_dir / "manifest.txt").exists()


def test_simulate_reproducible_from_manifest(pipeline, tmp_path):
    sim_dir = pipeline[0]
    manifest = read_config(sim_dir / "manifest.txt")
    rerun = tmp_path / "rerun"
    run_simulate(manifest, rerun)
    for path in find_subject_files(sim_dir):
        original = path.read_text()
        copy = (rerun / path.name).read_text()
        assert original == copy


def test_fit_outputs(pipeline):
    fit_dir = pipeline[1]
    for name in ("draws.npz", "b_summary.csv", "nu_summary.csv", "lag_report.csv",
                 "rank_report.csv", "fit_stats.csv", "checkpoint.npz",
                 "chain_diagnostics.png", "fit_series.png", "manifest.txt"):
        assert (fit_dir / name).exists(), name
    stats = read_table(fit_dir / "fit_stats.csv")
    lookup = dict(zip(stats["quantity"], stats["value"]))
    assert np.isfinite(float(lookup["r2_in_sample"]))
    assert np.isfinite(float(lookup["r2_out_sample"]))


def test_gc_outputs(pipeline):
    gc_dir = pipeline[2]
    for name in ("gc_lag1.csv", "gc_lag2.csv", "gc_lag1_prob.csv", "gc_composite.csv",
                 "gc_composite.dot", "gc_networks.png", "gc_probabilities.png",
                 "gc_subject_001_composite.csv", "gc_subject_001_composite.dot"):
        assert (gc_dir / name).exists(), name
    manifest = read_config(gc_dir / "manifest.txt")
    assert float(manifest["t_star"]) == pytest.approx(0.5)
    probs = read_matrix(gc_dir / "gc_lag1_prob.csv", has_row_labels=True,
                        has_col_labels=True)
    assert np.all((probs >= 0) & (probs <= 1))


def test_metrics_outputs(pipeline):
    metrics_dir = pipeline[3]
    table = read_table(metrics_dir / "metrics.csv")
    assert table["method"][0] == "btdvar"
    assert "ols" in table["method"]
    row = {k: v[0] for k, v in table.items()}
    for key in ("tpr", "tnr", "fpr", "fnr"):
        assert row[key] == "NC" or np.isfinite(float(row[key]))
    assert (metrics_dir / "roc.csv").exists()
    assert (metrics_dir / "roc.png").exists()


def test_fit_resume_bit_exact(pipeline, tmp_path):
    sim_dir = pipeline[0]
    cfg = {
        "data_dir": str(sim_dir), "holdout": "6", "n_lags": "1", "ranks": "2,2,1",
        "iterations": "60", "burn_in": "30", "thin": "3", "seed": "5",
        "prune_enabled": "false", "checkpoint_every": "20",
    }
    full_dir = tmp_path / "full"
    run_fit(cfg, full_dir)

    # interrupted run: stop after 40 iterations by shrinking the budget, then
    # resume from its checkpoint with the full budget
    part_cfg = dict(cfg)
    part_cfg["iterations"] = "40"
    part_cfg["burn_in"] = "30"
    part_dir = tmp_path / "part"
    run_fit(part_cfg, part_dir)
    resumed_dir = tmp_path / "resumed"
    run_fit(cfg, resumed_dir, resume=part_dir / "checkpoint.npz")

    from tuckervar.cli import load_draws

    a = load_draws(full_dir / "draws.npz")
    b = load_draws(resumed_dir / "draws.npz")
    np.testing.assert_array_equal(a.b_fixed, b.b_fixed)
    np.testing.assert_array_equal(a.sigma2, b.sigma2)
    np.testing.assert_array_equal(a.nu, b.nu)


# ---------------------------------------------------------------------------
# command-line entry


def test_cli_end_to_end(tmp_path):
    cfg_path = tmp_path / "sim.txt"
    write_config(cfg_path, {
        "mode": "simulate", "scenario": "block", "n_series": 4, "n_lags_true": 1,
        "n_subjects": 1, "n_times": 40, "seed": 2,
    })
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "subject_001.csv").exists()


def test_cli_validation_before_compute(tmp_path):
    cfg_path = tmp_path / "bad.txt"
    write_config(cfg_path, {"n_lags": 50, "ranks": "2,2,1", "data_dir": str(tmp_path)})
    rc = main(["fit", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
    assert rc != 0


def test_cli_error_categories(tmp_path, capsys):
    missing = main(["fit", "--config", str(tmp_path / "none.txt"),
                    "--out", str(tmp_path / "o")])
    assert missing == 3  # DATA: missing config file
    assert "error[DATA]" in capsys.readouterr().err

    cfg_path = tmp_path / "c.txt"
    write_config(cfg_path, {"scenario": "bogus", "n_series": 4, "n_lags_true": 1,
                            "n_times": 40})
    rc = main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
    assert rc == 2  # CONFIG
    assert "error[CONFIG]" in capsys.readouterr().err


def test_cli_mode_mismatch_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "c.txt"
    write_config(cfg_path, {"mode": "simulate", "n_series": 4, "n_lags_true": 1,
                            "n_times": 40})
    rc = main(["fit", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
    assert rc == 2
    capsys.readouterr()


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "tuckervar.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "tuckervar" in proc.stdout
