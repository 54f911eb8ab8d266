import json

import numpy as np
import pytest

from graphtrack import cli, fileio
from graphtrack.experiment import read_records_csv


def run_cli(*args):
    return cli.main(list(args))


@pytest.fixture()
def generated(tmp_path):
    out = tmp_path / "gen"
    code = run_cli("generate", "--model", "er", "--n", "12", "--signals", "120",
                   "--edge-prob", "0.25", "--change", "60:0.2", "--seed", "3",
                   "--out", str(out))
    assert code == 0
    return out


def test_generate_outputs(generated):
    manifest = fileio.read_manifest(generated / "manifest.json")
    assert manifest["graph"]["model"] == "er"
    assert manifest["stream"]["length"] == 120
    signals = fileio.read_signal_csv(generated / "signals.csv")
    assert signals.shape == (120, 12)
    assert len(manifest["truth_segments"]) == 2
    for seg in manifest["truth_segments"]:
        w, _ = fileio.read_edge_csv(generated / seg["file"], n=12)
        assert np.any(w > 0)


def test_generate_deterministic(tmp_path):
    args = ("generate", "--model", "pa", "--n", "10", "--signals", "40",
            "--seed", "11")
    run_cli(*args, "--out", str(tmp_path / "a"))
    run_cli(*args, "--out", str(tmp_path / "b"))
    for name in ("signals.csv", "truth_seg0.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_batch_subcommand(generated, tmp_path):
    out = tmp_path / "batch"
    code = run_cli("batch", "--signals", str(generated / "signals.csv"),
                   "--tol", "1e-9", "--out", str(out))
    assert code == 0
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "iter,w_change,primal_residual,objective"
    w, idx = fileio.read_edge_csv(out / "edges.csv", n=12)
    assert np.all(w >= 0)
    assert np.all(idx.degrees(w) > 0)


def test_online_flags_path(generated, tmp_path):
    out = tmp_path / "online"
    code = run_cli("online", "--signals", str(generated / "signals.csv"),
                   "--algo", "opadmm", "--gamma", "fixed:0.01",
                   "--regret-stride", "40", "--out", str(out))
    assert code == 0
    records = read_records_csv(out / "opadmm_records.csv")
    assert len(records) == 120
    assert [r.k for r in records if r.regret_partial is not None] == [40, 80, 120]


def test_online_requires_input(capsys):
    assert run_cli("online") == 2


def test_online_config_path(tmp_path):
    config = {
        "graph": {"model": "er", "n": 10, "edge_prob": 0.3, "seed": 2},
        "stream": {"length": 50, "noise_variance": 0.01},
        "solvers": [
            {"name": "opadmm"},
            {"name": "pg", "algo": "pg"},
        ],
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "exp"
    code = run_cli("online", "--config", str(cfg_path), "--out", str(out))
    assert code == 0
    assert (out / "opadmm.csv").exists()
    assert (out / "pg.csv").exists()
    assert (out / "experiment_summary.json").exists()
    assert (out / "experiment_suboptimality.svg").exists()


def test_grid_regularizers(generated, capsys):
    code = run_cli("grid", "--target", "regularizers",
                   "--signals", str(generated / "signals.csv"),
                   "--truth", str(generated / "truth_seg0.csv"),
                   "--alpha-grid", "0.5,1", "--beta-grid", "0.5,1")
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["alpha"] in (0.5, 1.0)
    assert payload["beta"] in (0.5, 1.0)


def test_grid_solver(generated, capsys):
    code = run_cli("grid", "--target", "solver",
                   "--signals", str(generated / "signals.csv"),
                   "--rho-grid", "1", "--tau1-grid", "0.01,0.9",
                   "--tau2-grid", "0.9")
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["tau1"] == 0.01
    assert any("skipped" in cell for cell in payload["cells"])


def test_report_subcommand(generated, tmp_path, capsys):
    online_out = tmp_path / "online"
    run_cli("online", "--signals", str(generated / "signals.csv"),
            "--out", str(online_out))
    capsys.readouterr()
    rep = tmp_path / "rep"
    code = run_cli("report", "--records", str(online_out / "opadmm_records.csv"),
                   "--out", str(rep))
    assert code == 0
    summary = json.load(open(rep / "report_summary.json"))
    assert "opadmm_records" in summary
    assert (rep / "report_suboptimality.svg").read_text().count("<polyline") == 1


def test_output_dir_env_override(generated, tmp_path, monkeypatch):
    forced = tmp_path / "forced"
    monkeypatch.setenv("GRAPHTRACK_OUTDIR", str(forced))
    run_cli("online", "--signals", str(generated / "signals.csv"),
            "--out", str(tmp_path / "ignored"))
    assert (forced / "opadmm_records.csv").exists()
    assert not (tmp_path / "ignored").exists()
