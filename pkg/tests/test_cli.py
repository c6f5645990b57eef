import shutil
import subprocess
import sys

import pytest

from seqaug.cli import main
from seqaug.results import load_runs
from seqaug.toydata import build_toy_dataset

CONFIG = """\
[dataset]
manifest = "data/manifest.tsv"
image_root = "data"
name = "toy"

[split]
source = "data/split.txt"

[provider]
store = "store"
m = 2
k = 4
base_seed = 7
native_width = 32
native_height = 32

[balancing]
alpha = 0.5

[model]
backbone = "cnn-tiny"

[train]
lr0 = 0.01
epochs = 1
batch_size = 8

[transforms]
out_size = 16
level = "None"
scale = [1.0, 1.0]
hflip = false

[run]
method = "SGIA"
btl = false
seeds = [0]
output = "runs"
"""


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    root = tmp_path_factory.mktemp("cliws")
    build_toy_dataset(root / "data", train_per_class=2, test_per_class=1, size=32, seed=3)
    (root / "exp.toml").write_text(CONFIG, encoding="utf-8")
    assert main(["generate", "--config", str(root / "exp.toml")]) == 0
    return root


def cfg_arg(ws):
    return ["--config", str(ws / "exp.toml")]


def test_generate_then_validate(ws, capsys):
    assert (ws / "store" / "meta.json").is_file()
    assert main(["validate-store", str(ws / "store")]) == 0
    assert main(["validate-store", str(ws / "store"), "--no-decode"]) == 0
    assert "complete" in capsys.readouterr().out


def test_validate_store_flags_missing_frame(ws, tmp_path):
    broken = tmp_path / "store"
    shutil.copytree(ws / "store", broken)
    (broken / "000001" / "001" / "001.png").unlink()
    assert main(["validate-store", str(broken)]) == 3


def test_train_records_run_and_checkpoint(ws, monkeypatch, capsys):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_train")
    assert main(["train", *cfg_arg(ws)]) == 0
    assert "best accuracy" in capsys.readouterr().out
    rows = load_runs(ws / "runs_train" / "runs.jsonl")
    assert len(rows) == 1
    rec = rows[0]
    assert (rec.dataset, rec.method, rec.alpha, rec.m, rec.shots, rec.seed) == (
        "toy", "SGIA", 0.5, 2, "full", 0,
    )
    run_dir = ws / "runs_train" / rec.results_path
    assert (run_dir / "stage1.jsonl").is_file()
    assert (run_dir / "model.npz").is_file()
    assert (run_dir / "model.json").is_file()


def test_duplicate_train_needs_force(ws, monkeypatch, capsys):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_dup")
    assert main(["train", *cfg_arg(ws)]) == 0
    assert main(["train", *cfg_arg(ws)]) == 1
    assert "--force" in capsys.readouterr().err
    assert main(["train", *cfg_arg(ws), "--force"]) == 0
    path = ws / "runs_dup" / "runs.jsonl"
    assert len(path.read_text().splitlines()) == 2  # append-only
    assert len(load_runs(path)) == 1  # last record wins


def test_seed_and_alpha_overrides(ws, monkeypatch):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_ovr")
    assert main(["train", *cfg_arg(ws), "--seed", "5", "--alpha", "0.25"]) == 0
    (rec,) = load_runs(ws / "runs_ovr" / "runs.jsonl")
    assert rec.seed == 5
    assert rec.alpha == 0.25


def test_baseline_method_forces_alpha_zero(ws, monkeypatch):
    monkeypatch.setenv("SGIA_RUN_METHOD", "baseline")
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_base")
    assert main(["train", *cfg_arg(ws)]) == 0
    (rec,) = load_runs(ws / "runs_base" / "runs.jsonl")
    assert rec.method == "baseline"
    assert rec.alpha == 0.0


def test_report_without_baseline_rows_fails(ws, monkeypatch, capsys):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_nobase")
    assert main(["train", *cfg_arg(ws)]) == 0
    capsys.readouterr()
    assert main(["report", "--store", str(ws / "runs_nobase" / "runs.jsonl")]) == 2
    assert "baseline" in capsys.readouterr().err


def test_report_table_and_curves(ws, monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_full")
    assert main(["train", *cfg_arg(ws)]) == 0
    monkeypatch.setenv("SGIA_RUN_METHOD", "baseline")
    assert main(["train", *cfg_arg(ws)]) == 0
    monkeypatch.delenv("SGIA_RUN_METHOD")
    store = str(ws / "runs_full" / "runs.jsonl")

    capsys.readouterr()
    assert main(["report", "--store", store]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("dataset\tbackbone")
    assert any(l.startswith("mean_improvement\tSGIA") for l in out.splitlines())

    outdir = tmp_path / "rep"
    assert main(["report", "--store", store, "--out", str(outdir), "--curve", "alpha"]) == 0
    table = outdir / "report.tsv"
    svg = outdir / "curve_alpha_shotsfull.svg"
    assert table.is_file() and svg.is_file()
    first = (table.read_bytes(), svg.read_bytes())
    assert main(["report", "--store", store, "--out", str(outdir), "--curve", "alpha"]) == 0
    assert (table.read_bytes(), svg.read_bytes()) == first


def test_report_on_missing_store_fails(tmp_path, capsys):
    assert main(["report", "--store", str(tmp_path / "none.jsonl")]) == 2
    assert "no records" in capsys.readouterr().err


def test_sweep_runs_grid_and_resumes(ws, monkeypatch, capsys):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_sweep")
    args = ["sweep", *cfg_arg(ws), "--alpha", "0.5", "--m", "1,2"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert "sweep: 3 cells, 0 already recorded" in out
    rows = load_runs(ws / "runs_sweep" / "runs.jsonl")
    assert len(rows) == 3
    assert {(r.method, r.alpha, r.m) for r in rows} == {
        ("baseline", 0.0, 1), ("SGIA", 0.5, 1), ("SGIA", 0.5, 2),
    }

    assert main(args) == 0
    assert "3 already recorded" in capsys.readouterr().out
    assert len((ws / "runs_sweep" / "runs.jsonl").read_text().splitlines()) == 3


def test_parallel_sweep_matches_serial(ws, monkeypatch, capsys):
    monkeypatch.setenv("SGIA_RUN_OUTPUT", "runs_par")
    assert main(["sweep", *cfg_arg(ws), "--alpha", "0.5", "--m", "1,2", "--parallel", "2"]) == 0
    serial = {r.key: r.best_accuracy for r in load_runs(ws / "runs_sweep" / "runs.jsonl")}
    parallel = {r.key: r.best_accuracy for r in load_runs(ws / "runs_par" / "runs.jsonl")}
    assert parallel == serial


def test_usage_errors_exit_config(capsys):
    assert main(["bogus"]) == 1
    assert main(["train"]) == 1
    assert main(["report"]) == 1
    assert "error:" in capsys.readouterr().err


def test_module_entry_point(ws):
    proc = subprocess.run(
        [sys.executable, "-m", "seqaug.cli", "validate-store", str(ws / "store"), "--no-decode"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
