import os

import numpy as np
import pytest

from stutterkit.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from stutterkit.embio import read_bundle


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("synth"))
    code = run_cli(
        "synth-data", "--out", out, "--n-per-class", "10", "--dim", "8",
        "--frames", "10", "--separation", "10.0", "--seed", "3",
    )
    assert code == EXIT_OK
    return out


@pytest.fixture(scope="module")
def wav_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("wavs"))
    code = run_cli(
        "synth-data", "--out", out, "--n-per-class", "4", "--dim", "8",
        "--frames", "30", "--seed", "4", "--mode", "wav",
    )
    assert code == EXIT_OK
    return out


def _manifest(d):
    return os.path.join(d, "manifest.csv")


def test_unknown_subcommand_exit_usage(capsys):
    assert run_cli("frobnicate") == EXIT_USAGE


def test_missing_required_argument_exit_usage():
    assert run_cli("train") == EXIT_USAGE


def test_missing_manifest_exit_data(tmp_path):
    assert run_cli(
        "pool", "--manifest", str(tmp_path / "nope.csv"),
        "--feature", "mfcc", "--out", str(tmp_path / "x.csv"),
    ) == EXIT_DATA


def test_synth_data_deterministic(synth_dir, tmp_path):
    again = str(tmp_path / "again")
    assert run_cli(
        "synth-data", "--out", again, "--n-per-class", "10", "--dim", "8",
        "--frames", "10", "--separation", "10.0", "--seed", "3",
    ) == EXIT_OK
    first = open(_manifest(synth_dir)).read()
    second = open(_manifest(again)).read()
    # paths differ but ids/labels/splits must match
    strip = lambda text: [
        ",".join(line.split(",")[0:1] + line.split(",")[3:])
        for line in text.strip().splitlines()
    ]
    assert strip(first) == strip(second)
    some_id = strip(first)[1].split(",")[0]
    a = open(os.path.join(synth_dir, some_id + ".emb1"), "rb").read()
    b = open(os.path.join(again, some_id + ".emb1"), "rb").read()
    assert a == b


def test_inspect_bundle_reports_header(synth_dir, capsys):
    some = next(
        f for f in sorted(os.listdir(synth_dir)) if f.endswith(".emb1")
    )
    path = os.path.join(synth_dir, some)
    assert run_cli("inspect-bundle", path) == EXIT_OK
    out = capsys.readouterr().out.strip()
    bundle = read_bundle(path)
    expected_bytes = 16 + bundle.n_layers * bundle.dim * bundle.T * 4
    assert out == (
        f"n_layers={bundle.n_layers} dim={bundle.dim} "
        f"T={bundle.T} bytes={expected_bytes}"
    )
    assert bundle.n_layers == 13 and bundle.dim == 8


def test_pool_writes_csv(synth_dir, tmp_path):
    out = str(tmp_path / "pooled.csv")
    assert run_cli(
        "pool", "--manifest", _manifest(synth_dir), "--feature", "layer:3",
        "--out", out, "--split", "validation",
    ) == EXIT_OK
    rows = open(out).read().strip().splitlines()
    assert len(rows) == 8 * 2  # 20% of 10 per class
    assert len(rows[0].split(",")) == 1 + 2 * 8  # id + mean||std


def test_combine_writes_single_layer_bundles(synth_dir, tmp_path):
    out = str(tmp_path / "combined")
    assert run_cli(
        "combine", "--manifest", _manifest(synth_dir),
        "--feature", "concat:3,4", "--out", out,
    ) == EXIT_OK
    sub = load_any_bundle(out)
    assert sub.n_layers == 1 and sub.dim == 16
    assert os.path.exists(_manifest(out))


def load_any_bundle(d):
    name = next(f for f in sorted(os.listdir(d)) if f.endswith(".emb1"))
    return read_bundle(os.path.join(d, name))


def test_extract_mfcc_from_wavs(wav_dir, tmp_path):
    out = str(tmp_path / "mfcc")
    assert run_cli(
        "extract-mfcc", "--manifest", _manifest(wav_dir), "--out", out,
        "--check-files",
    ) == EXIT_OK
    bundle = load_any_bundle(out)
    assert bundle.n_layers == 1 and bundle.dim == 20


def _write_config(path, manifest, out, **overrides):
    lines = {
        "manifest": manifest,
        "feature": "layer:3",
        "model": "gnb",
        "loss": "ce",
        "seed": "5",
        "out": out,
    }
    lines.update(overrides)
    with open(path, "w") as fh:
        fh.write("# test run\n")
        for k, v in lines.items():
            fh.write(f"{k} = {v}\n")


def test_train_classic_artifacts_and_determinism(synth_dir, tmp_path, capsys):
    cfg = str(tmp_path / "run.cfg")
    out1, out2 = str(tmp_path / "run1"), str(tmp_path / "run2")
    _write_config(cfg, _manifest(synth_dir), out1)
    assert run_cli("train", "--config", cfg) == EXIT_OK
    printed = capsys.readouterr().out
    assert "UAR" in printed
    for name in ("model.ckpt", "metrics.json", "confusion.csv",
                 "summary.txt", "predictions.csv", "run-manifest.json"):
        assert os.path.exists(os.path.join(out1, name)), name
    assert run_cli("train", "--config", cfg, "--out", out2) == EXIT_OK
    m1 = open(os.path.join(out1, "metrics.json"), "rb").read()
    m2 = open(os.path.join(out2, "metrics.json"), "rb").read()
    assert m1 == m2


def test_train_separable_gnb_perfect(synth_dir, tmp_path, capsys):
    cfg = str(tmp_path / "run.cfg")
    out = str(tmp_path / "run")
    _write_config(cfg, _manifest(synth_dir), out)
    assert run_cli("train", "--config", cfg) == EXIT_OK
    assert "UAR 100.0" in capsys.readouterr().out


def test_predict_then_evaluate_round_trip(synth_dir, tmp_path, capsys):
    cfg = str(tmp_path / "run.cfg")
    out = str(tmp_path / "run")
    _write_config(cfg, _manifest(synth_dir), out, model="svm")
    assert run_cli("train", "--config", cfg) == EXIT_OK
    preds = str(tmp_path / "preds.csv")
    assert run_cli(
        "predict", "--checkpoint", os.path.join(out, "model.ckpt"),
        "--manifest", _manifest(synth_dir), "--split", "test", "--out", preds,
    ) == EXIT_OK
    capsys.readouterr()
    ref = str(tmp_path / "ref.csv")
    with open(ref, "w") as fh:
        fh.write("id,label\n")
        for line in open(_manifest(synth_dir)).read().strip().splitlines()[1:]:
            cells = line.split(",")
            if cells[4] == "test":
                fh.write(f"{cells[0]},{cells[3]}\n")
    assert run_cli(
        "evaluate", "--ref", ref, "--pred", preds,
        "--out", str(tmp_path / "eval"),
    ) == EXIT_OK
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("UAR ")
    assert os.path.exists(str(tmp_path / "eval" / "metrics.json"))


def test_evaluate_perfect_predictions(synth_dir, tmp_path, capsys):
    # the manifest doubles as its own reference predictions
    assert run_cli(
        "evaluate", "--ref", _manifest(synth_dir), "--pred", _manifest(synth_dir),
    ) == EXIT_OK
    assert capsys.readouterr().out.strip() == "UAR 100.0"


def test_train_nnet_history(synth_dir, tmp_path):
    cfg = str(tmp_path / "run.cfg")
    out = str(tmp_path / "run")
    _write_config(
        cfg, _manifest(synth_dir), out,
        model="shallow-mb", loss="joint", feature="layer:3",
        max_epochs="3", batch_size="32", fc_hidden="16,16",
    )
    assert run_cli("train", "--config", cfg) == EXIT_OK
    assert os.path.exists(os.path.join(out, "history.json"))
    import json

    hist = json.load(open(os.path.join(out, "history.json")))
    assert len(hist["val_loss"]) == hist["stopped_epoch"] <= 3


def test_layer_sweep_csv(synth_dir, tmp_path, capsys):
    out = str(tmp_path / "sweep")
    assert run_cli(
        "layer-sweep", "--manifest", _manifest(synth_dir),
        "--layers", "2-4", "--classifiers", "gnb", "--out", out,
    ) == EXIT_OK
    rows = open(os.path.join(out, "sweep.csv")).read().strip().splitlines()
    assert rows[0] == "layer,variant,classifier,uar"
    assert len(rows) == 1 + 3
    # the class signal lives in stream 3, so it must win the sweep
    best = max(rows[1:], key=lambda r: float(r.split(",")[3]))
    assert best.split(",")[0] == "3"


def test_bad_config_key_exit_data(tmp_path):
    cfg = str(tmp_path / "bad.cfg")
    open(cfg, "w").write("modle = svm\n")
    assert run_cli("train", "--config", cfg) == EXIT_DATA
