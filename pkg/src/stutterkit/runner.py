"""Run orchestration shared by the CLI: training runs, prediction,
evaluation, and the reproducibility manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .classic import GnbModel, KnnModel, LinearSvmModel, classic_from_state, classic_state
from .config import POOLED_MODELS, RunConfig, SEQUENCE_MODELS
from .errors import ConfigError, StutterKitError
from .evalreport import confusion, emit_report, metrics, summary_line
from .features import pooled_feature, sequence_feature
from .labels import ClassLabel, class_weights, load_manifest
from .models import (
    ShallowMBSpec,
    StutterNetSpec,
    branch_weights_from_counts,
    build_mb_stutternet,
    build_shallow_mb,
    build_stutternet,
    build_from_meta,
)
from .nnet import load_checkpoint, predict_items, save_checkpoint, train


def _file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_run_manifest(cfg: RunConfig, out_dir, extra_inputs=()):
    inputs = {}
    for path in (cfg.manifest, *extra_inputs):
        if path and os.path.exists(path):
            inputs[os.path.basename(path)] = _file_digest(path)
    doc = {"config": json.loads(cfg.canonical()), "config_hash": cfg.digest(),
           "seed": cfg.seed, "inputs": inputs}
    path = os.path.join(out_dir, "run-manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _load_items(manifest, split, cfg, pooled):
    records = manifest.require_split(split)
    items = []
    for rec in records:
        if pooled:
            feat = pooled_feature(rec, cfg.feature)
        else:
            feat = sequence_feature(rec, cfg.feature).data
        items.append((feat, int(rec.label)))
    return records, items


def _build_nnet_model(cfg: RunConfig, manifest, input_dim):
    spec = StutterNetSpec(channels=cfg.channels, fc_hidden=cfg.hidden_sizes())
    if cfg.model == "sb-stutternet":
        weights = class_weights(manifest, "train") if cfg.loss == "wce" else None
        return build_stutternet(input_dim, spec=spec, class_weights=weights, seed=cfg.seed)
    counts = [manifest.class_counts("train")[lab] for lab in ClassLabel]
    fl_w, dis_w = (None, None)
    if cfg.loss == "joint-wce":
        fl_w, dis_w = branch_weights_from_counts(counts)
    if cfg.model == "mb-stutternet":
        return build_mb_stutternet(
            input_dim, spec=spec, fluent_weights=fl_w, disfluent_weights=dis_w, seed=cfg.seed
        )
    return build_shallow_mb(
        input_dim,
        spec=ShallowMBSpec(fc_hidden=cfg.hidden_sizes(), dropout=cfg.dropout),
        fluent_weights=fl_w,
        disfluent_weights=dis_w,
        seed=cfg.seed,
    )


def run_train(cfg: RunConfig) -> dict:
    """Train per config, evaluate on the validation split, and write
    checkpoint + metrics + predictions + run manifest into cfg.out."""
    if not cfg.manifest:
        raise ConfigError("config needs a manifest path")
    os.makedirs(cfg.out, exist_ok=True)
    manifest = load_manifest(cfg.manifest)
    pooled = cfg.model in POOLED_MODELS
    train_recs, train_items = _load_items(manifest, "train", cfg, pooled)
    val_recs, val_items = _load_items(manifest, "validation", cfg, pooled)
    result = {"out": cfg.out}

    if cfg.model in ("svm", "knn", "gnb"):
        x_train = np.stack([f for f, _ in train_items])
        y_train = np.array([y for _, y in train_items])
        model = {
            "svm": lambda: LinearSvmModel(
                c=cfg.svm_c, epochs=cfg.svm_epochs, seed=cfg.seed, standardize=cfg.standardize
            ),
            "knn": lambda: KnnModel(k=cfg.knn_k, standardize=cfg.standardize),
            "gnb": lambda: GnbModel(standardize=cfg.standardize),
        }[cfg.model]()
        model.fit(x_train, y_train)
        preds = model.predict(np.stack([f for f, _ in val_items]))
        meta, arrays = classic_state(model)
        meta["feature"] = cfg.feature
        save_checkpoint(os.path.join(cfg.out, "model.ckpt"), meta, arrays)
    else:
        input_dim = train_items[0][0].shape[0]
        model = _build_nnet_model(cfg, manifest, input_dim)
        history = train(model, train_items, val_items, cfg.train_config())
        model.meta["feature"] = cfg.feature
        save_checkpoint(os.path.join(cfg.out, "model.ckpt"), model.meta, model.state_dict())
        with open(os.path.join(cfg.out, "history.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "train_loss": history.train_loss,
                    "val_loss": history.val_loss,
                    "val_uar": history.val_uar,
                    "best_epoch": history.best_epoch,
                    "stopped_epoch": history.stopped_epoch,
                },
                fh,
                sort_keys=True,
                indent=2,
            )
            fh.write("\n")
        preds = predict_items(model, val_items, cfg.batch_size)
        result["history"] = history

    ref = [int(r.label) for r in val_recs]
    report = metrics(confusion(ref, preds))
    emit_report(report, confusion(ref, preds), cfg.out)
    write_predictions(
        os.path.join(cfg.out, "predictions.csv"),
        [r.id for r in val_recs],
        preds,
    )
    write_run_manifest(cfg, cfg.out)
    result["report"] = report
    result["summary"] = summary_line(report)
    return result


def write_predictions(path, ids, pred_ids):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "predicted_label"])
        for utt_id, pid in zip(ids, pred_ids):
            writer.writerow([utt_id, ClassLabel(int(pid)).name])


def run_predict(checkpoint_path, manifest_path, split, out_path, batch_size=128):
    meta, arrays = load_checkpoint(checkpoint_path)
    manifest = load_manifest(manifest_path)
    records = manifest.require_split(split)
    feature = meta.get("feature")
    if not feature:
        raise StutterKitError("checkpoint carries no feature spec")
    if meta["kind"] in ("svm", "knn", "gnb"):
        model = classic_from_state(meta, arrays)
        x = np.stack([pooled_feature(rec, feature) for rec in records])
        preds = model.predict(x)
    else:
        model = build_from_meta(meta)
        model.load_state_dict(arrays)
        pooled = meta["kind"] == "shallow-mb"
        items = [
            (
                pooled_feature(rec, feature)
                if pooled
                else sequence_feature(rec, feature).data,
                int(rec.label),
            )
            for rec in records
        ]
        preds = predict_items(model, items, batch_size)
    write_predictions(out_path, [r.id for r in records], preds)
    return preds


def read_label_csv(path, label_column=None):
    """id -> ClassLabel from a CSV having an id column and a label column
    (label, predicted_label, or an explicit column name)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        field_names = reader.fieldnames or []
        if "id" not in field_names:
            raise StutterKitError(f"{path}: no id column")
        col = label_column
        if col is None:
            for candidate in ("label", "predicted_label"):
                if candidate in field_names:
                    col = candidate
                    break
        if col is None or col not in field_names:
            raise StutterKitError(f"{path}: no label column")
        out = {}
        for row in reader:
            out[row["id"]] = ClassLabel.parse(row[col])
    if not out:
        raise StutterKitError(f"{path}: empty label file")
    return out


def run_evaluate(ref_path, pred_path, out_dir=None):
    ref = read_label_csv(ref_path, "label")
    pred = read_label_csv(pred_path)
    missing = sorted(set(ref) - set(pred))
    if missing:
        raise StutterKitError(f"predictions missing for ids: {missing[:5]}")
    ids = sorted(ref)
    cm = confusion([int(ref[i]) for i in ids], [int(pred[i]) for i in ids])
    report = metrics(cm)
    if out_dir:
        emit_report(report, cm, out_dir)
    return report, cm
