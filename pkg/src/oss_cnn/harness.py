"""Experiment orchestration: end-to-end pipeline, feature caching,
parameter sweeps, and CSV reports.

Features are extracted once per (config, seed) and cached on disk, so
classifier training never re-runs the optical simulation.  All runs are
deterministic for a fixed seed: noise streams are derived per
(seed, image index, node index) and training shuffles from the seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import classifier, dataset, filterbank, metrics, receiver
from .config import ExperimentConfig, SweepGrid, apply_point
from .frontend import modulate_values

RUNS_CSV_COLUMNS = [
    "run_id", "seed", "nodes", "patch_edge", "sr_fraction", "adc_rate_hz",
    "oversample", "shot", "thermal", "bypass_oss", "feature_dim",
    "compression_ratio", "test_accuracy", "final_train_accuracy", "epochs",
    "wall_clock_s", "compute_speed_tops", "power_w", "efficiency_tops_per_w",
    "density_tops_per_mm2", "status", "error",
]


@dataclass
class RunReport:
    config: dict
    compression_ratio: float
    test_accuracy: float
    history: list
    feature_dim: int
    metrics: metrics.MetricsReport
    wall_clock_s: float
    seed: int


def compression_ratio(config: ExperimentConfig) -> float:
    """Input pixel count over FCL input size, known before any simulation."""
    dim = config.feature_dim()
    if dim == 0:
        raise ValueError("feature dimension is zero")
    return config.image_height * config.image_width / dim


def load_dataset(config: ExperimentConfig):
    """(train images, train labels, test images, test labels) per the config."""
    train_x = dataset.parse_idx_images(dataset.load_idx_file(config.train_images))
    train_y = dataset.parse_idx_labels(dataset.load_idx_file(config.train_labels))
    test_x = dataset.parse_idx_images(dataset.load_idx_file(config.test_images))
    test_y = dataset.parse_idx_labels(dataset.load_idx_file(config.test_labels))
    if len(train_x) != len(train_y) or len(test_x) != len(test_y):
        raise ValueError("image/label counts disagree")
    if config.train_subset is not None:
        images = train_x.images[: config.train_subset]
        train_x = dataset.ImageSet(images=images, height=train_x.height, width=train_x.width)
        train_y = dataset.LabelSet(labels=train_y.labels[: config.train_subset])
    return train_x, train_y, test_x, test_y


def serialize_images(images: dataset.ImageSet, n: int) -> np.ndarray:
    """All images to dual-orientation pixel sequences, shape (count, length)."""
    out = np.empty(
        (len(images), dataset.sequence_length(images.height, images.width, n)),
        dtype=np.float64,
    )
    for i in range(len(images)):
        out[i] = dataset.image_to_sequence(images.images[i], n).values
    return out


def extract_analog_features(
    images: dataset.ImageSet,
    config: ExperimentConfig,
    image_offset: int = 0,
    batch_size: int = 512,
) -> np.ndarray:
    """Run the optical chain; returns pre-quantization ADC samples.

    Output shape is (image count, N * features_per_node), node-major in
    the feature axis.  `image_offset` keeps noise sub-seeds aligned when
    train and test sets are processed separately.
    """
    frontend_cfg = config.frontend()
    noise = config.noise()
    bank = config.filter_bank()
    adc = config.adc()
    fs = frontend_cfg.sample_rate_hz
    per_node = config.features_per_node()
    count = len(images)
    features = np.empty((count, bank.count * per_node), dtype=np.float32)
    for start in range(0, count, batch_size):
        stop = min(start + batch_size, count)
        seqs = serialize_images(
            dataset.ImageSet(images.images[start:stop], images.height, images.width),
            config.patch_edge,
        )
        optical = modulate_values(seqs, frontend_cfg)
        for j, node in enumerate(bank.nodes):
            sliced = filterbank.apply_node(optical, node)
            current = noise.responsivity_a_per_w * np.abs(sliced.samples) ** 2
            if noise.shot_enabled or noise.thermal_enabled:
                std = receiver.noise_std(current, noise, fs)
                for i in range(stop - start):
                    rng = receiver.derive_rng(noise.seed, image_offset + start + i, j)
                    current[i] += std[i] * rng.standard_normal(current.shape[1])
            pooled = receiver.butterworth_lpf(
                receiver.ElectricalWaveform(current, fs),
                config.patch_edge,
                config.pixel_rate_hz,
            )
            sampled = receiver.sample_photocurrent(pooled, adc)
            features[start:stop, j * per_node : (j + 1) * per_node] = sampled
    return features


def _cache_key(config: ExperimentConfig) -> str:
    relevant = config.echo()
    for key in ("learning_rate", "beta1", "beta2", "epsilon", "batch_size",
                "epochs", "output_dir", "adc_bits", "adc_full_scale"):
        relevant.pop(key, None)
    blob = json.dumps(relevant, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def extract_or_load_features(config: ExperimentConfig, cache_dir: str | None = None):
    """Analog feature matrices for train and test, disk-cached."""
    train_x, train_y, test_x, test_y = load_dataset(config)
    path = None
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, f"features_{_cache_key(config)}.npz")
        if os.path.exists(path):
            data = np.load(path)
            return (data["train"], train_y.labels, data["test"], test_y.labels)
    train_feats = extract_analog_features(train_x, config, image_offset=0)
    test_feats = extract_analog_features(test_x, config, image_offset=len(train_x))
    if path is not None:
        np.savez_compressed(path, train=train_feats, test=test_feats)
    return train_feats, train_y.labels, test_feats, test_y.labels


def quantize_features(
    train: np.ndarray, test: np.ndarray, config: ExperimentConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Apply the ADC quantizer; `auto` full scale is resolved per node on
    the training set and frozen for test."""
    per_node = config.features_per_node()
    bank_count = train.shape[1] // per_node
    q_train = np.empty_like(train)
    q_test = np.empty_like(test)
    for j in range(bank_count):
        cols = slice(j * per_node, (j + 1) * per_node)
        if isinstance(config.adc_full_scale, str):
            scale = receiver.resolve_full_scale(train[:, cols])
        else:
            scale = config.adc_full_scale
        q_train[:, cols] = receiver.quantize(train[:, cols], config.adc_bits, scale)
        q_test[:, cols] = receiver.quantize(test[:, cols], config.adc_bits, scale)
    return q_train, q_test


def bypass_features(config: ExperimentConfig):
    """Raw normalized pixels straight to the FCL (no optical stage)."""
    train_x, train_y, test_x, test_y = load_dataset(config)
    train = train_x.images.reshape(len(train_x), -1).astype(np.float32) / 255.0
    test = test_x.images.reshape(len(test_x), -1).astype(np.float32) / 255.0
    return train, train_y.labels, test, test_y.labels


def run_experiment(
    config: ExperimentConfig, cache_dir: str | None = None, run_id: str = "run"
) -> RunReport:
    """Full pipeline: features (cached), training, evaluation, report."""
    config.validate()
    start = time.perf_counter()
    if config.bypass_oss:
        train_f, train_y, test_f, test_y = bypass_features(config)
    else:
        raw_train, train_y, raw_test, test_y = extract_or_load_features(config, cache_dir)
        train_f, test_f = quantize_features(raw_train, raw_test, config)
    params, history = classifier.train(train_f, train_y, config.train_config())
    accuracy = classifier.evaluate(params, test_f, test_y)
    spec = metrics.HardwareSpec(
        patch_edge=config.patch_edge,
        nodes=config.filter_bank().count,
        pixel_rate_hz=config.pixel_rate_hz,
    )
    report = RunReport(
        config=config.echo(),
        compression_ratio=config.image_height * config.image_width / train_f.shape[1],
        test_accuracy=accuracy,
        history=history,
        feature_dim=train_f.shape[1],
        metrics=metrics.derived_figures(spec, metrics.PowerModelParams()),
        wall_clock_s=time.perf_counter() - start,
        seed=config.seed,
    )
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        classifier.save_checkpoint(
            os.path.join(config.output_dir, f"checkpoint_{run_id}.npz"),
            params,
            config.train_config(),
        )
    return report


def report_row(run_id: str, config: ExperimentConfig, report: RunReport | None,
               error: str = "") -> dict:
    row = {c: "" for c in RUNS_CSV_COLUMNS}
    row.update(
        run_id=run_id,
        seed=config.seed,
        nodes=config.node_count if not config.bypass_oss else 0,
        patch_edge=config.patch_edge,
        sr_fraction=config.sr_fraction,
        oversample=config.oversample,
        shot=config.shot_enabled,
        thermal=config.thermal_enabled,
        bypass_oss=config.bypass_oss,
        epochs=config.epochs,
        status="ok" if report is not None else "failed",
        error=error,
    )
    try:
        row["adc_rate_hz"] = config.adc_rate_hz()
    except Exception:
        pass
    if report is not None:
        m = report.metrics
        row.update(
            feature_dim=report.feature_dim,
            compression_ratio=report.compression_ratio,
            test_accuracy=report.test_accuracy,
            final_train_accuracy=report.history[-1] if report.history else "",
            wall_clock_s=round(report.wall_clock_s, 3),
            compute_speed_tops=m.compute_speed_ops / 1e12,
            power_w=m.power_w,
            efficiency_tops_per_w=m.efficiency_tops_per_w,
            density_tops_per_mm2=m.density_tops_per_mm2,
        )
    return row


def write_runs_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RUNS_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def write_history_csv(path, histories: dict) -> None:
    """histories: run_id -> per-epoch train accuracy list."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "epoch", "train_accuracy"])
        for run_id, history in histories.items():
            for epoch, acc in enumerate(history, start=1):
                writer.writerow([run_id, epoch, acc])


def run_sweep(
    grid: SweepGrid, base: ExperimentConfig, cache_dir: str | None = None
) -> list[dict]:
    """One row per grid point, in expansion order; failures don't abort."""
    rows = []
    histories = {}
    for index, point in enumerate(grid.points()):
        run_id = f"sweep{index:03d}"
        config = apply_point(base, point)
        try:
            report = run_experiment(config, cache_dir=cache_dir, run_id=run_id)
            rows.append(report_row(run_id, config, report))
            histories[run_id] = report.history
        except Exception as exc:  # per-row failure recorded, sweep continues
            rows.append(report_row(run_id, config, None, error=str(exc)))
    if base.output_dir:
        os.makedirs(base.output_dir, exist_ok=True)
        write_runs_csv(os.path.join(base.output_dir, "runs.csv"), rows)
        write_history_csv(os.path.join(base.output_dir, "history.csv"), histories)
    return rows
