"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria 1-3 need the real MNIST IDX files (not redistributable here);
point OSS_CNN_MNIST_DIR at a directory holding the four files, or place
them under data/mnist/.  Without them those tests are skipped.  Set
OSS_CNN_FULL_ACCEPTANCE=1 to run criteria 2-3 on the full 60k training
set instead of the 10k CI subset.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import os

import numpy as np
import pytest

from oss_cnn import classifier, filterbank, metrics, receiver
from oss_cnn.classifier import FclParams, TrainConfig, count_flops, loss_and_grads
from oss_cnn.config import ExperimentConfig
from oss_cnn.filterbank import FilterNodeConfig, apply_node, frequency_response, plan_filters
from oss_cnn.frontend import OpticalWaveform
from oss_cnn.harness import run_experiment
from oss_cnn.receiver import (
    ELECTRON_CHARGE,
    AdcConfig,
    ElectricalWaveform,
    NoiseParams,
    butterworth_lpf,
    photodetect,
    pooling_bandwidth,
    quantize,
)

FULL = os.environ.get("OSS_CNN_FULL_ACCEPTANCE") == "1"
SUBSET = None if FULL else 10_000


def announce(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nacceptance criterion {criterion}: {status} {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def mnist_config(paths, **kw):
    defaults = dict(
        train_images=paths["train_images"],
        train_labels=paths["train_labels"],
        test_images=paths["test_images"],
        test_labels=paths["test_labels"],
        output_dir="",
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="session")
def mnist_cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("mnist_features"))


class TestCriterion1Baseline:
    def test_bypass_fcl_accuracy(self, mnist_paths, mnist_cache):
        config = mnist_config(mnist_paths, bypass_oss=True)
        report = run_experiment(config, cache_dir=mnist_cache)
        ok = abs(report.test_accuracy - 0.921) <= 0.010
        announce(1, ok, f"bypass FCL accuracy {report.test_accuracy:.4f} "
                        "(target 0.921 +/- 0.010)")


class TestCriterion2BestConfig:
    def test_ten_node_ratio_08(self, mnist_paths, mnist_cache):
        config = mnist_config(
            mnist_paths, node_count=10, patch_edge=4, sr_fraction=0.5,
            train_subset=SUBSET,
        )
        assert config.feature_dim() == 980
        report = run_experiment(config, cache_dir=mnist_cache)
        threshold = 0.965 if FULL else 0.94
        ok = report.test_accuracy >= threshold
        label = "full" if FULL else "10k-subset CI variant"
        announce(2, ok, f"N=10 n=4 dim=980 accuracy {report.test_accuracy:.4f} "
                        f">= {threshold} ({label})")


class TestCriterion3Ordering:
    def test_accuracy_ordering_at_matched_ratio(self, mnist_paths, mnist_cache):
        accuracies = {}
        # matched feature dim 980 (ratio 0.8): SR scaled per node count
        for nodes, frac in ((10, 0.5), (5, 1.0), (2, 2.5)):
            config = mnist_config(
                mnist_paths, node_count=nodes, patch_edge=4, sr_fraction=frac,
                train_subset=SUBSET,
            )
            assert config.feature_dim() == 980
            accuracies[nodes] = run_experiment(config, cache_dir=mnist_cache).test_accuracy
        config3 = mnist_config(
            mnist_paths, node_count=3, patch_edge=4, target_features=784,
            train_subset=SUBSET,
        )
        accuracies[3] = run_experiment(config3, cache_dir=mnist_cache).test_accuracy
        bypass = run_experiment(
            mnist_config(mnist_paths, bypass_oss=True, train_subset=SUBSET),
            cache_dir=mnist_cache,
        ).test_accuracy
        ordering = accuracies[10] > accuracies[5] > accuracies[2]
        beats = all(accuracies[n] > bypass for n in (3, 5, 10))
        announce(3, ordering and beats,
                 f"accuracies {accuracies}, bypass {bypass:.4f}")


class TestCriterion4Metrics:
    def test_hardware_figures(self):
        spec = metrics.HardwareSpec(wavelengths=1, patch_edge=4, nodes=10,
                                    pixel_rate_hz=128e9,
                                    ring_radius_m=108e-6, node_spacing_m=10e-6)
        report = metrics.derived_figures(spec, metrics.PowerModelParams())
        checks = [
            ("speed", abs(report.compute_speed_macs / 20.48e12 - 1) <= 0.002
             and abs(report.compute_speed_ops / 40.96e12 - 1) <= 0.002),
            ("footprint", abs(report.footprint_m2 * 1e6 / 2.32 - 1) <= 0.015),
            ("power", abs(report.power_w / 1.42 - 1) <= 0.03),
            ("efficiency", abs(report.efficiency_tops_per_w / 28.38 - 1) <= 0.03),
            ("density", abs(report.density_tops_per_mm2 / 17.65 - 1) <= 0.02),
        ]
        failed = [name for name, ok in checks if not ok]
        announce(4, not failed,
                 f"speed {report.compute_speed_ops/1e12:.2f} TOPS, "
                 f"footprint {report.footprint_m2*1e6:.4f} mm2, "
                 f"power {report.power_w:.4f} W, "
                 f"efficiency {report.efficiency_tops_per_w:.2f} TOPS/W, "
                 f"density {report.density_tops_per_mm2:.2f} TOPS/mm2"
                 + (f"; failed: {failed}" if failed else ""))


class TestCriterion5Filters:
    def test_filter_correctness(self):
        fs = 256e9
        rng = np.random.default_rng(42)
        # IIR vs O(L^2) direct convolution on random 64-sample inputs
        max_rel = 0.0
        for trial in range(5):
            x = rng.normal(size=64) + 1j * rng.normal(size=64)
            node = FilterNodeConfig(center_hz=float(rng.uniform(5e9, 50e9)),
                                    cutoff_hz=float(rng.uniform(2e9, 8e9)))
            out = apply_node(OpticalWaveform(x, fs), node)
            p = filterbank.node_pole(node, fs)
            kernel = (1 - abs(p)) * p ** np.arange(64)
            direct = np.array(
                [sum(kernel[j] * x[k - j] for j in range(k + 1)) for k in range(64)]
            )
            max_rel = max(max_rel, np.linalg.norm(out.samples - direct)
                          / np.linalg.norm(direct))
        conv_ok = max_rel <= 1e-9
        # 3 dB points within 1% of 1/sqrt(2) for fc/fs <= 0.05
        edge_ok = True
        for ratio in (0.01, 0.025, 0.05):
            node = FilterNodeConfig(center_hz=0.25, cutoff_hz=ratio)
            for f in (0.25 - ratio, 0.25 + ratio):
                gain = abs(frequency_response(node, f, 1.0))
                edge_ok &= abs(gain * np.sqrt(2) - 1) <= 0.01
        # exact reference plan
        bank = plan_filters(5, 128e9)
        plan_ok = (
            all(n.cutoff_hz == pytest.approx(6.4e9) for n in bank.nodes)
            and [n.center_hz for n in bank.nodes]
            == pytest.approx([6.4e9, 19.2e9, 32e9, 44.8e9, 57.6e9])
        )
        announce(5, conv_ok and edge_ok and plan_ok,
                 f"conv rel err {max_rel:.2e}, 3dB within 1%: {edge_ok}, "
                 f"plan exact: {plan_ok}")


class TestCriterion6Receiver:
    def test_receiver_correctness(self):
        fs = 256e9
        cutoff_ok = pooling_bandwidth(4, 128e9) == 8e9
        # measured tone attenuation at the cutoff (sine-fit oracle)
        t = np.arange(40000) / fs
        x = np.sin(2 * np.pi * 8e9 * t)
        out = butterworth_lpf(ElectricalWaveform(x, fs), 4, 128e9)
        tail = slice(20000, None)
        basis = np.column_stack([np.sin(2 * np.pi * 8e9 * t[tail]),
                                 np.cos(2 * np.pi * 8e9 * t[tail])])
        coef, *_ = np.linalg.lstsq(basis, out.samples[tail], rcond=None)
        amplitude = float(np.hypot(*coef))
        tone_ok = abs(amplitude * np.sqrt(2) - 1) <= 0.02
        # shot-noise Monte-Carlo variance over 1e6 samples
        field = np.full(10**6, np.sqrt(1e-3))
        params = NoiseParams(shot_enabled=True, thermal_enabled=False, seed=7)
        detected = photodetect(OpticalWaveform(field, fs), params)
        expect = 2 * ELECTRON_CHARGE * 1e-3 * fs / 2
        shot_ok = abs(np.var(detected.samples) / expect - 1) <= 0.05
        # quantizer idempotence + monotonicity spot suites
        rng = np.random.default_rng(0)
        quant_ok = True
        for bits in (1, 4, 8):
            values = rng.uniform(0, 2.0, 500)
            once = quantize(values, bits, 1.5)
            quant_ok &= np.allclose(quantize(once * 1.5, bits, 1.5), once)
            quant_ok &= bool(
                (quantize(values + 0.1, bits, 1.5) >= quantize(values, bits, 1.5)).all()
            )
        announce(6, cutoff_ok and tone_ok and shot_ok and quant_ok,
                 f"cutoff 8 GHz: {cutoff_ok}, tone gain {amplitude:.4f} "
                 f"(target 0.7071), shot var rel err "
                 f"{abs(np.var(detected.samples)/expect-1):.3f}, "
                 f"quantizer suites: {quant_ok}")


class TestCriterion7Classifier:
    def test_classifier_correctness(self):
        rng = np.random.default_rng(123)
        grad_ok = True
        worst = 0.0
        for _ in range(100):
            dim = int(rng.integers(2, 9))
            params = FclParams(weights=rng.normal(size=(dim, 10)),
                               biases=rng.normal(size=10))
            x = rng.normal(size=(1, dim))
            label = rng.integers(0, 10, size=1)
            _, (gw, gb) = loss_and_grads(params, x, label)
            h = 1e-6
            idx = tuple(int(i) for i in (rng.integers(dim), rng.integers(10)))
            for arr, grad, key in ((params.weights, gw, idx), (params.biases, gb, idx[1])):
                orig = arr[key]
                arr[key] = orig + h
                plus = loss_and_grads(params, x, label)[0]
                arr[key] = orig - h
                minus = loss_and_grads(params, x, label)[0]
                arr[key] = orig
                fd = (plus - minus) / (2 * h)
                # absolute floor keeps FD roundoff (~1e-10) out of the
                # relative comparison on near-zero components
                if abs(fd) > 1e-4:
                    rel = abs(grad[key] - fd) / abs(fd)
                    worst = max(worst, rel)
                    grad_ok &= rel <= 1e-5
                else:
                    grad_ok &= abs(grad[key] - fd) <= 1e-9
        # softmax normalization
        logits = rng.normal(size=(200, 10)) * 40
        probs = classifier.softmax(logits)
        softmax_ok = bool(np.abs(probs.sum(axis=1) - 1).max() <= 1e-12)
        # training determinism, bit-identical parameters
        feats = rng.normal(size=(60, 5))
        labels = rng.integers(0, 10, size=60)
        cfg = TrainConfig(epochs=4, batch_size=16, seed=9)
        p1, _ = classifier.train(feats, labels, cfg)
        p2, _ = classifier.train(feats, labels, cfg)
        det_ok = np.array_equal(p1.weights, p2.weights) and np.array_equal(
            p1.biases, p2.biases
        )
        announce(7, grad_ok and softmax_ok and det_ok,
                 f"worst gradient rel err {worst:.2e}, softmax <=1e-12: "
                 f"{softmax_ok}, determinism: {det_ok}")


class TestCriterion8FlopsConvention:
    def test_counter_on_synthetic_architectures(self):
        # reported inference FLOPS figures are echoed constants; the counter
        # must instead match exact hand counts on synthetic architectures
        checks = [
            (count_flops([{"kind": "fc", "in": 980, "out": 10}]), 2 * 980 * 10),
            (count_flops([
                {"kind": "fc", "in": 100, "out": 30},
                {"kind": "act", "elements": 30},
                {"kind": "fc", "in": 30, "out": 10},
            ]), 6630),
            (count_flops([
                {"kind": "conv", "out_h": 6, "out_w": 6, "out_c": 4,
                 "k_h": 3, "k_w": 3, "in_c": 1},
                {"kind": "pool", "out_h": 3, "out_w": 3, "c": 4, "k_h": 2, "k_w": 2},
                {"kind": "fc", "in": 36, "out": 10},
            ]), 2592 + 144 + 720),
        ]
        counts_ok = all(got == want for got, want in checks)
        constants_ok = (classifier.REPORTED_SLICED_NN_FLOPS == 14_600
                        and classifier.REPORTED_LENET5_FLOPS == 736_000
                        and metrics.REFERENCE_SYSTEMS[0]["tops_per_w"] == 0.19)
        announce(8, counts_ok and constants_ok,
                 f"hand counts {[g for g, _ in checks]}, echoed constants ok: "
                 f"{constants_ok}")
