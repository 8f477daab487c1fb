"""Experiment configuration: flat dotted-key text files plus the typed
config objects built from them.

Grammar (one assignment per line):

    # comment
    section.key = value
    sweep.nodes = 2, 3, 5, 10

Values are parsed as int, float, true/false, or a bare string; a value
containing commas becomes a list.  Explicit filter plans are written as
colon-separated center:cutoff:order triples in a comma list, e.g.

    filterbank.plan = 6.4e9:6.4e9:1, 19.2e9:6.4e9:1

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict, replace

from .classifier import TrainConfig
from .filterbank import FilterBankConfig, FilterNodeConfig, plan_filters
from .frontend import FrontendConfig
from .receiver import AdcConfig, NoiseParams, nyquist_sr

MNIST_PIXELS = 28 * 28


class ConfigError(ValueError):
    """Raised for unparsable config text or invalid field combinations."""


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse dotted-key config text into a flat {key: value} mapping."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if "," in value:
            out[key] = [_parse_scalar(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_scalar(value)
    return out


def parse_filter_plan(value) -> tuple:
    """center:cutoff:order triples -> FilterNodeConfig tuple."""
    items = value if isinstance(value, list) else [value]
    nodes = []
    for item in items:
        parts = str(item).split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"filter plan entry {item!r} is not center:cutoff[:order]")
        center, cutoff = float(parts[0]), float(parts[1])
        order = int(parts[2]) if len(parts) == 3 else 1
        nodes.append(FilterNodeConfig(center_hz=center, cutoff_hz=cutoff, order=order))
    return tuple(nodes)


@dataclass(frozen=True)
class ExperimentConfig:
    # dataset
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    patch_edge: int = 4
    train_subset: int | None = None
    image_height: int = 28
    image_width: int = 28
    # filter bank
    node_count: int = 10
    filter_order: int = 1
    filter_plan: tuple | None = None  # explicit plan overrides plan_filters
    # frontend
    pixel_rate_hz: float = 128e9
    oversample: int = 2
    peak_power_w: float = 1e-3
    amplitude_map: str = "field"
    # receiver
    responsivity_a_per_w: float = 1.0
    temperature_k: float = 290.0
    load_ohms: float = 50.0
    shot_enabled: bool = True
    thermal_enabled: bool = True
    adc_bits: int = 8
    adc_full_scale: float | str = "auto"
    sr_fraction: float = 0.5  # ADC rate as a fraction of the 2*PR/n^2 Nyquist rate
    target_features: int | None = None  # total feature dim; overrides sr_fraction
    # training
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 128
    epochs: int = 30
    # run
    seed: int = 0
    output_dir: str = "out"
    bypass_oss: bool = False

    # -- derived pieces -------------------------------------------------

    def frontend(self) -> FrontendConfig:
        return FrontendConfig(
            pixel_rate_hz=self.pixel_rate_hz,
            oversample=self.oversample,
            peak_power_w=self.peak_power_w,
            amplitude_map=self.amplitude_map,
        )

    def noise(self) -> NoiseParams:
        return NoiseParams(
            responsivity_a_per_w=self.responsivity_a_per_w,
            temperature_k=self.temperature_k,
            load_ohms=self.load_ohms,
            shot_enabled=self.shot_enabled,
            thermal_enabled=self.thermal_enabled,
            seed=self.seed,
        )

    def filter_bank(self) -> FilterBankConfig:
        if self.filter_plan is not None:
            return FilterBankConfig(nodes=self.filter_plan)
        bank = plan_filters(self.node_count, self.pixel_rate_hz)
        if self.filter_order != 1:
            bank = FilterBankConfig(
                nodes=tuple(replace(n, order=self.filter_order) for n in bank.nodes)
            )
        return bank

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
        )

    @property
    def padded_area(self) -> int:
        n = self.patch_edge
        ph = self.image_height + ((-self.image_height) % n)
        pw = self.image_width + ((-self.image_width) % n)
        return ph * pw

    @property
    def sequence_length(self) -> int:
        return 2 * self.padded_area

    def adc_rate_hz(self) -> float:
        """ADC rate: target_features solves for SR, else sr_fraction of Nyquist."""
        if self.target_features is not None:
            per_node = max(1, round(self.target_features / self.filter_bank().count))
            return per_node * self.pixel_rate_hz / self.sequence_length
        return self.sr_fraction * nyquist_sr(self.patch_edge, self.pixel_rate_hz)

    def features_per_node(self) -> int:
        samples = self.sequence_length * self.oversample
        fs = self.pixel_rate_hz * self.oversample
        return int(samples * self.adc_rate_hz() / fs + 1e-9)

    def feature_dim(self) -> int:
        if self.bypass_oss:
            return self.image_height * self.image_width
        return self.filter_bank().count * self.features_per_node()

    def adc(self) -> AdcConfig:
        return AdcConfig(
            sample_rate_hz=self.adc_rate_hz(),
            bits=self.adc_bits,
            full_scale=self.adc_full_scale,
        )

    def validate(self, check_files: bool = True) -> None:
        """Cross-module constraints, checked before any compute."""
        if self.patch_edge < 1:
            raise ConfigError("dataset.patch_edge must be >= 1")
        fs = self.pixel_rate_hz * self.oversample
        bank = self.filter_bank()
        for node in bank.nodes:
            if node.center_hz + node.cutoff_hz > fs / 2:
                raise ConfigError(
                    f"filter node at {node.center_hz:.4g} Hz exceeds the Nyquist "
                    f"band {fs / 2:.4g} Hz; raise frontend.oversample"
                )
        cutoff = self.pixel_rate_hz / self.patch_edge**2
        if cutoff >= fs / 2:
            raise ConfigError(
                f"receiver.pooling cutoff {cutoff:.4g} Hz must be below Nyquist "
                f"{fs / 2:.4g} Hz; raise frontend.oversample or dataset.patch_edge"
            )
        sr = self.adc_rate_hz()
        if sr > fs:
            raise ConfigError(f"adc rate {sr:.4g} Hz exceeds simulation rate {fs:.4g} Hz")
        if self.features_per_node() < 1:
            raise ConfigError("adc rate too low: zero features per node")
        if check_files:
            for key in ("train_images", "train_labels", "test_images", "test_labels"):
                path = getattr(self, key)
                if not path:
                    raise ConfigError(f"dataset.{key} is not set")
                if not os.path.exists(path):
                    raise ConfigError(f"dataset.{key}: no such file {path!r}")

    def echo(self) -> dict:
        d = asdict(self)
        if d["filter_plan"] is not None:
            d["filter_plan"] = [
                f"{n.center_hz}:{n.cutoff_hz}:{n.order}" for n in self.filter_plan
            ]
        return d


# mapping from config-file keys to ExperimentConfig fields
_KEY_MAP = {
    "dataset.train_images": "train_images",
    "dataset.train_labels": "train_labels",
    "dataset.test_images": "test_images",
    "dataset.test_labels": "test_labels",
    "dataset.patch_edge": "patch_edge",
    "dataset.train_subset": "train_subset",
    "filterbank.nodes": "node_count",
    "filterbank.order": "filter_order",
    "filterbank.plan": "filter_plan",
    "frontend.pixel_rate_hz": "pixel_rate_hz",
    "frontend.oversample": "oversample",
    "frontend.peak_power_w": "peak_power_w",
    "frontend.amplitude_map": "amplitude_map",
    "noise.responsivity_a_per_w": "responsivity_a_per_w",
    "noise.temperature_k": "temperature_k",
    "noise.load_ohms": "load_ohms",
    "noise.shot": "shot_enabled",
    "noise.thermal": "thermal_enabled",
    "adc.bits": "adc_bits",
    "adc.full_scale": "adc_full_scale",
    "adc.sr_fraction": "sr_fraction",
    "adc.target_features": "target_features",
    "train.learning_rate": "learning_rate",
    "train.beta1": "beta1",
    "train.beta2": "beta2",
    "train.epsilon": "epsilon",
    "train.batch_size": "batch_size",
    "train.epochs": "epochs",
    "run.seed": "seed",
    "run.output_dir": "output_dir",
    "run.bypass_oss": "bypass_oss",
}

# sweep.* keys map to the ExperimentConfig field they override per grid point
SWEEP_KEY_MAP = {
    "sweep.nodes": "node_count",
    "sweep.patch_edge": "patch_edge",
    "sweep.sr_fraction": "sr_fraction",
    "sweep.noise": None,  # toggles both shot and thermal
    "sweep.oversample": "oversample",
}


@dataclass(frozen=True)
class SweepGrid:
    """Value lists for swept fields; cartesian or aligned (zip) expansion."""

    values: dict  # field name -> list of values ("noise" toggles both flags)
    cartesian: bool = True

    def points(self) -> list[dict]:
        if not self.values:
            raise ConfigError("sweep grid is empty")
        names = list(self.values)
        lists = [self.values[n] for n in names]
        if any(len(v) == 0 for v in lists):
            raise ConfigError("sweep value lists must be nonempty")
        if self.cartesian:
            points = [{}]
            for name, vals in zip(names, lists):
                points = [dict(p, **{name: v}) for p in points for v in vals]
            return points
        length = len(lists[0])
        if any(len(v) != length for v in lists):
            raise ConfigError("aligned sweep lists must have equal lengths")
        return [dict(zip(names, row)) for row in zip(*lists)]


def config_from_mapping(mapping: dict) -> tuple[ExperimentConfig, SweepGrid | None]:
    """Build (ExperimentConfig, optional SweepGrid) from parsed key-values."""
    fields: dict = {}
    sweep_values: dict = {}
    cartesian = True
    for key, value in mapping.items():
        if key == "sweep.cartesian":
            cartesian = bool(value)
        elif key in SWEEP_KEY_MAP:
            name = SWEEP_KEY_MAP[key] or "noise"
            sweep_values[name] = value if isinstance(value, list) else [value]
        elif key == "filterbank.plan":
            fields["filter_plan"] = parse_filter_plan(value)
        elif key in _KEY_MAP:
            fields[_KEY_MAP[key]] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    config = ExperimentConfig(**fields)
    grid = SweepGrid(values=sweep_values, cartesian=cartesian) if sweep_values else None
    return config, grid


def load_config(path) -> tuple[ExperimentConfig, SweepGrid | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def apply_point(config: ExperimentConfig, point: dict) -> ExperimentConfig:
    """Override one sweep point's fields on a base config."""
    updates = dict(point)
    if "noise" in updates:
        flag = bool(updates.pop("noise"))
        updates["shot_enabled"] = flag
        updates["thermal_enabled"] = flag
    return replace(config, **updates)
