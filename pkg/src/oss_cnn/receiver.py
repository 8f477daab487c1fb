"""Receiver chain: square-law photodetection with shot/thermal noise,
4th-order Butterworth pooling, and uniform ADC sampling/quantization.

The photodiode bandwidth PR/n^2 averages roughly one patch worth of
pixels per output sample (the analog counterpart of average pooling).
Noise is white at the simulation rate (one-sided bandwidth fs/2) and is
then shaped by the Butterworth filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .frontend import OpticalWaveform

ELECTRON_CHARGE = 1.602176634e-19  # C
BOLTZMANN = 1.380649e-23  # J/K


@dataclass(frozen=True)
class NoiseParams:
    responsivity_a_per_w: float = 1.0
    temperature_k: float = 290.0
    load_ohms: float = 50.0
    shot_enabled: bool = True
    thermal_enabled: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.responsivity_a_per_w <= 0:
            raise ValueError("responsivity must be positive")
        if self.temperature_k < 0:
            raise ValueError("temperature must be >= 0")
        if self.load_ohms <= 0:
            raise ValueError("load resistance must be positive")


@dataclass(frozen=True)
class ElectricalWaveform:
    """Real photocurrent samples in amperes."""

    samples: np.ndarray
    sample_rate_hz: float

    def __len__(self) -> int:
        return self.samples.shape[-1]


@dataclass(frozen=True)
class AdcConfig:
    sample_rate_hz: float
    bits: int = 8
    full_scale: float | str = "auto"  # amperes, or "auto" (resolved by the harness)

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")


def derive_rng(seed: int, image_index: int = 0, node_index: int = 0) -> np.random.Generator:
    """Independent per-(image, node) stream from one base seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, image_index, node_index]))


def photodetect(
    waveform: OpticalWaveform,
    noise: NoiseParams,
    rng: np.random.Generator | None = None,
) -> ElectricalWaveform:
    """Square-law detection: i = R*|E|^2 plus optional shot/thermal noise.

    Shot noise variance per sample is 2*q*i*B and thermal noise variance
    is 4*kB*T*B/RL, with B = fs/2 (white at the simulation rate).
    """
    fs = waveform.sample_rate_hz
    power = np.abs(np.asarray(waveform.samples)) ** 2
    current = noise.responsivity_a_per_w * power
    if noise.shot_enabled or noise.thermal_enabled:
        if rng is None:
            rng = derive_rng(noise.seed)
        std = noise_std(current, noise, fs)
        current = current + std * rng.standard_normal(current.shape)
    return ElectricalWaveform(samples=current, sample_rate_hz=fs)


def noise_std(current: np.ndarray, noise: NoiseParams, sample_rate_hz: float) -> np.ndarray:
    """Per-sample noise standard deviation for a noiseless photocurrent."""
    bw = sample_rate_hz / 2
    var = np.zeros_like(current)
    if noise.shot_enabled:
        var = var + 2 * ELECTRON_CHARGE * np.clip(current, 0.0, None) * bw
    if noise.thermal_enabled:
        var = var + 4 * BOLTZMANN * noise.temperature_k * bw / noise.load_ohms
    return np.sqrt(var)


def butterworth_lpf(
    waveform: ElectricalWaveform, n: int, pixel_rate_hz: float
) -> ElectricalWaveform:
    """4th-order low-pass pooling filter with 3 dB cutoff PR/n^2."""
    cutoff = pooling_bandwidth(n, pixel_rate_hz)
    fs = waveform.sample_rate_hz
    if cutoff >= fs / 2:
        raise ValueError(
            f"pooling cutoff {cutoff:.4g} Hz must be below Nyquist {fs / 2:.4g} Hz"
        )
    b, a = signal.butter(4, cutoff, fs=fs)
    out = signal.lfilter(b, a, waveform.samples, axis=-1)
    return ElectricalWaveform(samples=out, sample_rate_hz=fs)


def pooling_bandwidth(n: int, pixel_rate_hz: float) -> float:
    """Photodiode bandwidth PR/n^2."""
    if n < 1:
        raise ValueError("patch edge must be >= 1")
    return pixel_rate_hz / (n * n)


def nyquist_sr(n: int, pixel_rate_hz: float) -> float:
    """ADC Nyquist rate 2*PR/n^2 (two samples per pooling interval)."""
    return 2 * pooling_bandwidth(n, pixel_rate_hz)


def sample_photocurrent(waveform: ElectricalWaveform, adc: AdcConfig) -> np.ndarray:
    """Uniformly decimate to the ADC rate; analog values, not yet quantized.

    Every floor(fs/SR)-th sample is kept, starting at the center of the
    first retained interval.  Output count is floor(len * SR / fs).
    """
    fs = waveform.sample_rate_hz
    if adc.sample_rate_hz > fs:
        raise ValueError(
            f"ADC rate {adc.sample_rate_hz:.4g} Hz exceeds electrical rate {fs:.4g} Hz"
        )
    # small epsilon guards against float rounding just below an integer ratio
    step = int(np.floor(fs / adc.sample_rate_hz + 1e-9))
    num = waveform.samples.shape[-1]
    count = int(np.floor(num * adc.sample_rate_hz / fs + 1e-9))
    while count > 0 and step // 2 + step * (count - 1) >= num:
        count -= 1
    idx = step // 2 + step * np.arange(count)
    return np.asarray(waveform.samples)[..., idx]


def quantize(values: np.ndarray, bits: int, full_scale: float) -> np.ndarray:
    """Clip to [0, full_scale], map to 2^bits uniform levels, rescale to [0, 1]."""
    if not np.isscalar(full_scale) or full_scale <= 0:
        raise ValueError("full_scale must be a positive number")
    levels = 2**bits - 1
    clipped = np.clip(np.asarray(values, dtype=np.float64), 0.0, full_scale)
    # half-up rounding so the 1-bit quantizer switches exactly at half scale
    codes = np.floor(clipped / full_scale * levels + 0.5)
    return codes / levels


def resolve_full_scale(samples: np.ndarray, percentile: float = 99.9) -> float:
    """Quantizer range for `auto` mode: 99.9th-percentile photocurrent."""
    fs = float(np.percentile(samples, percentile))
    if fs <= 0:
        # degenerate all-dark input; any positive scale quantizes it to zero
        return 1.0
    return fs


def sample_and_quantize(waveform: ElectricalWaveform, adc: AdcConfig) -> np.ndarray:
    """Decimate then quantize; `full_scale` must already be numeric."""
    if isinstance(adc.full_scale, str):
        raise ValueError(
            "full_scale 'auto' must be resolved against the training set "
            "before quantizing (see resolve_full_scale)"
        )
    analog = sample_photocurrent(waveform, adc)
    return quantize(analog, adc.bits, adc.full_scale)
