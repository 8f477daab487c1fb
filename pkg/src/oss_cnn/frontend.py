"""Electro-optic frontend: pixel stream to complex baseband field envelope.

Models a DAC driving a Mach-Zehnder amplitude modulator with ideal NRZ
rectangular pulses and zero phase.  Field amplitude is proportional to
the pixel value by default, so detected power goes as the pixel value
squared; a `power` map (power proportional to pixel value) is available
as a config switch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrontendConfig:
    pixel_rate_hz: float
    oversample: int = 2
    peak_power_w: float = 1.0
    amplitude_map: str = "field"  # field: |E| ~ v; power: |E|^2 ~ v

    def __post_init__(self):
        if self.pixel_rate_hz <= 0:
            raise ValueError("pixel_rate_hz must be positive")
        if self.oversample < 2:
            raise ValueError("oversample must be >= 2")
        if self.peak_power_w <= 0:
            raise ValueError("peak_power_w must be positive")
        if self.amplitude_map not in ("field", "power"):
            raise ValueError(f"unknown amplitude_map {self.amplitude_map!r}")

    @property
    def sample_rate_hz(self) -> float:
        return self.pixel_rate_hz * self.oversample


@dataclass(frozen=True)
class OpticalWaveform:
    """Uniformly sampled complex field envelope in sqrt-watt units."""

    samples: np.ndarray
    sample_rate_hz: float

    def __len__(self) -> int:
        return self.samples.shape[-1]


def modulate_values(values: np.ndarray, config: FrontendConfig) -> OpticalWaveform:
    """Modulate an array of pixel values in [0, 1]; last axis is time.

    Each value is held for `oversample` consecutive samples (NRZ).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0 or values.max() > 1):
        raise ValueError("pixel values must lie in [0, 1]")
    if config.amplitude_map == "field":
        amps = np.sqrt(config.peak_power_w) * values
    else:
        amps = np.sqrt(config.peak_power_w * values)
    field = np.repeat(amps, config.oversample, axis=-1).astype(np.complex128)
    return OpticalWaveform(samples=field, sample_rate_hz=config.sample_rate_hz)


def modulate(sequence, config: FrontendConfig) -> OpticalWaveform:
    """Modulate a PixelSequence onto the optical carrier."""
    return modulate_values(sequence.values, config)
