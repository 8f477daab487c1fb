"""Spectrum-slicing filter bank: one-pole complex bandpass nodes.

Each node is a first-order bandpass filter with impulse response
2*pi*fc * exp(-2*pi*fc*t) * exp(+j*2*pi*fm*t) for t > 0, realized
digitally as a one-pole recursion with pole exp((-2*pi*fc + j*2*pi*fm)/fs),
scaled so the on-center gain is exactly 1.  Higher orders cascade
identical stages.  The default frequency plan tiles [0, PR/2] with N
contiguous slices: cutoff PR/(4N), centers at odd multiples of the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .frontend import OpticalWaveform


@dataclass(frozen=True)
class FilterNodeConfig:
    center_hz: float  # detuning of the passband center from the carrier
    cutoff_hz: float  # one-sided 3 dB cutoff
    order: int = 1

    def __post_init__(self):
        if self.cutoff_hz <= 0:
            raise ValueError("cutoff_hz must be positive")
        if self.order < 1:
            raise ValueError("order must be >= 1")


@dataclass(frozen=True)
class FilterBankConfig:
    nodes: tuple

    @property
    def count(self) -> int:
        return len(self.nodes)


def plan_filters(node_count: int, pixel_rate_hz: float) -> FilterBankConfig:
    """Contiguous N-slice plan over [0, PR/2].

    Cutoff is PR/(4N) for every node; centers sit at (2k-1) times the
    cutoff so adjacent passbands share only their edge frequencies.
    """
    if node_count < 1:
        raise ValueError(f"node count must be >= 1, got {node_count}")
    fc = pixel_rate_hz / (4 * node_count)
    nodes = tuple(
        FilterNodeConfig(center_hz=(2 * k - 1) * fc, cutoff_hz=fc, order=1)
        for k in range(1, node_count + 1)
    )
    return FilterBankConfig(nodes=nodes)


def impulse_response(node: FilterNodeConfig, t) -> np.ndarray:
    """Continuous-time first-order kernel; zero for t <= 0 (causal)."""
    t = np.asarray(t, dtype=np.float64)
    wc = 2 * np.pi * node.cutoff_hz
    wm = 2 * np.pi * node.center_hz
    h = wc * np.exp((-wc + 1j * wm) * t)
    return np.where(t > 0, h, 0.0 + 0.0j)


def node_pole(node: FilterNodeConfig, sample_rate_hz: float) -> complex:
    """Discrete pole of one stage."""
    return np.exp(
        (-2 * np.pi * node.cutoff_hz + 2j * np.pi * node.center_hz) / sample_rate_hz
    )


def apply_node(waveform: OpticalWaveform, node: FilterNodeConfig) -> OpticalWaveform:
    """Filter a waveform through one slicing node (zero initial state).

    A cascade of `order` identical one-pole complex recursions; each
    stage is scaled by (1 - |p|) so the on-center gain is 1.
    """
    fs = waveform.sample_rate_hz
    if node.center_hz + node.cutoff_hz > fs / 2:
        raise ValueError(
            f"node passband edge {node.center_hz + node.cutoff_hz:.4g} Hz "
            f"exceeds Nyquist {fs / 2:.4g} Hz"
        )
    p = node_pole(node, fs)
    b = [1 - abs(p)]
    a = [1.0, -p]
    y = np.asarray(waveform.samples, dtype=np.complex128)
    for _ in range(node.order):
        y = signal.lfilter(b, a, y, axis=-1)
    return OpticalWaveform(samples=y, sample_rate_hz=fs)


def frequency_response(
    node: FilterNodeConfig, f, sample_rate_hz: float
) -> np.ndarray:
    """Complex gain of the discretized node at frequency f."""
    f = np.asarray(f, dtype=np.float64)
    p = node_pole(node, sample_rate_hz)
    z = np.exp(-2j * np.pi * f / sample_rate_hz)
    return ((1 - abs(p)) / (1 - p * z)) ** node.order
