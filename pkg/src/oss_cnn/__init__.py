"""Simulator of a passive photonic convolutional accelerator based on
optical spectrum slicing.

Pipeline: MNIST-style images are patch-serialized into a pixel stream,
modulated onto a complex optical field envelope, sliced by a bank of
one-pole complex bandpass filter nodes, photodetected (square law plus
shot/thermal noise), low-pass pooled, quantized by an ADC, and the
flattened features train a single softmax layer.
"""

__version__ = "0.1.0"
