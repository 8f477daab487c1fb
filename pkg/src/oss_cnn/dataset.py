"""MNIST IDX parsing and dual-orientation patch serialization.

Images are cut into non-overlapping n x n patches (zero-padded on the
bottom/right when n does not divide the image edge).  Each patch is
emitted twice, column-wise (orientation A) immediately followed by
row-wise (orientation B), so the serialized stream has twice the padded
pixel count.  Pixel bytes are normalized to [0, 1].
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Raised for malformed IDX containers (bad magic, truncation, bad values)."""


@dataclass(frozen=True)
class ImageSet:
    """Stack of same-sized grayscale images, shape (count, height, width), uint8."""

    images: np.ndarray
    height: int
    width: int

    def __len__(self) -> int:
        return self.images.shape[0]


@dataclass(frozen=True)
class LabelSet:
    """Class indices in [0, 9], shape (count,), uint8."""

    labels: np.ndarray

    def __len__(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class PatchGrid:
    """Row-major grid of n x n blocks cut from one zero-padded image.

    patches has shape (rows, cols, n, n).
    """

    patches: np.ndarray
    n: int
    pad_rows: int
    pad_cols: int


@dataclass(frozen=True)
class PixelSequence:
    """Serialized, normalized pixel amplitudes in [0, 1] for one image."""

    values: np.ndarray
    n: int

    def __len__(self) -> int:
        return self.values.shape[0]


def _maybe_decompress(raw: bytes) -> bytes:
    # gzip files start with 0x1F 0x8B
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def parse_idx_images(raw_bytes: bytes) -> ImageSet:
    """Parse an IDX image container (magic 0x00000803) into an ImageSet."""
    raw = _maybe_decompress(raw_bytes)
    if len(raw) < 4:
        raise IdxFormatError("image file truncated: no magic word")
    magic = struct.unpack(">I", raw[:4])[0]
    if magic != IMAGES_MAGIC:
        raise IdxFormatError(
            f"bad image magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}"
        )
    if len(raw) < 16:
        raise IdxFormatError("image file truncated: header needs 16 bytes")
    items, rows, cols = struct.unpack(">III", raw[4:16])
    expected = items * rows * cols
    payload = raw[16:]
    if len(payload) != expected:
        raise IdxFormatError(
            f"image payload has {len(payload)} bytes, expected {expected}"
        )
    images = np.frombuffer(payload, dtype=np.uint8).reshape(items, rows, cols)
    return ImageSet(images=images, height=rows, width=cols)


def parse_idx_labels(raw_bytes: bytes) -> LabelSet:
    """Parse an IDX label container (magic 0x00000801) into a LabelSet."""
    raw = _maybe_decompress(raw_bytes)
    if len(raw) < 4:
        raise IdxFormatError("label file truncated: no magic word")
    magic = struct.unpack(">I", raw[:4])[0]
    if magic != LABELS_MAGIC:
        raise IdxFormatError(
            f"bad label magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}"
        )
    if len(raw) < 8:
        raise IdxFormatError("label file truncated: header needs 8 bytes")
    items = struct.unpack(">I", raw[4:8])[0]
    payload = raw[8:]
    if len(payload) != items:
        raise IdxFormatError(f"label payload has {len(payload)} bytes, expected {items}")
    labels = np.frombuffer(payload, dtype=np.uint8)
    if labels.size and labels.max() > 9:
        raise IdxFormatError(f"label value {labels.max()} outside [0, 9]")
    return LabelSet(labels=labels)


def write_idx_images(images: ImageSet) -> bytes:
    """Serialize an ImageSet back to IDX bytes (round-trip counterpart)."""
    count = len(images)
    header = struct.pack(">IIII", IMAGES_MAGIC, count, images.height, images.width)
    return header + images.images.astype(np.uint8).tobytes()


def write_idx_labels(labels: LabelSet) -> bytes:
    """Serialize a LabelSet back to IDX bytes."""
    header = struct.pack(">II", LABELS_MAGIC, len(labels))
    return header + labels.labels.astype(np.uint8).tobytes()


def load_idx_file(path) -> bytes:
    """Read a plain or gzip-compressed IDX file."""
    with open(path, "rb") as fh:
        return fh.read()


def patchify(image: np.ndarray, n: int) -> PatchGrid:
    """Cut one image into a row-major grid of n x n blocks.

    The image is zero-padded on the bottom/right to the next multiple of n.
    """
    if n < 1:
        raise ValueError(f"patch edge must be >= 1, got {n}")
    image = np.asarray(image)
    h, w = image.shape
    pad_rows = (-h) % n
    pad_cols = (-w) % n
    padded = np.pad(image, ((0, pad_rows), (0, pad_cols)))
    rows = padded.shape[0] // n
    cols = padded.shape[1] // n
    patches = padded.reshape(rows, n, cols, n).transpose(0, 2, 1, 3)
    return PatchGrid(patches=patches, n=n, pad_rows=pad_rows, pad_cols=pad_cols)


def serialize_dual_orientation(grid: PatchGrid) -> PixelSequence:
    """Emit every patch twice: column-wise (A) then row-wise (B), /255.

    Patches are visited in row-major grid order; output length is twice
    the padded pixel count.
    """
    rows, cols, n, _ = grid.patches.shape
    flat = grid.patches.reshape(rows * cols, n, n).astype(np.float64) / 255.0
    col_wise = flat.transpose(0, 2, 1).reshape(rows * cols, n * n)  # orientation A
    row_wise = flat.reshape(rows * cols, n * n)  # orientation B
    merged = np.concatenate([col_wise, row_wise], axis=1).reshape(-1)
    return PixelSequence(values=merged, n=grid.n)


def image_to_sequence(image: np.ndarray, n: int) -> PixelSequence:
    """Convenience: patchify then serialize."""
    return serialize_dual_orientation(patchify(image, n))


def sequence_length(height: int, width: int, n: int) -> int:
    """Serialized length for an image of the given size: 2 * padded area."""
    padded_h = height + ((-height) % n)
    padded_w = width + ((-width) % n)
    return 2 * padded_h * padded_w
