import os

import numpy as np
import pytest

from oss_cnn import dataset

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def find_mnist():
    """Locate real MNIST IDX files, or None.

    Looks in $OSS_CNN_MNIST_DIR, then ./data/mnist.  Accepts plain or
    .gz files.
    """
    candidates = []
    if os.environ.get("OSS_CNN_MNIST_DIR"):
        candidates.append(os.environ["OSS_CNN_MNIST_DIR"])
    candidates.append(os.path.join(os.path.dirname(__file__), "..", "data", "mnist"))
    for root in candidates:
        paths = {}
        for key, name in MNIST_FILES.items():
            for suffix in ("", ".gz"):
                path = os.path.join(root, name + suffix)
                if os.path.exists(path):
                    paths[key] = path
                    break
        if len(paths) == len(MNIST_FILES):
            return paths
    return None


@pytest.fixture(scope="session")
def mnist_paths():
    paths = find_mnist()
    if paths is None:
        pytest.skip(
            "MNIST IDX files not found (set OSS_CNN_MNIST_DIR or place them "
            "under data/mnist/); unavailable in offline environments"
        )
    return paths


def write_synthetic_mnist(dirpath, train_count=24, test_count=12, seed=0,
                          height=28, width=28):
    """Write small random MNIST-shaped IDX files; returns the four paths."""
    rng = np.random.default_rng(seed)
    os.makedirs(dirpath, exist_ok=True)
    paths = {}
    for prefix, count in (("train", train_count), ("t10k", test_count)):
        images = rng.integers(0, 256, size=(count, height, width), dtype=np.uint8)
        labels = rng.integers(0, 10, size=count, dtype=np.uint8)
        img_path = os.path.join(dirpath, f"{prefix}-images-idx3-ubyte")
        lbl_path = os.path.join(dirpath, f"{prefix}-labels-idx1-ubyte")
        with open(img_path, "wb") as fh:
            fh.write(dataset.write_idx_images(
                dataset.ImageSet(images=images, height=height, width=width)))
        with open(lbl_path, "wb") as fh:
            fh.write(dataset.write_idx_labels(dataset.LabelSet(labels=labels)))
        key = "train" if prefix == "train" else "test"
        paths[f"{key}_images"] = img_path
        paths[f"{key}_labels"] = lbl_path
    return paths


@pytest.fixture()
def synthetic_mnist(tmp_path):
    return write_synthetic_mnist(tmp_path / "mnist")
