"""Digital head: one fully-connected layer with softmax, trained with Adam.

Also provides an inference FLOPS counter for comparing architectures.
Counting convention: one MAC = 2 operations (multiply + add) for fc and
conv layers; pooling costs its window size per output element;
activations cost 1 operation per element.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

NUM_CLASSES = 10


@dataclass
class FclParams:
    weights: np.ndarray  # (dim, 10)
    biases: np.ndarray  # (10,)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 128
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class AdamState:
    m_w: np.ndarray
    v_w: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params: FclParams) -> "AdamState":
        return cls(
            m_w=np.zeros_like(params.weights),
            v_w=np.zeros_like(params.weights),
            m_b=np.zeros_like(params.biases),
            v_b=np.zeros_like(params.biases),
        )


def init_params(dim: int, rng: np.random.Generator) -> FclParams:
    limit = np.sqrt(6.0 / (dim + NUM_CLASSES))
    weights = rng.uniform(-limit, limit, size=(dim, NUM_CLASSES))
    return FclParams(weights=weights, biases=np.zeros(NUM_CLASSES))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: FclParams, x: np.ndarray) -> np.ndarray:
    """Class probabilities softmax(W^T x + b); x is (dim,) or (batch, dim)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.dim:
        raise ValueError(f"feature dim {x.shape[-1]} != model dim {params.dim}")
    return softmax(x @ params.weights + params.biases)


def loss_and_grads(params: FclParams, x: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy and analytic gradients over one batch."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if len(labels) == 0:
        raise ValueError("batch must be nonempty")
    probs = forward(params, x)
    batch = x.shape[0]
    loss = -np.mean(np.log(probs[np.arange(batch), labels] + 1e-300))
    delta = probs.copy()
    delta[np.arange(batch), labels] -= 1.0
    grad_w = x.T @ delta / batch
    grad_b = delta.mean(axis=0)
    return loss, (grad_w, grad_b)


def adam_step(
    params: FclParams,
    grads,
    state: AdamState,
    config: TrainConfig,
) -> None:
    """One in-place Adam update with bias correction."""
    grad_w, grad_b = grads
    state.t += 1
    b1, b2 = config.beta1, config.beta2
    state.m_w = b1 * state.m_w + (1 - b1) * grad_w
    state.v_w = b2 * state.v_w + (1 - b2) * grad_w**2
    state.m_b = b1 * state.m_b + (1 - b1) * grad_b
    state.v_b = b2 * state.v_b + (1 - b2) * grad_b**2
    c1 = 1 - b1**state.t
    c2 = 1 - b2**state.t
    lr, eps = config.learning_rate, config.epsilon
    params.weights -= lr * (state.m_w / c1) / (np.sqrt(state.v_w / c2) + eps)
    params.biases -= lr * (state.m_b / c1) / (np.sqrt(state.v_b / c2) + eps)


def train(features: np.ndarray, labels: np.ndarray, config: TrainConfig):
    """Seeded mini-batch training; returns (params, per-epoch train accuracy)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    count, dim = features.shape
    if count == 0:
        raise ValueError("training set is empty")
    rng = np.random.default_rng(config.seed)
    params = init_params(dim, rng)
    state = AdamState.zeros_like(params)
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(count)
        for start in range(0, count, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, grads = loss_and_grads(params, features[idx], labels[idx])
            adam_step(params, grads, state, config)
        history.append(evaluate(params, features, labels))
    return params, history


def evaluate(params: FclParams, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of argmax-correct predictions (ties go to the lowest class)."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise ValueError("evaluation set is empty")
    probs = forward(params, np.atleast_2d(features))
    return float(np.mean(probs.argmax(axis=1) == labels))


def save_checkpoint(path, params: FclParams, config: TrainConfig) -> None:
    """Checkpoint container: npz with dim, row-major weights, biases, config.

    Layout: `dim` (scalar int), `weights` (dim x 10 float64, row-major),
    `biases` (10 float64), plus one scalar entry per TrainConfig field
    prefixed `train_`.
    """
    extras = {f"train_{k}": v for k, v in asdict(config).items()}
    np.savez(path, dim=params.dim, weights=params.weights, biases=params.biases, **extras)


def load_checkpoint(path):
    data = np.load(path)
    params = FclParams(weights=data["weights"], biases=data["biases"])
    fields = {k[len("train_"):]: data[k].item() for k in data.files if k.startswith("train_")}
    return params, TrainConfig(**fields)


# -- inference cost accounting ------------------------------------------------

# Inference FLOPS reported for a 10-node sliced accelerator with a single
# fully-connected head in the source comparison table; not reproducible
# from the counting convention above, echoed for reporting only.
REPORTED_SLICED_NN_FLOPS = 14_600
REPORTED_LENET5_FLOPS = 736_000


def count_flops(layers) -> int:
    """Total inference FLOPS for a layer list.

    Each layer is a dict with a `kind` key:
      fc:   {in, out}                  -> 2 * in * out
      conv: {out_h, out_w, out_c, k_h, k_w, in_c} -> 2 * MACs
      pool: {out_h, out_w, c, k_h, k_w}           -> window size per output
      act:  {elements}                            -> 1 per element
    """
    total = 0
    for layer in layers:
        kind = layer["kind"]
        if kind == "fc":
            total += 2 * layer["in"] * layer["out"]
        elif kind == "conv":
            macs = (
                layer["out_h"] * layer["out_w"] * layer["out_c"]
                * layer["k_h"] * layer["k_w"] * layer["in_c"]
            )
            total += 2 * macs
        elif kind == "pool":
            total += layer["out_h"] * layer["out_w"] * layer["c"] * layer["k_h"] * layer["k_w"]
        elif kind == "act":
            total += layer["elements"]
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    return total


def lenet5_single_fcl_layers():
    """LeNet-5 feature extractor with a single 10-way fc head (32x32 input)."""
    return [
        {"kind": "conv", "out_h": 28, "out_w": 28, "out_c": 6, "k_h": 5, "k_w": 5, "in_c": 1},
        {"kind": "act", "elements": 28 * 28 * 6},
        {"kind": "pool", "out_h": 14, "out_w": 14, "c": 6, "k_h": 2, "k_w": 2},
        {"kind": "conv", "out_h": 10, "out_w": 10, "out_c": 16, "k_h": 5, "k_w": 5, "in_c": 6},
        {"kind": "act", "elements": 10 * 10 * 16},
        {"kind": "pool", "out_h": 5, "out_w": 5, "c": 16, "k_h": 2, "k_w": 2},
        {"kind": "fc", "in": 400, "out": 10},
    ]
