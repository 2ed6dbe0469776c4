"""A small fully connected classifier trained with mini-batch SGD.

One ReLU hidden layer, softmax output, cross-entropy loss. Everything is
plain numpy and deterministic for a given seed, including the per-epoch
shuffle order. Trained weights round-trip through a little-endian binary
checkpoint format.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

CHECKPOINT_MAGIC = b"WMLP"
CHECKPOINT_VERSION = 1

_HEADER = struct.Struct("<4sIIII")


class TrainingDivergedError(RuntimeError):
    """Raised when the loss stops being finite during training."""


class CheckpointError(ValueError):
    """Raised for malformed checkpoint files."""


def _seed_entropy(seed: int) -> int:
    # Generators need non-negative entropy; fold negatives deterministically.
    return seed % (2**63)


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 256
    epochs: int = 100
    seed: int = 1
    l2: float = 0.0
    early_stop_patience: int | None = None

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1 when set")


@dataclass(eq=False)
class MlpParams:
    """Weights and biases; w1 is (hidden, in), w2 is (out, hidden)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w2.shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy()
        )


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainReport:
    """Per-epoch history plus the final parameters."""

    epochs: list[EpochRecord] = field(default_factory=list)
    params: MlpParams | None = None

    @property
    def final_val_acc(self) -> float:
        if not self.epochs:
            return 0.0
        return self.epochs[-1].val_acc

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "train_acc", "val_acc"])
            for r in self.epochs:
                writer.writerow(
                    [
                        r.epoch,
                        f"{r.train_loss:.10g}",
                        f"{r.train_acc:.10g}",
                        f"{r.val_acc:.10g}",
                    ]
                )


def init_params(
    input_dim: int, hidden_dim: int, seed: int, output_dim: int = 3
) -> MlpParams:
    """Seeded uniform init in +-1/sqrt(fan_in); biases start at zero."""
    if min(input_dim, hidden_dim, output_dim) < 1:
        raise ValueError(
            f"dimensions must be positive, got ({input_dim}, {hidden_dim}, {output_dim})"
        )
    rng = np.random.default_rng(_seed_entropy(seed))
    lim1 = 1.0 / np.sqrt(input_dim)
    lim2 = 1.0 / np.sqrt(hidden_dim)
    w1 = rng.uniform(-lim1, lim1, size=(hidden_dim, input_dim))
    w2 = rng.uniform(-lim2, lim2, size=(output_dim, hidden_dim))
    return MlpParams(
        w1=w1,
        b1=np.zeros(hidden_dim, dtype=np.float64),
        w2=w2,
        b2=np.zeros(output_dim, dtype=np.float64),
    )


def _as_batch(x: np.ndarray, input_dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ValueError(f"expected inputs of width {input_dim}, got shape {x.shape}")
    return x


def _affine(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z1 = x @ params.w1.T + params.b1
    h = np.maximum(z1, 0.0)
    logits = h @ params.w2.T + params.b2
    return z1, h, logits


def forward(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hidden activations and softmax probabilities for a batch."""
    x = _as_batch(x, params.input_dim)
    _, h, logits = _affine(params, x)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    return h, probs


def _check_labels(labels: np.ndarray, n: int, output_dim: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= output_dim):
        raise ValueError(f"labels must lie in [0, {output_dim})")
    return labels.astype(np.int64)


def loss_and_grads(
    params: MlpParams, x: np.ndarray, labels: np.ndarray, l2: float = 0.0
) -> tuple[float, MlpParams]:
    """Mean cross-entropy (plus optional L2 on weights) and its gradients.

    Gradients come back in an ``MlpParams`` shell with matching shapes.
    """
    x = _as_batch(x, params.input_dim)
    n = x.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    labels = _check_labels(labels, n, params.output_dim)

    z1, h, logits = _affine(params, x)
    m = logits.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    logp = logits - lse
    loss = float(-logp[np.arange(n), labels].mean())
    if l2 > 0.0:
        loss += 0.5 * l2 * (float(np.sum(params.w1 * params.w1))
                            + float(np.sum(params.w2 * params.w2)))

    dlogits = np.exp(logp)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n

    gw2 = dlogits.T @ h
    gb2 = dlogits.sum(axis=0)
    dh = dlogits @ params.w2
    dz1 = dh * (z1 > 0.0)
    gw1 = dz1.T @ x
    gb1 = dz1.sum(axis=0)
    if l2 > 0.0:
        gw1 += l2 * params.w1
        gw2 += l2 * params.w2
    return loss, MlpParams(w1=gw1, b1=gb1, w2=gw2, b2=gb2)


def sgd_step(params: MlpParams, grads: MlpParams, learning_rate: float) -> None:
    """In-place gradient descent update."""
    params.w1 -= learning_rate * grads.w1
    params.b1 -= learning_rate * grads.b1
    params.w2 -= learning_rate * grads.w2
    params.b2 -= learning_rate * grads.b2


def predict(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predicted class labels and the full probability rows.

    Ties go to the lowest class index.
    """
    _, probs = forward(params, x)
    return probs.argmax(axis=1), probs


def accuracy(params: MlpParams, x: np.ndarray, labels: np.ndarray) -> float:
    x = _as_batch(x, params.input_dim)
    labels = _check_labels(labels, x.shape[0], params.output_dim)
    pred, _ = predict(params, x)
    return float((pred == labels).mean())


def train(
    params: MlpParams,
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    cfg: TrainConfig,
) -> TrainReport:
    """Mini-batch SGD. The input ``params`` object is not modified.

    Each epoch reshuffles the training set with its own seeded stream, walks
    it in batches, then records loss and accuracies. A non-finite loss aborts
    with :class:`TrainingDivergedError`.
    """
    x_train = _as_batch(x_train, params.input_dim)
    n = x_train.shape[0]
    y_train = _check_labels(y_train, n, params.output_dim)
    x_val = _as_batch(x_val, params.input_dim)
    y_val = _check_labels(y_val, x_val.shape[0], params.output_dim)
    if n == 0 or x_val.shape[0] == 0:
        raise ValueError("training and validation sets must be non-empty")

    p = params.copy()
    report = TrainReport(params=p)
    best_val = -np.inf
    stale = 0
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng([_seed_entropy(cfg.seed), 1000003 + epoch])
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(p, x_train[idx], y_train[idx], cfg.l2)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch start {start}"
                )
            sgd_step(p, grads, cfg.learning_rate)
            loss_sum += loss * idx.size
        report.epochs.append(
            EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / n,
                train_acc=accuracy(p, x_train, y_train),
                val_acc=accuracy(p, x_val, y_val),
            )
        )
        if cfg.early_stop_patience is not None:
            val = report.epochs[-1].val_acc
            if val > best_val:
                best_val = val
                stale = 0
            else:
                stale += 1
                if stale >= cfg.early_stop_patience:
                    break
    return report


def save_checkpoint(params: MlpParams, path: str | Path) -> None:
    """Serialize weights: magic, version, dims, then float64 LE payloads."""
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        params.input_dim,
        params.hidden_dim,
        params.output_dim,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for block in (params.w1, params.b1, params.w2, params.b2):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> MlpParams:
    """Read a checkpoint, rejecting wrong magic/version and truncation."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: file too short for a checkpoint header")
    magic, version, input_dim, hidden_dim, output_dim = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    if min(input_dim, hidden_dim, output_dim) < 1:
        raise CheckpointError(f"{path}: non-positive dimension in header")
    counts = [
        hidden_dim * input_dim,
        hidden_dim,
        output_dim * hidden_dim,
        output_dim,
    ]
    expected = _HEADER.size + 8 * sum(counts)
    if len(data) != expected:
        raise CheckpointError(
            f"{path}: payload is {len(data) - _HEADER.size} bytes, "
            f"header implies {expected - _HEADER.size} (corrupt or truncated)"
        )
    offset = _HEADER.size
    blocks = []
    for count in counts:
        blocks.append(
            np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(
                np.float64
            )
        )
        offset += 8 * count
    return MlpParams(
        w1=blocks[0].reshape(hidden_dim, input_dim),
        b1=blocks[1],
        w2=blocks[2].reshape(output_dim, hidden_dim),
        b2=blocks[3],
    )


def tuned_config(base: TrainConfig, learning_rate: float) -> TrainConfig:
    """Copy of ``base`` with a different learning rate."""
    return replace(base, learning_rate=learning_rate)
