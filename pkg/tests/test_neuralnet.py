"""Initialization, forward/backward math, training loop, and checkpoints."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from wavemlp.neuralnet import (
    CHECKPOINT_MAGIC,
    CheckpointError,
    EpochRecord,
    MlpParams,
    TrainConfig,
    TrainingDivergedError,
    TrainReport,
    accuracy,
    forward,
    init_params,
    load_checkpoint,
    loss_and_grads,
    predict,
    save_checkpoint,
    sgd_step,
    train,
    tuned_config,
)

_HEADER = struct.Struct("<4sIIII")


def _blob_data(n=64, input_dim=8, seed=0):
    """Three linearly separable clusters for quick optimization checks."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, size=n)
    centers = np.zeros((3, input_dim))
    centers[0, 0] = 4.0
    centers[1, 1] = 4.0
    centers[2, 2] = 4.0
    x = centers[labels] + rng.normal(0.0, 0.3, size=(n, input_dim))
    return x, labels


# ---------------------------------------------------------------------------
# Initialization


def test_init_is_deterministic():
    a = init_params(8, 5, seed=3)
    b = init_params(8, 5, seed=3)
    assert a.w1.tobytes() == b.w1.tobytes()
    assert a.w2.tobytes() == b.w2.tobytes()


def test_init_seeds_differ():
    a = init_params(8, 5, seed=3)
    b = init_params(8, 5, seed=4)
    assert not np.array_equal(a.w1, b.w1)


def test_init_bounds_and_zero_biases():
    p = init_params(16, 40, seed=0)
    assert p.w1.shape == (40, 16)
    assert p.w2.shape == (3, 40)
    assert np.all(np.abs(p.w1) <= 1.0 / 4.0)
    assert np.all(np.abs(p.w2) <= 1.0 / np.sqrt(40))
    assert not p.b1.any() and not p.b2.any()
    assert p.input_dim == 16 and p.hidden_dim == 40 and p.output_dim == 3


@pytest.mark.parametrize("dims", [(0, 5, 3), (5, 0, 3), (5, 5, 0)])
def test_init_rejects_non_positive_dims(dims):
    input_dim, hidden_dim, output_dim = dims
    with pytest.raises(ValueError):
        init_params(input_dim, hidden_dim, seed=1, output_dim=output_dim)


# ---------------------------------------------------------------------------
# Forward pass


def test_forward_probabilities_are_a_distribution():
    p = init_params(8, 5, seed=1)
    x, _ = _blob_data()
    _, probs = forward(p, x)
    assert probs.shape == (64, 3)
    assert np.all(probs >= 0.0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_forward_promotes_single_vector():
    p = init_params(8, 5, seed=1)
    h, probs = forward(p, np.zeros(8))
    assert h.shape == (1, 5)
    assert probs.shape == (1, 3)


def test_forward_rejects_wrong_width():
    p = init_params(8, 5, seed=1)
    with pytest.raises(ValueError):
        forward(p, np.zeros((4, 7)))


def test_softmax_is_shift_stable():
    p = init_params(4, 3, seed=2)
    x = np.array([[1e3, -1e3, 5.0, 0.0]])
    _, probs = forward(p, x)
    assert np.all(np.isfinite(probs))


def test_prediction_tie_goes_to_lowest_class():
    zero = MlpParams(
        w1=np.zeros((5, 8)), b1=np.zeros(5), w2=np.zeros((3, 5)), b2=np.zeros(3)
    )
    labels, probs = predict(zero, np.ones((6, 8)))
    assert np.array_equal(labels, np.zeros(6, dtype=labels.dtype))
    assert np.allclose(probs, 1.0 / 3.0)


# ---------------------------------------------------------------------------
# Loss and gradients


def test_loss_matches_log_probabilities():
    p = init_params(8, 5, seed=1)
    x, y = _blob_data(n=32)
    loss, _ = loss_and_grads(p, x, y)
    _, probs = forward(p, x)
    expected = float(-np.log(probs[np.arange(32), y]).mean())
    assert loss == pytest.approx(expected, rel=1e-12)


def test_l2_term_adds_half_l2_times_weight_norm():
    p = init_params(8, 5, seed=1)
    x, y = _blob_data(n=32)
    base, _ = loss_and_grads(p, x, y, l2=0.0)
    reg, _ = loss_and_grads(p, x, y, l2=0.3)
    wsq = float(np.sum(p.w1**2) + np.sum(p.w2**2))
    assert reg - base == pytest.approx(0.5 * 0.3 * wsq, rel=1e-12)


@pytest.mark.parametrize("l2", [0.0, 0.05])
def test_gradients_match_central_differences(l2):
    p = init_params(8, 5, seed=7)
    x, y = _blob_data(n=20, seed=3)
    _, grads = loss_and_grads(p, x, y, l2=l2)
    h = 1e-5
    for name in ("w1", "b1", "w2", "b2"):
        block = getattr(p, name)
        g = getattr(grads, name)
        numeric = np.zeros_like(block)
        it = np.nditer(block, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = block[idx]
            block[idx] = orig + h
            up, _ = loss_and_grads(p, x, y, l2=l2)
            block[idx] = orig - h
            down, _ = loss_and_grads(p, x, y, l2=l2)
            block[idx] = orig
            numeric[idx] = (up - down) / (2.0 * h)
        err = np.abs(numeric - g)
        tol = 1e-7 + 1e-5 * (np.abs(numeric) + np.abs(g))
        assert np.all(err <= tol), f"{name}: worst error {err.max():.3e}"


def test_loss_rejects_bad_labels():
    p = init_params(8, 5, seed=1)
    x = np.zeros((4, 8))
    with pytest.raises(ValueError):
        loss_and_grads(p, x, np.array([0, 1, 2, 3]))
    with pytest.raises(ValueError):
        loss_and_grads(p, x, np.array([0, 1]))


def test_sgd_step_with_zero_rate_is_identity():
    p = init_params(8, 5, seed=1)
    before = p.copy()
    _, grads = loss_and_grads(p, *_blob_data(n=16))
    sgd_step(p, grads, 0.0)
    assert p.w1.tobytes() == before.w1.tobytes()
    assert p.w2.tobytes() == before.w2.tobytes()


# ---------------------------------------------------------------------------
# Training loop


def _split(x, y, n_train=48):
    return x[:n_train], y[:n_train], x[n_train:], y[n_train:]


def test_train_learns_separable_blobs():
    x, y = _blob_data(n=96, seed=5)
    xtr, ytr, xval, yval = _split(x, y, 72)
    p = init_params(8, 16, seed=1)
    report = train(p, xtr, ytr, xval, yval, TrainConfig(learning_rate=0.1, epochs=40))
    assert report.final_val_acc == 1.0
    assert report.epochs[-1].train_loss < report.epochs[0].train_loss


def test_train_is_deterministic():
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    cfg = TrainConfig(learning_rate=0.05, batch_size=16, epochs=5, seed=9)
    r1 = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, cfg)
    r2 = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, cfg)
    assert r1.epochs == r2.epochs
    assert r1.params.w1.tobytes() == r2.params.w1.tobytes()
    assert r1.params.w2.tobytes() == r2.params.w2.tobytes()


def test_train_leaves_input_params_untouched():
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    p = init_params(8, 6, seed=2)
    before = p.copy()
    train(p, xtr, ytr, xval, yval, TrainConfig(epochs=3))
    assert p.w1.tobytes() == before.w1.tobytes()
    assert p.b2.tobytes() == before.b2.tobytes()


def test_train_seed_changes_trajectory():
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    base = TrainConfig(learning_rate=0.05, batch_size=16, epochs=3, seed=1)
    other = TrainConfig(learning_rate=0.05, batch_size=16, epochs=3, seed=2)
    r1 = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, base)
    r2 = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, other)
    assert r1.params.w1.tobytes() != r2.params.w1.tobytes()


def test_train_zero_epochs_returns_empty_report():
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    report = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, TrainConfig(epochs=0))
    assert report.epochs == []
    assert report.final_val_acc == 0.0


def test_train_raises_on_divergence():
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    cfg = TrainConfig(learning_rate=1e150, batch_size=32, epochs=5)
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(TrainingDivergedError):
        train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, cfg)


def test_early_stop_counts_stale_epochs():
    # With a zero learning rate the validation accuracy never improves after
    # epoch 0, so patience 2 stops the loop after exactly three epochs.
    x, y = _blob_data(n=64, seed=5)
    xtr, ytr, xval, yval = _split(x, y)
    cfg = TrainConfig(learning_rate=0.0, epochs=50, early_stop_patience=2)
    report = train(init_params(8, 6, seed=2), xtr, ytr, xval, yval, cfg)
    assert len(report.epochs) == 3


def test_train_rejects_empty_sets():
    x, y = _blob_data(n=8, seed=5)
    p = init_params(8, 6, seed=2)
    with pytest.raises(ValueError):
        train(p, np.zeros((0, 8)), np.zeros(0, dtype=int), x, y, TrainConfig(epochs=1))


def test_accuracy_with_zero_params_counts_class_zero():
    zero = MlpParams(
        w1=np.zeros((5, 8)), b1=np.zeros(5), w2=np.zeros((3, 5)), b2=np.zeros(3)
    )
    labels = np.array([0, 0, 1, 2])
    assert accuracy(zero, np.ones((4, 8)), labels) == 0.5


# ---------------------------------------------------------------------------
# Config and report plumbing


@pytest.mark.parametrize(
    "kwargs",
    [
        {"learning_rate": -0.1},
        {"batch_size": 0},
        {"epochs": -1},
        {"l2": -1e-9},
        {"early_stop_patience": 0},
    ],
)
def test_train_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)


def test_tuned_config_changes_only_learning_rate():
    base = TrainConfig(learning_rate=0.01, batch_size=64, epochs=7, seed=5, l2=0.2)
    out = tuned_config(base, 0.03)
    assert out.learning_rate == 0.03
    assert (out.batch_size, out.epochs, out.seed, out.l2) == (64, 7, 5, 0.2)
    assert base.learning_rate == 0.01


def test_report_csv_layout(tmp_path):
    report = TrainReport()
    report.epochs.append(EpochRecord(epoch=0, train_loss=1.5, train_acc=0.25, val_acc=0.5))
    path = tmp_path / "report.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,train_loss,train_acc,val_acc"
    assert lines[1] == "0,1.5,0.25,0.5"


# ---------------------------------------------------------------------------
# Checkpoints


def test_checkpoint_roundtrip_is_bit_exact(tmp_path):
    p = init_params(8, 5, seed=11)
    p.b1 += 0.125
    path = tmp_path / "model.wmlp"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    for name in ("w1", "b1", "w2", "b2"):
        assert getattr(p, name).tobytes() == getattr(q, name).tobytes()
    assert (q.input_dim, q.hidden_dim, q.output_dim) == (8, 5, 3)


def _valid_checkpoint_bytes(tmp_path):
    path = tmp_path / "ok.wmlp"
    save_checkpoint(init_params(4, 3, seed=1), path)
    return path.read_bytes()


def test_checkpoint_rejects_bad_magic(tmp_path):
    data = _valid_checkpoint_bytes(tmp_path)
    bad = tmp_path / "bad.wmlp"
    bad.write_bytes(b"XMLP" + data[4:])
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(bad)


def test_checkpoint_rejects_unknown_version(tmp_path):
    data = bytearray(_valid_checkpoint_bytes(tmp_path))
    data[4:8] = struct.pack("<I", 2)
    bad = tmp_path / "bad.wmlp"
    bad.write_bytes(bytes(data))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(bad)


def test_checkpoint_rejects_truncation_and_padding(tmp_path):
    data = _valid_checkpoint_bytes(tmp_path)
    short = tmp_path / "short.wmlp"
    short.write_bytes(data[:-1])
    with pytest.raises(CheckpointError):
        load_checkpoint(short)
    padded = tmp_path / "padded.wmlp"
    padded.write_bytes(data + b"\x00")
    with pytest.raises(CheckpointError):
        load_checkpoint(padded)


def test_checkpoint_rejects_short_header(tmp_path):
    stub = tmp_path / "stub.wmlp"
    stub.write_bytes(CHECKPOINT_MAGIC + b"\x01")
    with pytest.raises(CheckpointError, match="short"):
        load_checkpoint(stub)


def test_checkpoint_rejects_zero_dimension(tmp_path):
    bad = tmp_path / "zero.wmlp"
    bad.write_bytes(_HEADER.pack(CHECKPOINT_MAGIC, 1, 0, 5, 3))
    with pytest.raises(CheckpointError, match="dimension"):
        load_checkpoint(bad)
