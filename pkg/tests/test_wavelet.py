"""Haar decomposition, subband statistics, and the 64-value feature vector."""

from __future__ import annotations

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavemlp.wavelet import (
    ENTROPY_BINS,
    FEATURE_COUNT,
    IMAGE_SIDE,
    WaveletDecomposition,
    export_features_csv,
    feature_names,
    feature_vector,
    haar_dwt2,
    haar_idwt2,
    subband_stats,
)

even_images = arrays(
    dtype=np.float64,
    shape=st.tuples(
        st.integers(1, 16).map(lambda n: 2 * n),
        st.integers(1, 16).map(lambda n: 2 * n),
    ),
    elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
)


# ---------------------------------------------------------------------------
# Transform


def test_haar_block_oracle():
    x = np.array([[5.0, 1.0], [2.0, 8.0]])
    dec = haar_dwt2(x)
    assert dec.cA[0, 0] == 8.0
    assert dec.cH[0, 0] == -2.0
    assert dec.cV[0, 0] == -1.0
    assert dec.cD[0, 0] == 5.0


def test_haar_shapes_halve():
    dec = haar_dwt2(np.zeros((6, 10)))
    for band in dec:
        assert band.shape == (3, 5)


@pytest.mark.parametrize("shape", [(3, 4), (4, 3), (0, 4), (5,), (4, 4, 4)])
def test_haar_rejects_non_even_2d(shape):
    with pytest.raises(ValueError):
        haar_dwt2(np.zeros(shape))


@given(even_images)
@settings(max_examples=50, deadline=None)
def test_haar_roundtrip_is_near_exact(x):
    recon = haar_idwt2(haar_dwt2(x))
    assert np.max(np.abs(recon - x)) <= 1e-9 * max(1.0, np.max(np.abs(x)))


@given(even_images)
@settings(max_examples=50, deadline=None)
def test_haar_preserves_energy(x):
    dec = haar_dwt2(x)
    band_energy = sum(float(np.sum(b * b)) for b in dec)
    image_energy = float(np.sum(x * x))
    assert band_energy == pytest.approx(image_energy, rel=1e-12, abs=1e-6)


def test_idwt_rejects_mismatched_bands():
    dec = WaveletDecomposition(
        np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2))
    )
    with pytest.raises(ValueError):
        haar_idwt2(dec)


# ---------------------------------------------------------------------------
# Subband statistics


def test_subband_stats_oracle():
    stats = subband_stats(np.array([1.0, 2.0, 3.0, 4.0]))
    assert stats.mean == 2.5
    assert stats.std == pytest.approx(1.118033988749895, abs=1e-15)
    assert stats.energy == 30.0
    assert stats.entropy == 2.0  # four values land in four distinct bins


def test_entropy_uniform_histogram_is_exactly_eight_bits():
    # 256 evenly spaced values occupy all 256 bins once each.
    stats = subband_stats(np.arange(256, dtype=np.float64))
    assert stats.entropy == 8.0


def test_entropy_constant_band_is_zero():
    stats = subband_stats(np.full((4, 4), 3.7))
    assert stats.entropy == 0.0
    assert stats.std == 0.0


@given(
    arrays(
        dtype=np.float64,
        shape=st.integers(1, 200),
        elements=st.floats(-1e5, 1e5, allow_nan=False, allow_infinity=False),
    )
)
@settings(max_examples=50, deadline=None)
def test_entropy_is_bounded_by_bin_count(v):
    stats = subband_stats(v)
    assert 0.0 <= stats.entropy <= np.log2(ENTROPY_BINS) + 1e-12


def test_subband_stats_rejects_empty():
    with pytest.raises(ValueError):
        subband_stats(np.array([]))


# ---------------------------------------------------------------------------
# Feature vector


def test_feature_names_order_and_count():
    names = feature_names()
    assert len(names) == FEATURE_COUNT == 64
    assert names[0] == "raw_cA_mean"
    assert names[1] == "raw_cA_std"
    assert names[4] == "raw_cH_mean"
    assert names[16] == "canny_50_150_cA_mean"
    assert names[-1] == "canny_150_250_cD_entropy"
    assert len(set(names)) == 64


def test_feature_vector_shape_and_determinism():
    rng = np.random.default_rng(5)
    img = rng.uniform(-1.0, 1.0, size=(IMAGE_SIDE, IMAGE_SIDE))
    a = feature_vector(img)
    b = feature_vector(img)
    assert a.shape == (FEATURE_COUNT,)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_feature_vector_rejects_wrong_shape():
    with pytest.raises(ValueError):
        feature_vector(np.zeros((64, 64)))


def test_constant_image_zeroes_every_edge_feature():
    vec = feature_vector(np.zeros((IMAGE_SIDE, IMAGE_SIDE)))
    names = feature_names()
    edge_values = [v for n, v in zip(names, vec) if n.startswith("canny_")]
    assert len(edge_values) == 48
    assert all(v == 0.0 for v in edge_values)
    # The raw-image approximation band still carries the flat level.
    raw = dict(zip(names, vec))
    assert raw["raw_cA_std"] == 0.0
    assert raw["raw_cH_energy"] == 0.0


# ---------------------------------------------------------------------------
# CSV export


def test_export_features_csv_layout(tmp_path):
    features = np.zeros((3, FEATURE_COUNT))
    features[0, 0] = 1.25
    features[2, 63] = -7.0
    labels = np.array([0, 2, 1])
    path = tmp_path / "features.csv"
    export_features_csv(path, features, labels)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["label", *feature_names()]
    assert len(rows) == 4
    assert rows[1][0] == "0" and rows[1][1] == "1.25"
    assert rows[2][0] == "2"
    assert rows[3][0] == "1" and rows[3][-1] == "-7"


def test_export_features_csv_validation(tmp_path):
    path = tmp_path / "bad.csv"
    with pytest.raises(ValueError):
        export_features_csv(path, np.zeros((2, 10)), np.array([0, 1]))
    with pytest.raises(ValueError):
        export_features_csv(path, np.zeros((2, FEATURE_COUNT)), np.array([0]))
