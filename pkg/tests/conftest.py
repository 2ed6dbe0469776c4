"""Shared fixtures: synthetic corpora reused across test modules."""

from __future__ import annotations

import numpy as np
import pytest

from wavemlp.dataset import DatasetManifest, synth_generate
from wavemlp.pipeline import build_inputs


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> DatasetManifest:
    """A 6-image-per-class corpus for fast pipeline-level tests."""
    root = tmp_path_factory.mktemp("small-corpus")
    return synth_generate(root, n_per_class=6, seed=7)


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory) -> DatasetManifest:
    """The full 200-image-per-class corpus the acceptance suite trains on."""
    root = tmp_path_factory.mktemp("acceptance-corpus")
    return synth_generate(root, n_per_class=200, seed=1)


@pytest.fixture(scope="session")
def acceptance_features(acceptance_corpus) -> tuple[np.ndarray, np.ndarray]:
    """Feature-mode inputs for the acceptance corpus, built once per run."""
    return build_inputs(acceptance_corpus, "features")
