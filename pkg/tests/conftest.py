"""Shared fixtures: small synthetic datasets and a trained model pair."""

import numpy as np
import pytest

from mindrace._accel import use_numba
from mindrace.core import TWO_CLASS, Montage, Recording
from mindrace.io import epochs_from_events, synthesize, two_class_config

BACKENDS = ["numpy", "numba"] if use_numba() else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def montage16():
    from mindrace.io.synth import MONTAGES

    return Montage.standard(MONTAGES["standard16"])


@pytest.fixture(scope="session")
def two_class_rec():
    return synthesize(two_class_config(seed=0))[0]


@pytest.fixture(scope="session")
def two_class_epochs(two_class_rec):
    return epochs_from_events(two_class_rec, TWO_CLASS)


@pytest.fixture(scope="session")
def trained(two_class_epochs):
    """(FasterModel, VotingSvmModel) calibrated on the standard 2-class set."""
    from mindrace.faster import faster_offline
    from mindrace.features import BandSpec, band_features, fft_abs_array, window_array
    from mindrace.svm import train_voting_svm

    clean, model, _ = faster_offline(two_class_epochs)
    win, _, _, lab = window_array(clean, 1.0, 0.2)
    band = BandSpec.named("range40")
    clf = train_voting_svm(band_features(fft_abs_array(win), 1.0, band), lab, band_edges=band.edges())
    return model, clf


def tiny_recording(n_channels=4, n_samples=100, fs=100.0, events=(), seed=0):
    names = ["C3", "Cz", "C4", "Pz", "Fz", "Oz", "F3", "F4"][:n_channels]
    rng = np.random.default_rng(seed)
    return Recording(rng.normal(size=(n_channels, n_samples)), fs, Montage.standard(names), tuple(events))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
