"""Independent oracles and small builders shared by the test modules."""

import numpy as np

from drowsekit.preprocess import EPOCH_SAMPLES, Epoch
from drowsekit.session import EEG_SAMPLE_RATE_HZ, BinaryState


def freq_response_db(taps, freq_hz, sample_rate_hz=EEG_SAMPLE_RATE_HZ):
    """Gain in dB at one frequency by direct evaluation of the DFT sum."""
    phases = np.exp(-2j * np.pi * freq_hz * np.arange(len(taps)) / sample_rate_hz)
    mag = np.abs(np.dot(np.asarray(taps), phases))
    return 20.0 * np.log10(mag) if mag > 0 else -np.inf


def make_epoch(samples, interval_index=0, state=BinaryState.ALERT, filtered=False):
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = np.tile(samples, (4, 1))
    assert samples.shape == (4, EPOCH_SAMPLES)
    return Epoch(interval_index=interval_index, state=state,
                 samples=samples, filtered=filtered)


def noise_epoch(rng, scale=1.0, **kwargs):
    return make_epoch(rng.normal(0.0, scale, (4, EPOCH_SAMPLES)), **kwargs)


def sine_wave(freq_hz, amplitude=1.0, n=EPOCH_SAMPLES, phase=0.0):
    t = np.arange(n) / EEG_SAMPLE_RATE_HZ
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase)
