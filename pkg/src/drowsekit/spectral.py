"""Welch PSD estimation and band-power feature extraction.

Per channel, an epoch yields the absolute power (in microvolts squared)
of the five classic bands and the relative power of each band against
the 0.1..40 Hz total, for 10 features per channel and 40 per epoch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import welch

from .errors import DegeneratePower, TooShort
from .features import FeatureMatrix
from .preprocess import Epoch
from .session import EEG_CHANNELS, EEG_SAMPLE_RATE_HZ, BinaryState

DEFAULT_NFFT = 1024

# Total power over this range is the denominator of every relative power.
TOTAL_BAND_HZ = (0.1, 40.0)

# Below this total power (in uV^2) an epoch is considered degenerate.
DEGENERATE_POWER_UV2 = 1e-12


@dataclass(frozen=True)
class Band:
    """A named frequency band, half-open conventions resolved by integration."""

    name: str
    lo_hz: float
    hi_hz: float


BANDS = (
    Band("delta", 0.1, 4.0),
    Band("theta", 4.0, 8.0),
    Band("alpha", 8.0, 13.0),
    Band("beta", 13.0, 30.0),
    Band("gamma", 30.0, 40.0),
)

FEATURE_KINDS = ("abs", "rel")


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density on a uniform frequency grid.

    Density is in uV^2/Hz and window-power compensated, so the integral
    over the full grid matches the mean square of the signal.
    """

    freqs_hz: np.ndarray
    density: np.ndarray


@dataclass(frozen=True)
class FeatureVector:
    """The 40 band-power features of one epoch.

    Ordering is channel-major: for each channel (TP9, AF7, AF8, TP10),
    for each band (delta..gamma), the absolute then the relative power.
    The last entry (index 39) is the TP10 gamma relative power.
    """

    values: np.ndarray
    interval_index: int
    state: BinaryState


def eeg_feature_names(channel_names: Sequence[str] = EEG_CHANNELS) -> tuple[str, ...]:
    """Feature names in FeatureVector order, like ``TP9_delta_abs``."""
    return tuple(
        f"{ch}_{band.name}_{kind}"
        for ch in channel_names
        for band in BANDS
        for kind in FEATURE_KINDS
    )


def welch_psd(samples: np.ndarray, sample_rate_hz: float = EEG_SAMPLE_RATE_HZ,
              nfft: int = DEFAULT_NFFT) -> PsdEstimate:
    """Estimate a one-sided PSD by Welch's method.

    Segments are ``nfft`` samples long, Hann windowed, 50% overlapped,
    and their periodograms averaged; a 30 s epoch at 256 Hz yields 14
    segments. No detrending is applied, so DC power is preserved and the
    integral of the density equals the signal's mean square.

    Raises:
        TooShort: Fewer samples than one segment.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[-1] < nfft:
        raise TooShort(f"need at least {nfft} samples, got {samples.shape[-1]}")
    freqs, density = welch(
        samples,
        fs=sample_rate_hz,
        window="hann",
        nperseg=nfft,
        noverlap=nfft // 2,
        nfft=nfft,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    return PsdEstimate(freqs_hz=freqs, density=density)


def _integrate(psd: PsdEstimate, lo_hz: float, hi_hz: float) -> float:
    """Trapezoidal integral of the density over [lo, hi].

    The grid is augmented with linearly interpolated points at the exact
    band edges, so adjacent bands share edge mass half-half and partition
    the total exactly.
    """
    f = psd.freqs_hz
    lo = max(lo_hz, float(f[0]))
    hi = min(hi_hz, float(f[-1]))
    if hi <= lo:
        return 0.0
    inner = f[(f > lo) & (f < hi)]
    grid = np.concatenate(([lo], inner, [hi]))
    dens = np.interp(grid, f, psd.density)
    return float(np.trapezoid(dens, grid))


def band_power(psd: PsdEstimate, band: Band) -> float:
    """Absolute band power in uV^2 (integral of the density over the band)."""
    return _integrate(psd, band.lo_hz, band.hi_hz)


def total_power(psd: PsdEstimate) -> float:
    """Power over the full 0.1..40 Hz analysis range."""
    return _integrate(psd, *TOTAL_BAND_HZ)


def relative_band_power(psd: PsdEstimate, band: Band) -> float:
    """Band power as a fraction of the 0.1..40 Hz total.

    Raises:
        DegeneratePower: Total power at or below the degeneracy floor.
    """
    total = total_power(psd)
    if total <= DEGENERATE_POWER_UV2:
        raise DegeneratePower(f"total power {total:g} uV^2 is degenerate")
    return band_power(psd, band) / total


def extract_features(epoch: Epoch, nfft: int = DEFAULT_NFFT) -> FeatureVector:
    """Compute the 40-entry feature vector of one filtered, kept epoch.

    Raises:
        DegeneratePower: Any channel's total power is degenerate.
    """
    values = np.empty(len(EEG_CHANNELS) * len(BANDS) * 2, dtype=np.float64)
    pos = 0
    for ch in range(epoch.samples.shape[0]):
        psd = welch_psd(epoch.samples[ch], nfft=nfft)
        powers = [band_power(psd, band) for band in BANDS]
        total = total_power(psd)
        if total <= DEGENERATE_POWER_UV2:
            raise DegeneratePower(
                f"channel {EEG_CHANNELS[ch]} of epoch {epoch.interval_index} "
                f"has degenerate total power {total:g}"
            )
        for p in powers:
            values[pos] = p
            values[pos + 1] = p / total
            pos += 2
    return FeatureVector(values=values, interval_index=epoch.interval_index,
                         state=epoch.state)


def feature_matrix(vectors: Sequence[FeatureVector], session_id: str = "") -> FeatureMatrix:
    """Assemble extracted vectors into a labeled matrix."""
    return FeatureMatrix.from_rows(
        eeg_feature_names(),
        ((v.interval_index, v.state, v.values) for v in vectors),
        session_id=session_id,
    )
