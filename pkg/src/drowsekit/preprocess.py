"""Epoching, FIR band-limiting, and amplitude-based artifact rejection.

The pipeline order is: cut the recording into 30-second epochs aligned to
the labeling grid, band-limit each epoch with a 0.1 Hz high-pass and a
40 Hz low-pass, then drop epochs whose post-filter samples exceed the
amplitude threshold too often. All operations are pure; epochs filter
independently.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import AlreadyFiltered, InvalidCutoff, InvalidTransition, SubsetViolation
from .session import (
    EEG_SAMPLE_RATE_HZ,
    ORD_INTERVAL_SECONDS,
    BinaryState,
    EegRecording,
    OrdLabelTrack,
    majority_label,
)

logger = logging.getLogger(__name__)

EPOCH_SAMPLES = int(ORD_INTERVAL_SECONDS * EEG_SAMPLE_RATE_HZ)  # 7680

DEFAULT_AMPLITUDE_THRESHOLD_UV = 70.0
DEFAULT_MAX_OUTLIER_FRACTION = 0.30

# Hamming-window design: tap count N ~ 3.3 * fs / transition width.
_HAMMING_TAP_FACTOR = 3.3


class FilterKind(Enum):
    LOW_PASS = "low_pass"
    HIGH_PASS = "high_pass"


class ArtifactVerdict(Enum):
    KEEP = "keep"
    DROP = "drop"


@dataclass(frozen=True)
class Epoch:
    """One 30-second, 4-channel EEG segment with its binary state label."""

    interval_index: int
    state: BinaryState
    samples: np.ndarray  # shape (4, 7680), microvolts
    filtered: bool = False


@dataclass(frozen=True)
class EpochSet:
    """Kept epochs plus the rejection record for dropped ones."""

    epochs: tuple[Epoch, ...]
    dropped: tuple[tuple[int, float], ...]  # (interval_index, outlier_fraction)


@dataclass(frozen=True)
class FilterKernel:
    """Linear-phase FIR kernel with an odd tap count (integer group delay)."""

    taps: np.ndarray
    kind: FilterKind
    cutoff_hz: float
    sample_rate_hz: float

    @property
    def delay(self) -> int:
        return (len(self.taps) - 1) // 2


@dataclass(frozen=True)
class DenoiseSummary:
    """Pre/post epoch counts split by state, with the removal fraction."""

    pre_alert: int
    pre_drowsy: int
    post_alert: int
    post_drowsy: int
    removal_fraction: float

    @classmethod
    def from_counts(cls, pre_alert: int, pre_drowsy: int,
                    post_alert: int, post_drowsy: int) -> "DenoiseSummary":
        if post_alert > pre_alert or post_drowsy > pre_drowsy:
            raise SubsetViolation(
                f"post counts ({post_alert}, {post_drowsy}) exceed "
                f"pre counts ({pre_alert}, {pre_drowsy})"
            )
        pre_total = pre_alert + pre_drowsy
        fraction = 0.0
        if pre_total > 0:
            fraction = 1.0 - (post_alert + post_drowsy) / pre_total
        return cls(pre_alert, pre_drowsy, post_alert, post_drowsy, fraction)

    @property
    def pre_total(self) -> int:
        return self.pre_alert + self.pre_drowsy

    @property
    def post_total(self) -> int:
        return self.post_alert + self.post_drowsy

    @property
    def removal_percent(self) -> float:
        """Removal fraction as a percentage, rounded half-up to 2 decimals."""
        return float(Decimal(repr(self.removal_fraction * 100.0))
                     .quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))

    def combine(self, other: "DenoiseSummary") -> "DenoiseSummary":
        return DenoiseSummary.from_counts(
            self.pre_alert + other.pre_alert,
            self.pre_drowsy + other.pre_drowsy,
            self.post_alert + other.post_alert,
            self.post_drowsy + other.post_drowsy,
        )

    def to_json_dict(self) -> dict:
        return {
            "pre_alert": self.pre_alert,
            "pre_drowsy": self.pre_drowsy,
            "pre_total": self.pre_total,
            "post_alert": self.post_alert,
            "post_drowsy": self.post_drowsy,
            "post_total": self.post_total,
            "removal_percent": self.removal_percent,
        }


def epoch_signal(recording: EegRecording, labels: OrdLabelTrack) -> list[Epoch]:
    """Cut the recording into one epoch per fully covered label interval.

    Each epoch carries the majority vote of its interval's ratings.
    Trailing samples that do not fill an interval are discarded; intervals
    extending past the recording are skipped (a warning logs the count).
    """
    n = recording.n_samples
    rate = recording.sample_rate_hz
    epochs: list[Epoch] = []
    skipped = 0
    for iv in labels.intervals:
        t0 = iv.index * labels.interval_seconds
        s0 = int(round((t0 - recording.start_time_s) * rate))
        if s0 < 0 or s0 + EPOCH_SAMPLES > n:
            skipped += 1
            continue
        samples = np.stack([np.asarray(c)[s0:s0 + EPOCH_SAMPLES] for c in recording.channels])
        epochs.append(Epoch(
            interval_index=iv.index,
            state=majority_label(iv.ratings),
            samples=samples,
        ))
    if skipped:
        logger.warning("skipped %d label interval(s) not fully covered by the recording", skipped)
    return epochs


def design_fir(kind: FilterKind, cutoff_hz: float,
               sample_rate_hz: float = EEG_SAMPLE_RATE_HZ,
               transition_hz: float = 1.0) -> FilterKernel:
    """Design a linear-phase windowed-sinc FIR kernel.

    A Hamming-windowed sinc gives the low-pass prototype; the tap count is
    the smallest odd integer >= 3.3 * sample_rate / transition width. The
    high-pass is the spectral inversion of the complementary low-pass, so
    its taps sum to zero exactly (DC null). Either kind passes half
    amplitude (-6 dB) at the cutoff.

    Args:
        kind: LOW_PASS or HIGH_PASS.
        cutoff_hz: -6 dB point; must lie in (0, sample_rate / 2).
        sample_rate_hz: Design rate of the kernel.
        transition_hz: Transition band width; sets the tap count.

    Raises:
        InvalidCutoff: Cutoff outside (0, Nyquist).
        InvalidTransition: Non-positive transition width.
    """
    if not 0.0 < cutoff_hz < sample_rate_hz / 2.0:
        raise InvalidCutoff(f"cutoff {cutoff_hz} Hz outside (0, {sample_rate_hz / 2:g})")
    if transition_hz <= 0.0:
        raise InvalidTransition(f"transition width must be positive, got {transition_hz}")

    n = math.ceil(_HAMMING_TAP_FACTOR * sample_rate_hz / transition_hz)
    if n % 2 == 0:
        n += 1
    k = np.arange(n) - (n - 1) // 2
    fc = 2.0 * cutoff_hz / sample_rate_hz
    taps = fc * np.sinc(fc * k) * np.hamming(n)
    taps /= taps.sum()  # exact unit DC gain
    if kind is FilterKind.HIGH_PASS:
        taps = -taps
        taps[(n - 1) // 2] += 1.0
    return FilterKernel(taps=taps, kind=kind, cutoff_hz=cutoff_hz,
                        sample_rate_hz=sample_rate_hz)


def apply_kernel(samples: np.ndarray, kernel: FilterKernel) -> np.ndarray:
    """Convolve along the last axis with mirror padding and zero net delay.

    Padding by the group delay on each side and taking the valid part of
    the convolution aligns output sample k with input sample k and keeps
    the length unchanged.
    """
    pad = [(0, 0)] * (samples.ndim - 1) + [(kernel.delay, kernel.delay)]
    padded = np.pad(samples, pad, mode="reflect")
    taps = kernel.taps.reshape((1,) * (samples.ndim - 1) + (-1,))
    return fftconvolve(padded, taps, mode="valid", axes=-1)


def filter_epoch(epoch: Epoch, hp: FilterKernel, lp: FilterKernel) -> Epoch:
    """Band-limit one epoch: high-pass then low-pass on every channel.

    Raises:
        AlreadyFiltered: The epoch was filtered before.
    """
    if epoch.filtered:
        raise AlreadyFiltered(f"epoch {epoch.interval_index} is already filtered")
    out = apply_kernel(apply_kernel(epoch.samples, hp), lp)
    return replace(epoch, samples=out, filtered=True)


def artifact_decision(epoch: Epoch,
                      amplitude_threshold_uv: float = DEFAULT_AMPLITUDE_THRESHOLD_UV,
                      max_outlier_fraction: float = DEFAULT_MAX_OUTLIER_FRACTION,
                      per_channel: bool = False) -> tuple[ArtifactVerdict, float]:
    """Keep/drop verdict from the fraction of samples beyond the threshold.

    By default outliers are pooled across all channels; with
    ``per_channel`` the reported fraction is the worst single channel's.
    The epoch is dropped only when the fraction strictly exceeds
    ``max_outlier_fraction``. Applies to filtered epochs.
    """
    outliers = np.abs(epoch.samples) > amplitude_threshold_uv
    if per_channel:
        fraction = float(np.max(np.mean(outliers, axis=-1)))
    else:
        fraction = float(np.mean(outliers))
    verdict = ArtifactVerdict.DROP if fraction > max_outlier_fraction else ArtifactVerdict.KEEP
    return verdict, fraction


def denoise_epochs(epochs: Sequence[Epoch],
                   amplitude_threshold_uv: float = DEFAULT_AMPLITUDE_THRESHOLD_UV,
                   max_outlier_fraction: float = DEFAULT_MAX_OUTLIER_FRACTION,
                   per_channel: bool = False) -> EpochSet:
    """Partition filtered epochs into kept and dropped."""
    kept: list[Epoch] = []
    dropped: list[tuple[int, float]] = []
    for ep in epochs:
        verdict, fraction = artifact_decision(
            ep, amplitude_threshold_uv, max_outlier_fraction, per_channel)
        if verdict is ArtifactVerdict.KEEP:
            kept.append(ep)
        else:
            dropped.append((ep.interval_index, fraction))
    return EpochSet(epochs=tuple(kept), dropped=tuple(dropped))


def _count_states(epochs: Iterable[Epoch]) -> tuple[int, int]:
    alert = drowsy = 0
    for ep in epochs:
        if ep.state is BinaryState.ALERT:
            alert += 1
        else:
            drowsy += 1
    return alert, drowsy


def denoise_summary(pre: Sequence[Epoch], post: EpochSet) -> DenoiseSummary:
    """Tabulate pre/post denoising epoch counts by state.

    Raises:
        SubsetViolation: ``post`` contains an interval absent from ``pre``.
    """
    pre_indices = {ep.interval_index for ep in pre}
    bad = [ep.interval_index for ep in post.epochs if ep.interval_index not in pre_indices]
    if bad:
        raise SubsetViolation(f"kept epochs {bad} are not among the input epochs")
    pre_alert, pre_drowsy = _count_states(pre)
    post_alert, post_drowsy = _count_states(post.epochs)
    return DenoiseSummary.from_counts(pre_alert, pre_drowsy, post_alert, post_drowsy)
