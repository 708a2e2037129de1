"""Domain model: recordings, telemetry, observer ratings, and sessions.

All types are immutable after construction and safe to share across
threads. Construction does not enforce semantic invariants; use
:func:`validate_session` to obtain a machine-readable violation listing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidRating

EEG_CHANNELS = ("TP9", "AF7", "AF8", "TP10")
EEG_SAMPLE_RATE_HZ = 256.0
ORD_INTERVAL_SECONDS = 30.0
NUM_RATERS = 3
RATING_MIN = 1
RATING_MAX = 5

VEHICLE_SERIES = ("steer_angle", "steer_speed", "lane_deviation", "torque")


class BinaryState(Enum):
    """Two-valued drowsiness state derived from observer ratings."""

    ALERT = "alert"
    DROWSY = "drowsy"


@dataclass(frozen=True)
class EegRecording:
    """Multi-channel EEG amplitudes in microvolts.

    Attributes:
        channels: One amplitude array per channel, ordered as
            ``channel_names``. Kept as separate arrays so malformed
            (ragged) inputs remain representable for validation.
        sample_rate_hz: Samples per second; the supported devices record
            at 256 Hz and other rates are flagged by validation.
        channel_names: Electrode labels, expected ``(TP9, AF7, AF8, TP10)``.
        start_time_s: Offset of the first sample on the session clock.
    """

    channels: tuple[np.ndarray, ...]
    sample_rate_hz: float = EEG_SAMPLE_RATE_HZ
    channel_names: tuple[str, ...] = EEG_CHANNELS
    start_time_s: float = 0.0

    @property
    def n_samples(self) -> int:
        return min((len(c) for c in self.channels), default=0)

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass(frozen=True)
class VehicleTelemetry:
    """Simulator telemetry series, ordered as ``VEHICLE_SERIES``.

    Units: degrees, degrees/second, meters, newton-meters. The telemetry
    clock is independent of the EEG clock; ``sample_rate_hz`` is whatever
    the simulator exported.
    """

    series: tuple[np.ndarray, ...]
    sample_rate_hz: float
    start_time_s: float = 0.0

    @property
    def n_samples(self) -> int:
        return min((len(s) for s in self.series), default=0)

    def timestamps(self) -> np.ndarray:
        """Session-clock timestamp of every sample."""
        return self.start_time_s + np.arange(self.n_samples) / self.sample_rate_hz


@dataclass(frozen=True)
class OrdInterval:
    """One labeling interval: index on the 30 s grid plus three observer ratings."""

    index: int
    ratings: tuple[int, int, int]


@dataclass(frozen=True)
class OrdLabelTrack:
    """Observer drowsiness ratings on a fixed 30-second grid."""

    intervals: tuple[OrdInterval, ...]
    interval_seconds: float = ORD_INTERVAL_SECONDS

    def __len__(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class Session:
    """One subject's aligned EEG, optional telemetry, and label track.

    EEG, telemetry, and labels share a session-relative clock starting at
    zero; label interval ``k`` spans ``[30k, 30(k+1))`` seconds.
    """

    id: str
    eeg: EegRecording
    labels: OrdLabelTrack
    telemetry: VehicleTelemetry | None = None


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate_session`."""

    code: str
    message: str


def majority_label(ratings: Sequence[int]) -> BinaryState:
    """Combine three observer ratings into a binary state.

    The vote is the median of the three integer ratings; a median of 1 or
    2 maps to ALERT and 3 through 5 to DROWSY.

    Raises:
        InvalidRating: If any rating is outside 1..5 or not three ratings
            were given.
    """
    if len(ratings) != NUM_RATERS:
        raise InvalidRating(f"expected {NUM_RATERS} ratings, got {len(ratings)}")
    for r in ratings:
        if not (isinstance(r, (int, np.integer)) and RATING_MIN <= r <= RATING_MAX):
            raise InvalidRating(f"rating {r!r} outside {RATING_MIN}..{RATING_MAX}")
    median = sorted(ratings)[1]
    return BinaryState.ALERT if median <= 2 else BinaryState.DROWSY


def validate_session(session: Session) -> list[Violation]:
    """Check every session invariant and return the violations found.

    Never raises and never mutates its input; an empty list means the
    session is well-formed for the downstream pipeline.
    """
    out: list[Violation] = []
    eeg = session.eeg

    if len(eeg.channels) != len(EEG_CHANNELS):
        out.append(Violation(
            "WrongChannelCount",
            f"expected {len(EEG_CHANNELS)} EEG channels, got {len(eeg.channels)}",
        ))
    if tuple(eeg.channel_names) != EEG_CHANNELS:
        out.append(Violation(
            "WrongChannelNames",
            f"expected channels {EEG_CHANNELS}, got {tuple(eeg.channel_names)}",
        ))
    if eeg.sample_rate_hz != EEG_SAMPLE_RATE_HZ:
        out.append(Violation(
            "WrongSampleRate",
            f"EEG sample rate {eeg.sample_rate_hz} Hz, expected {EEG_SAMPLE_RATE_HZ:g} Hz",
        ))
    lengths = {len(c) for c in eeg.channels}
    if len(lengths) > 1:
        out.append(Violation(
            "ChannelLengthMismatch",
            f"EEG channel lengths differ: {sorted(lengths)}",
        ))

    tel = session.telemetry
    if tel is not None:
        if tel.sample_rate_hz <= 0:
            out.append(Violation(
                "InvalidTelemetryRate",
                f"telemetry sample rate must be positive, got {tel.sample_rate_hz}",
            ))
        if len(tel.series) != len(VEHICLE_SERIES):
            out.append(Violation(
                "WrongTelemetrySeriesCount",
                f"expected {len(VEHICLE_SERIES)} telemetry series, got {len(tel.series)}",
            ))
        tlengths = {len(s) for s in tel.series}
        if len(tlengths) > 1:
            out.append(Violation(
                "TelemetryLengthMismatch",
                f"telemetry series lengths differ: {sorted(tlengths)}",
            ))

    for pos, iv in enumerate(session.labels.intervals):
        if iv.index != pos:
            out.append(Violation(
                "NonContiguousIntervals",
                f"interval at position {pos} has index {iv.index}",
            ))
            break
    for iv in session.labels.intervals:
        bad = [r for r in iv.ratings if not RATING_MIN <= r <= RATING_MAX]
        if bad:
            out.append(Violation(
                "InvalidRating",
                f"interval {iv.index} has out-of-range ratings {bad}",
            ))

    covered = len(session.labels) * session.labels.interval_seconds
    slack = session.labels.interval_seconds
    if covered > eeg.duration_s + slack + 1e-9:
        out.append(Violation(
            "CoverageMismatch",
            f"labels cover {covered:g} s but EEG lasts {eeg.duration_s:g} s",
        ))

    return out


def make_eeg_recording(channels: Sequence[Sequence[float]],
                       sample_rate_hz: float = EEG_SAMPLE_RATE_HZ,
                       channel_names: Sequence[str] = EEG_CHANNELS,
                       start_time_s: float = 0.0) -> EegRecording:
    """Build a recording from array-likes, coercing each channel to float64."""
    return EegRecording(
        channels=tuple(np.asarray(c, dtype=np.float64) for c in channels),
        sample_rate_hz=sample_rate_hz,
        channel_names=tuple(channel_names),
        start_time_s=start_time_s,
    )


def make_telemetry(series: Sequence[Sequence[float]],
                   sample_rate_hz: float,
                   start_time_s: float = 0.0) -> VehicleTelemetry:
    """Build telemetry from array-likes, coercing each series to float64."""
    return VehicleTelemetry(
        series=tuple(np.asarray(s, dtype=np.float64) for s in series),
        sample_rate_hz=sample_rate_hz,
        start_time_s=start_time_s,
    )
