"""Deterministic synthetic sessions with controllable drowsiness effects.

The generator is a statistical test instrument, not a physiological
simulator: per band it emits a comb of fixed-frequency, random-phase
sinusoids whose total power is known analytically (amplitude^2 / 2), so
extracted band powers can be checked against the configuration. Drowsy
intervals scale selected band amplitudes and shift selected telemetry
means. Everything is a pure function of (spec, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping

import numpy as np

from .errors import InvalidSpec
from .preprocess import EPOCH_SAMPLES
from .session import (
    EEG_CHANNELS,
    EEG_SAMPLE_RATE_HZ,
    ORD_INTERVAL_SECONDS,
    VEHICLE_SERIES,
    EegRecording,
    OrdInterval,
    OrdLabelTrack,
    Session,
    VehicleTelemetry,
)
from .spectral import BANDS

BAND_NAMES = tuple(b.name for b in BANDS)

DEFAULT_BAND_AMPLITUDES_UV = {
    "delta": 20.0,
    "theta": 10.0,
    "alpha": 10.0,
    "beta": 5.0,
    "gamma": 3.0,
}

# Comb frequencies stay inside the flat region of the 0.1/40 Hz filters
# (away from the high-pass ramp, the low-pass roll-off, and band edges),
# so realized band powers track the analytic target.
COMB_PLACEMENT_HZ = {
    "delta": (0.8, 3.6),
    "theta": (4.4, 7.6),
    "alpha": (8.4, 12.6),
    "beta": (13.4, 29.6),
    "gamma": (30.4, 37.5),
}

ALERT_RATING = 1
DROWSY_RATING = 4

# Injected artifact blocks: an alternating-sign oscillation far above the
# rejection threshold survives band-limiting at nearly full amplitude.
OUTLIER_BLOCK_AMPLITUDE_UV = 700.0
OUTLIER_BLOCK_HZ = 8.0


def _uniform_amplitudes() -> dict[str, dict[str, float]]:
    return {ch: dict(DEFAULT_BAND_AMPLITUDES_UV) for ch in EEG_CHANNELS}


def _unit_multipliers() -> dict[str, float]:
    return {b: 1.0 for b in BAND_NAMES}


def _zero_series() -> dict[str, float]:
    return {s: 0.0 for s in VEHICLE_SERIES}


@dataclass(frozen=True)
class SynthSpec:
    """Configuration of one synthetic session."""

    n_intervals: int = 20
    drowsy_fraction: float = 0.5
    band_amplitudes_uv: Mapping[str, Mapping[str, float]] = field(
        default_factory=_uniform_amplitudes)
    drowsy_band_multipliers: Mapping[str, float] = field(default_factory=_unit_multipliers)
    noise_floor_uv: float = 2.0
    outlier_rate: float = 0.0
    include_telemetry: bool = True
    telemetry_rate_hz: float = 50.0
    telemetry_baseline: Mapping[str, float] = field(default_factory=_zero_series)
    telemetry_noise: float = 1.0
    drowsy_telemetry_shift: Mapping[str, float] = field(default_factory=_zero_series)

    def validate(self) -> None:
        """Raise InvalidSpec on any out-of-range field."""
        if self.n_intervals <= 0:
            raise InvalidSpec(f"n_intervals must be positive, got {self.n_intervals}")
        if not 0.0 <= self.drowsy_fraction <= 1.0:
            raise InvalidSpec(f"drowsy_fraction {self.drowsy_fraction} outside [0, 1]")
        if not 0.0 <= self.outlier_rate <= 1.0:
            raise InvalidSpec(f"outlier_rate {self.outlier_rate} outside [0, 1]")
        if self.noise_floor_uv < 0:
            raise InvalidSpec("noise_floor_uv must be non-negative")
        if self.include_telemetry and self.telemetry_rate_hz <= 0:
            raise InvalidSpec("telemetry_rate_hz must be positive")
        if self.telemetry_noise < 0:
            raise InvalidSpec("telemetry_noise must be non-negative")
        for ch in EEG_CHANNELS:
            bands = self.band_amplitudes_uv.get(ch)
            if bands is None:
                raise InvalidSpec(f"band_amplitudes_uv missing channel {ch}")
            for b in BAND_NAMES:
                amp = bands.get(b)
                if amp is None or amp < 0:
                    raise InvalidSpec(f"bad amplitude for {ch}/{b}: {amp!r}")
        for b in BAND_NAMES:
            mult = self.drowsy_band_multipliers.get(b)
            if mult is None or mult <= 0:
                raise InvalidSpec(f"drowsy multiplier for {b} must be positive, got {mult!r}")
        for s in VEHICLE_SERIES:
            if s not in self.telemetry_baseline or s not in self.drowsy_telemetry_shift:
                raise InvalidSpec(f"telemetry configuration missing series {s}")

    def to_json_dict(self) -> dict:
        return {
            "n_intervals": self.n_intervals,
            "drowsy_fraction": self.drowsy_fraction,
            "band_amplitudes_uv": {ch: dict(b) for ch, b in self.band_amplitudes_uv.items()},
            "drowsy_band_multipliers": dict(self.drowsy_band_multipliers),
            "noise_floor_uv": self.noise_floor_uv,
            "outlier_rate": self.outlier_rate,
            "include_telemetry": self.include_telemetry,
            "telemetry_rate_hz": self.telemetry_rate_hz,
            "telemetry_baseline": dict(self.telemetry_baseline),
            "telemetry_noise": self.telemetry_noise,
            "drowsy_telemetry_shift": dict(self.drowsy_telemetry_shift),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "SynthSpec":
        """Build a spec from parsed JSON, filling defaults for absent keys.

        ``band_amplitudes_uv`` accepts either a flat band->amplitude
        mapping (applied to all channels) or a full per-channel mapping;
        partial mappings overlay the defaults.
        """
        kwargs: dict = {}
        for key in ("n_intervals", "drowsy_fraction", "noise_floor_uv", "outlier_rate",
                    "include_telemetry", "telemetry_rate_hz", "telemetry_noise"):
            if key in data:
                kwargs[key] = data[key]
        if "band_amplitudes_uv" in data:
            raw = data["band_amplitudes_uv"]
            amps = _uniform_amplitudes()
            if raw and all(isinstance(v, (int, float)) for v in raw.values()):
                for ch in amps:
                    amps[ch].update({k: float(v) for k, v in raw.items()})
            else:
                for ch, bands in raw.items():
                    if ch in amps:
                        amps[ch].update({k: float(v) for k, v in bands.items()})
            kwargs["band_amplitudes_uv"] = amps
        for key, default in (("drowsy_band_multipliers", _unit_multipliers),
                             ("telemetry_baseline", _zero_series),
                             ("drowsy_telemetry_shift", _zero_series)):
            if key in data:
                merged = default()
                merged.update({k: float(v) for k, v in data[key].items()})
                kwargs[key] = merged
        return cls(**kwargs)


def load_synth_spec(source: IO[str] | str | Path) -> SynthSpec:
    """Load a spec from a JSON file or stream."""
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        data = json.load(source)
    if not isinstance(data, dict):
        raise InvalidSpec(f"spec JSON must be an object, got {type(data).__name__}")
    return SynthSpec.from_json_dict(data)


def target_band_power_uv2(amplitude_uv: float) -> float:
    """Analytic band power of a comb with the given total amplitude."""
    return amplitude_uv * amplitude_uv / 2.0


def _comb(rng: np.random.Generator, lo_hz: float, hi_hz: float,
          amplitude_uv: float, t: np.ndarray) -> np.ndarray:
    """Random-phase sinusoid comb with total power amplitude^2 / 2."""
    m = max(3, int(round((hi_hz - lo_hz) * 2.0)))
    freqs = np.linspace(lo_hz, hi_hz, m)
    phases = rng.uniform(0.0, 2.0 * np.pi, m)
    per_tone = amplitude_uv / math.sqrt(m)
    return per_tone * np.sin(
        2.0 * np.pi * freqs[:, None] * t[None, :] + phases[:, None]
    ).sum(axis=0)


def _outlier_block(rng: np.random.Generator, rate: float) -> tuple[int, np.ndarray]:
    n_out = int(round(rate * EPOCH_SAMPLES))
    start = int(rng.integers(0, EPOCH_SAMPLES - n_out + 1)) if n_out < EPOCH_SAMPLES else 0
    t = np.arange(n_out) / EEG_SAMPLE_RATE_HZ
    block = OUTLIER_BLOCK_AMPLITUDE_UV * np.sign(
        np.sin(2.0 * np.pi * OUTLIER_BLOCK_HZ * t + 0.25 * np.pi))
    return start, block


def generate_session(spec: SynthSpec, seed: int) -> Session:
    """Generate a complete session deterministically from (spec, seed).

    Interval states are an exact-count random assignment of
    ``round(n_intervals * drowsy_fraction)`` drowsy intervals; drowsy
    intervals scale each band's amplitude by its multiplier and shift the
    telemetry means. Labels carry three identical ratings (1 when alert,
    4 when drowsy).

    Raises:
        InvalidSpec: The spec fails validation.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    n = spec.n_intervals

    n_drowsy = int(round(n * spec.drowsy_fraction))
    drowsy = np.zeros(n, dtype=bool)
    drowsy[rng.permutation(n)[:n_drowsy]] = True

    t_epoch = np.arange(EPOCH_SAMPLES) / EEG_SAMPLE_RATE_HZ
    channels = [np.empty(n * EPOCH_SAMPLES) for _ in EEG_CHANNELS]
    for k in range(n):
        for ci, ch in enumerate(EEG_CHANNELS):
            x = rng.normal(0.0, spec.noise_floor_uv, EPOCH_SAMPLES)
            for band in BANDS:
                amp = spec.band_amplitudes_uv[ch][band.name]
                if drowsy[k]:
                    amp *= spec.drowsy_band_multipliers[band.name]
                lo, hi = COMB_PLACEMENT_HZ[band.name]
                x += _comb(rng, lo, hi, amp, t_epoch)
            if spec.outlier_rate > 0.0:
                start, block = _outlier_block(rng, spec.outlier_rate)
                x[start:start + len(block)] += block
            channels[ci][k * EPOCH_SAMPLES:(k + 1) * EPOCH_SAMPLES] = x

    eeg = EegRecording(channels=tuple(channels))

    intervals = tuple(
        OrdInterval(index=k, ratings=(DROWSY_RATING,) * 3 if drowsy[k] else (ALERT_RATING,) * 3)
        for k in range(n)
    )
    labels = OrdLabelTrack(intervals=intervals)

    telemetry = None
    if spec.include_telemetry:
        per_interval = int(round(spec.telemetry_rate_hz * ORD_INTERVAL_SECONDS))
        n_samples = per_interval * n
        drowsy_mask = np.repeat(drowsy, per_interval)
        series = []
        for name in VEHICLE_SERIES:
            values = spec.telemetry_baseline[name] + rng.normal(
                0.0, spec.telemetry_noise, n_samples)
            values[drowsy_mask] += spec.drowsy_telemetry_shift[name]
            series.append(values)
        telemetry = VehicleTelemetry(series=tuple(series),
                                     sample_rate_hz=spec.telemetry_rate_hz)

    return Session(id=f"synth-{seed}", eeg=eeg, labels=labels, telemetry=telemetry)
