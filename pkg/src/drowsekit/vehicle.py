"""Per-interval aggregation of vehicle telemetry.

Telemetry is reduced to one mean value per series per 30-second labeling
interval so vehicle features line up with the EEG epochs for comparison.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import FeatureMatrix
from .session import (
    VEHICLE_SERIES,
    BinaryState,
    OrdLabelTrack,
    VehicleTelemetry,
    majority_label,
)

logger = logging.getLogger(__name__)

# Minimum fraction of an interval's expected samples required for its mean.
MIN_COVERAGE = 0.5


@dataclass(frozen=True)
class VehicleFeatureVector:
    """Interval means of (steer_angle, steer_speed, lane_deviation, torque)."""

    values: np.ndarray
    interval_index: int
    state: BinaryState


def interval_aggregate(telemetry: VehicleTelemetry, labels: OrdLabelTrack,
                       abs_mean: bool = False) -> list[VehicleFeatureVector]:
    """Average each telemetry series over every labeling interval.

    A sample belongs to interval k when its timestamp falls in
    ``[30k, 30(k+1))``. Intervals holding less than half their expected
    samples are skipped (a warning logs the count). ``abs_mean`` switches
    to the mean of absolute values, removing signed cancellation.
    """
    t = telemetry.timestamps()
    step = labels.interval_seconds
    expected = telemetry.sample_rate_hz * step
    data = np.stack([np.asarray(s)[:telemetry.n_samples] for s in telemetry.series])
    if abs_mean:
        data = np.abs(data)

    out: list[VehicleFeatureVector] = []
    skipped = 0
    for iv in labels.intervals:
        lo = iv.index * step
        mask = (t >= lo) & (t < lo + step)
        count = int(mask.sum())
        if count < MIN_COVERAGE * expected:
            skipped += 1
            continue
        out.append(VehicleFeatureVector(
            values=data[:, mask].mean(axis=1),
            interval_index=iv.index,
            state=majority_label(iv.ratings),
        ))
    if skipped:
        logger.warning("skipped %d interval(s) with telemetry coverage below %.0f%%",
                       skipped, MIN_COVERAGE * 100)
    return out


def vehicle_feature_matrix(vectors: Sequence[VehicleFeatureVector],
                           session_id: str = "") -> FeatureMatrix:
    """Assemble aggregated intervals into a labeled matrix."""
    return FeatureMatrix.from_rows(
        VEHICLE_SERIES,
        ((v.interval_index, v.state, v.values) for v in vectors),
        session_id=session_id,
    )
