from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError

MIN_PAIRS = 4
MIN_OCTAVES = 3.0


@dataclass(frozen=True)
class RateFit:
    scales: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    residual: float  # RMS of the log-log residuals


def fit_loglog_slope(pairs) -> RateFit:
    """Least-squares slope of log(value) against log(scale)."""
    pairs = [(float(s), float(v)) for s, v in pairs]
    if len(pairs) < MIN_PAIRS:
        raise DegenerateDataError(f"need at least {MIN_PAIRS} pairs, got {len(pairs)}")
    scales = np.array([s for s, _ in pairs])
    values = np.array([v for _, v in pairs])
    if np.any(scales <= 0) or np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise DegenerateDataError("scales and values must be positive and finite")
    octaves = math.log2(scales.max() / scales.min())
    if octaves < MIN_OCTAVES:
        raise DegenerateDataError(f"scales span {octaves:.2f} octaves, need {MIN_OCTAVES}")
    x = np.log(scales)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(tuple(scales), tuple(values), float(slope), float(intercept), resid)
