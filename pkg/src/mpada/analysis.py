"""Quantitative pipelines: coherent subtraction with time-domain conversion,
and timestamp-interval error statistics with empirical CDF.

All functions are pure and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError
from .vna import FrequencyGrid


@dataclass(frozen=True)
class TomographyDataset:
    """Angle-by-frequency S21 matrix for one scatterer position."""

    s21: np.ndarray  # complex, shape (M, N)
    grid: FrequencyGrid
    position: str

    def __post_init__(self):
        s21 = np.asarray(self.s21, dtype=complex)
        object.__setattr__(self, "s21", s21)
        if s21.ndim != 2 or s21.shape[0] < 1 or s21.shape[1] < 1:
            raise AnalysisError(f"dataset must be a non-empty 2-D matrix, got {s21.shape}")
        if s21.shape[1] != self.grid.n_points:
            raise AnalysisError(
                f"dataset has {s21.shape[1]} columns but grid has {self.grid.n_points} points")


@dataclass(frozen=True)
class DelayStats:
    tau_ms: tuple[float, ...]
    mse_ms2: float
    variance_ms2: float
    mean_abs_ms: float
    cdf: tuple[tuple[float, float], ...]  # (threshold d in ms, P(tau < d))


def average_elements(traces: np.ndarray) -> np.ndarray:
    """Coherent (complex) mean across TX-RX elements, axis 0."""
    traces = np.asarray(traces, dtype=complex)
    if traces.ndim < 2:
        raise AnalysisError("need at least a 2-D stack of element traces")
    return traces.mean(axis=0)


def coherent_subtract_time_domain(sp: TomographyDataset,
                                  so: TomographyDataset) -> np.ndarray:
    """Row-wise inverse DFT of (sp - so): standard IFFT with 1/N on the
    inverse, no window, no zero padding."""
    if sp.s21.shape != so.s21.shape:
        raise AnalysisError(f"shape mismatch: {sp.s21.shape} vs {so.s21.shape}")
    if (sp.grid.start_hz, sp.grid.stop_hz, sp.grid.n_points) != \
            (so.grid.start_hz, so.grid.stop_hz, so.grid.n_points):
        raise AnalysisError("frequency grids differ between datasets")
    return np.fft.ifft(sp.s21 - so.s21, axis=1)


def peak_bins(delta_time_domain: np.ndarray) -> np.ndarray:
    """Per-angle index of max |delta s| over time bins."""
    return np.argmax(np.abs(delta_time_domain), axis=1)


def interval_errors(timestamps_ms, target_ms: float) -> np.ndarray:
    """tau[n] = |T[n] - target| with T[n] = t[n] - t[n-1]."""
    t = np.asarray(timestamps_ms, dtype=float)
    if t.size < 2:
        raise AnalysisError(f"need at least 2 timestamps, got {t.size}")
    intervals = np.diff(t)
    if np.any(intervals <= 0):
        raise AnalysisError("timestamps must be strictly increasing")
    return np.abs(intervals - target_ms)


def delay_statistics(tau_ms, thresholds_ms=None) -> DelayStats:
    """MSE, variance, mean of the absolute interval errors plus the empirical
    CDF P(tau < d) at the given thresholds (strict inequality)."""
    tau = np.asarray(tau_ms, dtype=float)
    if tau.size == 0:
        raise AnalysisError("empty tau list")
    if np.any(tau < 0):
        raise AnalysisError("tau values must be non-negative")
    if thresholds_ms is None:
        thresholds_ms = list(range(1, 51))
    cdf = tuple((float(d), float(np.mean(tau < d))) for d in thresholds_ms)
    return DelayStats(
        tau_ms=tuple(float(x) for x in tau),
        mse_ms2=float(np.mean(tau ** 2)),
        variance_ms2=float(np.mean((tau - tau.mean()) ** 2)),
        mean_abs_ms=float(np.mean(tau)),
        cdf=cdf,
    )


def empirical_cdf_at(tau_ms, d: float) -> float:
    tau = np.asarray(tau_ms, dtype=float)
    if tau.size == 0:
        raise AnalysisError("empty tau list")
    return float(np.mean(tau < d))
