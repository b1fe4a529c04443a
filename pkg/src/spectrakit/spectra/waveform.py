from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy.signal import find_peaks

from spectrakit.errors import NonFiniteIntensity, SpectrumError, TooFewPoints
from spectrakit.spectra.types import WAVEFORM_MODALITIES, WaveformSpectrum

DEFAULT_GRID_STEP = {"IR": 2.0, "Raman": 2.0, "UV": 1.0}
DEFAULT_NOISE_FLOOR = 0.01
DEFAULT_AXIS_RANGE = {"IR": (500.0, 4000.0)}


def clean_waveform(
    raw: Iterable[tuple[float, float]],
    modality: str,
    grid_step: float | None = None,
    noise_floor: float = DEFAULT_NOISE_FLOOR,
    axis_range: tuple[float, float] | None = None,
) -> WaveformSpectrum:
    """Turn a raw (position, intensity) trace into a cleaned peak list.

    The trace is linearly interpolated onto a uniform grid of spacing
    ``grid_step`` (cropped to ``axis_range``), min-max normalized to [0, 1],
    and reduced to the local maxima whose normalized intensity exceeds
    ``noise_floor``. Grid end points count as maxima when they exceed their
    single neighbour, so the strongest retained peak is always exactly 1.

    ``axis_range`` defaults to 500-4000 cm^-1 for IR and to the span of the
    data otherwise.
    """
    if modality not in WAVEFORM_MODALITIES:
        raise SpectrumError(f"modality must be one of {WAVEFORM_MODALITIES}")
    step = DEFAULT_GRID_STEP[modality] if grid_step is None else float(grid_step)
    if not step > 0:
        raise SpectrumError(f"grid_step must be > 0, got {grid_step}")
    if not 0 <= noise_floor < 1:
        raise SpectrumError(f"noise_floor must be in [0, 1), got {noise_floor}")

    data = np.asarray(list(raw), dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise TooFewPoints("need at least two (position, intensity) points")
    if not np.all(np.isfinite(data)):
        raise NonFiniteIntensity("raw trace contains NaN or infinite values")
    data = data[np.argsort(data[:, 0], kind="stable")]
    x, y = data[:, 0], data[:, 1]

    if axis_range is None:
        axis_range = DEFAULT_AXIS_RANGE.get(modality, (math.floor(x[0]), math.ceil(x[-1])))
    low, high = float(axis_range[0]), float(axis_range[1])
    if not high > low:
        raise SpectrumError(f"axis range ({low}, {high}) must satisfy high > low")

    start = max(low, x[0])
    stop = min(high, x[-1])
    if stop < start:
        return WaveformSpectrum(modality, (low, high), ())
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(n)
    values = np.interp(grid, x, y)

    span = values.max() - values.min()
    if span <= 0:
        return WaveformSpectrum(modality, (low, high), ())
    norm = (values - values.min()) / span

    # Pad with -1 so maxima at the grid ends are detected too.
    padded = np.concatenate(([-1.0], norm, [-1.0]))
    idx, _ = find_peaks(padded)
    idx = idx - 1
    keep = [int(i) for i in idx if norm[i] > noise_floor]
    points = tuple((float(grid[i]), float(norm[i])) for i in keep)
    return WaveformSpectrum(modality, (low, high), points)
