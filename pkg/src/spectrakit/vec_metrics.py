"""Fixed-grid vectorization of IR/MS peak lists and cosine similarity."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from spectrakit.errors import ConfigMismatch
from spectrakit.spectra import MassSpectrum, WaveformSpectrum, parse_spectrum


@dataclass(frozen=True)
class BinningConfig:
    """Half-open grid ``[low, high)`` split into ``k`` bins of ``bin_width``.

    ``spread_sigma`` > 0 switches the deposit rule from single-bin to a
    Gaussian spread (same units as the axis), for sensitivity studies.
    """

    low: float
    high: float
    bin_width: float
    spread_sigma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.high > self.low):
            raise ValueError(f"need high > low, got [{self.low}, {self.high})")
        if not (math.isfinite(self.bin_width) and self.bin_width > 0):
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        if not self.spread_sigma >= 0:
            raise ValueError(f"spread_sigma must be >= 0, got {self.spread_sigma}")

    @property
    def k(self) -> int:
        return max(1, math.ceil((self.high - self.low) / self.bin_width - 1e-9))

    def bin_index(self, position: float) -> int | None:
        if not self.low <= position < self.high:
            return None
        idx = int(math.floor((position - self.low) / self.bin_width))
        return idx if idx < self.k else None

    def centers(self) -> np.ndarray:
        return self.low + self.bin_width * (np.arange(self.k) + 0.5)


IR_BINNING = BinningConfig(500.0, 4000.0, 2.0)
MS_BINNING = BinningConfig(0.0, 1000.0, 1.0)


@dataclass(frozen=True, eq=False)
class SpectrumVector:
    values: np.ndarray
    config: BinningConfig
    dropped: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.config.k,):
            raise ValueError(f"vector length {values.shape} does not match K={self.config.k}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("vector entries must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _peaks_of(spectrum) -> list[tuple[float, float]]:
    if isinstance(spectrum, str):
        spectrum = parse_spectrum(spectrum)
    if isinstance(spectrum, WaveformSpectrum):
        return list(spectrum.points)
    if isinstance(spectrum, MassSpectrum):
        return list(spectrum.peaks)
    raise TypeError(f"cannot vectorize {type(spectrum).__name__}")


def vectorize(spectrum, cfg: BinningConfig) -> SpectrumVector:
    """Deposit each peak's intensity into the bin containing its position.

    Peaks outside ``[low, high)`` are dropped and counted in ``dropped``.
    """
    values = np.zeros(cfg.k)
    dropped = 0
    centers = cfg.centers() if cfg.spread_sigma > 0 else None
    for position, intensity in _peaks_of(spectrum):
        idx = cfg.bin_index(position)
        if idx is None:
            dropped += 1
            continue
        if centers is None:
            values[idx] += intensity
        else:
            kernel = np.exp(-0.5 * ((centers - position) / cfg.spread_sigma) ** 2)
            values += intensity * kernel / kernel.sum()
    return SpectrumVector(values, cfg, dropped)


def cosine_similarity(p: SpectrumVector, q: SpectrumVector) -> float:
    """``p.q / (|p| |q|)``; 0 when either vector is all zeros.

    >>> cfg = BinningConfig(0, 3, 1)
    >>> round(cosine_similarity(SpectrumVector([1, 1, 0], cfg), SpectrumVector([1, 0, 0], cfg)), 5)
    0.70711
    """
    if p.config != q.config:
        raise ConfigMismatch(f"binning differs: {p.config} vs {q.config}")
    pp = float(np.dot(p.values, p.values))
    qq = float(np.dot(q.values, q.values))
    if pp == 0.0 or qq == 0.0:
        return 0.0
    # sqrt(pp * qq) rather than |p| |q| so that cos(p, p) is exactly 1.
    norm = math.sqrt(pp * qq)
    if not math.isfinite(norm) or norm == 0.0:
        norm = math.sqrt(pp) * math.sqrt(qq)
    value = float(np.dot(p.values, q.values)) / norm
    return min(1.0, max(-1.0, value))


def write_vector_csv(vec: SpectrumVector, stream: TextIO) -> None:
    """Write ``bin_center,value`` rows for external plotting."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["bin_center", "value"])
    for center, value in zip(vec.config.centers(), vec.values):
        writer.writerow([f"{center:g}", repr(float(value))])
