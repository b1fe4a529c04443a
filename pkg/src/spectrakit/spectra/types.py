from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import ClassVar, Union

from spectrakit.errors import SpectrumError

WAVEFORM_MODALITIES = ("IR", "Raman", "UV")
MS_MODES = ("positive", "negative")
KNOWN_MULTIPLICITIES = frozenset(
    ["s", "d", "t", "q", "p", "h", "m", "dd", "dt", "td", "tt", "ddd", "dq", "qd", "br", "br s", "br d", "sept"]
)

_SOLVENT_FORBIDDEN = re.compile(r"[(),<>\n\r]")
_SHAPE_RE = re.compile(r"^[A-Za-z][A-Za-z ]*[A-Za-z]$|^[A-Za-z]$")


def _finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise SpectrumError(f"{what} must be finite, got {value}")
    return value


def _check_header(frequency: float | None, solvent: str | None) -> tuple[float | None, str | None]:
    if frequency is not None:
        frequency = _finite(frequency, "frequency")
        if frequency <= 0:
            raise SpectrumError(f"frequency must be positive, got {frequency}")
    if solvent is not None:
        if not isinstance(solvent, str) or solvent != solvent.strip() or not solvent:
            raise SpectrumError(f"solvent must be a non-empty trimmed string, got {solvent!r}")
        if _SOLVENT_FORBIDDEN.search(solvent) or solvent == "unknown":
            raise SpectrumError(f"solvent label {solvent!r} is not representable")
    return frequency, solvent


def is_known_multiplicity(shape: str) -> bool:
    """True for standard multiplicity codes; anything else is kept as free text."""
    return shape in KNOWN_MULTIPLICITIES


@dataclass(frozen=True)
class CarbonSpectrum:
    """13C peak list (chemical shifts in ppm), stored in descending order."""

    shifts: tuple[float, ...]
    frequency: float | None = None
    solvent: str | None = None

    modality: ClassVar[str] = "13C_NMR"

    def __post_init__(self):
        shifts = tuple(_finite(s, "shift") for s in self.shifts)
        for s in shifts:
            if not -50.0 <= s <= 350.0:
                raise SpectrumError(f"13C shift {s} outside [-50, 350] ppm")
        object.__setattr__(self, "shifts", tuple(sorted(shifts, reverse=True)))
        freq, solvent = _check_header(self.frequency, self.solvent)
        object.__setattr__(self, "frequency", freq)


@dataclass(frozen=True)
class ProtonPeak:
    centroid: float
    shape: str = "s"
    j_values: tuple[float, ...] = ()
    n_h: int = 1

    def __post_init__(self):
        centroid = _finite(self.centroid, "centroid")
        if not -2.0 <= centroid <= 20.0:
            raise SpectrumError(f"1H centroid {centroid} outside [-2, 20] ppm")
        object.__setattr__(self, "centroid", centroid)
        if not isinstance(self.shape, str) or not _SHAPE_RE.match(self.shape):
            raise SpectrumError(f"multiplicity {self.shape!r} must be letters and single spaces")
        js = tuple(_finite(j, "J") for j in self.j_values)
        if any(j <= 0 for j in js):
            raise SpectrumError(f"coupling constants must be > 0 Hz, got {js}")
        object.__setattr__(self, "j_values", js)
        if isinstance(self.n_h, bool) or int(self.n_h) != self.n_h or self.n_h < 1:
            raise SpectrumError(f"proton count must be a positive integer, got {self.n_h}")
        object.__setattr__(self, "n_h", int(self.n_h))

    def sort_key(self):
        return (-self.centroid, self.shape, self.j_values, self.n_h)


@dataclass(frozen=True)
class ProtonSpectrum:
    """1H peak list, stored by descending centroid."""

    peaks: tuple[ProtonPeak, ...]
    frequency: float | None = None
    solvent: str | None = None

    modality: ClassVar[str] = "1H_NMR"

    def __post_init__(self):
        peaks = tuple(sorted(self.peaks, key=ProtonPeak.sort_key))
        if not peaks:
            raise SpectrumError("a 1H spectrum needs at least one peak")
        object.__setattr__(self, "peaks", peaks)
        freq, _ = _check_header(self.frequency, self.solvent)
        object.__setattr__(self, "frequency", freq)

    @property
    def total_protons(self) -> int:
        return sum(p.n_h for p in self.peaks)


@dataclass(frozen=True)
class WaveformSpectrum:
    """Cleaned IR / Raman / UV peak list.

    Positions are in cm^-1 (IR, Raman) or nm (UV); intensities are normalized
    to [0, 1].
    """

    modality: str
    axis_range: tuple[float, float]
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.modality not in WAVEFORM_MODALITIES:
            raise SpectrumError(f"waveform modality must be one of {WAVEFORM_MODALITIES}")
        low, high = (_finite(v, "axis bound") for v in self.axis_range)
        if not high > low:
            raise SpectrumError(f"axis range ({low}, {high}) must satisfy high > low")
        object.__setattr__(self, "axis_range", (low, high))
        points = tuple((_finite(p, "position"), _finite(i, "intensity")) for p, i in self.points)
        for k, (p, i) in enumerate(points):
            if not low <= p <= high:
                raise SpectrumError(f"position {p} outside axis range ({low}, {high})")
            if not 0.0 <= i <= 1.0:
                raise SpectrumError(f"intensity {i} outside [0, 1]")
            if k and p <= points[k - 1][0]:
                raise SpectrumError("waveform positions must be strictly increasing")
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class MassSpectrum:
    """Centroided mass spectrum; abundances are rescaled so the base peak is 100."""

    mode: str
    peaks: tuple[tuple[float, float], ...] = ()
    collision_energy: float | None = None

    modality: ClassVar[str] = "MS"

    def __post_init__(self):
        if self.mode not in MS_MODES:
            raise SpectrumError(f"MS mode must be one of {MS_MODES}, got {self.mode!r}")
        peaks = sorted((_finite(mz, "m/z"), _finite(a, "abundance")) for mz, a in self.peaks)
        for k, (mz, a) in enumerate(peaks):
            if mz <= 0:
                raise SpectrumError(f"m/z must be > 0, got {mz}")
            if a <= 0:
                raise SpectrumError(f"abundance must be > 0, got {a}")
            if k and mz == peaks[k - 1][0]:
                raise SpectrumError(f"duplicate m/z {mz}")
        if peaks:
            base = max(a for _, a in peaks)
            if base != 100.0:
                scale = 100.0 / base
                peaks = [(mz, 100.0 if a == base else min(a * scale, 100.0)) for mz, a in peaks]
        object.__setattr__(self, "peaks", tuple(peaks))
        if self.collision_energy is not None:
            ce = _finite(self.collision_energy, "collision energy")
            if ce < 0:
                raise SpectrumError(f"collision energy must be >= 0, got {ce}")
            object.__setattr__(self, "collision_energy", ce)

    @property
    def tag(self) -> str:
        return f"ms_{self.mode}"


Spectrum = Union[CarbonSpectrum, ProtonSpectrum, WaveformSpectrum, MassSpectrum]


def spectrum_to_dict(spectrum: Spectrum) -> dict:
    """Plain-JSON form used by the CLI (``type`` names the modality)."""
    if isinstance(spectrum, CarbonSpectrum):
        return {"type": "13C_NMR", "shifts": list(spectrum.shifts),
                "frequency": spectrum.frequency, "solvent": spectrum.solvent}
    if isinstance(spectrum, ProtonSpectrum):
        return {
            "type": "1H_NMR",
            "peaks": [
                {"centroid": p.centroid, "shape": p.shape, "j_values": list(p.j_values), "n_h": p.n_h}
                for p in spectrum.peaks
            ],
            "frequency": spectrum.frequency,
            "solvent": spectrum.solvent,
        }
    if isinstance(spectrum, WaveformSpectrum):
        return {"type": spectrum.modality, "axis_range": list(spectrum.axis_range),
                "points": [list(p) for p in spectrum.points]}
    if isinstance(spectrum, MassSpectrum):
        return {"type": "MS", "mode": spectrum.mode, "collision_energy": spectrum.collision_energy,
                "peaks": [list(p) for p in spectrum.peaks]}
    raise TypeError(f"not a spectrum: {type(spectrum).__name__}")


def spectrum_from_dict(data: dict) -> Spectrum:
    kind = data.get("type")
    try:
        if kind == "13C_NMR":
            return CarbonSpectrum(tuple(data["shifts"]), data.get("frequency"), data.get("solvent"))
        if kind == "1H_NMR":
            peaks = tuple(
                ProtonPeak(p["centroid"], p.get("shape", "s"), tuple(p.get("j_values", ())), p.get("n_h", 1))
                for p in data["peaks"]
            )
            return ProtonSpectrum(peaks, data.get("frequency"), data.get("solvent"))
        if kind in WAVEFORM_MODALITIES:
            return WaveformSpectrum(kind, tuple(data["axis_range"]),
                                    tuple(tuple(p) for p in data.get("points", ())))
        if kind == "MS":
            return MassSpectrum(data.get("mode", "positive"), tuple(tuple(p) for p in data.get("peaks", ())),
                                data.get("collision_energy"))
    except (KeyError, TypeError) as exc:
        raise SpectrumError(f"malformed {kind} record: {exc}") from None
    raise SpectrumError(f"unknown spectrum type {kind!r}")
