"""Spectrum records, their tagged text forms, and waveform cleaning."""

from spectrakit.spectra.text import KNOWN_TAGS, parse_spectrum, serialize
from spectrakit.spectra.types import (
    KNOWN_MULTIPLICITIES,
    MS_MODES,
    WAVEFORM_MODALITIES,
    CarbonSpectrum,
    MassSpectrum,
    ProtonPeak,
    ProtonSpectrum,
    Spectrum,
    WaveformSpectrum,
    is_known_multiplicity,
    spectrum_from_dict,
    spectrum_to_dict,
)
from spectrakit.spectra.waveform import clean_waveform

__all__ = [
    "KNOWN_MULTIPLICITIES",
    "KNOWN_TAGS",
    "MS_MODES",
    "WAVEFORM_MODALITIES",
    "CarbonSpectrum",
    "MassSpectrum",
    "ProtonPeak",
    "ProtonSpectrum",
    "Spectrum",
    "WaveformSpectrum",
    "clean_waveform",
    "is_known_multiplicity",
    "parse_spectrum",
    "serialize",
    "spectrum_from_dict",
    "spectrum_to_dict",
]
