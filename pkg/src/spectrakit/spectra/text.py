"""Tagged text forms of spectra (serialize / parse).

Grammar (see docs/formats.md)::

    <13C_NMR>(FREQ MHz, SOLVENT) δ v1, v2, ...</13C_NMR>
    <1H_NMR>(FREQ MHz, SOLVENT) δ c1 (shape, J = j1, j2 Hz, nH), ...</1H_NMR>
    <IR>(LOW~HIGH)p1(i1) p2(i2) ...</IR>          also <Raman>, <UV>
    <ms_positive>(CE=E eV)mz1:a1 mz2:a2 ...</ms_positive>   also <ms_negative>

Precision: 13C 1 dp, 1H centroid 2 dp, J 1 dp, waveform position 0 dp and
intensity 3 dp, m/z and abundance 1 dp. Unknown frequency and/or solvent are
written as ``unknown``; both unknown collapse to ``(unknown)``.
"""

from __future__ import annotations

import re

from spectrakit.errors import EmptyBody, MalformedPeak, SpectrumError, TagMismatch, UnknownTag
from spectrakit.spectra.types import (
    WAVEFORM_MODALITIES,
    CarbonSpectrum,
    MassSpectrum,
    ProtonPeak,
    ProtonSpectrum,
    Spectrum,
    WaveformSpectrum,
)

KNOWN_TAGS = ("13C_NMR", "1H_NMR", *WAVEFORM_MODALITIES, "ms_positive", "ms_negative")

_NUM = r"-?\d+(?:\.\d+)?"
_OPEN_RE = re.compile(r"<([^<>/\s]+)>")
_CLOSE_RE = re.compile(r"</([^<>/\s]+)>$")
_HEADER_RE = re.compile(
    rf"\((?:unknown|(?:(?P<freq>{_NUM}) MHz|unknown), (?P<solv>[^()<>,\n]+))\)"
)
_CARBON_VALUE_RE = re.compile(_NUM)
_PROTON_PEAK_RE = re.compile(
    rf"(?P<c>{_NUM}) \((?P<shape>[A-Za-z][A-Za-z ]*?)(?:, J = (?P<j>{_NUM}(?:, {_NUM})*) Hz)?, (?P<n>\d+)H\)"
)
_RANGE_RE = re.compile(rf"\((?P<lo>{_NUM})~(?P<hi>{_NUM})\)")
_POINT_RE = re.compile(rf"(?P<p>{_NUM})\((?P<i>{_NUM})\)")
_CE_RE = re.compile(rf"\(CE=(?P<ce>{_NUM}) eV\)")
_MS_PEAK_RE = re.compile(rf"(?P<mz>{_NUM}):(?P<a>{_NUM})")


def _fixed(value: float, digits: int) -> str:
    # "+ 0.0" turns a rounded -0.0 into 0.0 so equal values print identically.
    return f"{round(value, digits) + 0.0:.{digits}f}"


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _header(frequency: float | None, solvent: str | None) -> str:
    if frequency is None and solvent is None:
        return "(unknown)"
    freq = f"{_number(frequency)} MHz" if frequency is not None else "unknown"
    return f"({freq}, {solvent if solvent is not None else 'unknown'})"


def serialize(spectrum: Spectrum) -> str:
    """Render a spectrum in its tagged text form.

    >>> serialize(CarbonSpectrum((21.0, 170.3, 128.1), 100, "CDCl3"))
    '<13C_NMR>(100 MHz, CDCl3) δ 170.3, 128.1, 21.0</13C_NMR>'
    """
    if isinstance(spectrum, CarbonSpectrum):
        values = ", ".join(_fixed(s, 1) for s in spectrum.shifts)
        body = f"{_header(spectrum.frequency, spectrum.solvent)} δ" + (f" {values}" if values else "")
        return f"<13C_NMR>{body}</13C_NMR>"
    if isinstance(spectrum, ProtonSpectrum):
        peaks = []
        for p in spectrum.peaks:
            j = f", J = {', '.join(_fixed(v, 1) for v in p.j_values)} Hz" if p.j_values else ""
            peaks.append(f"{_fixed(p.centroid, 2)} ({p.shape}{j}, {p.n_h}H)")
        header = _header(spectrum.frequency, spectrum.solvent)
        return f"<1H_NMR>{header} δ {', '.join(peaks)}</1H_NMR>"
    if isinstance(spectrum, WaveformSpectrum):
        lo, hi = spectrum.axis_range
        pts = " ".join(f"{_fixed(p, 0)}({_fixed(i, 3)})" for p, i in spectrum.points)
        tag = spectrum.modality
        return f"<{tag}>({_number(lo)}~{_number(hi)}){pts}</{tag}>"
    if isinstance(spectrum, MassSpectrum):
        ce = f"(CE={_number(spectrum.collision_energy)} eV)" if spectrum.collision_energy is not None else ""
        pts = " ".join(f"{_fixed(mz, 1)}:{_fixed(a, 1)}" for mz, a in spectrum.peaks)
        return f"<{spectrum.tag}>{ce}{pts}</{spectrum.tag}>"
    raise TypeError(f"not a spectrum: {type(spectrum).__name__}")


def _parse_header(body: str, offset: int) -> tuple[float | None, str | None, int]:
    """Parse an optional NMR header; returns (frequency, solvent, chars consumed)."""
    if not body.startswith("("):
        return None, None, 0
    m = _HEADER_RE.match(body)
    if not m:
        raise MalformedPeak("malformed '(FREQ MHz, SOLVENT)' header", offset)
    freq = float(m["freq"]) if m["freq"] else None
    solvent = m["solv"]
    if solvent is not None:
        solvent = solvent.strip()
        if solvent == "unknown":
            solvent = None
    return freq, solvent, m.end()


def _expect_delta(body: str, pos: int, offset: int) -> int:
    while pos < len(body) and body[pos] == " ":
        pos += 1
    if not body.startswith("δ", pos):
        raise MalformedPeak("expected 'δ' before the peak list", offset + pos)
    return pos + 1


def _parse_carbon(body: str, offset: int) -> CarbonSpectrum:
    freq, solvent, pos = _parse_header(body, offset)
    pos = _expect_delta(body, pos, offset)
    rest = body[pos:]
    shifts = []
    if rest.strip():
        if not rest.startswith(" "):
            raise MalformedPeak("expected a space after 'δ'", offset + pos)
        cursor = pos + 1
        for item in body[cursor:].split(","):
            stripped = item.strip()
            lead = len(item) - len(item.lstrip())
            if not _CARBON_VALUE_RE.fullmatch(stripped):
                raise MalformedPeak(f"not a chemical shift: {stripped!r}", offset + cursor + lead)
            shifts.append(float(stripped))
            cursor += len(item) + 1
    try:
        return CarbonSpectrum(tuple(shifts), freq, solvent)
    except SpectrumError as exc:
        raise MalformedPeak(str(exc), offset) from None


def _parse_proton(body: str, offset: int) -> ProtonSpectrum:
    freq, solvent, pos = _parse_header(body, offset)
    pos = _expect_delta(body, pos, offset)
    if not body.startswith(" ", pos):
        raise MalformedPeak("expected a space after 'δ'", offset + pos)
    pos += 1
    peaks = []
    while True:
        m = _PROTON_PEAK_RE.match(body, pos)
        if not m:
            raise MalformedPeak("malformed 1H peak, expected 'shift (shape[, J = ... Hz], nH)'", offset + pos)
        j_values = tuple(float(v) for v in m["j"].split(", ")) if m["j"] else ()
        try:
            peaks.append(ProtonPeak(float(m["c"]), m["shape"], j_values, int(m["n"])))
        except SpectrumError as exc:
            raise MalformedPeak(str(exc), offset + pos) from None
        pos = m.end()
        if pos == len(body):
            break
        if not body.startswith(", ", pos):
            raise MalformedPeak("expected ', ' between peaks", offset + pos)
        pos += 2
    try:
        return ProtonSpectrum(tuple(peaks), freq, solvent)
    except SpectrumError as exc:
        raise MalformedPeak(str(exc), offset) from None


def _parse_waveform(tag: str, body: str, offset: int) -> WaveformSpectrum:
    m = _RANGE_RE.match(body)
    if not m:
        raise MalformedPeak("expected '(LOW~HIGH)' axis range", offset)
    lo, hi = float(m["lo"]), float(m["hi"])
    pos = m.end()
    points = []
    while pos < len(body):
        if points:
            if body[pos] != " ":
                raise MalformedPeak("expected a space between points", offset + pos)
            pos += 1
        pm = _POINT_RE.match(body, pos)
        if not pm:
            raise MalformedPeak("malformed point, expected 'position(intensity)'", offset + pos)
        points.append((float(pm["p"]), float(pm["i"])))
        pos = pm.end()
    try:
        return WaveformSpectrum(tag, (lo, hi), tuple(points))
    except SpectrumError as exc:
        raise MalformedPeak(str(exc), offset) from None


def _parse_ms(tag: str, body: str, offset: int) -> MassSpectrum:
    pos = 0
    ce = None
    m = _CE_RE.match(body)
    if m:
        ce = float(m["ce"])
        pos = m.end()
    elif body.startswith("("):
        raise MalformedPeak("malformed '(CE=... eV)' header", offset)
    peaks = []
    while pos < len(body):
        if peaks:
            if body[pos] != " ":
                raise MalformedPeak("expected a space between peaks", offset + pos)
            pos += 1
        pm = _MS_PEAK_RE.match(body, pos)
        if not pm:
            raise MalformedPeak("malformed peak, expected 'mz:abundance'", offset + pos)
        peaks.append((float(pm["mz"]), float(pm["a"])))
        pos = pm.end()
    try:
        return MassSpectrum(tag.removeprefix("ms_"), tuple(peaks), ce)
    except SpectrumError as exc:
        raise MalformedPeak(str(exc), offset) from None


def parse_spectrum(text: str) -> Spectrum:
    """Parse tagged spectrum text; the returned type identifies the modality.

    Unknown content inside a known tag raises :class:`MalformedPeak` with the
    character offset of the first bad token.
    """
    stripped = text.strip()
    lead = len(text) - len(text.lstrip())
    m = _OPEN_RE.match(stripped)
    if not m:
        raise UnknownTag("text does not start with an opening tag like <13C_NMR>")
    tag = m[1]
    if tag not in KNOWN_TAGS:
        raise UnknownTag(f"unknown spectrum tag <{tag}>")
    close = _CLOSE_RE.search(stripped)
    if not close or close.start() < m.end():
        raise TagMismatch(f"<{tag}> is not closed by </{tag}>")
    if close[1] != tag:
        raise TagMismatch(f"<{tag}> closed by </{close[1]}>")
    body = stripped[m.end() : close.start()]
    offset = lead + m.end()
    if not body.strip() and not tag.startswith("ms_"):
        raise EmptyBody(f"<{tag}> has an empty body")
    if tag == "13C_NMR":
        return _parse_carbon(body, offset)
    if tag == "1H_NMR":
        return _parse_proton(body, offset)
    if tag in WAVEFORM_MODALITIES:
        return _parse_waveform(tag, body, offset)
    return _parse_ms(tag, body, offset)
