"""Exception hierarchy shared by every spectrakit module.

All errors derive from :class:`SpectraKitError`, itself a ``ValueError``, so
callers that only care about "bad input" can catch one type.
"""

from __future__ import annotations


class SpectraKitError(ValueError):
    """Base class for all input/contract violations raised by spectrakit."""


# --- molecule parsing / validation -------------------------------------------------


class MoleculeError(SpectraKitError):
    """A molecule could not be parsed or violates a graph invariant.

    ``line`` is the 1-based line number of the offending line for text formats,
    or ``None`` when the failure is not tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidGraph(MoleculeError):
    pass


class MalformedCounts(MoleculeError):
    pass


class AtomBlockError(MoleculeError):
    pass


class UnknownBondOrder(AtomBlockError):
    pass


class BondIndexOutOfRange(MoleculeError):
    pass


class ValenceViolation(MoleculeError):
    pass


class UnsupportedVersion(MoleculeError):
    pass


class UnsupportedFeature(MoleculeError):
    pass


class SmilesError(MoleculeError):
    """Base for SMILES syntax errors; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class EmptyInput(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnclosedRingBond(SmilesError):
    def __init__(self, label: str, position: int | None = None):
        self.label = label
        super().__init__(f"ring bond {label} never closed", position)


class UnknownAtomSymbol(SmilesError):
    pass


# --- spectra -----------------------------------------------------------------------


class SpectrumError(SpectraKitError):
    """A spectrum value violates its invariants."""


class SpectrumParseError(SpectrumError):
    pass


class UnknownTag(SpectrumParseError):
    pass


class TagMismatch(SpectrumParseError):
    pass


class EmptyBody(SpectrumParseError):
    pass


class MalformedPeak(SpectrumParseError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class TooFewPoints(SpectrumError):
    pass


class NonFiniteIntensity(SpectrumError):
    pass


# --- metrics -----------------------------------------------------------------------


class EmptyList(SpectraKitError):
    pass


class ConfigMismatch(SpectraKitError):
    pass


class EmptyTruth(SpectraKitError):
    pass


class UnterminatedBracket(SpectraKitError):
    pass


class MissingCoordinates(SpectraKitError):
    pass


class UnknownElementRadius(SpectraKitError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"no van der Waals radius for element {symbol!r}")


class UnknownBondReference(SpectraKitError):
    def __init__(self, z_i: str, z_j: str, order: object):
        self.key = (z_i, z_j, order)
        super().__init__(f"no reference bond length for {z_i}-{z_j} ({order})")


class EmptyCorpus(SpectraKitError):
    pass


class KindMismatch(SpectraKitError):
    pass


class LengthMismatch(SpectraKitError):
    pass


# --- task generation ---------------------------------------------------------------


class MissingField(SpectraKitError):
    def __init__(self, task: str, record_id: str, field: str):
        self.task = task
        self.record_id = record_id
        self.field = field
        super().__init__(f"task {task!r} needs {field!r} but record {record_id!r} has none")


class EmptyTemplatePool(SpectraKitError):
    pass


class BadFractions(SpectraKitError):
    pass


# --- CLI / IO ----------------------------------------------------------------------


class InputNotFound(SpectraKitError):
    pass


class ConfigParseError(SpectraKitError):
    pass


class PermissionDenied(SpectraKitError):
    pass


class NotEnoughDistractors(SpectraKitError):
    pass
