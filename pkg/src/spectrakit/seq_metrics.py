"""Token-level and sequence-level accuracy for generation tasks."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from spectrakit.errors import EmptyList, EmptyTruth, SpectraKitError, UnterminatedBracket
from spectrakit.molgraph import canonical_smiles, parse_smiles

SCHEMES = ("character", "smiles_atoms")

_SMILES_TOKEN_RE = re.compile(r"\[[^\[\]]*\]|%\d{2}|Br|Cl|.", re.DOTALL)


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    raw: str


@dataclass(frozen=True)
class AccuracyReport:
    token_accuracy: float
    sequence_accuracy: float
    n_samples: int

    def to_row(self) -> dict:
        return {"token_acc": self.token_accuracy, "seq_acc": self.sequence_accuracy, "n": self.n_samples}


def tokenize(text: str, scheme: str = "character") -> TokenSequence:
    """Split ``text`` into tokens.

    ``character`` yields one token per code point. ``smiles_atoms`` keeps
    bracket atoms, ``Cl``/``Br`` and ``%nn`` ring labels whole, so that
    ``"".join(tokens) == text`` for both schemes.

    >>> tokenize("C[NH4+]Cl", "smiles_atoms").tokens
    ('C', '[NH4+]', 'Cl')
    """
    if scheme == "character":
        return TokenSequence(tuple(text), text)
    if scheme != "smiles_atoms":
        raise ValueError(f"unknown tokenizer scheme {scheme!r}; expected one of {SCHEMES}")
    tokens = tuple(_SMILES_TOKEN_RE.findall(text))
    for tok in tokens:
        if tok in ("[", "]"):
            raise UnterminatedBracket(f"unbalanced bracket in {text!r}")
    return TokenSequence(tokens, text)


def token_accuracy(truth: TokenSequence | Sequence[str], pred: TokenSequence | Sequence[str]) -> float:
    """Fraction of truth positions whose token the prediction reproduces.

    Positions beyond the end of the prediction count as mismatches.
    """
    t = truth.tokens if isinstance(truth, TokenSequence) else tuple(truth)
    p = pred.tokens if isinstance(pred, TokenSequence) else tuple(pred)
    if not t:
        raise EmptyTruth("ground-truth token sequence is empty")
    hits = sum(1 for j, tok in enumerate(t) if j < len(p) and p[j] == tok)
    return hits / len(t)


def strip_canonicalizer(text: str) -> str:
    return text.strip()


def smiles_canonicalizer(text: str) -> str:
    """Canonical SMILES of ``text``; raises on unparseable input."""
    return canonical_smiles(parse_smiles(text))


CANONICALIZERS: dict[str, Callable[[str], str]] = {
    "strip": strip_canonicalizer,
    "smiles": smiles_canonicalizer,
}


def sequence_match(truth: str, pred: str, canonicalizer: Callable[[str], str] | None = None) -> bool:
    """Exact equality after canonicalization; a canonicalizer failure is a non-match."""
    canon = canonicalizer or strip_canonicalizer
    try:
        return canon(pred) == canon(truth)
    except SpectraKitError:
        return False


def sequence_accuracy(
    pairs: Iterable[tuple[str, str]], canonicalizer: Callable[[str], str] | None = None
) -> float:
    """Fraction of ``(truth, pred)`` pairs that match after canonicalization."""
    n = hits = 0
    for truth, pred in pairs:
        n += 1
        hits += sequence_match(truth, pred, canonicalizer)
    if n == 0:
        raise EmptyList("no pairs to score")
    return hits / n


def pair_token_accuracy(truth: str, pred: str, scheme: str = "character") -> float:
    """Token accuracy of one raw pair; falls back to characters if the scheme cannot tokenize."""
    try:
        t, p = tokenize(truth, scheme), tokenize(pred, scheme)
    except UnterminatedBracket:
        t, p = tokenize(truth), tokenize(pred)
    return token_accuracy(t, p)


def evaluate(
    pairs: Iterable[tuple[str, str]],
    scheme: str = "character",
    canonicalizer: Callable[[str], str] | None = None,
) -> AccuracyReport:
    """Corpus token accuracy (mean of per-sample values) and sequence accuracy."""
    n = 0
    token_sum = 0.0
    hits = 0
    for truth, pred in pairs:
        n += 1
        token_sum += pair_token_accuracy(truth, pred, scheme)
        hits += sequence_match(truth, pred, canonicalizer)
    if n == 0:
        raise EmptyList("no pairs to score")
    return AccuracyReport(token_sum / n, hits / n, n)
