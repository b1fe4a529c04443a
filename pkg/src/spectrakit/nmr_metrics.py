"""Peak-matching fidelity scores for generated 13C and 1H NMR spectra.

13C: greedy nearest-neighbour one-to-one matching within ``tau_c``.
1H: greedy matching that, per prediction, takes the unused truth peak within
``tau_h`` maximizing ``min(nH_pred, nH_true) * exp(-0.5 * (|d| / sigma)**2)``,
reported as a weighted Jaccard similarity plus unweighted P/R/F1/MAE.

Both matchers scan predictions in descending shift order (the stored order of
the spectrum types) and break ties towards the lower truth index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

from spectrakit.errors import EmptyList
from spectrakit.spectra import CarbonSpectrum, ProtonSpectrum, parse_spectrum

# Absolute slack on the tolerance test so that e.g. |170.6 - 170.1| counts as 0.5.
TOLERANCE_SLACK = 1e-9


@dataclass(frozen=True)
class NmrConfig:
    tau_c: float = 0.5
    tau_h: float = 0.12
    sigma: float = 0.06

    def __post_init__(self):
        for name in ("tau_c", "tau_h", "sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value}")
        if self.tau_h < self.sigma:
            warnings.warn(
                f"tau_h={self.tau_h} is smaller than sigma={self.sigma}", stacklevel=2
            )


@dataclass(frozen=True)
class MatchPair:
    pred_index: int
    true_index: int
    deviation: float
    weight: float | None = None


@dataclass(frozen=True)
class MatchScore:
    precision: float
    recall: float
    f1: float
    mae: float | None
    n_match: int
    n_pred: int
    n_true: int
    jaccard: float | None = None
    pairs: tuple[MatchPair, ...] = field(default=(), repr=False)

    def to_row(self) -> dict:
        """Flat record for reports (pairs omitted)."""
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mae": self.mae,
            "jaccard": self.jaccard,
            "n_match": self.n_match,
            "n_pred": self.n_pred,
            "n_true": self.n_true,
        }


def _prf(n_match: int, n_pred: int, n_true: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_true == 0:
        return 1.0, 1.0, 1.0
    p = n_match / n_pred if n_pred else 0.0
    r = n_match / n_true if n_true else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def _mae(pairs: list[MatchPair]) -> float | None:
    if not pairs:
        return None
    return math.fsum(pair.deviation for pair in pairs) / len(pairs)


def _coerce(value, cls):
    if isinstance(value, str):
        value = parse_spectrum(value)
    if not isinstance(value, cls):
        raise TypeError(f"expected {cls.__name__}, got {type(value).__name__}")
    return value


def greedy_carbon_pairs(pred: list[float], truth: list[float], tau: float) -> list[MatchPair]:
    """Greedy one-to-one assignment in the given prediction order."""
    used = [False] * len(truth)
    pairs = []
    for j, shift in enumerate(pred):
        best = None
        best_dev = math.inf
        for i, ref in enumerate(truth):
            if used[i]:
                continue
            dev = abs(shift - ref)
            if dev <= tau + TOLERANCE_SLACK and dev < best_dev:
                best, best_dev = i, dev
        if best is not None:
            used[best] = True
            pairs.append(MatchPair(j, best, best_dev))
    return pairs


def score_carbon(pred, truth, cfg: NmrConfig | None = None) -> MatchScore:
    """Score a predicted 13C spectrum against the reference.

    Accepts :class:`CarbonSpectrum` values or their tagged text. When both
    spectra are empty the prediction is perfect (P = R = F1 = 1, MAE = 0).

    >>> s = score_carbon(CarbonSpectrum((170.1, 20.3, 10.0)), CarbonSpectrum((170.1, 20.3, 10.2)))
    >>> s.f1, round(s.mae, 4)
    (1.0, 0.0667)
    """
    cfg = cfg or NmrConfig()
    pred = _coerce(pred, CarbonSpectrum)
    truth = _coerce(truth, CarbonSpectrum)
    n_pred, n_true = len(pred.shifts), len(truth.shifts)
    pairs = greedy_carbon_pairs(list(pred.shifts), list(truth.shifts), cfg.tau_c)
    p, r, f1 = _prf(len(pairs), n_pred, n_true)
    mae = 0.0 if n_pred == n_true == 0 else _mae(pairs)
    return MatchScore(p, r, f1, mae, len(pairs), n_pred, n_true, None, tuple(pairs))


def proton_weight(d: float, n_pred: int, n_true: int, sigma: float) -> float:
    return min(n_pred, n_true) * math.exp(-0.5 * (d / sigma) ** 2)


def score_proton(pred, truth, cfg: NmrConfig | None = None) -> MatchScore:
    """Score a predicted 1H spectrum against the reference (weighted Jaccard + P/R/F1/MAE).

    Multiplicities and J values take no part in the score.
    """
    cfg = cfg or NmrConfig()
    pred = _coerce(pred, ProtonSpectrum)
    truth = _coerce(truth, ProtonSpectrum)
    used = [False] * len(truth.peaks)
    pairs = []
    for j, pk in enumerate(pred.peaks):
        best = None
        best_w = -1.0
        best_dev = 0.0
        for i, ref in enumerate(truth.peaks):
            if used[i]:
                continue
            dev = abs(pk.centroid - ref.centroid)
            if dev > cfg.tau_h + TOLERANCE_SLACK:
                continue
            w = proton_weight(dev, pk.n_h, ref.n_h, cfg.sigma)
            if w > best_w:
                best, best_w, best_dev = i, w, dev
        if best is not None:
            used[best] = True
            pairs.append(MatchPair(j, best, best_dev, best_w))
    w_match = math.fsum(pair.weight for pair in pairs)
    w_pred = pred.total_protons
    w_true = truth.total_protons
    jaccard = w_match / (w_pred + w_true - w_match)
    p, r, f1 = _prf(len(pairs), len(pred.peaks), len(truth.peaks))
    return MatchScore(
        p, r, f1, _mae(pairs), len(pairs), len(pred.peaks), len(truth.peaks),
        min(max(jaccard, 0.0), 1.0), tuple(pairs),
    )


@dataclass(frozen=True)
class ScoreSummary:
    """Corpus-level means of per-spectrum scores.

    ``mae`` is averaged only over spectra that have one; ``mae_excluded``
    counts the spectra left out (no matched peaks).
    """

    precision: float
    recall: float
    f1: float
    mae: float | None
    jaccard: float | None
    n_spectra: int
    mae_excluded: int

    def to_row(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mae": self.mae,
            "jaccard": self.jaccard,
            "n_spectra": self.n_spectra,
            "mae_excluded": self.mae_excluded,
        }


class ScoreAccumulator:
    """Streaming fold behind :func:`aggregate_scores`; memory is constant in corpus size."""

    _FIELDS = ("precision", "recall", "f1", "mae", "jaccard")

    def __init__(self):
        self.n = 0
        self.sums = dict.fromkeys(self._FIELDS, 0.0)
        self.counts = dict.fromkeys(self._FIELDS, 0)

    def add(self, score: MatchScore) -> None:
        self.n += 1
        for key in self._FIELDS:
            value = getattr(score, key)
            if value is not None:
                self.sums[key] += value
                self.counts[key] += 1

    def summary(self) -> ScoreSummary:
        if self.n == 0:
            raise EmptyList("no scores to aggregate")
        means = {k: self.sums[k] / self.counts[k] if self.counts[k] else None for k in self._FIELDS}
        return ScoreSummary(
            means["precision"], means["recall"], means["f1"], means["mae"], means["jaccard"],
            self.n, self.n - self.counts["mae"],
        )


def aggregate_scores(scores: Iterable[MatchScore]) -> ScoreSummary:
    """Unweighted mean of each metric over spectra.

    >>> a = MatchScore(1.0, 1.0, 1.0, None, 0, 0, 0)
    >>> b = MatchScore(0.0, 0.0, 0.0, 0.1, 1, 1, 1)
    >>> s = aggregate_scores([a, b])
    >>> s.f1, s.mae, s.mae_excluded
    (0.5, 0.1, 1)
    """
    acc = ScoreAccumulator()
    for score in scores:
        acc.add(score)
    return acc.summary()
