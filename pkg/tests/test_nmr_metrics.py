from __future__ import annotations

import math
import random
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from strategies import carbon_spectra, proton_spectra

from spectrakit.errors import EmptyList
from spectrakit.nmr_metrics import (
    MatchScore,
    NmrConfig,
    aggregate_scores,
    proton_weight,
    score_carbon,
    score_proton,
)
from spectrakit.spectra import CarbonSpectrum, ProtonPeak, ProtonSpectrum

CFG = NmrConfig()


def proton(*peaks: tuple[float, int]) -> ProtonSpectrum:
    return ProtonSpectrum(tuple(ProtonPeak(c, n_h=n) for c, n in peaks))


# Crowded spectra on a coarse grid, so ties and near-misses are common.
crowded_carbon = st.lists(st.integers(0, 40).map(lambda k: 100 + 0.1 * k), max_size=oracles.MAX_PEAKS)
crowded_proton = st.lists(
    st.tuples(st.integers(0, 30).map(lambda k: round(2 + 0.02 * k, 2)), st.integers(1, 4)),
    max_size=oracles.MAX_PEAKS,
    unique_by=lambda p: p[0],
)


# --- 13C --------------------------------------------------------------------------------


def test_carbon_example():
    s = score_carbon(CarbonSpectrum((170.1, 20.3, 10.0)), CarbonSpectrum((170.1, 20.3, 10.2)))
    assert (s.n_match, s.precision, s.recall, s.f1) == (3, 1.0, 1.0, 1.0)
    assert s.mae == pytest.approx(0.2 / 3, abs=1e-12)
    assert s.jaccard is None


def test_carbon_example_matches_oracle():
    result = oracles.exhaustive_match([170.1, 20.3, 10.0], [170.1, 20.3, 10.2], CFG.tau_c)
    assert result.value.optimal.n_match == 3
    assert result.value.optimal.total_deviation / 3 == pytest.approx(0.0667, abs=1e-4)


def test_carbon_far_apart():
    s = score_carbon(CarbonSpectrum((100.0,)), CarbonSpectrum((10.0,)))
    assert (s.n_match, s.precision, s.recall, s.f1, s.mae) == (0, 0.0, 0.0, 0.0, None)


def test_carbon_empty_conventions():
    both = score_carbon(CarbonSpectrum(()), CarbonSpectrum(()))
    assert (both.precision, both.recall, both.f1, both.mae) == (1.0, 1.0, 1.0, 0.0)
    no_pred = score_carbon(CarbonSpectrum(()), CarbonSpectrum((10.0,)))
    assert (no_pred.precision, no_pred.recall, no_pred.f1, no_pred.mae) == (0.0, 0.0, 0.0, None)


def test_carbon_tolerance_edge_inclusive():
    s = score_carbon(CarbonSpectrum((170.6,)), CarbonSpectrum((170.1,)))
    assert s.n_match == 1
    assert score_carbon(CarbonSpectrum((170.61,)), CarbonSpectrum((170.1,))).n_match == 0


def test_carbon_tie_goes_to_lower_truth_index():
    s = score_carbon(CarbonSpectrum((100.0,)), CarbonSpectrum((100.2, 99.8)))
    assert s.pairs[0].true_index == 0


def test_carbon_accepts_text():
    s = score_carbon("<13C_NMR>δ 170.1, 20.3</13C_NMR>", "<13C_NMR>(100 MHz, CDCl3) δ 20.3, 170.1</13C_NMR>")
    assert s.f1 == 1.0


def test_carbon_wrong_type():
    with pytest.raises(TypeError):
        score_carbon(proton((1.0, 1)), CarbonSpectrum(()))


@given(carbon_spectra)
@settings(max_examples=100)
def test_carbon_identity(s):
    score = score_carbon(s, s)
    assert (score.precision, score.recall, score.f1, score.mae) == (1.0, 1.0, 1.0, 0.0)


@given(crowded_carbon, crowded_carbon)
@settings(max_examples=300, deadline=None)
def test_carbon_greedy_matches_naive_reference(pred, truth):
    p, t = CarbonSpectrum(tuple(pred)), CarbonSpectrum(tuple(truth))
    score = score_carbon(p, t)
    ref = oracles.exhaustive_match(list(p.shifts), list(t.shifts), CFG.tau_c).value
    assert tuple((m.pred_index, m.true_index) for m in score.pairs) == ref.greedy.pairs
    assert score.n_match <= ref.optimal.n_match
    assert score.n_match <= min(score.n_pred, score.n_true)
    assert len({m.true_index for m in score.pairs}) == score.n_match
    assert all(m.deviation <= CFG.tau_c + 1e-9 for m in score.pairs)
    if score.mae is not None:
        assert score.mae <= CFG.tau_c + 1e-9
    assert (score.mae is None) == (score.n_match == 0 and score.n_pred + score.n_true > 0)


@given(crowded_carbon, crowded_carbon)
@settings(max_examples=200, deadline=None)
def test_optimal_counts_are_swap_symmetric(pred, truth):
    ab = oracles.exhaustive_match(pred, truth, CFG.tau_c).value.optimal
    ba = oracles.exhaustive_match(truth, pred, CFG.tau_c).value.optimal
    assert ab.n_match == ba.n_match
    if pred and truth:
        p, r = ab.n_match / len(pred), ab.n_match / len(truth)
        p2, r2 = ba.n_match / len(truth), ba.n_match / len(pred)
        assert (p, r) == (r2, p2)


@given(crowded_carbon, st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_carbon_input_order_irrelevant(shifts, rnd):
    shuffled = list(shifts)
    rnd.shuffle(shuffled)
    truth = CarbonSpectrum((100.5, 101.2, 103.0))
    assert score_carbon(CarbonSpectrum(tuple(shuffled)), truth) == score_carbon(CarbonSpectrum(tuple(shifts)), truth)


# --- 1H ---------------------------------------------------------------------------------


def test_proton_identity_example():
    s = score_proton(proton((1.00, 3), (7.26, 1)), proton((1.00, 3), (7.26, 1)))
    assert (s.jaccard, s.f1, s.mae) == (1.0, 1.0, 0.0)


def test_proton_gaussian_example():
    s = score_proton(proton((1.00, 3)), proton((1.05, 3)))
    w = 3 * math.exp(-0.5 * (0.05 / 0.06) ** 2)
    assert w == pytest.approx(2.1200, abs=1e-4)
    assert s.jaccard == pytest.approx(0.5464, abs=1e-3)
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)
    assert round(s.mae, 12) == 0.05


def test_proton_out_of_tolerance():
    s = score_proton(proton((1.00, 2)), proton((1.20, 2)))
    assert (s.jaccard, s.f1, s.mae) == (0.0, 0.0, None)


def test_proton_prefers_weight_over_distance():
    # 1H at 0.00 ppm vs 3H at 0.05 ppm: the heavier truth peak wins.
    s = score_proton(proton((1.00, 3)), proton((1.00, 1), (1.05, 3)))
    assert s.pairs[0].deviation == pytest.approx(0.05)


def test_proton_multiplicity_ignored():
    a = ProtonSpectrum((ProtonPeak(1.0, "t", (7.0,), 3),))
    b = ProtonSpectrum((ProtonPeak(1.0, "s", (), 3),))
    assert score_proton(a, b).jaccard == 1.0


def test_proton_weight_bounds():
    assert proton_weight(0.0, 2, 5, 0.06) == 2.0
    assert 0 < proton_weight(0.12, 2, 5, 0.06) < 2.0


@given(proton_spectra)
@settings(max_examples=100)
def test_proton_identity(s):
    score = score_proton(s, s)
    assert (score.precision, score.recall, score.f1, score.mae, score.jaccard) == (1.0, 1.0, 1.0, 0.0, 1.0)


@given(crowded_proton, crowded_proton)
@settings(max_examples=300, deadline=None)
def test_proton_greedy_matches_naive_reference(pred, truth):
    if not pred or not truth:
        return
    p = proton(*pred)
    t = proton(*truth)
    score = score_proton(p, t)
    peaks_p = [(k.centroid, k.n_h) for k in p.peaks]
    peaks_t = [(k.centroid, k.n_h) for k in t.peaks]
    ref = oracles.exhaustive_match(
        peaks_p, peaks_t, CFG.tau_h,
        weight_fn=lambda a, b: min(a[1], b[1]) * math.exp(-0.5 * (abs(a[0] - b[0]) / CFG.sigma) ** 2),
    ).value
    assert tuple((m.pred_index, m.true_index) for m in score.pairs) == ref.greedy.pairs
    assert 0.0 <= score.jaccard <= 1.0
    w_pred, w_true = p.total_protons, t.total_protons
    assert score.jaccard == pytest.approx(ref.greedy.weight / (w_pred + w_true - ref.greedy.weight), abs=1e-12)
    assert ref.greedy.weight <= ref.optimal.weight + 1e-9
    for m in score.pairs:
        assert m.deviation <= CFG.tau_h + 1e-9
        assert 0 < m.weight <= min(p.peaks[m.pred_index].n_h, t.peaks[m.true_index].n_h)


@given(crowded_proton, crowded_proton)
@settings(max_examples=200, deadline=None)
def test_jaccard_one_only_for_exact_agreement(pred, truth):
    if not pred or not truth:
        return
    p, t = proton(*pred), proton(*truth)
    if score_proton(p, t).jaccard == 1.0:
        assert [(k.centroid, k.n_h) for k in p.peaks] == [(k.centroid, k.n_h) for k in t.peaks]


def test_config_validation():
    with pytest.raises(ValueError):
        NmrConfig(tau_c=0)
    with pytest.raises(ValueError):
        NmrConfig(sigma=float("nan"))
    with pytest.warns(UserWarning):
        NmrConfig(tau_h=0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        NmrConfig()


# --- aggregation ------------------------------------------------------------------------


def _score(f1: float, mae: float | None) -> MatchScore:
    return MatchScore(f1, f1, f1, mae, 1 if mae is not None else 0, 1, 1)


def test_aggregate_examples():
    assert aggregate_scores([_score(1.0, 0.0), _score(0.0, None)]).f1 == 0.5
    s = aggregate_scores([_score(0.0, None), _score(1.0, 0.1)])
    assert (s.mae, s.mae_excluded) == (0.1, 1)
    one = _score(0.75, 0.2)
    s = aggregate_scores([one] * 100)
    assert (s.f1, s.precision, s.recall, s.n_spectra) == (0.75, 0.75, 0.75, 100)
    assert s.mae == pytest.approx(0.2, abs=1e-12)


def test_aggregate_empty():
    with pytest.raises(EmptyList):
        aggregate_scores([])


@given(st.lists(st.tuples(st.floats(0, 1), st.none() | st.floats(0, 0.5)), min_size=1, max_size=40))
def test_aggregate_is_order_independent(values):
    scores = [_score(f, m) for f, m in values]
    shuffled = scores[:]
    random.Random(len(values)).shuffle(shuffled)
    a, b = aggregate_scores(scores), aggregate_scores(shuffled)
    assert a.f1 == pytest.approx(b.f1, abs=1e-12)
    assert a.mae_excluded == b.mae_excluded
