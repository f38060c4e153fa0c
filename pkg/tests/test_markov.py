import json

import numpy as np
import pytest

from shannon_bragg.coherence import coherence_sum
from shannon_bragg.errors import InvalidArgumentError
from shannon_bragg.markov import (
    MarkovClassification,
    TransitionMatrix,
    WeightMode,
    classify_markov,
    eigenvalues,
    load_matrix,
    spectral_radius,
    weighted_matrix,
)
from shannon_bragg.redundancy import SourceModel, analyze_source


def _random_matrix(rng, s):
    a = rng.uniform(0.05, 1.0, size=(s, s))
    return TransitionMatrix(a / a.sum(axis=1, keepdims=True))


class TestTransitionMatrix:
    @pytest.mark.parametrize(
        "rows",
        [[[1.0]], [[0.5, 0.5], [1.0, 0.0]], [[0.5, 0.6], [0.5, 0.5]], [[0.5, 0.5, 0.0]]],
    )
    def test_rejects(self, rows):
        with pytest.raises(InvalidArgumentError):
            TransitionMatrix(np.array(rows))

    def test_load_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"states": 2, "rows": [["1/4", "3/4"], [0.5, 0.5]],
                                    "distances": [[1, 2], [2, 3]]}))
        P, d, d0 = load_matrix(path)
        assert P.entries[0, 0] == 0.25 and d.shape == (2, 2) and d0 == 1.0

    def test_load_state_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            load_matrix({"states": 3, "rows": [[0.5, 0.5], [0.5, 0.5]]})


class TestWeightedMatrix:
    def test_uniform_equals_p(self):
        P = TransitionMatrix(np.full((2, 2), 0.5))
        for m in (0, 1, 7, -3):
            W = weighted_matrix(P, m)
            assert np.max(np.abs(W.entries - P.entries)) <= 1e-15

    def test_modulus_preserved(self):
        P = _random_matrix(np.random.default_rng(0), 4)
        d = np.arange(16.0).reshape(4, 4) * np.sqrt(2)
        for mode in WeightMode:
            W = weighted_matrix(P, 13, mode, d, 1.0)
            assert np.max(np.abs(np.abs(W.entries) - P.entries)) <= 1e-12

    def test_medium_needs_distances(self):
        P = TransitionMatrix(np.full((2, 2), 0.5))
        with pytest.raises(InvalidArgumentError):
            weighted_matrix(P, 1, WeightMode.MEDIUM)
        with pytest.raises(InvalidArgumentError):
            weighted_matrix(P, 1, WeightMode.MEDIUM, np.ones((2, 2)), 0.0)

    def test_medium_integer_distances_coherent(self):
        P = TransitionMatrix(np.array([[0.2, 0.8], [0.6, 0.4]]))
        W = weighted_matrix(P, 5, WeightMode.MEDIUM, np.array([[1, 2], [3, 4]]), 1.0)
        assert np.min(np.abs(eigenvalues(W) - 1)) <= 1e-12


class TestSpectralRadius:
    def test_bounded_by_one(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(200):
            P = _random_matrix(rng, int(rng.integers(2, 6)))
            for m in range(1, 21):
                worst = max(worst, spectral_radius(weighted_matrix(P, m)))
        assert worst <= 1 + 1e-9

    def test_perron_root_at_m_zero(self):
        rng = np.random.default_rng(5)
        for s in range(2, 9):
            assert spectral_radius(weighted_matrix(_random_matrix(rng, s), 0)) == pytest.approx(1, abs=1e-9)

    @pytest.mark.parametrize("probs", [["1/3", "2/3"], ["0.3", "0.7"], ["0.2", "0.3", "0.5"]])
    def test_identical_rows_reproduce_coherence(self, probs):
        src = SourceModel.from_values(probs)
        alpha = analyze_source(src).alpha
        P = TransitionMatrix.identical_rows(src.p.probs)
        for m in range(1, 21):
            rho = spectral_radius(weighted_matrix(P, m))
            assert abs(rho - abs(coherence_sum(src.p, alpha, m))) <= 1e-9


class TestClassify:
    def test_one_third_all_flagged(self):
        report = classify_markov(TransitionMatrix.identical_rows([1 / 3, 2 / 3]), m_max=5)
        assert report.classification is MarkovClassification.OSCILLATORY
        assert report.flagged == (1, 2, 3, 4, 5)

    def test_decimal_pair_none_flagged(self):
        report = classify_markov(TransitionMatrix.identical_rows([0.3, 0.7]), m_max=100, eps=1e-6)
        assert report.classification is MarkovClassification.CONVERGENT_UP_TO_SCAN
        assert report.flagged == ()
        assert max(report.radii) < 1 - 1e-6

    def test_uniform_flagged(self):
        report = classify_markov(TransitionMatrix(np.full((2, 2), 0.5)), m_max=3)
        assert report.flagged == (1, 2, 3) and report.unit_eigenvalue_m == (1, 2, 3)

    def test_report_shape(self):
        report = classify_markov(TransitionMatrix(np.full((3, 3), 1 / 3)), m_max=2).to_dict()
        assert len(report["eigenvalues"]) == 2 and len(report["eigenvalues"][0]) == 3

    @pytest.mark.parametrize("m_max, eps", [(0, 1e-9), (5, 0.0)])
    def test_bad_parameters(self, m_max, eps):
        with pytest.raises(InvalidArgumentError):
            classify_markov(TransitionMatrix(np.full((2, 2), 0.5)), m_max=m_max, eps=eps)
