import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shannon_bragg.coherence import (
    Classification,
    PhaseVector,
    ProbabilityVector,
    classify_commensurability,
    coherence_sum,
    fourier_coefficient,
    fractional_part,
    fractional_part_of_product,
    parse_number,
    rational_reconstruct,
)
from shannon_bragg.errors import InvalidArgumentError

LOG2_3 = math.log2(3)
LOG2_7_3 = math.log2(7 / 3)

# 50-digit reference values (mpmath)
FRAC_LOG2_3 = 0.58496250072115618145
FRAC_2LOG2_3 = 0.16992500144231236291


def _brute_min_error(x: float, qmax: int) -> tuple[float, int]:
    """min over b <= qmax of |x - round(b x)/b|: independent of continued fractions."""
    b = np.arange(1, qmax + 1, dtype=float)
    err = np.abs(b * x - np.round(b * x)) / b
    i = int(err.argmin())
    return float(err[i]), int(b[i])


class TestFractionalPart:
    @pytest.mark.parametrize(
        "u, expected", [(0.0, 0.0), (-0.25, 0.75), (3.169925, 0.169925), (-3.0, 0.0)]
    )
    def test_examples(self, u, expected):
        assert fractional_part(u) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("u", [math.inf, -math.inf, math.nan])
    def test_non_finite(self, u):
        with pytest.raises(InvalidArgumentError):
            fractional_part(u)

    def test_tiny_negative_stays_below_one(self):
        assert 0.0 <= fractional_part(-1e-20) < 1.0

    @given(st.integers(-2**30, 2**30), st.integers(-10**6, 10**6))
    def test_periodic(self, j, k):
        # dyadic u keeps u + k exact, so any difference is the function's own error
        u = j / 2**20
        f = fractional_part(u)
        assert 0.0 <= f < 1.0
        assert abs(fractional_part(u + k) - f) <= 1e-12


class TestFractionalPartOfProduct:
    def test_log2_3(self):
        assert fractional_part_of_product(LOG2_3, 1) == pytest.approx(FRAC_LOG2_3, abs=1e-12)
        assert fractional_part_of_product(LOG2_3, 2) == pytest.approx(FRAC_2LOG2_3, abs=1e-12)

    def test_exact_integer_product(self):
        assert fractional_part_of_product(0.5, 4) == 0.0

    @pytest.mark.parametrize("n", [10**3, 10**6, 999_999_937, 10**9])
    def test_large_n_against_exact_rational(self, n):
        # The double beta is an exact dyadic rational, so <beta n> has an exact answer.
        beta = LOG2_3
        exact = (Fraction(beta) * n) % 1
        assert abs(fractional_part_of_product(beta, n) - float(exact)) <= 1e-9

    def test_compensated_error_tiny(self):
        beta, n = LOG2_3, 999_999_937
        exact = float((Fraction(beta) * n) % 1)
        compensated = abs(fractional_part_of_product(beta, n) - exact)
        assert compensated < 1e-14

    def test_rejects_non_integer(self):
        with pytest.raises(InvalidArgumentError):
            fractional_part_of_product(1.0, 2.5)


class TestCoherenceSum:
    def test_full_coherence(self):
        c = coherence_sum((1 / 3, 2 / 3), (-1.0,), 5)
        assert abs(c - 1) <= 1e-15

    def test_half_phase(self):
        c = coherence_sum((0.4, 0.6), (0.5,), 1)
        assert c.real == pytest.approx(-0.2, abs=1e-15)
        assert abs(c.imag) <= 1e-15

    def test_m_zero(self):
        c = coherence_sum((0.2, 0.3, 0.5), (0.123, 4.56), 0)
        assert abs(c - 1) <= 1e-15

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            coherence_sum((0.5, 0.5), (0.1, 0.2), 1)

    @pytest.mark.parametrize(
        "probs, forms",
        [
            ((0.2, 0.3, 0.5), (Fraction(3, 4), Fraction(1, 2))),
            ((0.1, 0.9), (Fraction(2, 7),)),
            ((0.25, 0.35, 0.4), (Fraction(1, 3), Fraction(5, 6))),
        ],
    )
    def test_coherence_at_multiples_of_m0(self, probs, forms):
        alpha = PhaseVector(tuple(float(f) for f in forms), forms)
        report = classify_commensurability(alpha)
        m0 = report.m0
        for k in range(1, 11):
            assert abs(coherence_sum(probs, alpha, k * m0) - 1) <= 1e-12
        for m in range(1, m0):
            assert abs(coherence_sum(probs, alpha, m)) < 1 - 1e-9

    @settings(max_examples=200)
    @given(
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6),
        st.lists(st.floats(-50, 50), min_size=5, max_size=5),
        st.integers(-10**6, 10**6),
    )
    def test_modulus_bounded(self, weights, alphas, m):
        w = np.asarray(weights)
        probs = tuple(w / w.sum())
        try:
            p = ProbabilityVector(probs)
        except InvalidArgumentError:
            return
        alpha = tuple(alphas[: len(probs) - 1])
        assert abs(coherence_sum(p, alpha, m)) <= 1 + 1e-12


class TestFourierCoefficient:
    def test_values(self):
        assert fourier_coefficient(1) == pytest.approx(-1j / (2 * math.pi))
        assert fourier_coefficient(-1) == pytest.approx(1j / (2 * math.pi))
        assert fourier_coefficient(2) == pytest.approx(-1j / (4 * math.pi))

    @pytest.mark.parametrize("m", [1, 3, -7, 1000])
    def test_modulus_and_symmetry(self, m):
        a = fourier_coefficient(m)
        assert abs(a) == pytest.approx(1 / (2 * math.pi * abs(m)))
        assert fourier_coefficient(-m) == pytest.approx(a.conjugate())

    def test_zero(self):
        with pytest.raises(InvalidArgumentError):
            fourier_coefficient(0)


class TestRationalReconstruct:
    def test_dyadic(self):
        assert rational_reconstruct(0.75, 100, 1e-9) == Fraction(3, 4)

    def test_perturbed(self):
        assert rational_reconstruct(2 / 9 + 5e-13, 100, 1e-9) == Fraction(2, 9)

    def test_log2_7_3_has_a_close_convergent_below_1e6(self):
        # Brute force over every denominator finds 873826/714849 within 8.6e-14.
        err, b = _brute_min_error(LOG2_7_3, 10**6)
        assert b == 714849 and err < 1e-12
        assert rational_reconstruct(LOG2_7_3, 10**6, 1e-12) == Fraction(873826, 714849)

    def test_log2_7_3_absent_at_smaller_qmax(self):
        err, _ = _brute_min_error(LOG2_7_3, 10**5)
        assert err > 1e-12
        assert rational_reconstruct(LOG2_7_3, 10**5, 1e-12) is None
        assert rational_reconstruct(LOG2_7_3, 10**4, 1e-12) is None

    def test_sqrt2_absent_below_1e6(self):
        err, _ = _brute_min_error(math.sqrt(2), 10**6)
        assert err > 1e-12
        assert rational_reconstruct(math.sqrt(2), 10**6, 1e-12) is None

    def test_negative(self):
        assert rational_reconstruct(-1.0, 10, 1e-12) == Fraction(-1)
        assert rational_reconstruct(-2.5, 10, 1e-12) == Fraction(-5, 2)

    def test_exhaustive_small_denominators(self):
        misses = []
        for b in range(1, 1001):
            for a in range(0, b):
                if math.gcd(a, b) != 1:
                    continue
                r = rational_reconstruct(a / b, 1000, 1e-9)
                if r != Fraction(a, b):
                    misses.append((a, b, r))
        assert misses == []


class TestClassify:
    def test_exact_rationals(self):
        report = classify_commensurability(PhaseVector.from_values(["3/4", "1/2"]), 100, 1e-9)
        assert report.classification is Classification.RATIONAL
        assert report.m0 == 4
        assert report.fundamental_frequency is None

    def test_integer(self):
        report = classify_commensurability(PhaseVector.from_values(["-1"]))
        assert report.classification is Classification.RATIONAL and report.m0 == 1

    def test_log2_7_3_default_is_irrational(self):
        report = classify_commensurability(PhaseVector((LOG2_7_3,)))
        assert report.classification is Classification.IRRATIONAL_AT_TOLERANCE
        assert report.m0 is None
        assert len(report.convergents_examined[0]) > 3

    def test_log2_7_3_at_1e6_reconstructs(self):
        report = classify_commensurability(PhaseVector((LOG2_7_3,)), 10**6, 1e-12)
        assert report.classification is Classification.RATIONAL
        assert report.m0 == 714849

    def test_declared_irrational(self):
        alpha = PhaseVector((0.5, LOG2_7_3), (Fraction(1, 2), None), (False, True))
        report = classify_commensurability(alpha)
        assert report.classification is Classification.EXACT_IRRATIONAL_DECLARED
        assert report.m0 is None

    def test_m0_is_minimal(self):
        alpha = PhaseVector((0.1, 0.75, 1 / 6))
        report = classify_commensurability(alpha, 1000, 1e-12)
        assert report.m0 == 60
        for m in range(1, 60):
            assert not all(abs(m * a - round(m * a)) < 1e-9 for a in alpha.values)

    @pytest.mark.parametrize("qmax, tol", [(0, 1e-9), (10, 0.0), (10, -1.0)])
    def test_bad_parameters(self, qmax, tol):
        with pytest.raises(InvalidArgumentError):
            classify_commensurability(PhaseVector((0.5,)), qmax, tol)

    def test_report_serialises(self):
        d = classify_commensurability(PhaseVector.from_values(["3/4"])).to_dict()
        assert d["classification"] == "Rational" and d["rationals"] == ["3/4"]


class TestVectors:
    def test_parse(self):
        assert parse_number("1/3") == Fraction(1, 3)
        assert parse_number("2") == Fraction(2)
        assert isinstance(parse_number("0.3"), float)
        with pytest.raises(InvalidArgumentError):
            parse_number("abc")

    def test_probability_validation(self):
        with pytest.raises(InvalidArgumentError):
            ProbabilityVector((0.3,))
        with pytest.raises(InvalidArgumentError):
            ProbabilityVector((0.0, 1.0))
        with pytest.raises(InvalidArgumentError):
            ProbabilityVector.from_values(["1/3", "1/3"])

    def test_exact_kept_only_when_all_exact(self):
        assert ProbabilityVector.from_values(["1/3", "2/3"]).exact_probs == (
            Fraction(1, 3),
            Fraction(2, 3),
        )
        assert ProbabilityVector.from_values(["0.3", "0.7"]).exact_probs is None

    def test_phase_exact_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            PhaseVector((0.5,), (Fraction(1, 3),))
