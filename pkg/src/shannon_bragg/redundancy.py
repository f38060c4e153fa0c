"""Average redundancy R_n of the Shannon code on a memoryless source.

Three routes are provided:

* ``exact_redundancy`` sums over type classes (composition vectors) with
  multinomial weights; ``exact_redundancy_bruteforce`` sums over every
  sequence and serves as its oracle.
* ``series_redundancy`` truncates the Fourier representation
  R_n = 1/2 + sum_{m != 0} a_m exp(2 pi i m n beta) C_m^n.
* ``asymptotic_redundancy`` is the large-n form, 1/2 in the incommensurate
  case and 1/2 + (1/m0)(1/2 - <beta m0 n>) otherwise.

All logarithms are base 2.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .coherence import (
    DEFAULT_QMAX,
    DEFAULT_TOL,
    CommensurabilityReport,
    PhaseVector,
    ProbabilityVector,
    classify_commensurability,
    coherence_sums,
    frac_linear,
    frac_times,
    log2_split,
)
from .errors import InvalidArgumentError, ResourceLimitError

BOUNDARY_TOL = 1e-9
EXACT_BOUNDARY_MAX_N = 1000
MAX_ALPHABET = 6
MAX_TYPE_CLASSES = 10**8
MAX_RANGE_TYPE_CLASSES = 5 * 10**8
MAX_SEQUENCES = 2 * 10**7
MIN_SPECTRUM_LENGTH = 64
PEAK_THRESHOLD_FACTOR = 5.0

FLAG_NEAR_INTEGER = "near-integer-length"
FLAG_RESOLVED = "near-integer-length-resolved-exactly"
FLAG_DISCONTINUITY = "fractional-part-discontinuity"


@dataclass(frozen=True)
class SourceModel:
    p: ProbabilityVector
    label: str = ""

    def __post_init__(self):
        if len(self.p) < 2:
            raise InvalidArgumentError("a source needs at least two symbols")

    @classmethod
    def from_values(cls, values, label: str = "") -> "SourceModel":
        return cls(ProbabilityVector.from_values(values), label)

    @property
    def size(self) -> int:
        return len(self.p)

    def permuted(self, order: Sequence[int]) -> "SourceModel":
        return SourceModel(self.p.permuted(order), self.label)


@dataclass(frozen=True)
class SourceAnalysis:
    alpha: PhaseVector
    beta: float
    entropy: float
    report: CommensurabilityReport
    omega0: Optional[float]
    beta_lo: float = 0.0
    dyadic: bool = False


class Method(str, enum.Enum):
    EXACT = "exact"
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class RedundancySeries:
    n_start: int
    n_end: int
    method: Method
    values: tuple[float, ...]
    flags: tuple[tuple[str, ...], ...]

    @property
    def n_values(self) -> range:
        return range(self.n_start, self.n_end + 1)


@dataclass(frozen=True)
class SpectrumReport:
    window: tuple[int, int]
    peak_frequencies: tuple[float, ...]
    peak_magnitudes: tuple[float, ...]
    resolution: float
    threshold: float

    @property
    def dominant(self) -> Optional[float]:
        return self.peak_frequencies[0] if self.peak_frequencies else None

    def matches(self, frequency: float, tol: Optional[float] = None) -> bool:
        """True when the dominant peak sits at ``frequency`` up to folding.

        A real sequence sampled at integer steps cannot tell f from 1 - f, so
        the comparison is made against the folded value in [0, 0.5].
        """
        if self.dominant is None:
            return False
        tol = self.resolution if tol is None else tol
        return abs(self.dominant - fold_frequency(frequency)) <= tol


def fold_frequency(f: float) -> float:
    f = f - math.floor(f)
    return min(f, 1.0 - f)


# ---------------------------------------------------------------------------
# source analysis


def _power_of_two_exponent(r: Fraction) -> Optional[int]:
    num, den = r.numerator, r.denominator
    if num <= 0:
        return None
    if num & (num - 1) == 0 and den == 1:
        return num.bit_length() - 1
    if num == 1 and den & (den - 1) == 0:
        return -(den.bit_length() - 1)
    return None


def exact_log2_ratio(r: Fraction) -> Optional[Fraction]:
    """log2(r) for a positive rational r, or None when it is irrational.

    log2 r = a/b forces r**b = 2**a, and unique factorisation then makes r a
    power of two, so a rational answer is always an integer.
    """
    e = _power_of_two_exponent(r)
    return None if e is None else Fraction(e)


def analyze_source(
    src: SourceModel, qmax: int = DEFAULT_QMAX, tol: float = DEFAULT_TOL
) -> SourceAnalysis:
    """Phase parameters alpha_j = log2(p0/pj), beta = -log2 p0, entropy, m0 and omega0."""
    probs = src.p.probs
    exact = src.p.exact_probs
    values, forms, irrational = [], [], []
    for j in range(1, len(probs)):
        if exact is not None:
            ratio = exact[0] / exact[j]
            hi, _ = log2_split(ratio)
            form = exact_log2_ratio(ratio)
            values.append(hi)
            forms.append(form)
            irrational.append(form is None)
        else:
            hi, _ = log2_split(probs[0] / probs[j])
            values.append(hi)
            forms.append(None)
            irrational.append(False)
    alpha = PhaseVector(
        tuple(values),
        tuple(forms) if any(f is not None for f in forms) else None,
        tuple(irrational) if any(irrational) else None,
    )
    report = classify_commensurability(alpha, qmax, tol)

    p0 = exact[0] if exact is not None else probs[0]
    lhi, llo = log2_split(p0)
    beta, beta_lo = -lhi, -llo
    entropy = -math.fsum(p * math.log2(p) for p in probs)

    omega0 = None
    if report.m0 is not None:
        omega0 = 2.0 * math.pi * float(frac_times(report.m0, beta, beta_lo))
    report = report.with_frequency(omega0)

    return SourceAnalysis(
        alpha=alpha,
        beta=beta,
        entropy=entropy,
        report=report,
        omega0=omega0,
        beta_lo=beta_lo,
        dyadic=_is_dyadic(src),
    )


def _is_dyadic(src: SourceModel) -> bool:
    if src.p.exact_probs is not None:
        return all(_power_of_two_exponent(q) is not None for q in src.p.exact_probs)
    return all(math.log2(p).is_integer() for p in src.p.probs)


# ---------------------------------------------------------------------------
# exact redundancy


@dataclass(frozen=True)
class _Prepared:
    """Per-source constants reused across n."""

    neg_log2_hi: np.ndarray
    neg_log2_lo: np.ndarray
    ln_p: np.ndarray
    exact: Optional[tuple[Fraction, ...]]
    all_integer_lengths: bool


def _prepare(src: SourceModel) -> _Prepared:
    exact = src.p.exact_probs
    his, los = [], []
    for j, p in enumerate(src.p.probs):
        hi, lo = log2_split(exact[j] if exact is not None else p)
        his.append(-hi)
        los.append(-lo)
    return _Prepared(
        neg_log2_hi=np.asarray(his),
        neg_log2_lo=np.asarray(los),
        ln_p=np.log(np.asarray(src.p.probs)),
        exact=exact,
        all_integer_lengths=exact is not None and _is_dyadic(src),
    )


def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    rows = np.array([[total]], dtype=np.int64)
    for _ in range(parts - 1):
        remaining = rows[:, -1]
        reps = remaining + 1
        head = np.repeat(rows[:, :-1], reps, axis=0)
        first = np.concatenate([np.arange(r + 1) for r in remaining])
        rest = np.repeat(remaining, reps) - first
        rows = np.column_stack([head, first, rest])
    return rows


def _composition_chunks(n: int, m: int) -> Iterator[np.ndarray]:
    """Type classes of length-n sequences over m symbols, in chunks."""
    vector_parts = min(m, 3)
    prefix_parts = m - vector_parts
    if prefix_parts == 0:
        yield _compositions(n, m)
        return
    for prefix in itertools.product(range(n + 1), repeat=prefix_parts):
        used = sum(prefix)
        if used > n:
            continue
        tail = _compositions(n - used, vector_parts)
        head = np.broadcast_to(np.asarray(prefix, dtype=np.int64), (tail.shape[0], prefix_parts))
        yield np.column_stack([head, tail])


def _check_type_class_budget(n: int, m: int) -> None:
    if m > MAX_ALPHABET:
        raise ResourceLimitError(f"type-class enumeration needs M <= {MAX_ALPHABET}, got {m}")
    count = math.comb(n + m - 1, m - 1)
    if count > MAX_TYPE_CLASSES:
        raise ResourceLimitError(
            f"binomial(n+M-1, M-1) = {count} exceeds the bound {MAX_TYPE_CLASSES}"
        )


def _check_range_budget(n_start: int, n_end: int, m: int) -> None:
    _check_type_class_budget(n_end, m)
    # sum of binomial(n+M-1, M-1) over n_start..n_end, by the hockey-stick identity
    total = math.comb(n_end + m, m) - math.comb(n_start - 1 + m, m)
    if total > MAX_RANGE_TYPE_CLASSES:
        raise ResourceLimitError(
            f"{total} type classes over n = {n_start}..{n_end} exceeds the bound {MAX_RANGE_TYPE_CLASSES}"
        )


def _exact_ceiling(counts: np.ndarray, exact: Sequence[Fraction], approx_u: float) -> tuple[int, bool]:
    """(ceil(-log2 P), P is a power of two) decided in exact arithmetic."""
    prob = Fraction(1)
    for q, k in zip(exact, counts):
        prob *= q ** int(k)
    lc = round(approx_u)
    dyadic = _power_of_two_exponent(prob) is not None
    # ceil(-log2 P) is the least L with 2**L * P >= 1; it is lc or lc + 1 here
    scaled = prob * Fraction(2) ** lc
    return (lc if scaled >= 1 else lc + 1), dyadic


def _resolve_boundary(counts, frac, prep: _Prepared) -> np.ndarray:
    """Return ceil(u) - u for rows whose u is near an integer, decided exactly."""
    out = np.empty(len(counts))
    u_approx = counts @ prep.neg_log2_hi
    for i, row in enumerate(counts):
        lc = round(float(u_approx[i]))
        ceil_u, dyadic = _exact_ceiling(row, prep.exact, lc)
        if dyadic:
            out[i] = 0.0
            continue
        f = float(frac[i])
        # signed distance lc - u from the compensated fractional part
        lc_minus_u = -f if f < 0.5 else 1.0 - f
        out[i] = (ceil_u - lc) + lc_minus_u
    return out


def _exact_value(prep: _Prepared, n: int) -> tuple[float, tuple[str, ...]]:
    m = len(prep.ln_p)
    _check_type_class_budget(n, m)
    if prep.all_integer_lengths:
        return 0.0, (FLAG_RESOLVED,)

    lgn = gammaln(n + 1)
    partial = []
    near_seen = False
    resolved = False
    for counts in _composition_chunks(n, m):
        logw = lgn - gammaln(counts + 1).sum(axis=1) + counts @ prep.ln_p
        frac = frac_linear(counts, prep.neg_log2_hi, prep.neg_log2_lo)
        gap = np.where(frac == 0.0, 0.0, 1.0 - frac)
        near = np.minimum(frac, 1.0 - frac) < BOUNDARY_TOL
        if near.any():
            near_seen = True
            if prep.exact is not None and n <= EXACT_BOUNDARY_MAX_N:
                gap[near] = _resolve_boundary(counts[near], frac[near], prep)
                resolved = True
        partial.append(float(np.dot(np.exp(logw), gap)))
    flags = ()
    if near_seen:
        flags = (FLAG_RESOLVED,) if resolved else (FLAG_NEAR_INTEGER,)
    return math.fsum(partial), flags


def _validate_n(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"block length must be a positive integer, got {n!r}")
    return int(n)


def exact_redundancy(src: SourceModel, n: int) -> float:
    """E ceil(-log2 P(X^n)) - nH by enumeration over type classes."""
    return _exact_value(_prepare(src), _validate_n(n))[0]


def exact_redundancy_bruteforce(src: SourceModel, n: int) -> float:
    """Same quantity as ``exact_redundancy``, summed over all M**n sequences."""
    n = _validate_n(n)
    m = src.size
    if m**n > MAX_SEQUENCES:
        raise ResourceLimitError(f"M**n = {m**n} exceeds the bound {MAX_SEQUENCES}")
    probs = np.asarray(src.p.probs)
    lengths = -np.log2(probs)
    u = np.zeros(1)
    prob = np.ones(1)
    code = np.zeros(1, dtype=np.int64)
    radix = (n + 1) ** np.arange(m, dtype=np.int64)
    for _ in range(n):
        u = (u[:, None] + lengths[None, :]).ravel()
        prob = (prob[:, None] * probs[None, :]).ravel()
        code = (code[:, None] + radix[None, :]).ravel()

    gap = np.ceil(u) - u
    nearest = np.round(u)
    near = np.abs(u - nearest) < BOUNDARY_TOL
    exact = src.p.exact_probs
    if exact is not None and near.any():
        # decide each distinct composition once, exactly
        for c in np.unique(code[near]):
            counts = [(int(c) // int(r)) % (n + 1) for r in radix]
            rows = near & (code == c)
            ceil_u, dyadic = _exact_ceiling(counts, exact, 0.0 + float(nearest[rows][0]))
            if dyadic:
                gap[rows] = 0.0
            else:
                gap[rows] = ceil_u - u[rows]
    return float(np.sum(prob * gap))


# ---------------------------------------------------------------------------
# series and asymptotic forms


def _complex_power(z: np.ndarray, n: int) -> np.ndarray:
    """z**n by repeated squaring."""
    result = np.ones_like(z)
    base = z.copy()
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def series_redundancy(
    src: SourceModel, n: int, m_max: int, analysis: Optional[SourceAnalysis] = None
) -> float:
    """Fourier series for R_n truncated to 1 <= |m| <= m_max."""
    n = _validate_n(n)
    if int(m_max) != m_max or m_max < 1:
        raise InvalidArgumentError(f"m_max must be a positive integer, got {m_max!r}")
    if analysis is None:
        analysis = analyze_source(src)
    ms = np.arange(1, int(m_max) + 1, dtype=np.int64)
    c = coherence_sums(src.p, analysis.alpha, ms)
    phase = frac_times(ms * n, analysis.beta, analysis.beta_lo)
    z = np.exp(2j * np.pi * phase) * _complex_power(c, n)
    # a_m z + a_{-m} conj(z) = 2 Re(a_m z) = Im(z) / (pi m)
    terms = z.imag / (np.pi * ms)
    return 0.5 + math.fsum(terms)


def asymptotic_redundancy(analysis: SourceAnalysis, n: int) -> float:
    n = _validate_n(n)
    report = analysis.report
    if report.m0 is None:
        return 0.5
    m0 = report.m0
    f = float(frac_times(m0 * n, analysis.beta, analysis.beta_lo))
    return 0.5 + (0.5 - f) / m0


def _discontinuity(analysis: SourceAnalysis, n: int) -> bool:
    if analysis.report.m0 is None:
        return False
    f = float(frac_times(analysis.report.m0 * n, analysis.beta, analysis.beta_lo))
    return min(f, 1.0 - f) < BOUNDARY_TOL


def redundancy_series(
    src: SourceModel,
    n_start: int,
    n_end: int,
    method: Method | str = Method.EXACT,
    m_max: int = 10**4,
    qmax: int = DEFAULT_QMAX,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> RedundancySeries:
    """R_n for n_start..n_end by one method; order and values do not depend on ``workers``."""
    n_start, n_end = _validate_n(n_start), _validate_n(n_end)
    if n_start > n_end:
        raise InvalidArgumentError("n_start must not exceed n_end")
    method = Method(method)
    ns = range(n_start, n_end + 1)

    if method is Method.EXACT:
        prep = _prepare(src)
        _check_range_budget(n_start, n_end, src.size)

        def one(n):
            return _exact_value(prep, n)

    else:
        analysis = analyze_source(src, qmax, tol)

        def one(n):
            flags = (FLAG_DISCONTINUITY,) if _discontinuity(analysis, n) else ()
            if method is Method.SERIES:
                return series_redundancy(src, n, m_max, analysis), flags
            return asymptotic_redundancy(analysis, n), flags

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, ns))
    else:
        results = [one(n) for n in ns]
    return RedundancySeries(
        n_start=n_start,
        n_end=n_end,
        method=method,
        values=tuple(v for v, _ in results),
        flags=tuple(f for _, f in results),
    )


# ---------------------------------------------------------------------------
# spectrum


def spectrum(series: RedundancySeries | Sequence[float]) -> SpectrumReport:
    """Peaks of the DFT magnitude of the mean-removed series, in cycles per step.

    A bin is a peak when it is a local maximum and exceeds five times the
    median bin magnitude.
    """
    if isinstance(series, RedundancySeries):
        values = np.asarray(series.values, dtype=float)
        window = (series.n_start, series.n_end)
    else:
        values = np.asarray(series, dtype=float)
        window = (1, len(values))
    size = len(values)
    if size < MIN_SPECTRUM_LENGTH:
        raise InvalidArgumentError(f"spectrum needs at least {MIN_SPECTRUM_LENGTH} samples")

    mags = np.abs(np.fft.rfft(values - values.mean()))
    threshold = PEAK_THRESHOLD_FACTOR * float(np.median(mags))
    left = mags[:-2]
    mid = mags[1:-1]
    right = mags[2:]
    is_peak = (mid > left) & (mid >= right) & (mid > threshold) & (mid > 0)
    idx = np.nonzero(is_peak)[0] + 1
    last = len(mags) - 1
    if last >= 1 and mags[last] > mags[last - 1] and mags[last] > threshold and mags[last] > 0:
        idx = np.append(idx, last)
    order = idx[np.argsort(-mags[idx], kind="stable")]
    return SpectrumReport(
        window=window,
        peak_frequencies=tuple(float(k) / size for k in order),
        peak_magnitudes=tuple(float(mags[k]) for k in order),
        resolution=1.0 / size,
        threshold=threshold,
    )
