"""Shared phase arithmetic: fractional parts, the coherence sum and commensurability.

The coherence sum

    C_m = p_0 + sum_j p_j exp(2 pi i m alpha_j)

has modulus at most one and equals one for some m > 0 exactly when every
alpha_j is rational.  Deciding rationality from floating point input is not
possible in general, so classification is tri-state: exact declarations
(``exact_forms`` / ``declared_irrational``) are trusted, everything else goes
through continued-fraction reconstruction with an explicit ``qmax`` and
``tol``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

import mpmath
import numpy as np

from .errors import InvalidArgumentError, NumericError

Rational = Fraction
Number = Union[int, float, Fraction]

DEFAULT_QMAX = 10**4
DEFAULT_TOL = 1e-12

PROB_SUM_TOL = 1e-12
EXACT_MATCH_TOL = 1e-12
INT64_MAX = 2**63 - 1

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker split constant


def parse_number(text: Union[str, Number]) -> Number:
    """Parse ``"1/3"`` or ``"2"`` as an exact Fraction, ``"0.3"`` as a float."""
    if isinstance(text, (Fraction, int)) and not isinstance(text, bool):
        return Fraction(text)
    if isinstance(text, float):
        return text
    s = str(text).strip()
    if not s:
        raise InvalidArgumentError("empty number")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        if all(c.isdigit() or c in "+-" for c in s):
            return Fraction(int(s))
        value = float(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgumentError(f"cannot parse number {text!r}") from exc
    if not math.isfinite(value):
        raise InvalidArgumentError(f"non-finite number {text!r}")
    return value


def parse_list(text: str) -> list[Number]:
    return [parse_number(part) for part in text.split(",") if part.strip()]


@dataclass(frozen=True)
class ProbabilityVector:
    """Symbol or spacing probabilities p_0..p_{M-1}, all strictly positive.

    ``exact_probs`` is either ``None`` or a Fraction per entry summing to
    exactly one.  A single-entry vector is allowed (a deterministic medium);
    sources additionally require at least two symbols.
    """

    probs: tuple[float, ...]
    exact_probs: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 1:
            raise InvalidArgumentError("probability vector is empty")
        for p in probs:
            if not math.isfinite(p) or p <= 0.0:
                raise InvalidArgumentError(f"probabilities must be positive and finite, got {p!r}")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise InvalidArgumentError(
                f"probabilities must sum to 1 (got {math.fsum(probs)!r})"
            )
        if self.exact_probs is not None:
            exact = tuple(Fraction(q) for q in self.exact_probs)
            object.__setattr__(self, "exact_probs", exact)
            if len(exact) != len(probs):
                raise InvalidArgumentError("exact_probs length differs from probs")
            if sum(exact) != 1:
                raise InvalidArgumentError(f"exact probabilities sum to {sum(exact)}, not 1")
            for p, q in zip(probs, exact):
                if q <= 0 or abs(p - float(q)) > EXACT_MATCH_TOL:
                    raise InvalidArgumentError(f"exact probability {q} does not match {p!r}")

    @classmethod
    def from_values(cls, values: Iterable[Union[str, Number]]) -> "ProbabilityVector":
        """Build from numbers or strings; all-Fraction input keeps the exact form."""
        parsed = [parse_number(v) for v in values]
        exact = None
        if parsed and all(isinstance(v, Fraction) for v in parsed):
            exact = tuple(parsed)
        return cls(tuple(float(v) for v in parsed), exact)

    def __len__(self) -> int:
        return len(self.probs)

    def permuted(self, order: Sequence[int]) -> "ProbabilityVector":
        probs = tuple(self.probs[i] for i in order)
        exact = None if self.exact_probs is None else tuple(self.exact_probs[i] for i in order)
        return ProbabilityVector(probs, exact)


@dataclass(frozen=True)
class PhaseVector:
    """Phase parameters alpha_1..alpha_{M-1}.

    ``exact_forms[j]`` holds a Fraction when alpha_j is known to be exactly
    rational, ``declared_irrational[j]`` is True when it is known not to be.
    """

    values: tuple[float, ...]
    exact_forms: Optional[tuple[Optional[Fraction], ...]] = None
    declared_irrational: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        for v in values:
            if not math.isfinite(v):
                raise InvalidArgumentError(f"phase values must be finite, got {v!r}")
        if self.exact_forms is not None:
            forms = tuple(None if f is None else Fraction(f) for f in self.exact_forms)
            object.__setattr__(self, "exact_forms", forms)
            if len(forms) != len(values):
                raise InvalidArgumentError("exact_forms length differs from values")
            for v, f in zip(values, forms):
                if f is not None and abs(v - float(f)) > EXACT_MATCH_TOL:
                    raise InvalidArgumentError(f"exact form {f} does not match value {v!r}")
        if self.declared_irrational is not None:
            flags = tuple(bool(b) for b in self.declared_irrational)
            object.__setattr__(self, "declared_irrational", flags)
            if len(flags) != len(values):
                raise InvalidArgumentError("declared_irrational length differs from values")
            if self.exact_forms is not None and any(
                b and f is not None for b, f in zip(flags, self.exact_forms)
            ):
                raise InvalidArgumentError("a phase cannot be both exact-rational and irrational")

    @classmethod
    def from_values(cls, values: Iterable[Union[str, Number]]) -> "PhaseVector":
        parsed = [parse_number(v) for v in values]
        forms = tuple(v if isinstance(v, Fraction) else None for v in parsed)
        if all(f is None for f in forms):
            forms = None
        return cls(tuple(float(v) for v in parsed), forms)

    def __len__(self) -> int:
        return len(self.values)

    def exact(self, j: int) -> Optional[Fraction]:
        return None if self.exact_forms is None else self.exact_forms[j]

    def is_declared_irrational(self, j: int) -> bool:
        return bool(self.declared_irrational and self.declared_irrational[j])


class Classification(str, enum.Enum):
    RATIONAL = "Rational"
    IRRATIONAL_AT_TOLERANCE = "IrrationalAtTolerance"
    EXACT_IRRATIONAL_DECLARED = "ExactIrrationalDeclared"


@dataclass(frozen=True)
class CommensurabilityReport:
    classification: Classification
    m0: Optional[int]
    fundamental_frequency: Optional[float]
    convergents_examined: tuple[tuple[tuple[Fraction, float], ...], ...]
    tolerance_used: float
    qmax_used: int
    rationals: tuple[Optional[Fraction], ...] = field(default=())

    @property
    def is_rational(self) -> bool:
        return self.classification is Classification.RATIONAL

    def with_frequency(self, frequency: Optional[float]) -> "CommensurabilityReport":
        return replace(self, fundamental_frequency=frequency)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "m0": self.m0,
            "fundamental_frequency": self.fundamental_frequency,
            "rationals": [None if r is None else str(r) for r in self.rationals],
            "convergents_examined": [
                [[str(r), res] for r, res in per_alpha] for per_alpha in self.convergents_examined
            ],
            "tolerance_used": self.tolerance_used,
            "qmax_used": self.qmax_used,
        }


# ---------------------------------------------------------------------------
# fractional parts


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_product(a, b):
    """Return (p, e) with p = fl(a*b) and p + e == a*b exactly (Dekker)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _wrap_unit(s):
    """Reduce to [0, 1); tiny negative inputs would otherwise round up to 1.0."""
    f = s - np.floor(s)
    return np.where(f >= 1.0, 0.0, f)


def fractional_part(u: float) -> float:
    """u - floor(u), always in [0, 1)."""
    u = float(u)
    if not math.isfinite(u):
        raise InvalidArgumentError(f"fractional part of non-finite value {u!r}")
    f = u - math.floor(u)
    return 0.0 if f >= 1.0 else f


def frac_times(k, hi: float, lo: float = 0.0):
    """Fractional part of k*(hi + lo) for integer k (scalar or array), |k| < 2**53.

    The product k*hi is formed exactly as a double pair, so the absolute error
    does not grow with k.
    """
    k = np.asarray(k, dtype=float)
    p, e = two_product(k, hi)
    f = p - np.floor(p)
    return _wrap_unit(f + e + k * lo)


def frac_linear(counts, his: Sequence[float], los: Sequence[float]):
    """Fractional part of sum_j counts[..., j] * (his[j] + los[j]), compensated."""
    counts = np.asarray(counts, dtype=float)
    s = np.zeros(counts.shape[:-1])
    for j, (hi, lo) in enumerate(zip(his, los)):
        p, e = two_product(counts[..., j], hi)
        s = s + (p - np.floor(p)) + e + counts[..., j] * lo
        s = s - np.floor(s)
    return _wrap_unit(s)


def fractional_part_of_product(beta: float, n: int, beta_lo: float = 0.0) -> float:
    """<beta*n> for integer n, accurate to ~1e-15 absolute for |n| <= 1e9.

    ``beta_lo`` optionally carries the rounding error of ``beta`` so that a
    double-double constant can be scaled without losing its tail.
    """
    beta = float(beta)
    if not math.isfinite(beta) or not math.isfinite(beta_lo):
        raise InvalidArgumentError(f"non-finite beta {beta!r}")
    if int(n) != n or abs(n) > 2**53:
        raise InvalidArgumentError(f"n must be an integer of magnitude <= 2**53, got {n!r}")
    return float(frac_times(int(n), beta, beta_lo))


def log2_split(x: Number, dps: int = 40) -> tuple[float, float]:
    """log2(x) as a double pair (hi, lo); Fractions are taken exactly."""
    with mpmath.workdps(dps):
        if isinstance(x, Fraction):
            v = mpmath.log(mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator), 2)
        else:
            v = mpmath.log(mpmath.mpf(float(x)), 2)
        hi = float(v)
        lo = float(v - hi)
    return hi, lo


# ---------------------------------------------------------------------------
# coherence sum


def _as_probs(p) -> ProbabilityVector:
    return p if isinstance(p, ProbabilityVector) else ProbabilityVector(tuple(p))


def _as_phases(alpha) -> PhaseVector:
    return alpha if isinstance(alpha, PhaseVector) else PhaseVector(tuple(alpha))


def _phase_fractions(alpha: PhaseVector, ms: np.ndarray) -> np.ndarray:
    """<m * alpha_j> for every m in ``ms`` (rows) and j (columns)."""
    out = np.empty((ms.size, len(alpha)))
    for j, value in enumerate(alpha.values):
        exact = alpha.exact(j)
        if exact is not None:
            num, den = exact.numerator, exact.denominator
            out[:, j] = [((int(m) * num) % den) / den for m in ms]
        else:
            out[:, j] = frac_times(ms, value)
    return out


def coherence_sums(p, alpha, ms) -> np.ndarray:
    """Vectorised C_m for an array of integer harmonics ``ms``."""
    p = _as_probs(p)
    alpha = _as_phases(alpha)
    if len(alpha) != len(p) - 1:
        raise InvalidArgumentError(
            f"phase vector has {len(alpha)} entries, expected {len(p) - 1}"
        )
    ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
    if len(alpha) == 0:
        return np.full(ms.shape, complex(p.probs[0]))
    phases = _phase_fractions(alpha, ms)
    weights = np.asarray(p.probs[1:])
    return p.probs[0] + np.exp(2j * np.pi * phases) @ weights


def coherence_sum(p, alpha, m: int) -> complex:
    """C_m = p_0 + sum_j p_j exp(2 pi i m alpha_j)."""
    if int(m) != m:
        raise InvalidArgumentError(f"harmonic index must be an integer, got {m!r}")
    return complex(coherence_sums(p, alpha, [int(m)])[0])


def fourier_coefficient(m: int) -> complex:
    """Coefficient a_m = 1/(2 pi i m) of the fractional-part Fourier series."""
    if m == 0:
        raise InvalidArgumentError("a_0 is not part of the series")
    return complex(0.0, -1.0 / (2.0 * math.pi * m))


# ---------------------------------------------------------------------------
# rational reconstruction


def convergents(x: Number, qmax: int) -> Iterator[tuple[int, int, float]]:
    """Yield (h, k, |x - h/k|) for continued-fraction convergents with k <= qmax.

    The expansion is of the exact binary value of ``x``, so it terminates.
    """
    fx = Fraction(x)
    num0, den0 = fx.numerator, fx.denominator
    num, den = num0, den0
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    while den:
        a, r = divmod(num, den)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        if k > qmax:
            return
        yield h, k, abs(num0 * k - h * den0) / (den0 * k)
        num, den = den, r


def rational_reconstruct(x: Number, qmax: int, tol: float) -> Optional[Fraction]:
    """Smallest-denominator convergent a/b of x with b <= qmax and |x - a/b| <= tol."""
    if not math.isfinite(float(x)):
        return None
    for h, k, residual in convergents(x, qmax):
        if residual <= tol:
            return Fraction(h, k)
    return None


def classify_commensurability(
    alpha, qmax: int = DEFAULT_QMAX, tol: float = DEFAULT_TOL
) -> CommensurabilityReport:
    """Decide whether all phases are rational and, if so, find m0 = lcm of denominators."""
    alpha = _as_phases(alpha)
    if not (isinstance(qmax, (int, np.integer)) and qmax >= 1):
        raise InvalidArgumentError(f"qmax must be a positive integer, got {qmax!r}")
    if not (tol > 0 and math.isfinite(tol)):
        raise InvalidArgumentError(f"tol must be positive, got {tol!r}")
    if len(alpha) == 0:
        raise InvalidArgumentError("phase vector is empty")

    examined = []
    rationals: list[Optional[Fraction]] = []
    declared = False
    for j, value in enumerate(alpha.values):
        exact = alpha.exact(j)
        if alpha.is_declared_irrational(j):
            declared = True
            examined.append(())
            rationals.append(None)
        elif exact is not None:
            examined.append(((exact, 0.0),))
            rationals.append(exact)
        else:
            seen = []
            found = None
            for h, k, residual in convergents(value, qmax):
                seen.append((Fraction(h, k), residual))
                if residual <= tol:
                    found = Fraction(h, k)
                    break
            examined.append(tuple(seen))
            rationals.append(found)

    if declared:
        classification = Classification.EXACT_IRRATIONAL_DECLARED
    elif all(r is not None for r in rationals):
        classification = Classification.RATIONAL
    else:
        classification = Classification.IRRATIONAL_AT_TOLERANCE

    m0 = None
    if classification is Classification.RATIONAL:
        m0 = 1
        for r in rationals:
            m0 = math.lcm(m0, r.denominator)
            if m0 > INT64_MAX:
                raise NumericError("m0 exceeds 2**63 - 1")

    return CommensurabilityReport(
        classification=classification,
        m0=m0,
        fundamental_frequency=None,
        convergents_examined=tuple(examined),
        tolerance_used=float(tol),
        qmax_used=int(qmax),
        rationals=tuple(rationals),
    )
