"""Hendricks-Teller layered medium: positions, structure function and Bragg peaks.

Layers sit at Z_0 = 0 < Z_1 < ... < Z_{n-1}; the n - 1 spacings are i.i.d.
draws from ``distances`` with probabilities ``p``.  With unit scattering
amplitude per layer the structure function is

    I(q) = E |sum_j exp(-i q Z_j)|^2 = n + 2 Re sum_{r=1}^{n-1} (n - r) C(q)^r,
    C(q) = sum_j p_j exp(i q d_j),

and I(q)/n tends to (1 - |C|^2) / |1 - C|^2 wherever C(q) != 1.  Where
C(q) = 1 every pair is in phase and I(q) = n^2: a Bragg peak.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .coherence import (
    DEFAULT_QMAX,
    DEFAULT_TOL,
    CommensurabilityReport,
    PhaseVector,
    ProbabilityVector,
    classify_commensurability,
    parse_number,
)
from .errors import DomainError, InvalidArgumentError, ResourceLimitError

COHERENCE_DELTA = 1e-6
BRAGG_REL_TOL = 1e-6
MAX_SPACING_SEQUENCES = 2 * 10**7
_BRUTE_CHUNK = 2**16

SeedLike = Union[int, Sequence[int]]


@dataclass(frozen=True)
class HTMedium:
    """Spacing values d_0..d_{M-1} with their selection probabilities.

    Non-positive spacings are accepted for phase analysis only; the sampler
    rejects them.  ``exact_ratios`` optionally records what is known exactly
    about d_j/d_0 when the distances themselves are not rational.
    """

    distances: tuple[float, ...]
    p: ProbabilityVector
    label: str = ""
    exact_distances: Optional[tuple[Fraction, ...]] = None
    exact_ratios: Optional[PhaseVector] = None

    def __post_init__(self):
        d = tuple(float(x) for x in self.distances)
        object.__setattr__(self, "distances", d)
        if len(d) != len(self.p):
            raise InvalidArgumentError(
                f"{len(d)} distances but {len(self.p)} probabilities"
            )
        if not all(math.isfinite(x) for x in d):
            raise InvalidArgumentError("distances must be finite")
        if d[0] == 0.0:
            raise InvalidArgumentError("reference distance d0 must be non-zero")
        if self.exact_distances is not None:
            exact = tuple(Fraction(x) for x in self.exact_distances)
            object.__setattr__(self, "exact_distances", exact)
            if len(exact) != len(d) or any(abs(float(e) - x) > 1e-12 * max(1.0, abs(x)) for e, x in zip(exact, d)):
                raise InvalidArgumentError("exact distances do not match distances")
        if self.exact_ratios is not None:
            ratios = [x / d[0] for x in d[1:]]
            if len(self.exact_ratios) != len(ratios) or any(
                abs(a - b) > 1e-12 * max(1.0, abs(b)) for a, b in zip(self.exact_ratios.values, ratios)
            ):
                raise InvalidArgumentError("exact_ratios do not match the distance ratios")

    @classmethod
    def from_values(cls, distances, probs, label: str = "") -> "HTMedium":
        parsed = [parse_number(x) for x in distances]
        exact = tuple(parsed) if all(isinstance(x, Fraction) for x in parsed) else None
        return cls(tuple(float(x) for x in parsed), ProbabilityVector.from_values(probs), label, exact)

    @property
    def phase_only(self) -> bool:
        return any(x <= 0.0 for x in self.distances)

    def coherence(self, q):
        """C(q) = sum_j p_j exp(i q d_j); exactly 1 at q = 0."""
        q = np.asarray(q, dtype=float)
        d = np.asarray(self.distances)
        c = np.exp(1j * q[..., None] * d) @ np.asarray(self.p.probs)
        return np.where(q == 0.0, 1.0 + 0.0j, c)


class IntensityMethod(str, enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "mc"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class IntensityProfile:
    """I(q) on a grid (Exact, MonteCarlo) or I(q)/n in the limit (Asymptotic).

    Asymptotic cells at near-coherent q hold NaN.
    """

    q_grid: tuple[float, ...]
    n_layers: int
    method: IntensityMethod
    intensity: tuple[float, ...]
    stderr: Optional[tuple[float, ...]]
    near_coherent_mask: tuple[bool, ...]


@dataclass(frozen=True)
class BraggPrediction:
    commensurate: bool
    m0: Optional[int]
    q0: Optional[float]
    lambda0: Optional[float]
    peak_wavenumbers: tuple[float, ...]
    report: Optional[CommensurabilityReport] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "commensurate": self.commensurate,
            "m0": self.m0,
            "q0": self.q0,
            "lambda0": self.lambda0,
            "peak_wavenumbers": list(self.peak_wavenumbers),
        }


# ---------------------------------------------------------------------------
# sampling


def _rng(seed: SeedLike) -> np.random.Generator:
    try:
        return np.random.default_rng(seed)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"invalid seed {seed!r}") from exc


def _check_sampling(medium: HTMedium, n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"number of layers must be a positive integer, got {n!r}")
    if medium.phase_only:
        raise InvalidArgumentError("sampling requires every distance to be positive")


def _walk(medium: HTMedium, n: int, rng: np.random.Generator) -> np.ndarray:
    choice = rng.choice(len(medium.distances), size=n - 1, p=np.asarray(medium.p.probs))
    z = np.zeros(n)
    np.cumsum(np.asarray(medium.distances)[choice], out=z[1:])
    return z


def sample_positions(medium: HTMedium, n: int, seed: SeedLike) -> np.ndarray:
    """One random walk Z_0 = 0, ..., Z_{n-1}, reproducible from ``seed``."""
    _check_sampling(medium, n)
    return _walk(medium, int(n), _rng(seed))


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a run seeded with ``seed``."""
    return _rng([int(seed), int(index)])


# ---------------------------------------------------------------------------
# structure function


def _ramp_sum_direct(c: complex, n: int) -> complex:
    r = np.arange(1, n)
    powers = np.cumprod(np.full(n - 1, c))
    return complex(np.dot(n - r, powers))


def _power(c: complex, n: int) -> complex:
    result, base = 1.0 + 0.0j, c
    while n:
        if n & 1:
            result *= base
        n >>= 1
        if n:
            base *= base
    return result


def _ramp_sum(c: complex, n: int) -> complex:
    """sum_{r=1}^{n-1} (n - r) c^r."""
    if n == 1:
        return 0j
    w = 1.0 - c
    # closed form divides by w**2; near c = 1 (or when n|w| is small) the
    # numerator cancels, so sum directly instead
    if abs(w) > COHERENCE_DELTA and n * abs(w) > 1.0:
        return c * (n * w - 1.0 + _power(c, n)) / (w * w)
    return _ramp_sum_direct(c, n)


def exact_intensity(medium: HTMedium, n: int, q: float) -> float:
    """Finite-n structure function I(q) = n + 2 Re I_0(q)."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"number of layers must be a positive integer, got {n!r}")
    n = int(n)
    c = complex(medium.coherence(float(q)))
    return n + 2.0 * _ramp_sum(c, n).real


def exact_intensity_bruteforce(medium: HTMedium, n: int, q: float) -> float:
    """I(q) as an explicit expectation over all M**(n-1) spacing sequences."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"number of layers must be a positive integer, got {n!r}")
    n = int(n)
    m = len(medium.distances)
    count = m ** (n - 1)
    if count > MAX_SPACING_SEQUENCES:
        raise ResourceLimitError(f"M**(n-1) = {count} exceeds the bound {MAX_SPACING_SEQUENCES}")
    d = np.asarray(medium.distances)
    p = np.asarray(medium.p.probs)

    # vectorise the trailing spacings, loop over the leading ones
    tail = n - 1
    while tail > 0 and m**tail > _BRUTE_CHUNK:
        tail -= 1
    head = n - 1 - tail
    total = 0.0
    for prefix in itertools.product(range(m), repeat=head):
        idx = list(prefix)
        z_prefix = np.concatenate([[0.0], np.cumsum(d[idx])])
        zs = z_prefix[-1:]
        us = np.array([np.exp(-1j * q * z_prefix).sum()])
        ps = np.array([np.prod(p[idx])])
        for _ in range(tail):
            zs = (zs[:, None] + d[None, :]).ravel()
            us = (us[:, None] + np.exp(-1j * q * zs).reshape(-1, m)).ravel()
            ps = (ps[:, None] * p[None, :]).ravel()
        total += float(np.sum(ps * np.abs(us) ** 2))
    return total


def monte_carlo_intensity(
    medium: HTMedium, n: int, q_grid, samples: int, seed: int
) -> IntensityProfile:
    """Sample mean of |sum_j exp(-i q Z_j)|^2 over independent walks.

    Walk ``s`` is drawn from ``substream(seed, s)``, so the result does not
    depend on evaluation order.
    """
    _check_sampling(medium, n)
    if int(samples) != samples or samples < 2:
        raise InvalidArgumentError(f"samples must be an integer >= 2, got {samples!r}")
    n, samples = int(n), int(samples)
    q = np.asarray(q_grid, dtype=float).ravel()
    values = np.empty((samples, q.size))
    for s in range(samples):
        z = _walk(medium, n, substream(seed, s))
        u = np.exp(-1j * np.outer(z, q)).sum(axis=0)
        values[s] = u.real**2 + u.imag**2
    mean = values.mean(axis=0)
    stderr = values.std(axis=0, ddof=1) / math.sqrt(samples)
    return IntensityProfile(
        q_grid=tuple(q.tolist()),
        n_layers=n,
        method=IntensityMethod.MONTE_CARLO,
        intensity=tuple(mean.tolist()),
        stderr=tuple(stderr.tolist()),
        near_coherent_mask=tuple(_near_coherent(medium, q).tolist()),
    )


def _near_coherent(medium: HTMedium, q) -> np.ndarray:
    return np.abs(1.0 - medium.coherence(q)) < COHERENCE_DELTA


def asymptotic_intensity(medium: HTMedium, q: float) -> float:
    """lim I(q)/n = (1 - |C|^2) / |1 - C|^2."""
    c = complex(medium.coherence(float(q)))
    gap = abs(1.0 - c)
    if gap < COHERENCE_DELTA:
        raise DomainError(f"near-Bragg: asymptotic form diverges at q = {q!r} (|1 - C| = {gap:.3g})")
    return max(0.0, (1.0 - abs(c) ** 2) / gap**2)


def exact_profile(medium: HTMedium, n: int, q_grid) -> IntensityProfile:
    q = np.asarray(q_grid, dtype=float).ravel()
    return IntensityProfile(
        q_grid=tuple(q.tolist()),
        n_layers=int(n),
        method=IntensityMethod.EXACT,
        intensity=tuple(exact_intensity(medium, n, x) for x in q),
        stderr=None,
        near_coherent_mask=tuple(_near_coherent(medium, q).tolist()),
    )


def asymptotic_profile(medium: HTMedium, q_grid, n: int = 1) -> IntensityProfile:
    q = np.asarray(q_grid, dtype=float).ravel()
    values = []
    for x in q:
        try:
            values.append(asymptotic_intensity(medium, x))
        except DomainError:
            values.append(math.nan)
    return IntensityProfile(
        q_grid=tuple(q.tolist()),
        n_layers=int(n),
        method=IntensityMethod.ASYMPTOTIC,
        intensity=tuple(values),
        stderr=None,
        near_coherent_mask=tuple(_near_coherent(medium, q).tolist()),
    )


# ---------------------------------------------------------------------------
# Bragg peaks


def distance_ratios(medium: HTMedium) -> PhaseVector:
    """d_j / d_0 for j >= 1, exact when the distances are."""
    if medium.exact_ratios is not None:
        return medium.exact_ratios
    d = medium.distances
    values = tuple(x / d[0] for x in d[1:])
    if medium.exact_distances is not None:
        e = medium.exact_distances
        return PhaseVector(values, tuple(x / e[0] for x in e[1:]))
    return PhaseVector(values)


def predict_bragg(
    medium: HTMedium, qmax: int = DEFAULT_QMAX, tol: float = DEFAULT_TOL, K: int = 5
) -> BraggPrediction:
    """Fundamental wavenumber q0 = 2 pi m0 / d0 and its harmonics, if the spacings are commensurate."""
    if int(K) != K or K < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {K!r}")
    if len(medium.distances) == 1:
        report = None
        m0 = 1
    else:
        report = classify_commensurability(distance_ratios(medium), qmax, tol)
        m0 = report.m0
    if m0 is None:
        return BraggPrediction(False, None, None, None, (), report)
    d0 = abs(medium.distances[0])
    q0 = 2.0 * math.pi * m0 / d0
    if report is not None:
        report = report.with_frequency(q0)
    return BraggPrediction(
        commensurate=True,
        m0=m0,
        q0=q0,
        lambda0=d0 / m0,
        peak_wavenumbers=tuple(k * q0 for k in range(1, int(K) + 1)),
        report=report,
    )


def detect_bragg(medium: HTMedium, q: float, n_list: Sequence[int]) -> bool:
    """True when I(q) = n^2 (relative 1e-6) for every n in ``n_list``."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidArgumentError("n_list needs at least three increasing entries")
    return all(abs(exact_intensity(medium, n, q) / n**2 - 1.0) <= BRAGG_REL_TOL for n in n_list)
