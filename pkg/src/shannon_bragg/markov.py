"""Complex-weighted transition matrices for Markov sources and Markov media.

For a Markov chain the role of C_m^n is taken by the n-th power of the
transition matrix with each entry multiplied by a unit phasor:

    source side:  W_m[k, l] = p_kl exp(-2 pi i m log2 p_kl)
    medium side:  W_m[k, l] = p_kl exp(2 pi i m d_kl / d0)

|W_m| is entrywise equal to P, so the spectral radius never exceeds the
Perron root 1.  Harmonics m where it reaches 1 mark oscillatory behaviour
(source) or Bragg peaks (medium, where an eigenvalue equal to 1 is the
sharper criterion; both are reported).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .coherence import frac_times, parse_number
from .errors import InvalidArgumentError, NumericError

ROW_SUM_TOL = 1e-12
DEFAULT_EPS = 1e-9


class WeightMode(str, enum.Enum):
    SOURCE = "source"
    MEDIUM = "medium"


class MarkovClassification(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    CONVERGENT_UP_TO_SCAN = "ConvergentUpToScan"


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise InvalidArgumentError(f"transition matrix must be square with S >= 2, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
            raise InvalidArgumentError("transition probabilities must be strictly positive")
        if np.any(np.abs(a.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise InvalidArgumentError("every row must sum to 1")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def states(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identical_rows(cls, probs) -> "TransitionMatrix":
        """Memoryless source embedded as a chain whose rows all equal ``probs``."""
        row = np.asarray(probs, dtype=float)
        return cls(np.tile(row, (row.size, 1)))


@dataclass(frozen=True, eq=False)
class WeightedMatrix:
    entries: np.ndarray
    m: int
    mode: WeightMode
    distances: Optional[np.ndarray] = None
    d0: Optional[float] = None


@dataclass(frozen=True)
class MarkovReport:
    classification: MarkovClassification
    mode: WeightMode
    m_max: int
    eps: float
    flagged: tuple[int, ...]
    unit_eigenvalue_m: tuple[int, ...]
    radii: tuple[float, ...]
    eigenvalues: tuple[tuple[complex, ...], ...]

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "mode": self.mode.value,
            "m_max": self.m_max,
            "eps": self.eps,
            "flagged": list(self.flagged),
            "unit_eigenvalue_m": list(self.unit_eigenvalue_m),
            "spectral_radius": list(self.radii),
            "eigenvalues": [[[z.real, z.imag] for z in ev] for ev in self.eigenvalues],
        }


def weighted_matrix(
    P: TransitionMatrix,
    m: int,
    mode: Union[WeightMode, str] = WeightMode.SOURCE,
    distances=None,
    d0: Optional[float] = None,
) -> WeightedMatrix:
    mode = WeightMode(mode)
    if int(m) != m:
        raise InvalidArgumentError(f"harmonic index must be an integer, got {m!r}")
    m = int(m)
    p = P.entries
    if mode is WeightMode.SOURCE:
        phase = frac_times(m, -np.log2(p))
        return WeightedMatrix(p * np.exp(2j * np.pi * phase), m, mode)

    if distances is None or d0 is None:
        raise InvalidArgumentError("medium weights need a distance matrix and a reference d0")
    d = np.asarray(distances, dtype=float)
    if d.shape != p.shape or not np.all(np.isfinite(d)):
        raise InvalidArgumentError(f"distance matrix must be finite with shape {p.shape}")
    if d0 == 0 or not math.isfinite(d0):
        raise InvalidArgumentError("reference d0 must be finite and non-zero")
    phase = frac_times(m, d / d0)
    return WeightedMatrix(p * np.exp(2j * np.pi * phase), m, mode, d, float(d0))


def eigenvalues(W: WeightedMatrix) -> np.ndarray:
    try:
        ev = np.linalg.eigvals(W.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation did not converge for m = {W.m}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericError(f"non-finite eigenvalues for m = {W.m}")
    return ev


def spectral_radius(W: WeightedMatrix) -> float:
    return float(np.max(np.abs(eigenvalues(W))))


def classify_markov(
    P: TransitionMatrix,
    mode: Union[WeightMode, str] = WeightMode.SOURCE,
    distances=None,
    d0: Optional[float] = None,
    m_max: int = 100,
    eps: float = DEFAULT_EPS,
) -> MarkovReport:
    """Scan m = 1..m_max for harmonics with spectral radius >= 1 - eps."""
    if int(m_max) != m_max or m_max < 1:
        raise InvalidArgumentError(f"m_max must be a positive integer, got {m_max!r}")
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidArgumentError(f"eps must be positive, got {eps!r}")
    mode = WeightMode(mode)
    radii, spectra, flagged, unit = [], [], [], []
    for m in range(1, int(m_max) + 1):
        ev = eigenvalues(weighted_matrix(P, m, mode, distances, d0))
        rho = float(np.max(np.abs(ev)))
        radii.append(rho)
        spectra.append(tuple(complex(z) for z in ev))
        if rho >= 1.0 - eps:
            flagged.append(m)
        if np.min(np.abs(ev - 1.0)) <= eps:
            unit.append(m)
    classification = (
        MarkovClassification.OSCILLATORY if flagged else MarkovClassification.CONVERGENT_UP_TO_SCAN
    )
    return MarkovReport(
        classification=classification,
        mode=mode,
        m_max=int(m_max),
        eps=float(eps),
        flagged=tuple(flagged),
        unit_eigenvalue_m=tuple(unit),
        radii=tuple(radii),
        eigenvalues=tuple(spectra),
    )


def load_matrix(source: Union[str, Path, dict]) -> tuple[TransitionMatrix, Optional[np.ndarray], Optional[float]]:
    """Read ``{"states": S, "rows": [...], "distances": optional, "d0": optional}``.

    Entries may be numbers or fraction strings.  ``d0`` defaults to
    ``distances[0][0]``.
    """
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgumentError(f"cannot read transition matrix: {exc}") from exc
    if not isinstance(doc, dict) or "rows" not in doc:
        raise InvalidArgumentError('matrix document needs a "rows" entry')
    rows = [[float(parse_number(x)) for x in row] for row in doc["rows"]]
    P = TransitionMatrix(np.array(rows))
    if "states" in doc and int(doc["states"]) != P.states:
        raise InvalidArgumentError(f'"states" = {doc["states"]} but {P.states} rows given')
    distances = None
    d0 = None
    if doc.get("distances") is not None:
        distances = np.array([[float(parse_number(x)) for x in row] for row in doc["distances"]])
        d0 = float(parse_number(doc["d0"])) if doc.get("d0") is not None else float(distances[0, 0])
    return P, distances, d0
