"""Map a memoryless source to its conjugate Hendricks-Teller medium.

The phase parameters alpha_j = log2(p0/pj) of the source play the part of
the distance ratios d_j/d0, and beta = -log2 p0 plays the part of 1/d0.  The
alphabet is first relabelled so that p0 is the largest probability, which
makes every alpha_j >= 0.  With d0 = 1/beta and d_j = alpha_j d0 the source
fundamental omega0 = 2 pi m0 beta and the Bragg fundamental q0 = 2 pi m0 / d0
coincide (modulo 2 pi, since omega0 is an angle per step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .coherence import DEFAULT_QMAX, DEFAULT_TOL, Classification, PhaseVector
from .diffraction import HTMedium, predict_bragg
from .redundancy import SourceModel, analyze_source

MATCH_TOL = 1e-9


@dataclass(frozen=True)
class CorrespondenceReport:
    source_m0: Optional[int]
    medium_m0: Optional[int]
    omega0: Optional[float]
    q0: Optional[float]
    matched: bool
    relabeling: tuple[int, ...]
    source_classification: Classification
    medium_classification: Classification

    def to_dict(self) -> dict:
        return {
            "source_m0": self.source_m0,
            "medium_m0": self.medium_m0,
            "omega0": self.omega0,
            "q0": self.q0,
            "matched": self.matched,
            "relabeling": list(self.relabeling),
            "source_classification": self.source_classification.value,
            "medium_classification": self.medium_classification.value,
        }


def relabeling(src: SourceModel) -> tuple[int, ...]:
    """Order putting the most probable symbol first (lowest index on ties)."""
    probs = src.p.probs
    top = max(range(len(probs)), key=lambda j: (probs[j], -j))
    return (top,) + tuple(j for j in range(len(probs)) if j != top)


def conjugate_medium(
    src: SourceModel, qmax: int = DEFAULT_QMAX, tol: float = DEFAULT_TOL
) -> HTMedium:
    order = relabeling(src)
    relabeled = src.permuted(order)
    analysis = analyze_source(relabeled, qmax, tol)
    # beta > 0 because p0 < 1 for any source with two or more symbols
    d0 = 1.0 / analysis.beta
    distances = (d0,) + tuple(a * d0 for a in analysis.alpha.values)
    ratios = PhaseVector(
        tuple(x / d0 for x in distances[1:]),
        analysis.alpha.exact_forms,
        analysis.alpha.declared_irrational,
    )
    label = f"conjugate of {src.label}" if src.label else "conjugate medium"
    return HTMedium(distances, relabeled.p, label, exact_ratios=ratios)


def _wrapped(angle: float) -> float:
    return math.remainder(angle, 2.0 * math.pi)


def correspondence(
    src: SourceModel, qmax: int = DEFAULT_QMAX, tol: float = DEFAULT_TOL
) -> CorrespondenceReport:
    """Compare the source oscillation fundamental with the conjugate Bragg fundamental."""
    analysis = analyze_source(src, qmax, tol)
    medium = conjugate_medium(src, qmax, tol)
    bragg = predict_bragg(medium, qmax, tol, K=1)
    medium_class = bragg.report.classification

    matched = analysis.report.classification is medium_class
    if matched and analysis.report.is_rational:
        matched = (
            analysis.report.m0 == bragg.m0
            and abs(_wrapped(analysis.omega0 - bragg.q0)) <= MATCH_TOL
        )
    return CorrespondenceReport(
        source_m0=analysis.report.m0,
        medium_m0=bragg.m0,
        omega0=analysis.omega0,
        q0=bragg.q0,
        matched=matched,
        relabeling=relabeling(src),
        source_classification=analysis.report.classification,
        medium_classification=medium_class,
    )
