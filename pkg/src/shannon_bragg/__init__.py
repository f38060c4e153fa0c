"""Shannon-code redundancy patterns and Hendricks-Teller diffraction patterns.

Both problems reduce to powers of a probability-weighted sum of unit phasors.
The modules here evaluate each side exactly, by truncated series and
asymptotically, and check that commensurate parameters produce oscillations
(redundancy) and Bragg peaks (diffraction) at matching harmonics.
"""

__version__ = "0.1.0"

from .coherence import (
    Classification,
    CommensurabilityReport,
    PhaseVector,
    ProbabilityVector,
    classify_commensurability,
    coherence_sum,
    fourier_coefficient,
    fractional_part,
    fractional_part_of_product,
    rational_reconstruct,
)
from .errors import (
    DomainError,
    InvalidArgumentError,
    NumericError,
    ResourceLimitError,
    ShannonBraggError,
)

__all__ = [
    "Classification",
    "CommensurabilityReport",
    "DomainError",
    "InvalidArgumentError",
    "NumericError",
    "PhaseVector",
    "ProbabilityVector",
    "ResourceLimitError",
    "ShannonBraggError",
    "classify_commensurability",
    "coherence_sum",
    "fourier_coefficient",
    "fractional_part",
    "fractional_part_of_product",
    "rational_reconstruct",
]
