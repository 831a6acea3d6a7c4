"""Desk-scale implementations of the finite-n machinery: entropy-typical
projectors, spectrum trimming, equivalence unitaries and approximate
microcanonical subspaces."""

from .aet import AetReport, AetUnitary, aet_transform
from .amc import (
    AmcParams,
    AmcReport,
    amc_construct,
    amc_params,
    amc_theoretical_params,
    amc_validate,
)
from .trimming import TrimResult, trim_state
from .typicality import TypicalityParams, TypicalStats, typical_projector, typical_stats

__all__ = [
    "AetReport",
    "AetUnitary",
    "aet_transform",
    "AmcParams",
    "AmcReport",
    "amc_construct",
    "amc_params",
    "amc_theoretical_params",
    "amc_validate",
    "TrimResult",
    "trim_state",
    "TypicalityParams",
    "TypicalStats",
    "typical_projector",
    "typical_stats",
]
