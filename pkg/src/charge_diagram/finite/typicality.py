"""Entropy-typical projectors for product states at desk scale.

A sequence of eigenvector labels is typical when its total surprisal
deviates from the summed entropies by at most alpha * sqrt(n). The
classical bounds (probability capture, eigenvalue sandwich, rank window)
are stated in base 2, so everything in this subpackage is computed in
bits and converted at the interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .. import config
from ..errors import CapacityError, ShapeError
from ..operators import DensityState, Projector, check_dim_cap

__all__ = ["TypicalityParams", "TypicalStats", "typical_projector", "typical_stats"]

LOG2_3_SQ = np.log2(3.0) ** 2


@dataclass(frozen=True)
class TypicalityParams:
    """Window constant alpha (> 0) and copy number n."""

    alpha: float
    n: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ShapeError(f"alpha must be > 0, got {self.alpha}")
        if self.n < 1:
            raise ShapeError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class TypicalStats:
    """Enumerated diagnostics plus the three classical bounds (in bits)."""

    n: int
    alpha: float
    trace: float
    rank: int
    min_kept_eigenvalue: float
    max_kept_eigenvalue: float
    entropy_bits: float
    beta_constant: float
    probability_bound: float
    eigenvalue_lower: float
    eigenvalue_upper: float
    rank_lower: float
    rank_upper: float

    @property
    def probability_bound_holds(self) -> bool:
        return self.trace >= self.probability_bound - 1e-12

    @property
    def eigenvalue_bounds_hold(self) -> bool:
        if self.rank == 0:
            return True
        return (
            self.min_kept_eigenvalue >= self.eigenvalue_lower * (1 - 1e-12)
            and self.max_kept_eigenvalue <= self.eigenvalue_upper * (1 + 1e-12)
        )

    @property
    def rank_bounds_hold(self) -> bool:
        return (
            self.rank >= self.rank_lower - 1e-9
            and self.rank <= self.rank_upper * (1 + 1e-12)
        )


def _factor_eigs(factors) -> tuple[int, list[np.ndarray], list[np.ndarray]]:
    states = [f if isinstance(f, DensityState) else DensityState(f) for f in factors]
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise ShapeError(f"factors act on mismatched dimensions {sorted(dims)}")
    probs, vecs = [], []
    for s in states:
        lam, vec = s.eigh()
        probs.append(np.clip(lam, 0.0, None))
        vecs.append(vec)
    return dims.pop(), probs, vecs


def _surprisal_bits(p: np.ndarray) -> np.ndarray:
    out = np.full_like(p, np.inf, dtype=float)
    mask = p > config.ENTROPY_CLIP
    out[mask] = -np.log2(p[mask])
    return out


def _entropy_bits(p: np.ndarray) -> float:
    mask = p > config.ENTROPY_CLIP
    return float(-np.sum(p[mask] * np.log2(p[mask])))


def sequence_table(probs: list[np.ndarray]):
    """Total surprisal per label sequence (bits), sequence-major ordering.

    Sequences are indexed so the first factor is the most significant digit,
    matching numpy's kron convention.
    """
    surprisals = np.zeros(1)
    for p in probs:
        surprisals = (surprisals[:, None] + _surprisal_bits(p)[None, :]).ravel()
    return surprisals


def _enumerate(factors, params: TypicalityParams):
    d, probs, vecs = _factor_eigs(factors)
    if len(probs) != params.n:
        raise ShapeError(
            f"params.n = {params.n} but {len(probs)} factors were given"
        )
    check_dim_cap(d**params.n)
    surprisals = sequence_table(probs)
    entropy_bits = float(sum(_entropy_bits(p) for p in probs))
    window = params.alpha * np.sqrt(params.n)
    deviation = surprisals - entropy_bits
    kept = np.abs(deviation) <= window
    seq_probs = np.exp2(-surprisals)
    return d, probs, vecs, kept, seq_probs, entropy_bits


def _stats(d, kept, seq_probs, entropy_bits, params) -> TypicalStats:
    window = params.alpha * np.sqrt(params.n)
    beta = max(LOG2_3_SQ, np.log2(d) ** 2)
    kept_probs = seq_probs[kept]
    rank = int(np.count_nonzero(kept))
    return TypicalStats(
        n=params.n,
        alpha=params.alpha,
        trace=float(kept_probs.sum()),
        rank=rank,
        min_kept_eigenvalue=float(kept_probs.min()) if rank else float("nan"),
        max_kept_eigenvalue=float(kept_probs.max()) if rank else float("nan"),
        entropy_bits=entropy_bits,
        beta_constant=beta,
        probability_bound=1.0 - beta / params.alpha**2,
        eigenvalue_lower=float(np.exp2(-entropy_bits - window)),
        eigenvalue_upper=float(np.exp2(-entropy_bits + window)),
        rank_lower=(1.0 - beta / params.alpha**2) * np.exp2(entropy_bits - window),
        rank_upper=float(np.exp2(entropy_bits + window)),
    )


def typical_stats(factors, params: TypicalityParams) -> TypicalStats:
    """Exhaustive typicality diagnostics without materializing the projector."""
    d, _, _, kept, seq_probs, entropy_bits = _enumerate(factors, params)
    return _stats(d, kept, seq_probs, entropy_bits, params)


def typical_projector(factors, params: TypicalityParams):
    """Entropy-typical projector of a product state and its diagnostics.

    Returns (Projector, TypicalStats). The projector is diagonal in the
    product eigenbasis of the factors; the stats record the capture
    probability, rank, extreme kept eigenvalues and whether the three
    classical bounds hold on this instance.
    """
    d, probs, vecs, kept, seq_probs, entropy_bits = _enumerate(factors, params)
    dim = d**params.n
    # Dense projector: conjugate the diagonal indicator by the product basis.
    basis = reduce(np.kron, vecs) if params.n > 1 else vecs[0]
    sel = basis[:, kept]
    proj = Projector(sel @ sel.conj().T, rank=int(np.count_nonzero(kept)))
    if proj.dim != dim:
        raise CapacityError("projector dimension bookkeeping failed")
    return proj, _stats(d, kept, seq_probs, entropy_bits, params)
