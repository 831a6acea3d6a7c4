"""Dense Hermitian / density-matrix algebra.

Validated wrapper types for observables, states, charge families and
projectors, plus the handful of spectral operations everything else is
built on: von Neumann entropy, n-copy total charges, partial traces,
spectral diameters and spectral window projectors.

All matrix functions of Hermitian operators go through a full
eigendecomposition; at the dimensions this library targets (capped at
4096 by default) that is exact and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import CapacityError, InvalidStateError, ShapeError

__all__ = [
    "HermitianObservable",
    "DensityState",
    "ChargeSet",
    "Projector",
    "entropy",
    "total_charge",
    "reduce_state",
    "spectral_diameter",
    "window_projector",
    "trace_distance",
    "random_density",
    "random_hermitian",
    "random_unitary",
    "random_pure",
]


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def _hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


@dataclass(frozen=True)
class HermitianObservable:
    """A single conserved charge: a d x d Hermitian matrix."""

    entries: np.ndarray

    def __init__(self, entries):
        m = _as_complex_matrix(entries)
        defect = _hermiticity_defect(m)
        if defect > config.HERMITICITY_TOL:
            raise InvalidStateError(
                f"observable is not Hermitian (max deviation {defect:.3e})"
            )
        # Symmetrize away the residual so downstream eigh sees an exact input.
        object.__setattr__(self, "entries", (m + m.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigh(self):
        return np.linalg.eigh(self.entries)


@dataclass(frozen=True)
class DensityState:
    """A d x d density matrix: Hermitian, positive semidefinite, unit trace."""

    entries: np.ndarray

    def __init__(self, entries):
        m = _as_complex_matrix(entries)
        defect = _hermiticity_defect(m)
        if defect > config.HERMITICITY_TOL:
            raise InvalidStateError(
                f"state is not Hermitian (max deviation {defect:.3e})"
            )
        m = (m + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > config.TRACE_TOL:
            raise InvalidStateError(f"state trace {tr} differs from 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -config.PSD_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigh(self):
        return np.linalg.eigh(self.entries)

    def expectation(self, a: HermitianObservable | np.ndarray) -> float:
        m = a.entries if isinstance(a, HermitianObservable) else a
        return float(np.trace(self.entries @ m).real)


@dataclass(frozen=True)
class ChargeSet:
    """An ordered family of charges on a common Hilbert space."""

    charges: tuple[HermitianObservable, ...]

    def __init__(self, charges):
        obs = tuple(
            a if isinstance(a, HermitianObservable) else HermitianObservable(a)
            for a in charges
        )
        if not obs:
            raise ShapeError("a charge set needs at least one charge")
        dims = {a.dim for a in obs}
        if len(dims) != 1:
            raise ShapeError(f"charges act on mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "charges", obs)

    @property
    def dim(self) -> int:
        return self.charges[0].dim

    def __len__(self) -> int:
        return len(self.charges)

    def __iter__(self):
        return iter(self.charges)

    def matrices(self) -> list[np.ndarray]:
        return [a.entries for a in self.charges]

    def weighted_sum(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(self),):
            raise ShapeError(
                f"expected {len(self)} coefficients, got shape {coeffs.shape}"
            )
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for c, a in zip(coeffs, self.charges):
            total += c * a.entries
        return total

    def expectations(self, rho: DensityState | np.ndarray) -> np.ndarray:
        m = rho.entries if isinstance(rho, DensityState) else rho
        return np.array(
            [float(np.trace(m @ a.entries).real) for a in self.charges]
        )

    def content_key(self) -> bytes:
        """Byte fingerprint used to cache per-charge-set geometry."""
        parts = [np.ascontiguousarray(a.entries).tobytes() for a in self.charges]
        return str(self.dim).encode() + b"|" + b"|".join(parts)


@dataclass(frozen=True)
class Projector:
    """An orthogonal projector with its rank."""

    entries: np.ndarray
    rank: int = field(default=-1)

    def __init__(self, entries, rank=None):
        m = _as_complex_matrix(entries)
        if _hermiticity_defect(m) > config.PROJECTOR_TOL:
            raise InvalidStateError("projector is not Hermitian")
        idem = float(np.max(np.abs(m @ m - m)))
        if idem > config.PROJECTOR_TOL:
            raise InvalidStateError(f"projector is not idempotent (P^2-P = {idem:.3e})")
        tr = float(np.trace(m).real)
        if rank is None:
            rank = int(round(tr))
        if abs(tr - rank) > 0.5:
            raise InvalidStateError(f"projector trace {tr} far from rank {rank}")
        object.__setattr__(self, "entries", (m + m.conj().T) / 2)
        object.__setattr__(self, "rank", rank)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def entropy(rho: DensityState | np.ndarray) -> float:
    """Von Neumann entropy in nats; eigenvalues below 1e-14 contribute 0."""
    if not isinstance(rho, DensityState):
        rho = DensityState(rho)
    lam = np.linalg.eigvalsh(rho.entries)
    lam = lam[lam > config.ENTROPY_CLIP]
    return float(-np.sum(lam * np.log(lam)))


def check_dim_cap(dim: int, cap: int | None = None) -> None:
    cap = config.dim_cap() if cap is None else cap
    if dim > cap:
        raise CapacityError(f"dimension {dim} exceeds the cap {cap}")


def total_charge(
    a: HermitianObservable, n: int, cap: int | None = None
) -> HermitianObservable:
    """n-copy total charge: sum over copies of 1 x ... x A x ... x 1."""
    if not isinstance(a, HermitianObservable):
        a = HermitianObservable(a)
    if n < 1:
        raise ShapeError(f"copy count must be >= 1, got {n}")
    d = a.dim
    check_dim_cap(d**n, cap)
    total = np.zeros((d**n, d**n), dtype=complex)
    for i in range(n):
        term = np.eye(d**i, dtype=complex)
        term = np.kron(term, a.entries)
        term = np.kron(term, np.eye(d ** (n - i - 1), dtype=complex))
        total += term
    return HermitianObservable(total)


def reduce_state(rho: DensityState, factor_dims, keep) -> DensityState:
    """Partial trace keeping the listed tensor factors (0-indexed)."""
    if not isinstance(rho, DensityState):
        rho = DensityState(rho)
    dims = [int(d) for d in factor_dims]
    if any(d < 1 for d in dims):
        raise ShapeError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != rho.dim:
        raise ShapeError(
            f"product of factor dims {dims} does not match state dim {rho.dim}"
        )
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} invalid for {len(dims)} factors")

    n = len(dims)
    tensor = rho.entries.reshape(dims + dims)
    # Trace out discarded factors from highest index down so axis numbers
    # of the remaining factors stay valid.
    discarded = [i for i in range(n) if i not in keep]
    remaining = n
    for i in sorted(discarded, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + remaining)
        remaining -= 1
    kept_dim = int(np.prod([dims[k] for k in keep]))
    return DensityState(tensor.reshape(kept_dim, kept_dim))


def spectral_diameter(a: HermitianObservable | np.ndarray) -> float:
    """lambda_max - lambda_min >= 0."""
    if not isinstance(a, HermitianObservable):
        a = HermitianObservable(a)
    lam = np.linalg.eigvalsh(a.entries)
    return float(lam[-1] - lam[0])


def window_projector(
    a: HermitianObservable | np.ndarray, lo: float, hi: float
) -> Projector:
    """Projector onto eigenvectors with eigenvalue in the closed window [lo, hi].

    Eigenvalues within 1e-10 of a boundary are included.
    """
    if not isinstance(a, HermitianObservable):
        a = HermitianObservable(a)
    if lo > hi:
        raise ShapeError(f"window bounds out of order: {lo} > {hi}")
    lam, vec = a.eigh()
    mask = (lam >= lo - config.PROJECTOR_TOL) & (lam <= hi + config.PROJECTOR_TOL)
    sel = vec[:, mask]
    p = sel @ sel.conj().T
    return Projector(p, rank=int(np.count_nonzero(mask)))


def trace_distance(rho, sigma) -> float:
    """Trace norm ||rho - sigma||_1 of the (Hermitian) difference."""
    a = rho.entries if hasattr(rho, "entries") else np.asarray(rho)
    b = sigma.entries if hasattr(sigma, "entries") else np.asarray(sigma)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# --- seeded random ensembles -------------------------------------------------


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None):
    """Hilbert-Schmidt random density matrix rho = GG^dag / Tr GG^dag."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityState(m / np.trace(m).real)


def random_hermitian(dim: int, rng: np.random.Generator) -> HermitianObservable:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianObservable((g + g.conj().T) / 2)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase fixing."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_pure(dim: int, rng: np.random.Generator) -> DensityState:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return DensityState(np.outer(v, v.conj()))
