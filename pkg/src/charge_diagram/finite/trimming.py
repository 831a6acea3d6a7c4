"""Trimming a product state to an exactly flat (degenerate) spectrum.

Within the typical subspace the eigenvalues of a product state sit in a
narrow window. Three trimming steps (round each eigenvalue down to its
bin floor, drop sparsely populated bins, round bin populations down to
multiples of a flat rank L) leave a state whose spectrum is exactly
L-fold degenerate per distinct value, so a unitary can factor it into a
maximally mixed block of rank L times a small remainder.

All window/bin arithmetic is in bits, matching the typicality module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..errors import DegenerateTrimError, ShapeError
from ..operators import DensityState, Projector, check_dim_cap, trace_distance
from .typicality import (
    LOG2_3_SQ,
    TypicalityParams,
    _enumerate,
    _factor_eigs,
)

__all__ = ["TrimResult", "trim_state"]


@dataclass(frozen=True)
class TrimBin:
    """One surviving bin: its floor value and the kept entry indices."""

    value: float
    kept: np.ndarray  # indices into the caller's eigenvalue array
    multiplicity: int  # len(kept), a multiple of the flat rank


@dataclass(frozen=True)
class TrimPlan:
    bins: tuple[TrimBin, ...]
    flat_rank: int
    kept_weight: float
    discarded_fraction: float  # step (a)
    discarded_sparse: float  # step (b)
    discarded_rounding: float  # step (c)
    bin_count: int
    bin_count_default: int

    @property
    def discarded_weight(self) -> float:
        return (
            self.discarded_fraction + self.discarded_sparse + self.discarded_rounding
        )


@dataclass(frozen=True)
class TrimResult:
    """Outcome of trim_state; the flatten unitary maps the trimmed state
    onto tau x omega embedded in the leading coordinates."""

    projector: Projector
    flatten_unitary: np.ndarray
    tau_rank: int
    omega: DensityState
    kept_weight: float
    trace_distance_to_input: float
    formula_flat_rank: int
    bin_count: int
    bin_count_default: int
    discarded_weight: float
    discard_bound: float
    distance_bound: float


def formula_flat_rank(entropy_bits: float, z: float) -> int:
    """L = 2^floor(sum S - 10 z) in bits, clamped to at least 1."""
    exponent = math.floor(entropy_bits - 10.0 * z)
    return 1 if exponent < 0 else 2**exponent


def _plan(
    values: np.ndarray,
    entropy_bits: float,
    z: float,
    flat_rank: int | None = None,
    bins: int | None = None,
) -> TrimPlan:
    """Bin, sparsify and round a positive eigenvalue list (the three steps)."""
    if values.size == 0:
        raise DegenerateTrimError("no eigenvalues to trim")
    p_min = float(np.exp2(-entropy_bits - 2.0 * z))
    p_max = float(np.exp2(-entropy_bits + z))
    bin_count_default = 2 ** max(0, math.floor(5.0 * z))
    b = bin_count_default if bins is None else int(bins)
    if b < 1:
        raise ShapeError(f"bin count must be >= 1, got {bins}")
    width = (p_max - p_min) / b

    order = np.argsort(values)[::-1]  # descending, deterministic
    if width <= 0:
        keys = np.zeros(values.size, dtype=np.int64)
    else:
        raw = np.floor((values - p_min) / width)
        keys = np.clip(raw, 0, b - 1).astype(np.int64)

    threshold = np.exp2(entropy_bits - 10.0 * z)
    flat = formula_flat_rank(entropy_bits, z) if flat_rank is None else int(flat_rank)
    if flat < 1:
        raise ShapeError(f"flat rank must be >= 1, got {flat_rank}")

    grouped: dict[int, list[int]] = {}
    for idx in order:
        grouped.setdefault(int(keys[idx]), []).append(int(idx))

    kept_bins: list[TrimBin] = []
    frac = sparse = rounding = 0.0
    for key in sorted(grouped, reverse=True):  # descending bin value
        members = grouped[key]
        value = p_min + key * width if width > 0 else p_min
        value = max(value, 0.0)
        frac += float(np.sum(values[members] - value))
        count = len(members)
        if count < threshold:
            sparse += value * count
            continue
        keep = (count // flat) * flat
        rounding += value * (count - keep)
        if keep == 0:
            continue
        kept_bins.append(
            TrimBin(
                value=value,
                kept=np.array(members[:keep], dtype=int),
                multiplicity=keep,
            )
        )

    if not kept_bins:
        raise DegenerateTrimError(
            "all bins were discarded; retry with larger alpha or n"
        )
    weight = float(sum(b_.value * b_.multiplicity for b_ in kept_bins))
    if weight <= 0:
        raise DegenerateTrimError("trimmed state has zero weight")
    return TrimPlan(
        bins=tuple(kept_bins),
        flat_rank=flat,
        kept_weight=weight,
        discarded_fraction=frac,
        discarded_sparse=sparse,
        discarded_rounding=rounding,
        bin_count=b,
        bin_count_default=bin_count_default,
    )


def flat_factorization(plan: TrimPlan, upgrade_rank: bool = True):
    """Flat rank tau_rank, omega diagonal, and per-entry slot/copy layout.

    With upgrade_rank the reported flat rank is the gcd of the surviving
    multiplicities (a multiple of the formula rank), so an already flat
    spectrum factors into a full maximally mixed block and a trivial omega.
    Returns (tau_rank, omega_diag, placements) where placements lists, per
    kept eigenvalue in bin-major order, (source_index, slot, copy).
    """
    tau_rank = plan.flat_rank
    if upgrade_rank:
        tau_rank = reduce(math.gcd, (b.multiplicity for b in plan.bins))
    omega_diag: list[float] = []
    placements: list[tuple[int, int, int]] = []
    slot = 0
    for b in plan.bins:
        slots_here = b.multiplicity // tau_rank
        omega_diag.extend(
            [tau_rank * b.value / plan.kept_weight] * slots_here
        )
        for c, src in enumerate(b.kept):
            placements.append((int(src), slot + c // tau_rank, c % tau_rank))
        slot += slots_here
    return tau_rank, np.array(omega_diag), placements


def distance_bound(epsilon: float, alpha: float, z: float, d: int) -> float:
    """Classical upper bound on ||trimmed - input||_1 (often vacuous at
    small n; reported for reference)."""
    beta = max(LOG2_3_SQ, np.log2(d) ** 2)
    core = (
        2.0 * math.sqrt(max(epsilon, 0.0))
        + 2.0 * math.sqrt(beta) / alpha
        + beta / alpha**2
    )
    return core + 2.0 ** (-z + 1) + 2.0 * math.sqrt(core + 2.0 ** (-z))


def trim_state(
    factors,
    params: TypicalityParams,
    support: Projector,
    bins: int | None = None,
) -> TrimResult:
    """Trim the typical part of a product state inside a support projector.

    `support` must be a high-probability projector for the product state
    (caller-verified). The trimmed state lives on the eigenvectors of
    P_tilde (Pi rho Pi) P_tilde, where P_tilde keeps eigenvalues of
    (support . Pi . support) above 2^(-z), z = alpha sqrt(n).
    """
    d, probs, vecs, kept, seq_probs, entropy_bits = _enumerate(factors, params)
    n = params.n
    dim = d**n
    check_dim_cap(dim)
    if support.dim != dim:
        raise ShapeError(
            f"support projector dim {support.dim} does not match d^n = {dim}"
        )
    z = params.alpha * math.sqrt(n)

    basis = reduce(np.kron, vecs) if n > 1 else vecs[0]
    pi = (basis[:, kept]) @ (basis[:, kept]).conj().T
    rho_n = reduce(np.kron, [
        (v * p) @ v.conj().T for p, v in zip(probs, vecs)
    ]) if n > 1 else (vecs[0] * probs[0]) @ vecs[0].conj().T

    p_sup = support.entries
    ppp = p_sup @ pi @ p_sup
    lam_p, vec_p = np.linalg.eigh((ppp + ppp.conj().T) / 2)
    sel = lam_p > 2.0 ** (-z)
    if not np.any(sel):
        raise DegenerateTrimError(
            "support and typical projector are nearly orthogonal"
        )
    p_tilde_rank = int(np.count_nonzero(sel))
    p_tilde = vec_p[:, sel] @ vec_p[:, sel].conj().T
    p_tilde = Projector(p_tilde, rank=p_tilde_rank)

    core = pi @ rho_n @ pi
    t_op = p_tilde.entries @ core @ p_tilde.entries
    lam_t, vec_t = np.linalg.eigh((t_op + t_op.conj().T) / 2)
    order = np.argsort(lam_t)[::-1]
    cand = order[:p_tilde_rank]
    cand = cand[lam_t[cand] > 0]
    if cand.size == 0:
        raise DegenerateTrimError("trimmed operator has no positive weight")
    values = lam_t[cand]
    vectors = vec_t[:, cand]

    plan = _plan(values, entropy_bits, z, bins=bins)
    tau_rank, omega_diag, placements = flat_factorization(plan)
    m_total = omega_diag.size

    # Flatten unitary: kept eigenvector -> standard position copy*M + slot,
    # complement basis fills the remaining positions in order.
    u = np.zeros((dim, dim), dtype=complex)
    used_src = set()
    used_dst = set()
    trimmed = np.zeros((dim, dim), dtype=complex)
    for b in plan.bins:
        for src in b.kept:
            trimmed += (b.value / plan.kept_weight) * np.outer(
                vectors[:, src], vectors[:, src].conj()
            )
    for src, slot, copy in placements:
        dst = copy * m_total + slot
        u[dst, :] = vectors[:, src].conj()
        used_src.add(int(cand[src]))
        used_dst.add(dst)
    rest_src = [i for i in order if int(i) not in used_src]
    rest_dst = [i for i in range(dim) if i not in used_dst]
    for src, dst in zip(rest_src, rest_dst):
        u[dst, :] = vec_t[:, src].conj()

    omega = DensityState(np.diag(omega_diag / omega_diag.sum() * 1.0))

    eps = max(0.0, 1.0 - float(np.trace(rho_n @ p_sup).real))
    return TrimResult(
        projector=p_tilde,
        flatten_unitary=u,
        tau_rank=tau_rank,
        omega=omega,
        kept_weight=plan.kept_weight,
        trace_distance_to_input=trace_distance(trimmed, rho_n),
        formula_flat_rank=plan.flat_rank,
        bin_count=plan.bin_count,
        bin_count_default=plan.bin_count_default,
        discarded_weight=plan.discarded_weight,
        discard_bound=2.0 ** (-2 * z + 1) + 2.0 ** (-4 * z) + 2.0 ** (-4 * z),
        distance_bound=distance_bound(eps, params.alpha, z, d),
    )
