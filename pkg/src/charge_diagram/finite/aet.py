"""Explicit unitaries witnessing asymptotic equivalence at finite n.

Two product states with (nearly) equal entropy sums and total charge
values are trimmed to a common flat rank L; tensoring each with the
other's small remainder omega equalizes the spectra exactly, and a
basis-matching unitary maps one onto the other. The report carries the
achieved trace distance and the normalized commutator operator norms
(1/n) ||[U, A_j^(n) (x) 1]||_inf per charge, the two quantities whose
joint decay defines almost-commuting equivalence.

The unitary is represented structurally (factor eigenbases plus an index
permutation), which keeps both diagnostics exact while avoiding dense
matrices on the ancilla-extended space: the conjugated initial state is
diagonal in the matched basis, so the trace distance is a sum over
matched eigenvalue pairs, and commutator norms come from singular-value
iteration on matrix-free operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .. import config
from ..errors import CapacityError, NotEquivalentError, ShapeError
from ..operators import ChargeSet, DensityState, entropy
from .trimming import _plan, flat_factorization, formula_flat_rank
from .typicality import TypicalityParams, _entropy_bits, sequence_table

__all__ = ["AetReport", "AetUnitary", "aet_transform"]

_DENSE_LIMIT = 512


@dataclass(frozen=True)
class AetReport:
    trace_distance: float
    commutator_norms: np.ndarray
    ancilla_dim: int
    n: int


class AetUnitary:
    """Basis-matching unitary on H^(x n) (x) K.

    Acts as sum_beta |sigma-eigvec matched(beta)><rho-eigvec beta| where the
    bases are product eigenbases tensored with the standard ancilla basis.
    """

    def __init__(self, rho_vecs, sigma_vecs, match, d, n, ancilla_dim):
        self._rho_vecs = rho_vecs
        self._sigma_vecs = sigma_vecs
        self._match = match  # match[x_flat] = y_flat
        self._inverse = np.empty_like(match)
        self._inverse[match] = np.arange(match.size)
        self.d = d
        self.n = n
        self.ancilla_dim = ancilla_dim
        self.dim = d**n * ancilla_dim

    def _tensor_apply(self, mats, v):
        """Apply mats[i] to tensor axis i of v (shape (d,)*n + (ancilla,))."""
        t = v.reshape((self.d,) * self.n + (self.ancilla_dim,))
        for i, m in enumerate(mats):
            t = np.moveaxis(np.tensordot(m, t, axes=(1, i)), 0, i)
        return t.reshape(-1)

    def matvec(self, v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        coeff = self._tensor_apply([m.conj().T for m in self._rho_vecs], v)
        out = np.zeros_like(coeff)
        out[self._match] = coeff
        return self._tensor_apply(self._sigma_vecs, out)

    def rmatvec(self, v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        coeff = self._tensor_apply([m.conj().T for m in self._sigma_vecs], v)
        out = np.zeros_like(coeff)
        out[self._inverse] = coeff
        return self._tensor_apply(self._rho_vecs, out)

    def to_matrix(self, limit: int | None = None) -> np.ndarray:
        limit = config.dim_cap() if limit is None else limit
        if self.dim > limit:
            raise CapacityError(
                f"dense representation of dimension {self.dim} exceeds {limit}"
            )
        eye = np.eye(self.dim, dtype=complex)
        cols = [self.matvec(eye[:, k]) for k in range(self.dim)]
        return np.column_stack(cols)


def _phase_fixed_eigh(state: DensityState):
    lam, vec = state.eigh()
    # Descending eigenvalues; fix each column's phase by its largest entry
    # so equal factors yield identical bases across calls.
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    vec = vec[:, order]
    for k in range(vec.shape[1]):
        idx = int(np.argmax(np.abs(vec[:, k])))
        pivot = vec[idx, k]
        if abs(pivot) > 0:
            vec[:, k] *= np.conj(pivot) / abs(pivot)
    return np.clip(lam, 0.0, None), vec


def _prepare(factors, charges: ChargeSet, n: int):
    states = [f if isinstance(f, DensityState) else DensityState(f) for f in factors]
    if len(states) != n:
        raise ShapeError(f"expected {n} factors, got {len(states)}")
    if any(s.dim != charges.dim for s in states):
        raise ShapeError("factor dimension does not match the charges")
    eigs = [_phase_fixed_eigh(s) for s in states]
    probs = [e[0] for e in eigs]
    vecs = [e[1] for e in eigs]
    s_nats = float(sum(entropy(s) for s in states))
    s_bits = float(sum(_entropy_bits(p) for p in probs))
    charge_sums = np.array(
        [sum(s.expectation(a) for s in states) for a in charges]
    )
    return probs, vecs, s_nats, s_bits, charge_sums


def _trim_side(probs, s_bits, alpha, n, flat_rank, support_mask=None):
    """Trim one side in the product eigenbasis; returns (plan, omega
    diagonal, kept sequence indices arranged by (slot, copy)).

    `support_mask` restricts the typical set further (the a.m.c.-style
    charge-window support); it plays the role of the high-probability
    projector P in the trimming lemma, diagonal in the product basis.
    """
    surp = sequence_table(probs)
    window = alpha * math.sqrt(n)
    kept_mask = np.abs(surp - s_bits) <= window
    if support_mask is not None:
        kept_mask &= support_mask
    kept_idx = np.flatnonzero(kept_mask)
    if kept_idx.size == 0:
        raise NotEquivalentError(
            "typicality window is empty; increase alpha or the charge window"
        )
    values = np.exp2(-surp[kept_idx])
    plan = _plan(values, s_bits, window, flat_rank=flat_rank)
    tau_rank, omega_diag, placements = flat_factorization(plan, upgrade_rank=False)
    slots = omega_diag.size
    seq_by_slot_copy = np.full((slots, tau_rank), -1, dtype=int)
    for src, slot, copy in placements:
        seq_by_slot_copy[slot, copy] = kept_idx[src]
    return plan, omega_diag, seq_by_slot_copy


def aet_transform(
    rho_factors,
    sigma_factors,
    charges: ChargeSet,
    params: TypicalityParams,
    entropy_slack: float = 1e-6,
    charge_slack: float = 1e-6,
    charge_window: float = 0.5,
):
    """Construct an equivalence unitary between two product-state sequences.

    Preconditions: equal length n, per-copy entropy rates within
    `entropy_slack` and per-copy charge rates within `charge_slack`
    (NotEquivalentError otherwise). Returns (AetUnitary, AetReport).

    Both states are trimmed inside sharp-charge support windows
    |<A_j> - n v_j| <= charge_window * n^(3/4) * Sigma(A_j) around the
    average target values, the product-basis counterpart of intersecting
    with an approximate microcanonical subspace (exact for commuting
    charges); this is what keeps the commutator rates shrinking.
    """
    n = params.n
    d = charges.dim
    p_probs, p_vecs, s_rho, sb_rho, a_rho = _prepare(rho_factors, charges, n)
    q_probs, q_vecs, s_sigma, sb_sigma, a_sigma = _prepare(sigma_factors, charges, n)

    gamma = abs(s_rho - s_sigma) / n
    gamma_c = float(np.max(np.abs(a_rho - a_sigma))) / n
    if gamma > entropy_slack:
        raise NotEquivalentError(
            f"entropy rates differ by {gamma:.3e} > slack {entropy_slack:g}"
        )
    if gamma_c > charge_slack:
        raise NotEquivalentError(
            f"charge rates differ by {gamma_c:.3e} > slack {charge_slack:g}"
        )

    p_prod = np.exp2(-sequence_table(p_probs))
    q_prod = np.exp2(-sequence_table(q_probs))
    x_keys = _charge_diagonal_keys(p_vecs, charges, d, n)
    y_keys = _charge_diagonal_keys(q_vecs, charges, d, n)
    spectra_equal = bool(
        np.max(np.abs(np.sort(p_prod) - np.sort(q_prod))) <= 1e-12
    )

    if spectra_equal:
        w_rho = np.array([1.0])
        w_sigma = np.array([1.0])
        ancilla = 1
        kept_pairs = []
    else:
        gamma_bits = abs(sb_rho - sb_sigma) / n
        z = max(params.alpha * math.sqrt(n), n * gamma_bits)
        flat = formula_flat_rank(min(sb_rho, sb_sigma), z)
        targets = (a_rho + a_sigma) / 2
        diameters = np.array(
            [float(np.ptp(np.linalg.eigvalsh(a.entries))) for a in charges]
        )
        half_widths = charge_window * n**0.75 * diameters
        x_support = np.all(
            np.abs(x_keys - targets[:, None]) <= half_widths[:, None], axis=0
        )
        y_support = np.all(
            np.abs(y_keys - targets[:, None]) <= half_widths[:, None], axis=0
        )
        _, omega_rho, rho_slots = _trim_side(
            p_probs, sb_rho, params.alpha, n, flat, x_support
        )
        _, omega_sigma, sigma_slots = _trim_side(
            q_probs, sb_sigma, params.alpha, n, flat, y_support
        )
        m_rho = omega_rho.size
        m_sigma = omega_sigma.size
        ancilla = max(m_rho, m_sigma)
        w_rho = np.zeros(ancilla)
        w_rho[:m_rho] = omega_rho
        w_sigma = np.zeros(ancilla)
        w_sigma[:m_sigma] = omega_sigma
        # The rho side carries omega' = omega_sigma, the sigma side omega_rho:
        # x = (kept rho seq at (slot m, copy l), ancilla a < m_sigma) pairs
        # with y = (kept sigma seq at (slot a, copy l), ancilla b = m).
        kept_pairs = []
        for m in range(m_rho):
            for a in range(m_sigma):
                for l in range(flat):
                    i = rho_slots[m, l]
                    j = sigma_slots[a, l]
                    kept_pairs.append((i * ancilla + a, j * ancilla + m))

    dim = d**n * ancilla
    lam_x = (p_prod[:, None] * w_sigma[None, :]).ravel()
    lam_y = (q_prod[:, None] * w_rho[None, :]).ravel()

    match = np.full(dim, -1, dtype=int)
    y_taken = np.zeros(dim, dtype=bool)
    for x_flat, y_flat in kept_pairs:
        match[x_flat] = y_flat
        y_taken[y_flat] = True
    x_rest = np.flatnonzero(match < 0)
    y_rest = np.flatnonzero(~y_taken)
    # Complement pairs are matched charge-sector-first, then by descending
    # eigenvalue. Their weight contribution to the trace distance is bounded
    # by the (vanishing) off-support mass either way, while charge alignment
    # keeps the commutator from picking up O(n) jumps on crossed pairs.
    x_order = x_rest[_complement_order(x_rest, lam_x, x_keys, ancilla)]
    y_order = y_rest[_complement_order(y_rest, lam_y, y_keys, ancilla)]
    match[x_order] = y_order

    unitary = AetUnitary(p_vecs, q_vecs, match, d, n, ancilla)

    distance = float(np.sum(np.abs(lam_x - lam_y[match])))
    norms = np.array(
        [
            _commutator_norm(unitary, a.entries) / n
            for a in charges
        ]
    )
    report = AetReport(
        trace_distance=distance,
        commutator_norms=norms,
        ancilla_dim=ancilla,
        n=n,
    )
    return unitary, report


def _charge_diagonal_keys(vecs, charges: ChargeSet, d: int, n: int) -> np.ndarray:
    """Per product eigenvector, the diagonal total-charge values
    <psi| A_j^(n) |psi>, rounded for stable sector grouping. Shape (c, d^n)."""
    keys = []
    for a in charges:
        total = np.zeros(1)
        for v in vecs:
            site = np.real(np.diagonal(v.conj().T @ (a.entries @ v)))
            total = (total[:, None] + site[None, :]).ravel()
        keys.append(np.round(total, 8))
    return np.array(keys)


def _complement_order(rest: np.ndarray, lam: np.ndarray, charge_keys: np.ndarray,
                      ancilla: int) -> np.ndarray:
    seq = rest // ancilla
    slot = rest % ancilla
    # np.lexsort sorts by the last key first: charge sectors, then -lambda.
    return np.lexsort((slot, seq, -lam[rest]) + tuple(charge_keys[::-1, seq]))


def _apply_total_charge(u: AetUnitary, site_matrix: np.ndarray, v: np.ndarray):
    """(A^(n) (x) 1_K) v via per-site applications."""
    t = v.reshape((u.d,) * u.n + (u.ancilla_dim,))
    out = np.zeros_like(t)
    for i in range(u.n):
        out += np.moveaxis(np.tensordot(site_matrix, t, axes=(1, i)), 0, i)
    return out.reshape(-1)


def _commutator_norm(u: AetUnitary, site_matrix: np.ndarray) -> float:
    """Operator norm of [U, A^(n) (x) 1] without forming dense matrices."""
    dim = u.dim

    def c_mv(v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        return u.matvec(_apply_total_charge(u, site_matrix, v)) - _apply_total_charge(
            u, site_matrix, u.matvec(v)
        )

    def c_rmv(v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        return _apply_total_charge(u, site_matrix, u.rmatvec(v)) - u.rmatvec(
            _apply_total_charge(u, site_matrix, v)
        )

    if dim <= _DENSE_LIMIT:
        eye = np.eye(dim, dtype=complex)
        dense = np.column_stack([c_mv(eye[:, k]) for k in range(dim)])
        return float(np.linalg.norm(dense, 2))

    op = LinearOperator((dim, dim), matvec=c_mv, rmatvec=c_rmv, dtype=complex)
    rng = np.random.default_rng(1905)
    v0 = rng.standard_normal(dim)
    s = svds(op, k=1, v0=v0, return_singular_vectors=False, maxiter=5000)
    return float(s[0])
