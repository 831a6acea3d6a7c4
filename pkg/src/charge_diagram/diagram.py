"""Geometry of the phase diagram.

The zero-entropy diagram (the joint numerical range of the charges) is
probed through its support function h(u) = lambda_max(sum_j u_j A_j):
a charge vector a is achievable iff <u, a> <= h(u) for every unit
direction u. Membership sweeps a seeded sample of directions, then
refines around the worst one by projected subgradient descent on the
slack h(u) - <u, a>; the top eigenvector of the direction-weighted charge
sum supplies the exact subgradient.

On top of that sit the max-entropy surface S(tau(a)), full phase-diagram
membership (charges plus entropy), and the conditional-entropy extension
that admits negative entropies down to -min(s0, S(tau(a))).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .gibbs import DEFAULT_OPTIONS, GgsSolution, SolverOptions, solve_beta
from .operators import ChargeSet, DensityState, entropy, reduce_state

__all__ = [
    "PhasePoint",
    "MembershipReport",
    "MembershipOptions",
    "achievable",
    "max_entropy_at",
    "phase_member",
    "conditional_entropy",
    "extended_member",
]


@dataclass(frozen=True)
class PhasePoint:
    """A point (a, s): charge values (or rates) plus entropy (rate) in nats."""

    a: np.ndarray
    s: float

    def __init__(self, a, s):
        a = np.asarray(a, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(a)) and np.isfinite(s)):
            raise ShapeError("phase point entries must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", float(s))


@dataclass(frozen=True)
class MembershipOptions:
    n_dirs: int = 2048
    seed: int = 20201130
    tolerance: float = 1e-8
    refine_starts: int = 4
    refine_iters: int = 200


DEFAULT_MEMBERSHIP = MembershipOptions()


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of a membership test with its signed margin.

    The margin is the minimum slack over tested support directions for the
    charge part, combined with the entropy slacks where applicable. Points
    with |margin| <= tolerance are reported inside with the boundary flag
    set (the diagram is closed).
    """

    inside: bool
    margin: float
    boundary: bool = False
    witness: GgsSolution | None = None


# Support tables are immutable once built; keyed by charge-set content
# and sampling options so repeated membership sweeps reuse eigenvalues.
_SUPPORT_CACHE: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
_SUPPORT_CACHE_LIMIT = 32


def _support_value(charges: ChargeSet, u: np.ndarray) -> tuple[float, np.ndarray]:
    """h(u) = lambda_max(sum u_j A_j) and its subgradient <A_j>_psi."""
    lam, vec = np.linalg.eigh(charges.weighted_sum(u))
    psi = vec[:, -1]
    grad = np.array(
        [float(np.real(psi.conj() @ (a.entries @ psi))) for a in charges]
    )
    return float(lam[-1]), grad


def _direction_table(charges: ChargeSet, opts: MembershipOptions):
    key = hashlib.sha1(
        charges.content_key() + f"|{opts.n_dirs}|{opts.seed}".encode()
    ).digest()
    hit = _SUPPORT_CACHE.get(key)
    if hit is not None:
        return hit
    c = len(charges)
    rng = np.random.default_rng(opts.seed)
    dirs = rng.standard_normal((opts.n_dirs, c))
    axes = np.vstack([np.eye(c), -np.eye(c)])
    dirs = np.vstack([axes, dirs])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    h = np.empty(len(dirs))
    for i, u in enumerate(dirs):
        h[i], _ = _support_value(charges, u)
    if len(_SUPPORT_CACHE) >= _SUPPORT_CACHE_LIMIT:
        _SUPPORT_CACHE.clear()
    _SUPPORT_CACHE[key] = (dirs, h)
    return dirs, h


def _refine_direction(
    charges: ChargeSet, a: np.ndarray, u0: np.ndarray, iters: int
) -> float:
    """Projected subgradient descent of slack(u) = h(u) - <u, a> on the sphere."""
    u = u0 / np.linalg.norm(u0)
    h, grad = _support_value(charges, u)
    best = h - float(u @ a)
    step = 1.0
    for _ in range(iters):
        g = grad - a
        tang = g - float(g @ u) * u
        norm = float(np.linalg.norm(tang))
        if norm < 1e-15:
            break
        improved = False
        while step > 1e-14:
            u_new = u - step * tang
            u_new /= np.linalg.norm(u_new)
            h_new, grad_new = _support_value(charges, u_new)
            s_new = h_new - float(u_new @ a)
            if s_new < best - 1e-16:
                u, grad, best = u_new, grad_new, s_new
                improved = True
                step *= 1.5
                break
            step /= 2
        if not improved:
            break
    return best


def achievable(
    charges: ChargeSet, a, opts: MembershipOptions = DEFAULT_MEMBERSHIP
) -> MembershipReport:
    """Test whether a is a joint expectation vector of the charges."""
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.shape != (len(charges),):
        raise ShapeError(
            f"point has length {a.size}, charge set has {len(charges)} charges"
        )
    dirs, h = _direction_table(charges, opts)
    slacks = h - dirs @ a
    order = np.argsort(slacks)

    margin = float(slacks[order[0]])
    extra = [a] if np.linalg.norm(a) > 1e-12 else []
    starts = [dirs[i] for i in order[: opts.refine_starts]] + extra
    for u0 in starts:
        refined = _refine_direction(charges, a, np.asarray(u0), opts.refine_iters)
        margin = min(margin, refined)

    boundary = abs(margin) <= opts.tolerance
    return MembershipReport(
        inside=margin >= -opts.tolerance, margin=margin, boundary=boundary
    )


def max_entropy_at(
    charges: ChargeSet, a, solver: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """S(tau(a)) for strictly achievable a; propagates infeasible-target."""
    return solve_beta(charges, a, solver).entropy


def phase_member(
    charges: ChargeSet,
    p: PhasePoint,
    opts: MembershipOptions = DEFAULT_MEMBERSHIP,
    solver: SolverOptions = DEFAULT_OPTIONS,
) -> MembershipReport:
    """Membership of (a, s) in the phase diagram: 0 <= s <= S(tau(a))."""
    charge_part = achievable(charges, p.a, opts)
    if not charge_part.inside:
        return MembershipReport(inside=False, margin=charge_part.margin)
    s_max, witness = _max_entropy_or_boundary(charges, p.a, solver)
    margin = min(charge_part.margin, p.s, s_max - p.s)
    boundary = abs(margin) <= opts.tolerance
    return MembershipReport(
        inside=margin >= -opts.tolerance,
        margin=margin,
        boundary=boundary,
        witness=witness,
    )


def _max_entropy_or_boundary(charges, a, solver):
    """S(tau(a)) with a graceful zero fallback on the zero-entropy boundary.

    On the boundary of the achievable set the Gibbs family degenerates and
    the solver diverges; the entropy ceiling is then conservatively taken
    as 0 (exact for non-degenerate boundary points).
    """
    from .errors import InfeasibleTargetError

    try:
        sol = solve_beta(charges, a, solver)
        return sol.entropy, sol
    except InfeasibleTargetError:
        return 0.0, None


def conditional_entropy(xi: DensityState, dims) -> float:
    """S(B|S) = S(SB) - S(S) for a bipartite state with dims = [dS, dB]."""
    if not isinstance(xi, DensityState):
        xi = DensityState(xi)
    d_s, d_b = (int(d) for d in dims)
    if d_s * d_b != xi.dim:
        raise ShapeError(
            f"dims {d_s}x{d_b} do not match state dimension {xi.dim}"
        )
    s_joint = entropy(xi)
    s_sys = entropy(reduce_state(xi, [d_s, d_b], keep=[0]))
    return s_joint - s_sys


def extended_member(
    bath_charges: ChargeSet,
    s0: float,
    p: PhasePoint,
    opts: MembershipOptions = DEFAULT_MEMBERSHIP,
    solver: SolverOptions = DEFAULT_OPTIONS,
) -> MembershipReport:
    """Membership in the conditional-entropy diagram for system entropy s0.

    The entropy range widens below zero: -min(s0, S(tau(a))) <= s <= S(tau(a)).
    """
    if s0 < 0:
        raise ShapeError(f"system entropy s0 must be >= 0, got {s0}")
    charge_part = achievable(bath_charges, p.a, opts)
    if not charge_part.inside:
        return MembershipReport(inside=False, margin=charge_part.margin)
    s_max, witness = _max_entropy_or_boundary(bath_charges, p.a, solver)
    floor = -min(float(s0), s_max)
    margin = min(charge_part.margin, p.s - floor, s_max - p.s)
    boundary = abs(margin) <= opts.tolerance
    return MembershipReport(
        inside=margin >= -opts.tolerance,
        margin=margin,
        boundary=boundary,
        witness=witness,
    )
