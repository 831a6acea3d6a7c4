"""Generalized Gibbs (grand-canonical) states.

Forward map beta -> tau(beta) = exp(-sum_j beta_j A_j)/Z, the inverse
maximum-entropy inference a -> beta by minimizing the convex dual
f(beta) = ln Z(beta) + beta . a, the free entropy functional, and the
entropy Hessian [d beta_j / d a_i] together with the single-charge heat
capacity derived from it.

All entropies are in nats, so the equilibrium relation dS/da_i = beta_i
holds with a single logarithm base throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .errors import (
    BoundaryProximityError,
    ConvergenceError,
    InfeasibleTargetError,
    ShapeError,
)
from .operators import ChargeSet, DensityState, entropy

__all__ = [
    "SolverOptions",
    "GgsSolution",
    "ggs_from_beta",
    "solve_beta",
    "free_entropy",
    "entropy_hessian",
    "heat_capacity",
]


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs of the dual Newton solver and the Hessian stencil."""

    tolerance: float = 1e-10
    max_iter: int = 500
    beta_max: float = 1e4
    fd_step: float = 1e-6
    hessian_step: float = 1e-5


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class GgsSolution:
    """A solved generalized Gibbs state with its thermodynamic coordinates."""

    beta: np.ndarray
    tau: DensityState
    charge_values: np.ndarray
    entropy: float
    log_partition: float
    converged: bool
    residual: float


def _check_beta(charges: ChargeSet, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape != (len(charges),):
        raise ShapeError(
            f"beta has length {beta.size}, charge set has {len(charges)} charges"
        )
    if not np.all(np.isfinite(beta)):
        raise ShapeError("beta entries must be finite")
    return beta


def _log_partition_and_state(charges: ChargeSet, beta: np.ndarray):
    """ln Z and the Gibbs state, via eigendecomposition of sum_j beta_j A_j."""
    h = charges.weighted_sum(beta)
    lam, vec = np.linalg.eigh(h)
    log_z = float(logsumexp(-lam))
    probs = np.exp(-lam - log_z)
    tau = (vec * probs) @ vec.conj().T
    return log_z, tau


def ggs_from_beta(
    charges: ChargeSet, beta, opts: SolverOptions = DEFAULT_OPTIONS
) -> GgsSolution:
    """Evaluate tau(beta), its charge values, ln Z and the entropy.

    The returned entropy is S = ln Z + sum_j beta_j a_j, which agrees with
    the spectral entropy of tau to 1e-9 (asserted).
    """
    beta = _check_beta(charges, beta)
    log_z, tau_m = _log_partition_and_state(charges, beta)
    tau = DensityState(tau_m)
    a = charges.expectations(tau)
    s = log_z + float(beta @ a)
    direct = entropy(tau)
    if abs(s - direct) > 1e-9:
        raise ConvergenceError(
            f"entropy identity violated: lnZ + beta.a = {s}, S(tau) = {direct}",
            residual=abs(s - direct),
        )
    return GgsSolution(
        beta=beta,
        tau=tau,
        charge_values=a,
        entropy=s,
        log_partition=log_z,
        converged=True,
        residual=0.0,
    )


def _dual_value(charges: ChargeSet, beta: np.ndarray, target: np.ndarray) -> float:
    h = charges.weighted_sum(beta)
    lam = np.linalg.eigvalsh(h)
    return float(logsumexp(-lam) + beta @ target)


def _dual_gradient(charges: ChargeSet, beta: np.ndarray, target: np.ndarray):
    """Gradient target - <A>_tau of the dual, plus the state for reuse."""
    log_z, tau = _log_partition_and_state(charges, beta)
    a = charges.expectations(tau)
    return target - a, a, log_z, tau


def _dual_hessian_fd(
    charges: ChargeSet, beta: np.ndarray, target: np.ndarray, step: float
) -> np.ndarray:
    """Central-difference Hessian of the dual from its exact gradient."""
    c = beta.size
    h = np.empty((c, c))
    for k in range(c):
        e = np.zeros(c)
        e[k] = step
        gp, _, _, _ = _dual_gradient(charges, beta + e, target)
        gm, _, _, _ = _dual_gradient(charges, beta - e, target)
        h[:, k] = (gp - gm) / (2 * step)
    return (h + h.T) / 2


def solve_beta(
    charges: ChargeSet,
    target,
    opts: SolverOptions = DEFAULT_OPTIONS,
    beta0=None,
) -> GgsSolution:
    """Maximum-entropy inference: find beta with <A_j>_tau(beta) = target_j.

    Minimizes the convex dual f(beta) = ln Z(beta) + beta . target by damped
    Newton steps with a backtracking line search. The Newton system is solved
    with a pseudo-inverse, so linearly dependent charge sets get the
    minimum-norm multiplier deterministically.

    Raises InfeasibleTargetError when the iterates run off to
    ||beta||_inf > opts.beta_max (the target is outside or on the boundary of
    the achievable charge set) and ConvergenceError when the iteration budget
    is exhausted.
    """
    target = np.asarray(target, dtype=float).reshape(-1)
    if target.shape != (len(charges),):
        raise ShapeError(
            f"target has length {target.size}, charge set has {len(charges)}"
        )
    beta = (
        np.zeros(len(charges))
        if beta0 is None
        else _check_beta(charges, beta0).copy()
    )

    f = _dual_value(charges, beta, target)
    grad, a, log_z, tau = _dual_gradient(charges, beta, target)
    residual = float(np.max(np.abs(grad)))

    for _ in range(opts.max_iter):
        if residual <= opts.tolerance:
            s = log_z + float(beta @ target)
            return GgsSolution(
                beta=beta,
                tau=DensityState(tau),
                charge_values=a,
                entropy=s,
                log_partition=log_z,
                converged=True,
                residual=residual,
            )
        if np.max(np.abs(beta)) > opts.beta_max:
            raise InfeasibleTargetError(
                f"target {target.tolist()} unreachable: ||beta||_inf exceeded "
                f"{opts.beta_max:g} (residual {residual:.3e})",
                beta=beta,
                residual=residual,
            )

        hess = _dual_hessian_fd(charges, beta, target, opts.fd_step)
        step = -np.linalg.pinv(hess, rcond=1e-13) @ grad

        # Full Newton step first: near the optimum the dual value is flat to
        # machine precision, so acceptance is by residual decrease there.
        cand = beta + step
        g_c, a_c, lz_c, tau_c = _dual_gradient(charges, cand, target)
        r_c = float(np.max(np.abs(g_c)))
        if r_c < residual:
            beta, grad, a, log_z, tau, residual = cand, g_c, a_c, lz_c, tau_c, r_c
            f = log_z + float(beta @ target)
            continue

        descent = float(grad @ step)
        if descent >= 0:
            step = -grad  # fall back to steepest descent
            descent = float(grad @ step)

        t = 1.0
        while t > 1e-14:
            beta_new = beta + t * step
            f_new = _dual_value(charges, beta_new, target)
            if f_new <= f + 1e-4 * t * descent:
                break
            t /= 2
        else:
            raise ConvergenceError(
                f"line search stalled at residual {residual:.3e}",
                residual=residual,
            )

        beta = beta + t * step
        f = f_new
        grad, a, log_z, tau = _dual_gradient(charges, beta, target)
        residual = float(np.max(np.abs(grad)))

    raise ConvergenceError(
        f"no convergence in {opts.max_iter} iterations "
        f"(last residual {residual:.3e})",
        residual=residual,
    )


def free_entropy(rho: DensityState, charges: ChargeSet, beta) -> float:
    """Free entropy sum_j beta_j Tr(rho A_j) - S(rho); minimized by tau(beta)."""
    if not isinstance(rho, DensityState):
        rho = DensityState(rho)
    beta = _check_beta(charges, beta)
    if rho.dim != charges.dim:
        raise ShapeError(
            f"state dim {rho.dim} does not match charges dim {charges.dim}"
        )
    return float(beta @ charges.expectations(rho)) - entropy(rho)


def entropy_hessian(
    charges: ChargeSet, a, opts: SolverOptions = DEFAULT_OPTIONS
) -> np.ndarray:
    """Hessian of the max-entropy surface: H_ij = d beta_j / d a_i at a.

    Central finite differences of the inverse map a -> beta(a), symmetrized
    as (H + H^T)/2. H is symmetric negative definite at interior points by
    strict concavity of S(tau(a)).
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    base = solve_beta(charges, a, opts)
    # Inner solves go well below the requested tolerance so the finite
    # differences are not dominated by solver residual.
    inner = replace(opts, tolerance=min(opts.tolerance, 1e-12))
    step = opts.hessian_step * max(1.0, float(np.max(np.abs(a))))
    c = a.size
    h = np.empty((c, c))
    for i in range(c):
        e = np.zeros(c)
        e[i] = step
        try:
            bp = solve_beta(charges, a + e, inner, beta0=base.beta)
            bm = solve_beta(charges, a - e, inner, beta0=base.beta)
        except InfeasibleTargetError as exc:
            raise BoundaryProximityError(
                f"finite-difference step {step:g} along charge {i} crosses the "
                f"achievable boundary at a = {a.tolist()}"
            ) from exc
        h[i, :] = (bp.beta - bm.beta) / (2 * step)
    return (h + h.T) / 2


def heat_capacity(
    charges: ChargeSet, a: float, opts: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """Heat capacity C = dE/dT of a single-charge system at energy a.

    Computed as C = -beta^2 / (d beta/d E) from the entropy Hessian; at
    beta = 0 the 0/0 is resolved by the variance limit beta^2 Var(A) = 0.
    """
    if len(charges) != 1:
        raise ShapeError(
            f"heat capacity needs exactly one charge, got {len(charges)}"
        )
    sol = solve_beta(charges, [float(a)], opts)
    beta = float(sol.beta[0])
    if abs(beta) < 1e-9:
        return 0.0
    h = entropy_hessian(charges, [float(a)], opts)
    return float(-(beta**2) / h[0, 0])
