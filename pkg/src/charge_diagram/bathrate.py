"""Optimal thermal-bath rate.

The minimum number R* of elementary baths per work-system copy is the
smallest R for which the required bath point lies in the bath's phase
diagram; geometrically, the point where the rate ray from the thermal
point crosses the boundary. For a small second-law gap delta this is
approximated to second order by the entropy Hessian (generalized heat
capacities) of the elementary bath:

    R ~ -(1/2 delta) sum_ij (d beta_j/d a_i) v_i v_j,  v = Delta A_S + W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import (
    DEFAULT_MEMBERSHIP,
    MembershipOptions,
    PhasePoint,
    phase_member,
)
from .errors import BoundaryProximityError, InfeasibleScenarioError, UnboundedRateError
from .gibbs import DEFAULT_OPTIONS, SolverOptions, entropy_hessian, ggs_from_beta
from .operators import ChargeSet
from .thermo import Scenario, bath_point_at_rate, second_law_gap, with_bath

__all__ = ["RateOptions", "RateReport", "optimal_rate_exact", "optimal_rate_quadratic"]


@dataclass(frozen=True)
class RateOptions:
    rtol: float = 1e-8
    r_max: float = 1e12
    membership: MembershipOptions = DEFAULT_MEMBERSHIP
    solver: SolverOptions = DEFAULT_OPTIONS


DEFAULT_RATE = RateOptions()


@dataclass(frozen=True)
class RateReport:
    r_star: float
    boundary_point: PhasePoint
    delta: float
    quadratic_estimate: float
    relative_gap: float


def _displacement(sc: Scenario) -> np.ndarray:
    return sc.delta_a_S() + sc.work


def _degenerate_ray(sc: Scenario) -> bool:
    return (
        abs(sc.delta_s_S()) <= 1e-12
        and float(np.max(np.abs(_displacement(sc)))) <= 1e-12
    )


def _margin_at(sc_elem: Scenario, bath: ChargeSet, rate: float, opts: RateOptions):
    point = bath_point_at_rate(sc_elem, rate, opts.solver)
    report = phase_member(bath, point, opts.membership, opts.solver)
    return report.margin, point


def optimal_rate_exact(
    sc: Scenario, elem_bath: ChargeSet, opts: RateOptions = DEFAULT_RATE
) -> RateReport:
    """Smallest bath rate whose required point lies in the bath diagram.

    Exponential bracketing (doubling from R = 1) followed by bisection on
    the membership margin, which is continuous and non-decreasing along the
    ray. A boundary tie counts as feasible. The degenerate ray (no entropy
    change and zero displacement) needs no bath at all: R* = 0.
    """
    delta = second_law_gap(sc)
    if delta <= 0:
        raise InfeasibleScenarioError(
            f"second-law gap {delta:.6e} is not strictly positive"
        )
    sc_elem = with_bath(sc, elem_bath)
    try:
        quad = optimal_rate_quadratic(sc, elem_bath, opts)
    except BoundaryProximityError:
        quad = float("nan")  # thermal point sits on the bath boundary

    if _degenerate_ray(sc):
        thermal = ggs_from_beta(elem_bath, sc.beta, opts.solver)
        point = PhasePoint(thermal.charge_values, thermal.entropy)
        return RateReport(
            r_star=0.0,
            boundary_point=point,
            delta=delta,
            quadratic_estimate=quad,
            relative_gap=float("nan"),
        )

    # Bisection runs on the sign of the margin itself: near R* the margin
    # slope along the ray is ~ delta/R*^2, so thresholding at the membership
    # tolerance would bias R* low by tolerance * R*^2 / delta.
    lo, hi = None, None
    r = 1.0
    while r <= opts.r_max:
        margin, point = _margin_at(sc_elem, elem_bath, r, opts)
        if margin >= 0:
            hi = r
            break
        lo = r
        r *= 2
    if hi is None:
        raise UnboundedRateError(
            f"no feasible rate below r_max = {opts.r_max:g}"
        )
    if lo is None:
        # Already feasible at R = 1; bracket downward for the crossing.
        lo = hi / 2
        while lo > 1e-300:
            margin, _ = _margin_at(sc_elem, elem_bath, lo, opts)
            if margin < 0:
                break
            hi = lo
            lo /= 2
        else:
            lo = 0.0

    while hi - lo > opts.rtol * hi:
        mid = (lo + hi) / 2
        margin, _ = _margin_at(sc_elem, elem_bath, mid, opts)
        if margin >= 0:
            hi = mid
        else:
            lo = mid

    _, boundary_point = _margin_at(sc_elem, elem_bath, hi, opts)
    gap = abs(hi - quad) / hi if hi > 0 and np.isfinite(quad) else float("nan")
    return RateReport(
        r_star=hi,
        boundary_point=boundary_point,
        delta=delta,
        quadratic_estimate=quad,
        relative_gap=gap,
    )


def optimal_rate_quadratic(
    sc: Scenario, elem_bath: ChargeSet, opts: RateOptions = DEFAULT_RATE
) -> float:
    """Second-order rate estimate from the bath's entropy Hessian at its
    thermal charge values; positive whenever the displacement is nonzero."""
    delta = second_law_gap(sc)
    if delta <= 0:
        raise InfeasibleScenarioError(
            f"second-law gap {delta:.6e} is not strictly positive"
        )
    v = _displacement(sc)
    if float(np.max(np.abs(v))) <= 1e-12:
        return 0.0
    thermal = ggs_from_beta(elem_bath, sc.beta, opts.solver)
    hess = entropy_hessian(elem_bath, thermal.charge_values, opts.solver)
    return float(-(v @ hess @ v) / (2 * delta))
