"""First- and second-law accounting for work transformations.

A work transformation takes rho_S x tau(beta)_B to a joint final state
sigma_SB while c batteries absorb the charge differences. Batteries stay
pure and factor off, so they enter only as the scalar ledger
W_j = -Delta A_S_j - Delta A_B_j. All quantities are per-copy rates; no
explicit copy count appears here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .diagram import (
    DEFAULT_MEMBERSHIP,
    MembershipOptions,
    MembershipReport,
    PhasePoint,
    extended_member,
)
from .errors import ShapeError
from .gibbs import DEFAULT_OPTIONS, GgsSolution, SolverOptions, free_entropy, ggs_from_beta
from .operators import ChargeSet, DensityState, entropy

__all__ = [
    "Scenario",
    "Ledger",
    "first_law_ledger",
    "second_law_gap",
    "bath_point_at_rate",
    "fixed_bath_feasible",
]


@dataclass(frozen=True)
class Scenario:
    """Work system, bath, inverse temperatures, endpoint states and works.

    `battery_capacity_ok` records the user's assertion that the battery
    spectral diameters dominate those of system plus bath; it is carried
    into reports but never computed.
    """

    system_charges: ChargeSet
    bath_charges: ChargeSet
    beta: np.ndarray
    rho_S: DensityState
    sigma_S: DensityState
    work: np.ndarray
    battery_capacity_ok: bool = True

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        work = np.asarray(self.work, dtype=float).reshape(-1)
        c = len(self.system_charges)
        if len(self.bath_charges) != c:
            raise ShapeError(
                f"system has {c} charges but bath has {len(self.bath_charges)}"
            )
        if beta.shape != (c,) or work.shape != (c,):
            raise ShapeError(
                f"beta/work must have length {c}, got {beta.size}/{work.size}"
            )
        if self.rho_S.dim != self.system_charges.dim:
            raise ShapeError("rho_S dimension does not match system charges")
        if self.sigma_S.dim != self.system_charges.dim:
            raise ShapeError("sigma_S dimension does not match system charges")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "work", work)

    @property
    def charge_count(self) -> int:
        return len(self.system_charges)

    def bath_thermal(self, solver: SolverOptions = DEFAULT_OPTIONS) -> GgsSolution:
        return ggs_from_beta(self.bath_charges, self.beta, solver)

    def delta_a_S(self) -> np.ndarray:
        return self.system_charges.expectations(
            self.sigma_S
        ) - self.system_charges.expectations(self.rho_S)

    def delta_s_S(self) -> float:
        return entropy(self.sigma_S) - entropy(self.rho_S)


@dataclass(frozen=True)
class Ledger:
    """Per-copy balance of one work transformation.

    By construction work = -delta_a_S - delta_a_B exactly; the transformation
    is first-law consistent iff entropy_balance_residual vanishes.
    """

    delta_s_S: float
    delta_a_S: np.ndarray
    delta_a_B: np.ndarray
    work: np.ndarray
    entropy_balance_residual: float
    battery_capacity_ok: bool = True

    @property
    def consistent(self) -> bool:
        return abs(self.entropy_balance_residual) <= 1e-9


def _bath_point_values(sc: Scenario, sigma_B, solver) -> np.ndarray:
    if isinstance(sigma_B, PhasePoint):
        a = sigma_B.a
        if a.shape != (sc.charge_count,):
            raise ShapeError(
                f"bath point has {a.size} charges, expected {sc.charge_count}"
            )
        return a
    if isinstance(sigma_B, DensityState):
        if sigma_B.dim != sc.bath_charges.dim:
            raise ShapeError("sigma_B dimension does not match bath charges")
        return sc.bath_charges.expectations(sigma_B)
    raise ShapeError(
        f"bath endpoint must be a DensityState or PhasePoint, got {type(sigma_B)!r}"
    )


def first_law_ledger(
    sc: Scenario,
    sigma_B,
    s_final_SB: float,
    solver: SolverOptions = DEFAULT_OPTIONS,
) -> Ledger:
    """Fill in the first-law ledger W_j = -Delta A_S_j - Delta A_B_j.

    `sigma_B` is the final bath state or its phase point; `s_final_SB` is the
    entropy rate of the final joint state, checked against the conservation
    requirement s_final = S(rho_S) + S(tau(beta)_B).
    """
    thermal = sc.bath_thermal(solver)
    a_b_final = _bath_point_values(sc, sigma_B, solver)
    delta_a_s = sc.delta_a_S()
    delta_a_b = a_b_final - thermal.charge_values
    work = -delta_a_s - delta_a_b
    residual = float(s_final_SB) - (entropy(sc.rho_S) + thermal.entropy)
    return Ledger(
        delta_s_S=sc.delta_s_S(),
        delta_a_S=delta_a_s,
        delta_a_B=delta_a_b,
        work=work,
        entropy_balance_residual=residual,
        battery_capacity_ok=sc.battery_capacity_ok,
    )


def second_law_gap(sc: Scenario) -> float:
    """Second-law gap delta = -Delta F_S - sum_j beta_j W_j.

    delta >= 0 is necessary for the transformation to be feasible with any
    bath; delta < 0 means the requested works exceed the free-entropy budget.
    """
    f_initial = free_entropy(sc.rho_S, sc.system_charges, sc.beta)
    f_final = free_entropy(sc.sigma_S, sc.system_charges, sc.beta)
    return -(f_final - f_initial) - float(sc.beta @ sc.work)


def bath_point_at_rate(
    sc: Scenario, rate: float, solver: SolverOptions = DEFAULT_OPTIONS
) -> PhasePoint:
    """Required per-elementary-bath phase point when using `rate` baths per copy.

    s = S(tau_b) - Delta s_S / R and
    a_j = <A_b_j>_tau - (Delta A_S_j + W_j) / R; as R grows the point slides
    toward the bath's thermal point along a straight ray.
    """
    if not rate > 0:
        raise ShapeError(f"bath rate must be > 0, got {rate}")
    thermal = sc.bath_thermal(solver)
    s = thermal.entropy - sc.delta_s_S() / rate
    a = thermal.charge_values - (sc.delta_a_S() + sc.work) / rate
    return PhasePoint(a, s)


def fixed_bath_feasible(
    sc: Scenario,
    bath: ChargeSet,
    s_sigma_S: float,
    opts: MembershipOptions = DEFAULT_MEMBERSHIP,
    solver: SolverOptions = DEFAULT_OPTIONS,
) -> MembershipReport:
    """Feasibility with a fixed bath via the conditional-entropy diagram.

    Builds the target bath coordinates a_j = <A_B_j>_tau - Delta A_S_j - W_j
    and t = S(tau_B) - Delta s_S, and tests (a, t) against the extended
    diagram of `bath` at system entropy s_sigma_S. Interior membership means
    the transformation is feasible up to arbitrarily small work error; the
    entropy floor below zero reflects final-state entanglement between
    system and bath.
    """
    if len(bath) != sc.charge_count:
        raise ShapeError(
            f"bath has {len(bath)} charges, scenario has {sc.charge_count}"
        )
    thermal = ggs_from_beta(bath, sc.beta, solver)
    a = thermal.charge_values - sc.delta_a_S() - sc.work
    t = thermal.entropy - sc.delta_s_S()
    return extended_member(bath, float(s_sigma_S), PhasePoint(a, t), opts, solver)


def with_bath(sc: Scenario, bath: ChargeSet) -> Scenario:
    """Copy of the scenario with a different (elementary) bath charge set."""
    return replace(sc, bath_charges=bath)
