"""Approximate microcanonical (a.m.c.) subspaces, empirically.

An a.m.c. subspace consists of the n-copy states with sharp values of
every charge: states inside it pass each spectral window test (condition
1, parameter delta), and product states passing the tighter window test
land inside it (condition 2, parameter epsilon).

The certified construction distinguishes nets over the near/far state
classes; the net sizes (5n/lambda)^(2 d^2) are astronomically large, so
this module replaces the nets by seeded Monte Carlo samples: the
projector is the Helstrom test {Gamma - Phi >= 0} between averaged
tensor powers of sampled near and far states. Permutation covariance is
exact by construction; the defining parameters are validated empirically
and reported as estimates, not certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..errors import SamplingError, ShapeError
from ..operators import (
    ChargeSet,
    Projector,
    check_dim_cap,
    random_density,
    spectral_diameter,
    total_charge,
    window_projector,
)

__all__ = [
    "AmcParams",
    "AmcReport",
    "amc_params",
    "amc_theoretical_params",
    "amc_construct",
    "amc_validate",
]


@dataclass(frozen=True)
class AmcParams:
    """Target charge values with window widths and sampling controls.

    eta is the validation window, eta_prime the witness window, and
    (s, t) the near/far class radii used by the construction, all in
    units of the spectral diameter per charge.
    """

    values: np.ndarray
    eta: float
    eta_prime: float
    s: float
    t: float
    n: int
    samples: int
    seed: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if not (0 < self.eta_prime < self.eta):
            raise ShapeError(
                f"need 0 < eta_prime < eta, got {self.eta_prime}, {self.eta}"
            )
        if not (0 < self.s < self.t):
            raise ShapeError(f"need 0 < s < t, got {self.s}, {self.t}")
        if self.n < 1 or self.samples < 1:
            raise ShapeError("n and samples must be positive")
        object.__setattr__(self, "values", values)


def amc_params(
    charges: ChargeSet,
    values,
    eta_prime: float,
    n: int,
    samples: int = 200,
    seed: int = 7,
    eta: float | None = None,
) -> AmcParams:
    """Build params with the proof's window relations.

    eta defaults to 2 eta_prime; the class radii satisfy
    s - eta_prime = eta - t = (t - s) / (2 c sqrt(2 d^2 + 1)).
    """
    c = len(charges)
    d = charges.dim
    eta = 2.0 * eta_prime if eta is None else eta
    r = 1.0 / (2.0 * c * math.sqrt(2.0 * d**2 + 1.0))
    gap = (eta - eta_prime) / (1.0 + r)
    s = eta_prime + r * gap
    t = eta - r * gap
    return AmcParams(
        values=values,
        eta=eta,
        eta_prime=eta_prime,
        s=s,
        t=t,
        n=n,
        samples=samples,
        seed=seed,
    )


@dataclass(frozen=True)
class AmcReport:
    projector_rank: int
    empirical_delta: float
    empirical_delta_prime_threshold: float
    empirical_epsilon: float
    theoretical: tuple[float, float, float, float] | None = None
    witnesses_passing: int = 0
    witnesses_total: int = 0


def amc_theoretical_params(n: int, d: int, c: int, eta_prime: float):
    """The certified parameter tuple (eta, delta, delta_prime, epsilon).

    Values above 1 are vacuous; at desk scale they typically are, which is
    exactly why the empirical validation exists.
    """
    if n < 1 or d < 1 or c < 1 or eta_prime <= 0:
        raise ShapeError("all arguments must be positive")
    eta = 2.0 * eta_prime
    decay = math.exp(-n * eta_prime**2 / (8.0 * c**2 * (d + 1) ** 2))
    poly = (5.0 * n) ** (2 * d**2)
    delta_prime = (c + 3) / 2.0 * poly * decay
    delta = (c + 3) * poly * decay
    epsilon = 2.0 * (c + 3) * (n + 1) ** (3 * d**2) * poly * decay
    return eta, delta, delta_prime, epsilon


def _diagonal_charges(charges: ChargeSet) -> bool:
    return all(
        np.max(np.abs(a.entries - np.diag(np.diagonal(a.entries)))) < 1e-14
        for a in charges
    )


def _sample_state(dim, rng, diagonal):
    if diagonal:
        # Flat Dirichlet over the simplex keeps the construction diagonal
        # whenever every charge is diagonal.
        return np.diag(rng.dirichlet(np.ones(dim))).astype(complex)
    return random_density(dim, rng).entries


def _charge_deviations(charges, diameters, values, rho) -> np.ndarray:
    expect = charges.expectations(rho)
    return np.abs(expect - values) / diameters


def amc_construct(charges: ChargeSet, params: AmcParams) -> Projector:
    """Monte Carlo Helstrom construction of an a.m.c. candidate projector.

    Samples `params.samples` states into the near class (all charge
    deviations <= s Sigma(A_j)) and the far class (some deviation
    > t Sigma(A_j)), averages their n-fold tensor powers into Gamma and
    Phi, and returns the projector onto the nonnegative eigenspace of
    Gamma - Phi. When every charge is diagonal the sampler stays diagonal,
    so the projector commutes with the total charges exactly.
    """
    c = len(charges)
    if params.values.shape != (c,):
        raise ShapeError(
            f"{params.values.size} target values for {c} charges"
        )
    d = charges.dim
    check_dim_cap(d**params.n)
    diameters = np.array([spectral_diameter(a) for a in charges])
    if np.any(diameters <= 0):
        raise ShapeError("every charge needs a nonzero spectral diameter")

    rng = np.random.default_rng(params.seed)
    diagonal = _diagonal_charges(charges)
    near, far = [], []
    attempts = 0
    budget = 2000 * params.samples
    while (len(near) < params.samples or len(far) < params.samples) and (
        attempts < budget
    ):
        attempts += 1
        rho = _sample_state(d, rng, diagonal)
        dev = _charge_deviations(charges, diameters, params.values, rho)
        if np.all(dev <= params.s) and len(near) < params.samples:
            near.append(rho)
        elif np.any(dev > params.t) and len(far) < params.samples:
            far.append(rho)
    if len(near) < params.samples or len(far) < params.samples:
        raise SamplingError(
            f"rejection sampling exhausted: near {len(near)}, far {len(far)} "
            f"of {params.samples} after {attempts} draws",
            accepted=min(len(near), len(far)),
            attempted=attempts,
        )

    dim_n = d**params.n
    gamma = np.zeros((dim_n, dim_n), dtype=complex)
    phi = np.zeros_like(gamma)
    for rho in near:
        gamma += reduce(np.kron, [rho] * params.n) if params.n > 1 else rho
    for rho in far:
        phi += reduce(np.kron, [rho] * params.n) if params.n > 1 else rho
    gamma /= len(near)
    phi /= len(far)

    diff = gamma - phi
    lam, vec = np.linalg.eigh((diff + diff.conj().T) / 2)
    sel = vec[:, lam >= 0]
    return Projector(sel @ sel.conj().T, rank=sel.shape[1])


def _window_projectors(charges, params, width):
    n = params.n
    projs = []
    for j, a in enumerate(charges):
        total = total_charge(a, n)
        sigma = spectral_diameter(a)
        center = n * params.values[j]
        half = n * width * sigma
        projs.append(window_projector(total, center - half, center + half))
    return projs


def amc_validate(
    p: Projector,
    charges: ChargeSet,
    params: AmcParams,
    trials: int,
    delta_prime_threshold: float = 0.5,
) -> AmcReport:
    """Empirical check of the two defining a.m.c. conditions.

    Condition 1: empirical_delta is the worst window deficiency
    1 - tr(omega Pi_j^eta) over `trials` random pure states supported in
    range(P). Condition 2: empirical_epsilon is the worst 1 - tr(omega P)
    over product-state witnesses whose factors have charges within
    (eta'/2) Sigma(A) of the targets and which pass the eta' window test at
    the given threshold. Sampling cannot certify the suprema; the report
    carries the trial counts.
    """
    if trials < 1:
        raise ShapeError("trials must be >= 1")
    c = len(charges)
    d = charges.dim
    n = params.n
    if p.dim != d**n:
        raise ShapeError(f"projector dim {p.dim} does not match d^n = {d**n}")

    eta_windows = _window_projectors(charges, params, params.eta)
    etap_windows = _window_projectors(charges, params, params.eta_prime)
    diameters = np.array([spectral_diameter(a) for a in charges])

    rng = np.random.default_rng(params.seed + 1)
    diagonal = _diagonal_charges(charges)

    # Condition 1: states inside the subspace see every eta window.
    empirical_delta = 0.0
    if p.rank > 0:
        lam, vec = np.linalg.eigh(p.entries)
        basis = vec[:, lam > 0.5]
        for _ in range(trials):
            g = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(
                basis.shape[1]
            )
            psi = basis @ (g / np.linalg.norm(g))
            for w in eta_windows:
                deficiency = 1.0 - float(
                    np.real(psi.conj() @ (w.entries @ psi))
                )
                empirical_delta = max(empirical_delta, deficiency)

    # Condition 2: near-target product witnesses should land inside P.
    empirical_epsilon = 0.0
    passing = 0
    total = 0
    attempts = 0
    budget = 2000 * trials
    while total < trials and attempts < budget:
        attempts += 1
        factors = []
        for _ in range(n):
            rho = _sample_state(d, rng, diagonal)
            dev = _charge_deviations(charges, diameters, params.values, rho)
            if np.any(dev > params.eta_prime / 2):
                factors = None
                break
            factors.append(rho)
        if factors is None:
            continue
        total += 1
        omega = reduce(np.kron, factors) if n > 1 else factors[0]
        passes = all(
            float(np.trace(omega @ w.entries).real) >= 1.0 - delta_prime_threshold
            for w in etap_windows
        )
        if not passes:
            continue
        passing += 1
        deficiency = 1.0 - float(np.trace(omega @ p.entries).real)
        empirical_epsilon = max(empirical_epsilon, deficiency)
    if total == 0:
        raise SamplingError(
            f"no product witnesses found within eta'/2 of the targets "
            f"after {attempts} draws",
            accepted=0,
            attempted=attempts,
        )

    return AmcReport(
        projector_rank=p.rank,
        empirical_delta=empirical_delta,
        empirical_delta_prime_threshold=delta_prime_threshold,
        empirical_epsilon=empirical_epsilon,
        theoretical=amc_theoretical_params(n, d, c, params.eta_prime),
        witnesses_passing=passing,
        witnesses_total=total,
    )
