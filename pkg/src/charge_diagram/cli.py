"""Command-line interface.

Subcommands mirror the library modules:

    ggs solve|from-beta        Gibbs-state inference and evaluation
    diagram member|extended|sample
    thermo second-law|first-law|fixed-bath
    bathrate optimal           exact + quadratic bath rates, delta sweeps
    finite typical|trim|aet|amc
    validate FILE              schema-check a JSON input document

Reports are single JSON documents on stdout (CSV for `diagram sample`
and sweeps), rendered deterministically: sorted keys, fixed float
formatting. Exit codes: 0 success, 1 infeasible or negative result,
2 schema/validation errors, 3 capacity errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import config
from .bathrate import RateOptions, optimal_rate_exact, optimal_rate_quadratic
from .diagram import (
    MembershipOptions,
    PhasePoint,
    achievable,
    extended_member,
    phase_member,
)
from .errors import (
    CapacityError,
    ChargeDiagramError,
    InfeasibleScenarioError,
    InfeasibleTargetError,
    InvalidStateError,
    SamplingError,
    ShapeError,
    UnboundedRateError,
)
from .finite import (
    TypicalityParams,
    aet_transform,
    amc_construct,
    amc_params,
    amc_validate,
    trim_state,
    typical_projector,
    typical_stats,
)
from .gibbs import SolverOptions, ggs_from_beta, solve_beta
from .io import (
    CHARGE_SET_SCHEMA,
    SCENARIO_SCHEMA,
    load_charge_set,
    load_scenario,
    matrix_from_json,
    render_json,
    validate_document,
)
from .operators import (
    ChargeSet,
    DensityState,
    Projector,
    entropy,
)
from .thermo import (
    Scenario,
    bath_point_at_rate,
    first_law_ledger,
    fixed_bath_feasible,
    second_law_gap,
)

LN2 = math.log(2.0)

# Report keys holding entropy-valued numbers; --bits divides them by ln 2.
ENTROPY_KEYS = {
    "entropy",
    "s",
    "t",
    "s0",
    "s_max",
    "s_sigma_S",
    "s_final_SB",
    "delta",
    "delta_s_S",
    "delta_F_S",
    "entropy_balance_residual",
    "log_partition",
    "kept_entropy_bits",
}

FACTORS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "factors"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "factors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
            },
        },
    },
    "additionalProperties": False,
}


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ShapeError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ShapeError(f"{path} is not valid JSON: {exc}")


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x != ""])
    except ValueError:
        raise ShapeError(f"expected a comma-separated number list, got {text!r}")


def _load_factors(path: str) -> list[DensityState]:
    doc = _load_json(path)
    validate_document(doc, FACTORS_SCHEMA, "factors file")
    dim = doc["dim"]
    out = []
    for k, mat in enumerate(doc["factors"]):
        m = matrix_from_json(mat, path=f"$['factors'][{k}]")
        if m.shape[0] != dim:
            raise ShapeError(
                f"$['factors'][{k}]: matrix is {m.shape[0]}x{m.shape[0]}, "
                f"declared dim is {dim}"
            )
        try:
            out.append(DensityState(m))
        except InvalidStateError as exc:
            raise ShapeError(f"$['factors'][{k}]: {exc}") from exc
    return out


def _solver_options(args, extras_options=None) -> SolverOptions:
    opts = SolverOptions()
    merged = dict(extras_options or {})
    if args.tol is not None:
        merged["tolerance"] = args.tol
    if args.max_iter is not None:
        merged["max_iter"] = args.max_iter
    if args.beta_max is not None:
        merged["beta_max"] = args.beta_max
    if args.fd_step is not None:
        merged["fd_step"] = args.fd_step
    fields = {k: v for k, v in merged.items() if k in opts.__dataclass_fields__}
    return replace(opts, **fields)


def _membership_options(args) -> MembershipOptions:
    opts = MembershipOptions()
    if args.seed is not None:
        opts = replace(opts, seed=args.seed)
    return opts


def _convert_units(obj, to_bits: bool):
    if not to_bits:
        return obj

    def walk(o, convert=False):
        if isinstance(o, dict):
            return {
                k: walk(v, convert=(k in ENTROPY_KEYS) or convert)
                for k, v in o.items()
            }
        if isinstance(o, (list, tuple)):
            return [walk(v, convert) for v in o]
        if convert and isinstance(o, (float, np.floating)):
            return float(o) / LN2
        return o

    return walk(obj)


def _emit(report: dict, args) -> None:
    report = dict(report)
    report["units"] = "bits" if args.bits else "nats"
    print(render_json(_convert_units(report, args.bits)))


def _write_csv(path, header, rows):
    def fmt(x):
        return format(float(x), ".12g") if isinstance(x, (float, np.floating)) else x

    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --- subcommand handlers ------------------------------------------------------


def _cmd_ggs_from_beta(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    sol = ggs_from_beta(charges, _parse_vector(args.beta), _solver_options(args))
    _emit(
        {
            "beta": sol.beta,
            "charge_values": sol.charge_values,
            "entropy": sol.entropy,
            "log_partition": sol.log_partition,
            "converged": sol.converged,
            "residual": sol.residual,
        },
        args,
    )
    return 0


def _cmd_ggs_solve(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    target = _parse_vector(args.target)
    sol = solve_beta(charges, target, _solver_options(args))
    _emit(
        {
            "target": target,
            "beta": sol.beta,
            "charge_values": sol.charge_values,
            "entropy": sol.entropy,
            "log_partition": sol.log_partition,
            "converged": sol.converged,
            "residual": sol.residual,
        },
        args,
    )
    return 0


def _split_point(charges: ChargeSet, text: str) -> PhasePoint:
    v = _parse_vector(text)
    if v.size != len(charges) + 1:
        raise ShapeError(
            f"--point needs {len(charges)} charge values plus an entropy, "
            f"got {v.size} numbers"
        )
    return PhasePoint(v[:-1], v[-1])


def _cmd_diagram_member(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    point = _split_point(charges, args.point)
    report = phase_member(
        charges, point, _membership_options(args), _solver_options(args)
    )
    _emit(
        {
            "point": {"a": point.a, "s": point.s},
            "inside": report.inside,
            "margin": report.margin,
            "boundary": report.boundary,
        },
        args,
    )
    return 0 if report.inside else 1


def _cmd_diagram_extended(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    point = _split_point(charges, args.point)
    report = extended_member(
        charges, args.s0, point, _membership_options(args), _solver_options(args)
    )
    _emit(
        {
            "point": {"a": point.a, "s": point.s},
            "s0": args.s0,
            "inside": report.inside,
            "margin": report.margin,
            "boundary": report.boundary,
        },
        args,
    )
    return 0 if report.inside else 1


def _parse_axis(spec: str):
    parts = spec.split(":")
    if len(parts) == 1:
        return ("fixed", float(parts[0]))
    if len(parts) == 3:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        if steps < 2 or hi <= lo:
            raise ShapeError(f"bad axis spec {spec!r}: need lo<hi and steps>=2")
        return ("range", np.linspace(lo, hi, steps))
    raise ShapeError(f"axis spec {spec!r} is neither 'value' nor 'lo:hi:steps'")


def _cmd_diagram_sample(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    c = len(charges)
    if len(args.axis) != c:
        raise ShapeError(f"need one --axis per charge ({c}), got {len(args.axis)}")
    axes = [_parse_axis(s) for s in args.axis]
    varying = [j for j, (kind, _) in enumerate(axes) if kind == "range"]
    grids = [ax[1] if kind == "range" else np.array([ax[1]])
             for kind, ax in ((k, v) for k, v in axes)]

    solver = _solver_options(args)
    mopts = _membership_options(args)
    rows = []
    mesh = np.meshgrid(*grids, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    for a in points:
        if not achievable(charges, a, mopts).inside:
            continue
        try:
            s_max = solve_beta(charges, a, solver).entropy
        except (InfeasibleTargetError, ChargeDiagramError):
            continue
        rows.append([*a, s_max])
    header = [f"a_{j + 1}" for j in range(c)] + ["s_max"]
    if args.bits:
        rows = [[*r[:-1], r[-1] / LN2] for r in rows]
    _write_csv(args.csv, header, rows)
    if args.plot:
        from .plotting import render_sample_plot

        render_sample_plot([tuple(r) for r in rows], varying, args.plot)
    if args.csv:
        _emit({"rows": len(rows), "csv": args.csv, "plot": args.plot}, args)
    return 0


def _scenario_from_args(args):
    sc, extras = load_scenario(_load_json(args.scenario))
    return sc, extras


def _cmd_thermo_second_law(args) -> int:
    sc, extras = _scenario_from_args(args)
    delta = second_law_gap(sc)
    _emit(
        {
            "delta": delta,
            "feasible": bool(delta >= 0),
            "beta": sc.beta,
            "work": sc.work,
        },
        args,
    )
    return 0 if delta >= 0 else 1


def _cmd_thermo_first_law(args) -> int:
    sc, extras = _scenario_from_args(args)
    solver = _solver_options(args, extras.get("options"))
    thermal = sc.bath_thermal(solver)
    if args.bath_point is not None:
        bath_point = PhasePoint(_parse_vector(args.bath_point), 0.0)
    elif extras.get("bath_point") is not None:
        bath_point = PhasePoint(np.asarray(extras["bath_point"], dtype=float), 0.0)
    else:
        bath_point = PhasePoint(thermal.charge_values, thermal.entropy)
    if args.s_final is not None:
        s_final = args.s_final
    elif extras.get("s_final_SB") is not None:
        s_final = float(extras["s_final_SB"])
    else:
        s_final = entropy(sc.rho_S) + thermal.entropy
    ledger = first_law_ledger(sc, bath_point, s_final, solver)
    _emit(
        {
            "delta_s_S": ledger.delta_s_S,
            "delta_a_S": ledger.delta_a_S,
            "delta_a_B": ledger.delta_a_B,
            "work": ledger.work,
            "entropy_balance_residual": ledger.entropy_balance_residual,
            "consistent": ledger.consistent,
            "battery_capacity_ok": ledger.battery_capacity_ok,
            "s_final_SB": s_final,
        },
        args,
    )
    return 0


def _cmd_thermo_fixed_bath(args) -> int:
    sc, extras = _scenario_from_args(args)
    solver = _solver_options(args, extras.get("options"))
    bath = (
        load_charge_set(_load_json(args.bath)) if args.bath else sc.bath_charges
    )
    s_sigma = entropy(sc.sigma_S) if args.s_sigma is None else args.s_sigma
    report = fixed_bath_feasible(
        sc, bath, s_sigma, _membership_options(args), solver
    )
    thermal = ggs_from_beta(bath, sc.beta, solver)
    a = thermal.charge_values - sc.delta_a_S() - sc.work
    t = thermal.entropy - sc.delta_s_S()
    _emit(
        {
            "feasible": report.inside,
            "margin": report.margin,
            "boundary": report.boundary,
            "bath_point": {"a": a, "t": t},
            "s_sigma_S": s_sigma,
        },
        args,
    )
    return 0 if report.inside else 1


def _cmd_bathrate_optimal(args) -> int:
    sc, extras = _scenario_from_args(args)
    solver = _solver_options(args, extras.get("options"))
    bath = (
        load_charge_set(_load_json(args.bath)) if args.bath else sc.bath_charges
    )
    ropts = RateOptions(membership=_membership_options(args), solver=solver)

    if args.delta_sweep:
        k1, k2 = (int(x) for x in args.delta_sweep.split(":"))
        beta = sc.beta
        shift = beta / float(beta @ beta)
        delta0 = second_law_gap(sc)
        rows = []
        works = {}
        for k in range(k1, k2 + 1):
            delta_k = 10.0 ** (-k)
            w = sc.work + shift * (delta0 - delta_k)
            sck = replace(sc, work=w)
            exact = optimal_rate_exact(sck, bath, ropts)
            quad = optimal_rate_quadratic(sck, bath, ropts)
            rows.append([delta_k, exact.r_star, quad])
            works[str(k)] = w
        _write_csv(args.csv, ["delta", "r_exact", "r_quadratic"], rows)
        if args.plot:
            from .plotting import render_sweep_plot

            render_sweep_plot(rows, args.plot)
        if args.csv:
            _emit(
                {
                    "sweep": {
                        "exponents": [k1, k2],
                        "warning": "work vector re-balanced per delta; "
                        "displacement varies along the sweep",
                        "adjusted_work": works,
                    },
                    "csv": args.csv,
                    "plot": args.plot,
                },
                args,
            )
        return 0

    report = optimal_rate_exact(sc, bath, ropts)
    _emit(
        {
            "r_star": report.r_star,
            "boundary_point": {
                "a": report.boundary_point.a,
                "s": report.boundary_point.s,
            },
            "delta": report.delta,
            "quadratic_estimate": report.quadratic_estimate,
            "relative_gap": report.relative_gap,
        },
        args,
    )
    return 0


def _cmd_finite_typical(args) -> int:
    factors = _load_factors(args.factors)
    params = TypicalityParams(alpha=args.alpha, n=len(factors))
    if args.stats_only:
        stats = typical_stats(factors, params)
    else:
        _, stats = typical_projector(factors, params)
    _emit(
        {
            "n": stats.n,
            "alpha": stats.alpha,
            "trace": stats.trace,
            "rank": stats.rank,
            "min_kept_eigenvalue": stats.min_kept_eigenvalue,
            "max_kept_eigenvalue": stats.max_kept_eigenvalue,
            "entropy_bits": stats.entropy_bits,
            "bounds": {
                "probability": stats.probability_bound,
                "probability_holds": stats.probability_bound_holds,
                "eigenvalue_lower": stats.eigenvalue_lower,
                "eigenvalue_upper": stats.eigenvalue_upper,
                "eigenvalue_holds": stats.eigenvalue_bounds_hold,
                "rank_lower": stats.rank_lower,
                "rank_upper": stats.rank_upper,
                "rank_holds": stats.rank_bounds_hold,
            },
        },
        args,
    )
    return 0


def _cmd_finite_trim(args) -> int:
    factors = _load_factors(args.factors)
    params = TypicalityParams(alpha=args.alpha, n=len(factors))
    dim = factors[0].dim ** len(factors)
    if args.support == "typical":
        support, _ = typical_projector(factors, params)
    else:
        support = Projector(np.eye(dim), rank=dim)
    result = trim_state(factors, params, support, bins=args.bins)
    _emit(
        {
            "tau_rank": result.tau_rank,
            "formula_flat_rank": result.formula_flat_rank,
            "omega_dim": result.omega.dim,
            "kept_weight": result.kept_weight,
            "trace_distance_to_input": result.trace_distance_to_input,
            "discarded_weight": result.discarded_weight,
            "discard_bound": result.discard_bound,
            "distance_bound": result.distance_bound,
            "bin_count": result.bin_count,
            "bin_count_default": result.bin_count_default,
            "projector_rank": result.projector.rank,
        },
        args,
    )
    return 0


def _cmd_finite_aet(args) -> int:
    rho_factors = _load_factors(args.rho)
    sigma_factors = _load_factors(args.sigma)
    charges = load_charge_set(_load_json(args.charges))

    def run(rf, sf, n):
        params = TypicalityParams(alpha=args.alpha, n=n)
        _, report = aet_transform(
            rf,
            sf,
            charges,
            params,
            entropy_slack=args.entropy_slack,
            charge_slack=args.charge_slack,
        )
        return report

    if args.trend:
        sizes = [int(x) for x in args.trend.split(",")]
        k = len(rho_factors)
        rows = []
        for n in sizes:
            if n % k or n % len(sigma_factors):
                raise ShapeError(
                    f"trend size {n} is not a multiple of the factor block"
                )
            rep = run(
                (rho_factors * (n // k))[:n],
                (sigma_factors * (n // len(sigma_factors)))[:n],
                n,
            )
            rows.append([n, rep.trace_distance, *rep.commutator_norms])
        c = len(charges)
        header = ["n", "trace_distance"] + [f"commutator_{j + 1}" for j in range(c)]
        _write_csv(args.csv, header, rows)
        if args.csv:
            _emit({"trend_sizes": sizes, "csv": args.csv}, args)
        return 0

    if len(rho_factors) != len(sigma_factors):
        raise ShapeError("rho and sigma factor lists differ in length")
    report = run(rho_factors, sigma_factors, len(rho_factors))
    _emit(
        {
            "n": report.n,
            "trace_distance": report.trace_distance,
            "commutator_norms": report.commutator_norms,
            "ancilla_dim": report.ancilla_dim,
        },
        args,
    )
    return 0


def _cmd_finite_amc(args) -> int:
    charges = load_charge_set(_load_json(args.charges))
    params = amc_params(
        charges,
        _parse_vector(args.values),
        eta_prime=args.eta_prime,
        n=args.n,
        samples=args.samples,
        seed=args.seed if args.seed is not None else 7,
    )
    projector = amc_construct(charges, params)
    report = amc_validate(projector, charges, params, trials=args.trials)
    _emit(
        {
            "projector_rank": report.projector_rank,
            "empirical_delta": report.empirical_delta,
            "empirical_delta_prime_threshold": report.empirical_delta_prime_threshold,
            "empirical_epsilon": report.empirical_epsilon,
            "witnesses_passing": report.witnesses_passing,
            "witnesses_total": report.witnesses_total,
            "theoretical": {
                "eta": report.theoretical[0],
                "delta": report.theoretical[1],
                "delta_prime": report.theoretical[2],
                "epsilon": report.theoretical[3],
            },
            "windows": {
                "eta": params.eta,
                "eta_prime": params.eta_prime,
                "s": params.s,
                "t": params.t,
            },
        },
        args,
    )
    return 0


def _cmd_validate(args) -> int:
    doc = _load_json(args.file)
    if isinstance(doc, dict) and "system_charges" in doc:
        load_scenario(doc)
        kind = "scenario"
    elif isinstance(doc, dict) and "factors" in doc:
        validate_document(doc, FACTORS_SCHEMA, "factors file")
        _load_factors(args.file)
        kind = "factors"
    elif isinstance(doc, dict) and "charges" in doc:
        load_charge_set(doc)
        kind = "charge_set"
    else:
        raise ShapeError(
            "unrecognized document: expected scenario, charge-set or factors keys"
        )
    _emit({"ok": True, "kind": kind}, args)
    return 0


# --- parser -------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--beta-max", dest="beta_max", type=float, default=None)
    p.add_argument("--fd-step", dest="fd_step", type=float, default=None)
    p.add_argument("--dim-cap", dest="dim_cap", type=int, default=None)
    p.add_argument("--bits", action="store_true", help="report entropies in bits")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="charge-diagram",
        description="Phase diagrams, Gibbs states and work accounting for "
        "multiple non-commuting conserved charges.",
    )
    sub = root.add_subparsers(dest="command")

    ggs = sub.add_parser("ggs", help="generalized Gibbs states")
    ggs_sub = ggs.add_subparsers(dest="subcommand")
    p = ggs_sub.add_parser("from-beta")
    p.add_argument("--charges", required=True)
    p.add_argument("--beta", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_ggs_from_beta)
    p = ggs_sub.add_parser("solve")
    p.add_argument("--charges", required=True)
    p.add_argument("--target", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_ggs_solve)

    dia = sub.add_parser("diagram", help="phase-diagram geometry")
    dia_sub = dia.add_subparsers(dest="subcommand")
    p = dia_sub.add_parser("member")
    p.add_argument("--charges", required=True)
    p.add_argument("--point", required=True, help="a_1,...,a_c,s")
    _add_common(p)
    p.set_defaults(handler=_cmd_diagram_member)
    p = dia_sub.add_parser("extended")
    p.add_argument("--charges", required=True)
    p.add_argument("--point", required=True, help="a_1,...,a_c,s")
    p.add_argument("--s0", type=float, required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_diagram_extended)
    p = dia_sub.add_parser("sample")
    p.add_argument("--charges", required=True)
    p.add_argument(
        "--axis",
        action="append",
        default=[],
        help="per charge: 'lo:hi:steps' to sweep or a single value to fix",
    )
    p.add_argument("--csv", default=None)
    p.add_argument("--plot", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_diagram_sample)

    th = sub.add_parser("thermo", help="first/second-law accounting")
    th_sub = th.add_subparsers(dest="subcommand")
    p = th_sub.add_parser("second-law")
    p.add_argument("--scenario", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_thermo_second_law)
    p = th_sub.add_parser("first-law")
    p.add_argument("--scenario", required=True)
    p.add_argument("--bath-point", dest="bath_point", default=None)
    p.add_argument("--s-final", dest="s_final", type=float, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_thermo_first_law)
    p = th_sub.add_parser("fixed-bath")
    p.add_argument("--scenario", required=True)
    p.add_argument("--bath", default=None)
    p.add_argument("--s-sigma", dest="s_sigma", type=float, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_thermo_fixed_bath)

    br = sub.add_parser("bathrate", help="optimal bath rates")
    br_sub = br.add_subparsers(dest="subcommand")
    p = br_sub.add_parser("optimal")
    p.add_argument("--scenario", required=True)
    p.add_argument("--bath", default=None)
    p.add_argument(
        "--delta-sweep",
        dest="delta_sweep",
        default=None,
        help="k1:k2 sweeps delta over 10^-k (rebalances the work vector)",
    )
    p.add_argument("--csv", default=None)
    p.add_argument("--plot", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_bathrate_optimal)

    fin = sub.add_parser("finite", help="finite-n appendix machinery")
    fin_sub = fin.add_subparsers(dest="subcommand")
    p = fin_sub.add_parser("typical")
    p.add_argument("--factors", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--stats-only", dest="stats_only", action="store_true")
    _add_common(p)
    p.set_defaults(handler=_cmd_finite_typical)
    p = fin_sub.add_parser("trim")
    p.add_argument("--factors", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--support", choices=["full", "typical"], default="full")
    p.add_argument("--bins", type=int, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_finite_trim)
    p = fin_sub.add_parser("aet")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--charges", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--entropy-slack", dest="entropy_slack", type=float, default=1e-6)
    p.add_argument("--charge-slack", dest="charge_slack", type=float, default=1e-6)
    p.add_argument("--trend", default=None, help="comma-separated copy counts")
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_finite_aet)
    p = fin_sub.add_parser("amc")
    p.add_argument("--charges", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--eta-prime", dest="eta_prime", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--trials", type=int, default=200)
    _add_common(p)
    p.set_defaults(handler=_cmd_finite_amc)

    p = sub.add_parser("validate", help="schema-check an input document")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(handler=_cmd_validate)

    return root


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_usage(sys.stderr)
        return 2
    if getattr(args, "dim_cap", None) is not None:
        os.environ[config.DIM_CAP_ENV] = str(args.dim_cap)
    try:
        return handler(args)
    except CapacityError as exc:
        print(render_json({"error": str(exc), "kind": "capacity"}))
        return 3
    except (
        InfeasibleTargetError,
        InfeasibleScenarioError,
        UnboundedRateError,
        SamplingError,
    ) as exc:
        print(render_json({"error": str(exc), "kind": "infeasible"}))
        return 1
    except (ShapeError, InvalidStateError) as exc:
        print(render_json({"error": str(exc), "kind": "validation"}))
        return 2
    except ChargeDiagramError as exc:
        print(render_json({"error": str(exc), "kind": type(exc).__name__}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
