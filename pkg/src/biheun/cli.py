"""Command-line interface.

Usage:
    biheun bch-eval --gamma 2 --delta 1 --epsilon 0 --alpha 0 --q 2 --z 0.5
    biheun spectrum isr --v0 -1 --n 1..3 --bc quasipoly
    biheun spectrum rwe --d 8 --n 1..4 --bc dirichlet
    biheun oracle --potential isr --v0 -1 --n-max 3
    biheun reduce --family -1 --v1 -1 --energy -0.5
    biheun potential scalar --v -0.375 --branch plus

Reports go to stdout as JSON (sorted keys, no timestamps) or, with
``--format csv``, as a flat table. Exit codes: 0 ok, 2 bad input,
3 numerical failure, 4 solver configuration.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from scipy import constants

from . import __version__
from .bch import BchParams, bch_coefficients, bch_eval, quasipoly_q_values
from .errors import (
    ConvergenceError,
    DomainError,
    EvaluationError,
    ParameterError,
    ReductionError,
    SolverConfigError,
)
from .oracle import (
    SolverConfig,
    harmonic_potential,
    isr_config,
    isr_potential,
    solve_eigenstates,
)
from .potentials import (
    NATURAL,
    PotentialSpec,
    UnitSystem,
    coordinate_transform,
    inverse_transform,
    isr_length_from_strength,
    isr_scalar_potentials,
    potential_eval,
    potential_from_scalar,
    scalar_potential,
    vector_potential_sq,
)
from .reduction import (
    BranchPolicy,
    assemble_wavefunction,
    default_grid,
    ode_residual,
    reduce_to_bch,
)
from .spectra import (
    BoundaryCondition,
    ground_state_index,
    isr_energy,
    rwe_isr_spectrum,
    schrodinger_to_rwe,
)

SCHEMA_VERSION = "biheun.report/1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_SOLVER = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def parse_range(text):
    """'a..b' (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy 1 <= A <= B")
    return list(range(lo, hi + 1))


def finite_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def units_from_args(args):
    if args.units == "natural":
        overrides = {k: getattr(args, k) for k in ("hbar", "mass", "c") if getattr(args, k) is not None}
        if args.charge is not None:
            overrides["q0"] = args.charge
        return UnitSystem(**overrides)
    return UnitSystem(
        hbar=args.hbar if args.hbar is not None else constants.hbar,
        mass=args.mass if args.mass is not None else constants.m_e,
        c=args.c if args.c is not None else constants.c,
        q0=args.charge if args.charge is not None else constants.e,
    )


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("units and output")
    g.add_argument("--units", choices=("natural", "si"), default="natural")
    g.add_argument("--hbar", type=finite_float)
    g.add_argument("--mass", type=finite_float)
    g.add_argument("--c", type=finite_float)
    g.add_argument("--charge", type=finite_float)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", type=Path, help="also write the report to this file")
    return common


def _add_bc(p):
    p.add_argument("--bc", choices=("quasipoly", "dirichlet", "custom"), default="quasipoly")
    p.add_argument("--maslov", type=finite_float, help="Maslov index for --bc custom")


def _add_spec(p):
    p.add_argument("--family", required=True, help="m1: -1, -1/2, 0, 1/2 or 1")
    for i in range(5):
        p.add_argument(f"--v{i}", type=finite_float, default=0.0)
    p.add_argument("--x0", type=finite_float, default=0.0)


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="biheun", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bch-eval", parents=[common], help="evaluate H_B and its derivative")
    p.add_argument("--gamma", type=finite_float, required=True)
    p.add_argument("--delta", type=finite_float, default=0.0)
    p.add_argument("--epsilon", type=finite_float, default=0.0)
    p.add_argument("--alpha", type=finite_float, default=0.0)
    p.add_argument("--q", type=finite_float, default=0.0)
    p.add_argument("--z", type=finite_float, required=True)
    p.add_argument("--rel-tol", type=finite_float, default=1e-12)
    p.add_argument("--max-terms", type=int, default=10000)
    p.add_argument("--coefficients", type=int, default=0, help="also list this many c_k")
    p.set_defaults(handler=cmd_bch_eval)

    p = sub.add_parser("bch-quasipoly", parents=[common], help="q values closing the series")
    p.add_argument("--gamma", type=finite_float, required=True)
    p.add_argument("--delta", type=finite_float, default=0.0)
    p.add_argument("--epsilon", type=finite_float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_bch_quasipoly)

    p = sub.add_parser("spectrum", help="closed-form spectra")
    spec_sub = p.add_subparsers(dest="kind", required=True)
    s = spec_sub.add_parser("isr", parents=[common], help="Schrödinger levels of V0/sqrt(x)")
    s.add_argument("--v0", type=finite_float, required=True)
    s.add_argument("--n", type=parse_range, default=[1])
    _add_bc(s)
    s.set_defaults(handler=cmd_spectrum_isr)
    s = spec_sub.add_parser("rwe", parents=[common], help="relativistic levels for length d")
    s.add_argument("--d", type=finite_float, required=True)
    s.add_argument("--n", type=parse_range, default=[1])
    _add_bc(s)
    s.set_defaults(handler=cmd_spectrum_rwe)

    p = sub.add_parser("oracle", parents=[common], help="Numerov shooting spectrum")
    p.add_argument("--potential", choices=("isr", "harmonic"), default="isr")
    p.add_argument("--v0", type=finite_float, default=-1.0)
    p.add_argument("--omega", type=finite_float, default=1.0)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--x-max", type=finite_float)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--tol", type=finite_float, default=1e-8)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("reduce", parents=[common], help="map a potential onto the BCH equation")
    _add_spec(p)
    p.add_argument("--energy", type=finite_float, required=True)
    p.add_argument("--gamma-root", choices=("plus", "minus"), default="plus")
    p.add_argument("--growing", action="store_true", help="take the growing exponential branch")
    p.add_argument("--grid-lo", type=finite_float, default=0.05)
    p.add_argument("--grid-hi", type=finite_float, default=5.0)
    p.add_argument("--grid-points", type=int, default=200)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("potential", help="potentials and relativistic couplings")
    pot = p.add_subparsers(dest="kind", required=True)
    s = pot.add_parser("eval", parents=[common], help="V(x) for a family member")
    _add_spec(s)
    s.add_argument("--x", type=finite_float, required=True)
    s.set_defaults(handler=cmd_potential_eval)
    s = pot.add_parser("transform", parents=[common], help="z(x) or, with --inverse, x(z)")
    s.add_argument("--family", required=True)
    s.add_argument("--x", type=finite_float, required=True)
    s.add_argument("--inverse", action="store_true")
    s.set_defaults(handler=cmd_potential_transform)
    s = pot.add_parser("scalar", parents=[common], help="q0*phi from V and q0^2 A^2")
    s.add_argument("--v", type=finite_float, required=True)
    s.add_argument("--a2", type=finite_float, default=0.0)
    s.add_argument("--branch", choices=("plus", "minus"), default="plus")
    s.set_defaults(handler=cmd_potential_scalar)
    s = pot.add_parser("vector", parents=[common], help="q0^2 A^2 for a pure vector coupling")
    s.add_argument("--v", type=finite_float, required=True)
    s.set_defaults(handler=cmd_potential_vector)
    s = pot.add_parser("from-scalar", parents=[common], help="V from q0*phi and q0^2 A^2")
    s.add_argument("--phi", type=finite_float, required=True)
    s.add_argument("--a2", type=finite_float, default=0.0)
    s.set_defaults(handler=cmd_potential_from_scalar)
    s = pot.add_parser("isr-scalar", parents=[common], help="scalar potentials of V0/sqrt(x)")
    s.add_argument("--x", type=finite_float, required=True)
    s.add_argument("--d", type=finite_float, required=True)
    s.add_argument("--branch", choices=("plus", "minus"), default="plus")
    s.set_defaults(handler=cmd_potential_isr_scalar)
    return parser


def _bc(args):
    return BoundaryCondition.parse(args.bc, args.maslov)


def _spec(args):
    return PotentialSpec(args.family, (args.v0, args.v1, args.v2, args.v3, args.v4), args.x0)


def cmd_bch_eval(args, units):
    params = BchParams(args.gamma, args.delta, args.epsilon, args.alpha, args.q)
    res = bch_eval(params, args.z, args.rel_tol, args.max_terms)
    results = {"value": res.value, "derivative": res.derivative, "terms": res.terms}
    if args.coefficients > 0:
        results["coefficients"] = bch_coefficients(params, args.coefficients)
    meta = {"rel_tol": args.rel_tol, "max_terms": args.max_terms,
            "arbitrary_precision": res.arbitrary_precision}
    return {"params": params.as_dict(), "z": args.z}, results, meta


def cmd_bch_quasipoly(args, units):
    qs = quasipoly_q_values(args.gamma, args.delta, args.epsilon, args.n)
    inputs = {"gamma": args.gamma, "delta": args.delta, "epsilon": args.epsilon, "n": args.n}
    return inputs, {"alpha": -args.epsilon * args.n, "q_values": qs}, {}


def _rwe_record(entry, units):
    rec = entry.as_dict()
    rec["W_over_mc2"] = None if entry.forbidden else entry.W_n / units.rest_energy
    return rec


def cmd_spectrum_isr(args, units):
    bc = _bc(args)
    records = []
    for n in args.n:
        e = isr_energy(n, args.v0, units, bc)
        try:
            w = schrodinger_to_rwe(e, units)
            forbidden = w == 0
        except DomainError:
            w, forbidden = None, True
        records.append({
            "n": n, "E_n": e, "W_n": None if forbidden else w,
            "W_over_mc2": None if forbidden else w / units.rest_energy,
            "forbidden": forbidden, "bc": bc.kind,
        })
    lam_d = units.lambda_bar / isr_length_from_strength(units, args.v0)
    inputs = {"v0": args.v0, "n": [args.n[0], args.n[-1]], "bc": bc.kind,
              "maslov_index": bc.maslov_index}
    return inputs, {"entries": records, "lambda_over_d": lam_d,
                    "n0": ground_state_index(lam_d, bc)}, {}


def cmd_spectrum_rwe(args, units):
    bc = _bc(args)
    records = [_rwe_record(rwe_isr_spectrum(n, args.d, units, bc), units) for n in args.n]
    lam_d = units.lambda_bar / args.d
    inputs = {"d": args.d, "n": [args.n[0], args.n[-1]], "bc": bc.kind,
              "maslov_index": bc.maslov_index}
    return inputs, {"entries": records, "lambda_over_d": lam_d,
                    "n0": ground_state_index(lam_d, bc)}, {}


def cmd_oracle(args, units):
    if args.n_max < 1:
        raise ParameterError("--n-max must be >= 1")
    if args.potential == "isr":
        V = isr_potential(args.v0)
        config = isr_config(args.v0, args.n_max, units, bisection_tol=args.tol)
        reference = [isr_energy(n, args.v0, units, BoundaryCondition("dirichlet"))
                     for n in range(1, args.n_max + 1)]
        ref_name = "maslov_closed_form"
    else:
        V = harmonic_potential(args.omega, units.mass)
        reference = [units.hbar * args.omega * (n - 0.5) for n in range(1, args.n_max + 1)]
        # 2.5 times the turning point of a level four above n_max
        length = math.sqrt(units.hbar / (units.mass * args.omega))
        half = 2.5 * length * math.sqrt(2 * args.n_max + 8)
        points = max(8001, int(math.ceil(2 * half / (0.0025 * length))) + 1)
        config = SolverConfig(half, points, (0.0, reference[-1] + units.hbar * args.omega),
                              args.tol, x_min=-half)
        ref_name = "analytic"
    overrides = {}
    if args.x_max is not None:
        overrides["x_max"] = args.x_max
    if args.grid_points is not None:
        overrides["grid_points"] = args.grid_points
    if overrides:
        config = SolverConfig(**{**config.__dict__, **overrides})
    states = solve_eigenstates(V, args.n_max, config, units)
    records = [{
        "n": s.n, "energy": s.energy, "nodes": s.nodes, "reference": ref,
        "relative_deviation": (s.energy - ref) / abs(ref) if ref else None,
    } for s, ref in zip(states, reference)]
    inputs = {"potential": args.potential, "v0": args.v0, "omega": args.omega, "n_max": args.n_max}
    meta = {"solver": {"x_min": config.x_min, "x_max": config.x_max,
                       "grid_points": config.grid_points,
                       "energy_bracket": list(config.energy_bracket),
                       "bisection_tol": config.bisection_tol},
            "reference": ref_name}
    return inputs, {"levels": records}, meta


def cmd_reduce(args, units):
    spec = _spec(args)
    policy = BranchPolicy(args.gamma_root, not args.growing)
    params, ansatz = reduce_to_bch(spec, args.energy, units, policy)
    psi = assemble_wavefunction(params, ansatz, spec, args.energy, units)
    grid = default_grid(spec, args.grid_points, args.grid_lo, args.grid_hi)
    residual = ode_residual(psi, spec, args.energy, units, grid)
    inputs = {"spec": spec.as_dict(), "energy": args.energy,
              "gamma_root": args.gamma_root, "decaying": not args.growing}
    results = {"bch": params.as_dict(), "ansatz": ansatz.as_dict(), "residual": residual}
    meta = {"grid": {"lo": args.grid_lo, "hi": args.grid_hi, "points": args.grid_points}}
    return inputs, results, meta


def cmd_potential_eval(args, units):
    spec = _spec(args)
    return {"spec": spec.as_dict(), "x": args.x}, {"V": potential_eval(spec, args.x)}, {}


def cmd_potential_transform(args, units):
    if args.inverse:
        return ({"family": args.family, "z": args.x},
                {"x": inverse_transform(args.family, args.x)}, {})
    return {"family": args.family, "x": args.x}, {"z": coordinate_transform(args.family, args.x)}, {}


def cmd_potential_scalar(args, units):
    phi = scalar_potential(args.v, args.a2, args.branch, units)
    return ({"V": args.v, "A2": args.a2, "branch": args.branch},
            {"phi_times_q0": phi, "phi_over_mc2": phi / units.rest_energy}, {})


def cmd_potential_vector(args, units):
    return {"V": args.v}, {"A2_times_q0sq": vector_potential_sq(args.v, units)}, {}


def cmd_potential_from_scalar(args, units):
    return ({"phi_times_q0": args.phi, "A2": args.a2},
            {"V": potential_from_scalar(args.phi, args.a2, units)}, {})


def cmd_potential_isr_scalar(args, units):
    phi = isr_scalar_potentials(args.x, args.d, args.branch, units)
    return ({"x": args.x, "d": args.d, "branch": args.branch},
            {"phi_times_q0": phi, "phi_over_mc2": phi / units.rest_energy}, {})


def _command_name(args):
    kind = getattr(args, "kind", None)
    return f"{args.command} {kind}" if kind else args.command


def make_report(command, inputs, units, results, metadata, error=None):
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "units": units.as_dict() if units else None,
        "results": results,
        "metadata": metadata,
    }
    if error is not None:
        report["error"] = error
    return report


def render_json(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], out)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, out)
    elif isinstance(value, list):
        out[prefix] = " ".join(repr(v) for v in value)
    else:
        out[prefix] = "" if value is None else value


def render_csv(report):
    """Tables of records become one row per record; anything else key,value rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    results = report.get("results") or {}
    table = next((v for k, v in sorted(results.items())
                  if isinstance(v, list) and v and isinstance(v[0], dict)), None)
    if table is not None and "error" not in report:
        header = sorted(table[0])
        writer.writerow(header)
        for rec in table:
            writer.writerow(["" if rec.get(h) is None else rec.get(h) for h in header])
    else:
        flat = {}
        _flatten("", {"results": results, "error": report.get("error")}, flat)
        writer.writerow(["key", "value"])
        for key, value in flat.items():
            writer.writerow([key, value])
    return buf.getvalue()


def _classify(exc):
    if isinstance(exc, SolverConfigError):
        return EXIT_SOLVER
    if isinstance(exc, (ConvergenceError, EvaluationError, ArithmeticError)):
        return EXIT_NUMERIC
    if isinstance(exc, (ParameterError, DomainError, ReductionError, ValueError)):
        return EXIT_INPUT
    return None


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    command = _command_name(args)
    units = None
    try:
        units = units_from_args(args)
        inputs, results, meta = args.handler(args, units)
        report = make_report(command, inputs, units, results, meta)
        code = EXIT_OK
    except Exception as exc:
        code = _classify(exc)
        if code is None:
            raise
        print(f"biheun {command}: {type(exc).__name__}: {exc}", file=stderr)
        error = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
        report = make_report(command, None, units, None, None, error)

    text = render_json(report) if args.format == "json" else render_csv(report)
    stdout.write(text)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    return code


def run():
    sys.exit(main())
