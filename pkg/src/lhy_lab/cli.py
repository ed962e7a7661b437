"""Command line entry point.

Subcommands: scatter, approx, bogo (dispersion | lhy), chi, params (check),
matloc, pipeline. Exit codes: 0 success, 1 validation failure, 2 numerical
failure (non-convergence), 64 usage error. All numeric CSV output carries 12
significant digits and is byte-identical across runs (fixed quadrature nodes,
fixed seeds). LHYLAB_THREADS caps the worker count for batch tables.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import approximation, bogoliubov, localization, matrixloc, params, potentials, scattering

USAGE_EXIT = 64
VALIDATION_EXIT = 1
NUMERICAL_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _fmt(x) -> str:
    return f"{x:.12g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) if isinstance(c, float) else c for c in row])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LHYLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- subcommand implementations ----------------------------------------------


def _cmd_scatter(args) -> int:
    v = potentials.load_potential(args.potential)
    sol = scattering.solve(v, r_max=args.rmax, tol=args.tol)
    print(f"a = {_fmt(sol.a)}")
    if args.emit_profile:
        g = scattering.g_of(v, sol)
        grid = sol.grid
        rows = zip(grid.tolist(), np.atleast_1d(sol.u_at(grid)).tolist(),
                   np.atleast_1d(sol.phi(grid)).tolist(),
                   np.atleast_1d(sol.omega(grid)).tolist(),
                   g.pointwise(grid).tolist())
        _write_csv(args.emit_profile, ["r", "u", "phi", "omega", "g"], rows)
    return 0


def _cmd_approx(args) -> int:
    v = potentials.load_potential(args.potential)
    v_T, cert = approximation.approximate(v, args.T, delta=args.delta)
    doc = cert.as_dict()
    doc["calR_vT"] = cert.integral_vT / (8.0 * math.pi * cert.a_original)
    print(f"a = {_fmt(cert.a_original)}  a_T = {_fmt(cert.a_approx)}  "
          f"integral_ok = {cert.integral_bound_ok}  length_ok = {cert.length_bound_ok}")
    if args.emit_cert:
        with open(args.emit_cert, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _ideal_w1_hat(a: float):
    def w1(k):
        return 8.0 * math.pi * a * np.sinc(np.asarray(k, dtype=float) * a / math.pi)
    return w1


def _cmd_bogo_dispersion(args) -> int:
    a, rho = args.a, args.rho
    if args.grid:
        with open(args.grid, newline="") as fh:
            ks = np.array([float(row[0]) for row in csv.reader(fh)
                           if row and not row[0].lstrip().startswith("#")])
    else:
        ks = np.linspace(0.0, 8.0 / a, 257)[1:]
    w1 = _ideal_w1_hat(a)
    rows = []
    for k in ks:
        B = rho * float(w1(k))
        A = k * k + B
        m = bogoliubov.ModeCoefficients(A, B)
        d = bogoliubov.dispersion(m)
        rows.append((float(k), A, B, d.D, d.alpha))
    if args.out:
        _write_csv(args.out, ["k", "A", "B", "D_k", "alpha_k"], rows)
    else:
        print("k,A,B,D_k,alpha_k")
        for row in rows:
            print(",".join(_fmt(c) for c in row))
    return 0


def _cmd_bogo_lhy(args) -> int:
    ra3_list = [float(x) for x in args.rho_a3.split(",") if x]
    a = args.a

    def one(ra3):
        rho = ra3 / a**3
        gi = bogoliubov.ground_state_integral(
            rho, a, _ideal_w1_hat(a),
            W1_hat_sq_integral=(8.0 * math.pi * a) ** 2 * math.pi / (2.0 * a))
        lead = 4.0 * math.pi * a * rho * rho
        return (ra3, lead, bogoliubov.lhy_energy(rho, a), gi.total, gi.rel_deviation)

    rows = _map_ordered(one, ra3_list)
    header = ["rho_a3", "e_leading", "e_LHY", "mode_integral", "rel_deviation"]
    if args.out:
        _write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(c) for c in row))
    return 0


def _cmd_chi(args) -> int:
    M = args.M
    lf = localization.LocalizationFunction(M)
    print(f"C_M = {_fmt(lf.C_M)}  log C_M = {_fmt(lf.log_C_M)}  n = {lf.n}")
    if args.emit_hat:
        ks = np.linspace(0.0, args.kmax, args.points)
        vals = localization.chi_hat_axis(ks, M)
        if M <= 16:
            c_chi = localization.chi_decay_constant(M)
            bounds = c_chi * (1.0 + ks**2) ** (-M / 2.0)
        else:
            bounds = np.full_like(ks, math.nan)
        rows = zip(ks.tolist(), vals.tolist(), bounds.tolist())
        _write_csv(args.emit_hat, ["k", "chi_hat", "decay_bound"], rows)
    return 0


def _cmd_params_check(args) -> int:
    kappa = Fraction(args.kappa)
    system = params.standard_system(kappa, cC=args.cC)
    report = params.check(system)
    doc = {
        "kappa": str(kappa),
        "m": str(system.m),
        "M": system.M,
        "passed": report.passed,
        "min_margin": str(report.min_margin),
        "relations": [
            {
                "group": r.relation.group,
                "kind": r.relation.kind,
                "lhs_exponent": None if r.lhs_exp is None else str(r.lhs_exp),
                "rhs_exponent": None if r.rhs_exp is None else str(r.rhs_exp),
                "margin": None if r.margin is None else str(r.margin),
                "passed": r.passed,
            }
            for r in report.results
        ],
    }
    if args.rho_a3 is not None:
        table = params.evaluate(system, args.rho_a3, a=args.a, R=args.R)
        doc["values"] = {k: (v if isinstance(v, int) else float(v))
                        for k, v in table.values.items()}
        doc["conditional_checks"] = [
            {"relation": name, "ratio": ratio, "passed": ok}
            for name, ratio, ok in table.conditional_checks
        ]
    if args.relations:
        with open(args.relations) as fh:
            user = params.parse_relations(fh.read())
        user_system = params.ParamSystem(
            kappa=system.kappa, m=system.m, M=system.M,
            quantities=system.quantities, relations=user, cC=system.cC)
        user_rep = params.check(user_system)
        doc["user_relations"] = [
            {"text": r.relation.text, "margin": None if r.margin is None else str(r.margin),
             "passed": r.passed}
            for r in user_rep.results
        ]
        report.passed = report.passed and user_rep.passed
    if args.min_margin is not None:
        floor = Fraction(args.min_margin)
        doc["min_margin_floor"] = str(floor)
        if report.min_margin is not None and report.min_margin < floor:
            doc["passed"] = False
            report.passed = False
    if args.emit_report:
        with open(args.emit_report, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(f"passed = {report.passed}  min_margin = {report.min_margin}  "
          f"(m = {system.m}, M = {system.M})")
    return 0 if report.passed else VALIDATION_EXIT


def _read_band_csv(path):
    bands = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            k, i = int(row[0]), int(row[1])
            val = float(row[2]) + (1j * float(row[3]) if len(row) > 3 else 0.0)
            bands.setdefault(k, {})[i] = val
    n = max(k + max(entries) + 1 for k, entries in bands.items())
    out = {}
    for k, entries in bands.items():
        arr = np.zeros(n - k, dtype=complex if any(np.iscomplex(v) for v in entries.values()) else float)
        for i, val in entries.items():
            arr[i] = val
        out[k] = arr.real if k == 0 else arr
    return matrixloc.BandedHermitian(n, out)


def _cmd_matloc(args) -> int:
    A = _read_band_csv(args.matrix)
    with open(args.psi, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    psi = np.array([float(r[0]) + (1j * float(r[1]) if len(r) > 1 else 0.0) for r in rows])
    psi = psi / np.linalg.norm(psi)
    res = matrixloc.localize(A, psi, args.mprime)
    print(f"energy = {_fmt(res.energy)}  lambda = {_fmt(res.lam)}  "
          f"window_start = {res.window_start}")
    if args.C is not None:
        bound = res.bound(args.C)
        ok = res.energy <= bound
        print(f"bound(C={_fmt(args.C)}) = {_fmt(bound)}  margin = {_fmt(bound - res.energy)}  "
              f"ok = {ok}")
        return 0 if ok else VALIDATION_EXIT
    return 0


def _cmd_pipeline(args) -> int:
    v = potentials.load_potential(args.potential)
    ra3_list = [float(x) for x in args.rho_a3.split(",") if x]
    eta1 = 1.0 / 4640.0  # (1/5) min(1/928, kappa/11) at kappa near 1/4
    T = args.T if args.T is not None else ra3_list[0] ** -(0.5 + eta1)
    v_T, cert = approximation.approximate(v, T, delta=args.delta)
    a, a_T = cert.a_original, cert.a_approx
    chain = {
        "T": T,
        "a": a,
        "a_vT": a_T,
        "relative_deficit": (a - a_T) / a,
        "deficit_bound": (1.0 + 2.0 * math.sqrt(5.0) / math.sqrt(T)) / T,
        "integral_vT_over_8pi_a": cert.integral_vT / (8.0 * math.pi * a),
        "certificate": cert.as_dict(),
    }
    if args.emit_cert:
        with open(args.emit_cert, "w") as fh:
            json.dump(chain, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"T = {_fmt(T)}  a = {_fmt(a)}  a_T = {_fmt(a_T)}  "
          f"deficit = {_fmt(chain['relative_deficit'])} <= {_fmt(chain['deficit_bound'])}: "
          f"{chain['relative_deficit'] <= chain['deficit_bound']}")

    def one(ra3):
        rho = ra3 / a_T**3
        gi = bogoliubov.ground_state_integral(
            rho, a_T, _ideal_w1_hat(a_T),
            W1_hat_sq_integral=(8.0 * math.pi * a_T) ** 2 * math.pi / (2.0 * a_T))
        return (ra3, 4.0 * math.pi * a_T * rho * rho,
                bogoliubov.lhy_energy(rho, a_T), gi.total, gi.rel_deviation)

    rows = _map_ordered(one, ra3_list)
    header = ["rho_a3", "e_leading", "e_LHY", "mode_integral", "rel_deviation"]
    if args.emit_table:
        _write_csv(args.emit_table, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(c) for c in row))
    return 0


# -- parser wiring -------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="lhy-lab",
                description="Scattering-length, approximation and dilute-gas "
                            "energy numerics")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("scatter", help="zero-energy scattering profile and length")
    s.add_argument("--potential", required=True, help="potential spec file")
    s.add_argument("--rmax", type=float, default=None)
    s.add_argument("--tol", type=float, default=scattering.DEFAULT_TOL)
    s.add_argument("--emit-profile", help="CSV: r,u,phi,omega,g")
    s.set_defaults(fn=_cmd_scatter)

    s = sub.add_parser("approx", help="low-integral approximation with certificate")
    s.add_argument("--potential", required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--emit-cert", help="JSON certificate path")
    s.set_defaults(fn=_cmd_approx)

    b = sub.add_parser("bogo", help="mode data and dilute-gas energies")
    bsub = b.add_subparsers(dest="bogo_cmd", required=True)
    s = bsub.add_parser("dispersion", help="emit k,A,B,D_k,alpha_k")
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--grid", help="CSV with one k per row")
    s.add_argument("--out", help="output CSV (stdout if omitted)")
    s.set_defaults(fn=_cmd_bogo_dispersion)
    s = bsub.add_parser("lhy", help="energy table over diluteness values")
    s.add_argument("--rho-a3", required=True, help="comma-separated list")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--out", help="output CSV (stdout if omitted)")
    s.set_defaults(fn=_cmd_bogo_lhy)

    s = sub.add_parser("chi", help="localization window diagnostics")
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--emit-hat", help="CSV: k,chi_hat,decay_bound")
    s.add_argument("--kmax", type=float, default=100.0)
    s.add_argument("--points", type=int, default=513)
    s.set_defaults(fn=_cmd_chi)

    pp = sub.add_parser("params", help="asymptotic parameter system")
    psub = pp.add_subparsers(dest="params_cmd", required=True)
    s = psub.add_parser("check", help="exact-rational relation margins")
    s.add_argument("--kappa", default="1/4", help="rational in (0, 1/4]")
    s.add_argument("--cC", type=float, default=1.0)
    s.add_argument("--rho-a3", type=float, default=None)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--R", type=float, default=None)
    s.add_argument("--relations", help="extra relations file (DSL)")
    s.add_argument("--min-margin", default=None, help="rational floor for margins")
    s.add_argument("--emit-report", help="JSON report path")
    s.set_defaults(fn=_cmd_params_check)

    s = sub.add_parser("matloc", help="banded matrix window localization")
    s.add_argument("--matrix", required=True, help="CSV rows: offset,index,re[,im]")
    s.add_argument("--psi", required=True, help="CSV rows: re[,im]")
    s.add_argument("--mprime", type=int, required=True)
    s.add_argument("--C", type=float, default=None)
    s.set_defaults(fn=_cmd_matloc)

    s = sub.add_parser("pipeline", help="approximate, certify, tabulate energies")
    s.add_argument("--potential", required=True)
    s.add_argument("--T", type=float, default=None,
                   help="default (rho_a3)^-(1/2 + 1/4640) at the first rho_a3")
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--rho-a3", required=True, help="comma-separated list")
    s.add_argument("--emit-cert", help="JSON chained certificate")
    s.add_argument("--emit-table", help="CSV energy table")
    s.set_defaults(fn=_cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_EXIT
    try:
        return args.fn(args)
    except (potentials.PotentialSpecError, params.DSLSyntaxError, ValueError,
            KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT
    except (scattering.SolverError, approximation.ApproximationError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
