"""Command-line entry point.

Exit codes: 0 all checks pass, 1 audit/DMP failure, 2 usage or configuration
error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import assemble, write_load_vector, write_matrix_market
from .audit import ANGLE_MODES, audit
from .errors import ParameterError, SolverError
from .fileio import write_angles_csv, write_json, write_off, write_solution_csv, write_table_csv
from .mesh import angle_stats, generate_hemisphere, generate_semitorus, mesh_regularity, refine
from .problems import PROBLEM_NAMES, catalog
from .solver import INITIAL_GUESSES, SUBSOLVERS, SolveOptions, picard_solve

log = logging.getLogger("sfemdmp")

EXIT_OK, EXIT_AUDIT, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
MAX_DEMO_LEVEL = 6

DEMOS = {
    "radiative-cooling": {"surface": "hemisphere", "problem": "radiative-cooling", "audit_mode": "acute"},
    # undamped Picard oscillates for p = 4; half steps converge in ~30 iterations
    "p-laplacian": {"surface": "semitorus", "problem": "p-laplacian", "audit_mode": "nonobtuse", "damping": 0.5},
}

SWEEP_HEADER = [
    "level", "V", "F", "h", "min_angle", "max_angle", "sigma0_estimate",
    "sign_ok", "rowsum_ok", "spd_ok", "dmp_ok",
]

# config-file keys and the argparse destinations they fill
CONFIG_KEYS = {
    "name": "problem", "problem": "problem", "surface": "surface", "sigma": "sigma", "p": "p",
    "epsilon_reg": "eps_reg", "eps_reg": "eps_reg", "r_major": "R", "R": "R", "r_minor": "r", "r": "r",
    "n_major": "n_major", "n_minor": "n_minor", "levels": "levels", "level": "levels",
    "damping": "damping", "picard_tol": "picard_tol", "max_picard": "max_picard",
    "subsolver": "subsolver", "init": "init", "audit_mode": "audit_mode", "out_dir": "out_dir",
}


class UsageError(Exception):
    pass


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file with defaults for the flags below")
    common.add_argument("--surface", choices=["hemisphere", "semitorus"])
    common.add_argument("--levels", type=int, help="refinement level (sweep: highest level)")
    common.add_argument("--R", type=float, help="semi-torus major radius (default 5)")
    common.add_argument("--r", type=float, help="semi-torus minor radius (default 2)")
    common.add_argument("--n-major", type=int, help="semi-torus vertex rings (default 9)")
    common.add_argument("--n-minor", type=int, help="vertices per ring (default 4)")
    common.add_argument("--problem", choices=[n for n in PROBLEM_NAMES if n in ("radiative-cooling", "p-laplacian")])
    common.add_argument("--sigma", type=float, help="radiation constant (default 1)")
    common.add_argument("--p", type=float, help="p-Laplacian exponent (default 4)")
    common.add_argument("--eps-reg", type=float, help="p-Laplacian regularization (default 1e-8)")
    common.add_argument("--damping", type=float)
    common.add_argument("--picard-tol", type=float)
    common.add_argument("--max-picard", type=int)
    common.add_argument("--subsolver", choices=SUBSOLVERS)
    common.add_argument("--init", choices=INITIAL_GUESSES, help="Picard starting guess")
    common.add_argument("--out-dir", type=Path)
    common.add_argument("--deterministic", action="store_true", help="omit timings so outputs are byte-stable")
    common.add_argument("--audit-mode", choices=ANGLE_MODES)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="sfemdmp", description="Surface FEM solver with DMP audit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mesh", parents=[common], help="generate a mesh, write mesh.off and angles.csv")
    solve = sub.add_parser("solve", parents=[common], help="solve and write solution.csv")
    solve.add_argument("--export-matrix", action="store_true", help="also write matrix.mtx and load.csv")
    sub.add_parser("audit", parents=[common], help="solve, audit, write audit.json")
    sweep = sub.add_parser("sweep", parents=[common], help="per-level mesh and audit table")
    sweep.add_argument("--from-level", type=int, default=0)
    demo = sub.add_parser("demo", parents=[common], help="reproduce one of the two experiments")
    demo.add_argument("name", choices=sorted(DEMOS))
    return parser


def _apply_config(args):
    if args.config is None:
        return
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + args.config.read_text())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for key, raw in cp["run"].items():
        dest = CONFIG_KEYS.get(key)
        if dest is None:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest, None) is not None:
            continue  # command-line flags win
        value = raw.strip()
        try:
            if dest in ("levels", "n_major", "n_minor", "max_picard"):
                value = int(value)
            elif dest in ("sigma", "p", "eps_reg", "R", "r", "damping", "picard_tol"):
                value = float(value)
            elif dest == "out_dir":
                value = Path(value)
        except ValueError:
            raise UsageError(f"config key {key!r}: bad value {raw!r}") from None
        setattr(args, dest, value)


def _fill_defaults(args):
    if args.command == "demo":
        for key, value in DEMOS[args.name].items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    defaults = dict(
        surface="hemisphere", levels=2, R=5.0, r=2.0, n_major=9, n_minor=4, sigma=1.0, p=4.0,
        eps_reg=1e-8, damping=1.0, picard_tol=1e-10, max_picard=200, subsolver="cg", init="zero",
        out_dir=Path("."), audit_mode="acute",
    )
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if args.problem is None:
        args.problem = "radiative-cooling" if args.surface == "hemisphere" else "p-laplacian"
    if args.levels < 0:
        raise UsageError("--levels must be nonnegative")
    if args.command == "demo" and args.levels > MAX_DEMO_LEVEL:
        raise UsageError(f"demo levels must not exceed {MAX_DEMO_LEVEL}")


def _make_mesh(args, level):
    if args.surface == "hemisphere":
        return generate_hemisphere(level)
    mesh = generate_semitorus(args.R, args.r, args.n_major, args.n_minor)
    for _ in range(level):
        mesh = refine(mesh)
    return mesh


def _make_problem(args):
    if args.problem == "radiative-cooling":
        return catalog("radiative-cooling", sigma=args.sigma)
    return catalog("p-laplacian", p=args.p, epsilon_reg=args.eps_reg)


def _options(args):
    return SolveOptions(
        max_picard=args.max_picard, picard_tol=args.picard_tol, damping=args.damping,
        subsolver=args.subsolver, initial_guess=args.init,
    )


def _solve(args, mesh, problem):
    start = time.perf_counter()
    u, report = picard_solve(mesh, problem, _options(args))
    data = report.to_dict()
    data["max_fhat"] = _max_fhat(mesh, problem)
    if not args.deterministic:
        data["seconds"] = time.perf_counter() - start
    if not report.converged:
        raise SolverError(f"Picard did not converge in {report.iterations} steps "
                          f"(increment {report.final_increment:.3e})", report.iterations)
    return u, report, data


def _max_fhat(mesh, problem):
    p = mesh.vertices[mesh.triangles]
    mids = 0.5 * (p + np.roll(p, -1, axis=1))
    return float(np.max(problem.fhat(mids.reshape(-1, 3))))


def _summary(mesh):
    stats = angle_stats(mesh)
    m1, m2 = mesh_regularity(mesh)
    return (f"{mesh.surface_tag}: V={mesh.n_vertices} F={mesh.n_triangles} "
            f"interior={mesh.n_interior} h={mesh.h:.4g} angles=[{stats.min_angle:.2f}, {stats.max_angle:.2f}] "
            f"area/h^2=[{m1:.3g}, {m2:.3g}]")


def cmd_mesh(args):
    mesh = _make_mesh(args, args.levels)
    out = args.out_dir
    write_off(out / "mesh.off", mesh)
    write_angles_csv(out / "angles.csv", mesh)
    print(_summary(mesh))
    return EXIT_OK


def cmd_solve(args):
    mesh = _make_mesh(args, args.levels)
    problem = _make_problem(args)
    u, report, data = _solve(args, mesh, problem)
    out = args.out_dir
    write_solution_csv(out / "solution.csv", mesh, u)
    write_json(out / "solve_report.json", data)
    if args.export_matrix:
        A_bar, d = assemble(mesh, problem, u)
        write_matrix_market(out / "matrix.mtx", A_bar)
        write_load_vector(out / "load.csv", d)
    print(f"converged in {report.iterations} Picard steps; u in [{u.min():.10g}, {u.max():.10g}]")
    return EXIT_OK


def _audit_run(args, mesh, problem):
    u, report, data = _solve(args, mesh, problem)
    A_bar, _ = assemble(mesh, problem, u)
    return u, data, audit(mesh, problem, u, A_bar, args.audit_mode)


def cmd_audit(args):
    mesh = _make_mesh(args, args.levels)
    problem = _make_problem(args)
    u, data, report = _audit_run(args, mesh, problem)
    out = args.out_dir
    write_solution_csv(out / "solution.csv", mesh, u)
    write_json(out / "solve_report.json", data)
    (out / "audit.json").write_text(report.to_json() + "\n")
    _print_audit(report)
    return EXIT_OK if report.passed else EXIT_AUDIT


def _print_audit(report):
    a, m = report.angles, report.matrix
    print(f"angles ({a.mode}): {'pass' if a.passed else 'FAIL'} "
          f"({a.n_violations} violations, sigma0 estimate {a.sigma0_estimate:.4g})")
    print(f"sign pattern: {'pass' if m.sign_passed else 'FAIL'} ({m.n_sign_violations} positive off-diagonals)")
    print(f"row sums: {'pass' if m.row_sum_passed else 'FAIL'} (min {m.row_sum_min:.4g})")
    print(f"positive definite: {'pass' if m.spd else 'FAIL'}")
    for c in report.dmp:
        print(f"dmp {c.variant}: {'pass' if c.passed else 'FAIL'} (value {c.value:.12g}, bound {c.bound:.12g})")
    print(f"dmp verdict: {report.dmp_verdict}")


def cmd_sweep(args):
    if not 0 <= args.from_level <= args.levels:
        raise UsageError("need 0 <= --from-level <= --levels")
    problem = _make_problem(args)
    rows = []
    for level in range(args.from_level, args.levels + 1):
        mesh = _make_mesh(args, level)
        stats = angle_stats(mesh)
        _, _, report = _audit_run(args, mesh, problem)
        m = report.matrix
        rows.append([
            level, mesh.n_vertices, mesh.n_triangles, float(mesh.h), stats.min_angle, stats.max_angle,
            float(report.angles.sigma0_estimate), int(m.sign_passed), int(m.row_sum_passed), int(m.spd),
            int(report.dmp_verdict != "fail"),
        ])
        print(f"level {level}: {_summary(mesh)}; sign_ok={int(m.sign_passed)} dmp={report.dmp_verdict}")
    write_table_csv(args.out_dir / "sweep.csv", SWEEP_HEADER, rows)
    return EXIT_OK if all(r[7] and r[8] and r[9] and r[10] for r in rows) else EXIT_AUDIT


def cmd_demo(args):
    mesh = _make_mesh(args, args.levels)
    problem = _make_problem(args)
    print(_summary(mesh))
    u, data, report = _audit_run(args, mesh, problem)
    out = args.out_dir
    write_off(out / "mesh.off", mesh)
    write_angles_csv(out / "angles.csv", mesh)
    write_solution_csv(out / "solution.csv", mesh, u)
    write_json(out / "solve_report.json", data)
    (out / "audit.json").write_text(report.to_json() + "\n")
    _print_audit(report)
    g = u[mesh.n_interior :]
    if args.name == "radiative-cooling":
        verdict = report.dmp_verdict != "fail"
        print(f"maximum principle: {'holds' if verdict else 'VIOLATED'}: "
              f"max u = {u.max():.12g} <= max(0, max g) = {max(0.0, g.max()):.12g}, min u = {u.min():.12g} >= 0")
    else:
        verdict = report.dmp_verdict == "strict-pass"
        print(f"range coincidence: {'holds' if verdict else 'VIOLATED'}: "
              f"[{u.min():.12g}, {u.max():.12g}] vs [{g.min():.12g}, {g.max():.12g}]")
    hypotheses = report.angles.passed and report.matrix.sign_passed and report.matrix.row_sum_passed and report.matrix.spd
    if not hypotheses:
        print("note: mesh/matrix hypotheses are not all met on this mesh (see audit.json)")
    # the demo's verdict is the conclusion; hypothesis failures are reported, not fatal
    return EXIT_OK if verdict else EXIT_AUDIT


COMMANDS = {"mesh": cmd_mesh, "solve": cmd_solve, "audit": cmd_audit, "sweep": cmd_sweep, "demo": cmd_demo}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    stage = "config"
    try:
        _apply_config(args)
        _fill_defaults(args)
        args.out_dir.mkdir(parents=True, exist_ok=True)
        stage = args.command
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"sfemdmp [{stage}]: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"sfemdmp [{stage}]: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
