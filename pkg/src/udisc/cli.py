"""``udisc`` command line.

Exit codes: 0 success or PASS, 1 input error, 2 infeasible, 3 verification FAIL.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import closed_form, solver, symmetry
from .ensemble import EnsembleError, check_feasibility, signal_spaces
from .generate import KINDS, GenerationError, generate
from .io import (
    Instance,
    InstanceError,
    canonical_dumps,
    dump_instance,
    load_instance,
    load_solution,
    solution_report,
)
from .linalg import LinalgError
from .simulate import ProbabilityError, simulate

log = logging.getLogger("udisc")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_FAIL = 0, 1, 2, 3
METHODS = ("auto", "sdp", "orthogonal", "pair", "gu", "cgu")
INPUT_ERRORS = (InstanceError, EnsembleError, LinalgError, GenerationError, symmetry.GroupError, OSError)


class MethodError(ValueError):
    pass


def configure_logging() -> None:
    level = os.environ.get("UDISC_LOG", "off").lower()
    levels = {"off": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "off"
    logging.basicConfig(level=levels[level], format="%(name)s %(levelname)s %(message)s", stream=sys.stderr)
    logging.getLogger("udisc").setLevel(levels[level])


def auto_method(inst: Instance) -> str:
    """symmetry block, then rank-one pair, then orthogonal, else sdp."""
    if inst.symmetry is not None:
        return inst.symmetry.kind
    r = inst.ensemble().reduced()
    spaces = signal_spaces(r)
    if r.m == 2:
        try:
            closed_form.pair_geometry(r, spaces)
            return "pair"
        except closed_form.PreconditionError as exc:
            log.info("pair closed form not applicable: %s", exc)
    if closed_form.orthogonality_violation(spaces) is None:
        return "orthogonal"
    return "sdp"


def solve_instance(inst: Instance, method: str = "auto", gap_tol: float = 1e-8) -> solver.Solution:
    if method == "auto":
        method = auto_method(inst)
        log.info("auto routing chose %s", method)
    e = inst.ensemble()
    if method == "sdp":
        return solver.solve(e, gap_tol=gap_tol)
    if method == "orthogonal":
        return closed_form.solve_orthogonal(e)
    if method == "pair":
        return closed_form.solve_rank1_pair(e)
    if method in ("gu", "cgu"):
        sym = inst.symmetric()
        if sym is None:
            raise MethodError(f"method {method} needs a symmetry block in the instance")
        if method == "gu" and not isinstance(sym, symmetry.GUEnsemble):
            raise MethodError("method gu needs a symmetry block of kind gu")
        if isinstance(sym, symmetry.GUEnsemble):
            sol = symmetry.solve_gu(sym, gap_tol=gap_tol)
        else:
            sol = symmetry.solve_cgu(sym, gap_tol=gap_tol)
        sol.method = method
        # re-evaluate against the file's states rather than the regenerated orbit
        sol.measurement = solver.Measurement.assemble(e, sol.measurement.operators[1:])
        sol.certificate = solver.make_certificate(e, sol.measurement, sol.certificate.Z)
        return sol
    raise MethodError(f"unknown method {method!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    inst = load_instance(args.instance)
    rep = check_feasibility(inst.ensemble())
    print(f"dimension {rep.dim}, support dimension {rep.support_dim}")
    for i, (d, ok, eta) in enumerate(zip(rep.dims, rep.detectable, rep.max_etas), start=1):
        print(f"state {i}: dim S = {d}, detectable = {'yes' if ok else 'no'}, max eta = {eta:.12g}")
    if rep.overall:
        print("feasible: at least one state is unambiguously detectable")
        return EXIT_OK
    print("infeasible: no state is unambiguously detectable")
    return EXIT_INFEASIBLE


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    e = inst.ensemble()
    sol = solve_instance(inst, args.method, args.tol)
    report = solution_report(e, sol)
    _emit(canonical_dumps(report), args.out)
    log.info("method %s: P_D = %.12g, status %s", sol.method, sol.p_detect, sol.status)
    if not check_feasibility(e).overall:
        return EXIT_INFEASIBLE
    if sol.status != "Optimal":
        print(f"solver status {sol.status}, best gap {sol.gap:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    e = inst.ensemble()
    loaded = load_solution(args.solution, e)
    rep = solver.verify_optimality(e, loaded.measurement, loaded.Z, args.tol)
    for key in sorted(rep.residuals):
        print(f"{key} {rep.residuals[key]:.6e}")
    if rep.passed:
        print("PASS")
        return EXIT_OK
    print("FAIL: " + ", ".join(rep.failures))
    return EXIT_FAIL


def cmd_gen(args) -> int:
    inst = generate(args.kind, args.dim, args.states, args.ranks, args.seed, args.generators)
    _emit(dump_instance(inst), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    e = inst.ensemble()
    loaded = load_solution(args.solution, e)
    rep = solver.verify_optimality(e, loaded.measurement, loaded.Z)
    if not rep.passed and not args.force:
        print("solution does not verify (" + ", ".join(rep.failures) + "); use --force", file=sys.stderr)
        return EXIT_FAIL
    sim = simulate(e, loaded.measurement, args.shots, args.seed)
    _emit(canonical_dumps(sim.to_dict()), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="udisc", description="Optimal unambiguous discrimination of mixed states")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="report signal-space dimensions and detectability")
    c.add_argument("instance")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", help="compute an optimal measurement and dual certificate")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--tol", type=float, default=1e-8, help="SDP relative gap tolerance")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against the optimality conditions")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--tol", type=float, default=solver.CERT_TOL)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="generate a random feasible instance")
    g.add_argument("--kind", choices=KINDS, default="random")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--states", type=int, default=2)
    g.add_argument("--ranks", type=int, nargs="+")
    g.add_argument("--generators", type=int, default=2, help="generator count for --kind cgu")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("simulate", help="sample measurement outcomes")
    m.add_argument("instance")
    m.add_argument("solution")
    m.add_argument("--shots", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--force", action="store_true", help="simulate even if the solution does not verify")
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MethodError, closed_form.PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProbabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
