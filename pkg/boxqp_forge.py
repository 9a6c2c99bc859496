"""Command-line front end: gen, solve, verify, classify, eval.

Results are JSON documents on standard output (or ``-o FILE``); diagnostics
go to standard error. Exit codes: 0 success, 1 certificate rejected,
2 invalid input, 3 dimension cap or numerical failure.
"""
import argparse
import logging
import sys
from typing import List, Optional, Tuple

import numpy as np

from classify import classify, hints_from_forged
from config_manager import ConfigManager
from forge import (ForgeKind, InstanceForge, gen_exact_rlt, gen_exact_sdprlt, gen_exact_sdprlt_inexact_rlt,
                   gen_inexact_rlt, gen_inexact_sdprlt_family)
from instance_io import (FORMAT_VERSION, load_certificate, load_instance, save_instance,
                         save_report, write_document)
from oracle import check_first_order, solve_global, solve_grid
from qp_errors import BoxQpError, InvalidInputError
from qp_types import IndexPartition, LiftedPoint, eval_q
from rlt import ell_r, solve_rlt, verify_rlt_cert
from sdprlt import verify_sdprlt_cert

EXIT_OK = 0
EXIT_REJECTED = 1


def setup_logging(verbosity: int, log_file: Optional[str] = None, configured_level: str = "WARNING") -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(configured_level).upper(), logging.WARNING)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def parse_index_list(text: str, n: int) -> List[int]:
    """'1,3,4' -> [0, 2, 3]; empty text is the empty set."""
    text = text.strip()
    if not text:
        return []
    try:
        indices = [int(part) for part in text.split(",")]
    except ValueError as e:
        raise InvalidInputError(f"bad index list {text!r}", code="invalid_partition") from e
    for i in indices:
        if not 1 <= i <= n:
            raise InvalidInputError(f"index {i} outside 1..{n}", code="invalid_partition")
    return [i - 1 for i in indices]


def parse_partition(text: str, n: int) -> IndexPartition:
    """'L:B:U' with 1-based comma lists, e.g. '1,2:3:4'. U may be left empty to mean the rest."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise InvalidInputError(f"partition must look like L:B:U, got {text!r}", code="invalid_partition")
    L = parse_index_list(parts[0], n)
    B = parse_index_list(parts[1], n)
    if len(parts) == 3 and parts[2].strip():
        U = parse_index_list(parts[2], n)
        return IndexPartition(n, tuple(L), tuple(B), tuple(U))
    return IndexPartition.from_sets(n, L=L, B=B)


def parse_point(text: str, n: Optional[int] = None) -> np.ndarray:
    try:
        point = np.array([float(part) for part in text.split(",")])
    except ValueError as e:
        raise InvalidInputError(f"bad point {text!r}: expected comma-separated numbers") from e
    if n is not None and point.shape[0] != n:
        raise InvalidInputError(f"point has {point.shape[0]} coordinates, expected {n}",
                                code="dimension_mismatch")
    return point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxqp_forge",
        description='Generate box-constrained QP instances with known RLT / SDP-RLT exactness and check them')
    parser.add_argument('--config', default="boxqp_config.json",
                        help='Configuration file (.json, .yaml or .yml)')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='More logging on stderr (-v info, -vv debug)')
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate an instance")
    gen.add_argument('--kind', required=True, choices=[kind.value for kind in ForgeKind])
    gen.add_argument('--n', type=int, required=True, help='Dimension')
    gen.add_argument('--seed', type=int, default=0, help='Philox seed (64-bit unsigned)')
    gen.add_argument('--partition', help='L:B:U index sets, 1-based (exact-rlt uses L, inexact-rlt L and B)')
    gen.add_argument('--point', help='Designated point for the SDP-RLT kinds, comma-separated')
    gen.add_argument('--k', type=int, help='Fractional index k in B for inexact-rlt, 1-based')
    gen.add_argument('--preset', default="default", help='Forge preset from the configuration')
    gen.add_argument('--magnitude', type=float)
    gen.add_argument('--density', type=float)
    gen.add_argument('--strict-floor', type=float)
    gen.add_argument('--zero-psd-probability', type=float)
    gen.add_argument('-o', '--output', default="-", help='Output file (default stdout)')

    solve = sub.add_parser("solve", help="Solve the RLT relaxation and/or the QP")
    solve.add_argument('file', help='Instance file, - for stdin')
    solve.add_argument('--rlt', action='store_true', help='Exact RLT value by lattice scan')
    solve.add_argument('--global', dest='global_', action='store_true', help='Global value by face enumeration')
    solve.add_argument('--grid', type=int, metavar='K', help='Grid upper bound with K points per axis')
    solve.add_argument('-o', '--output', default="-")

    verify = sub.add_parser("verify", help="Verify an optimality certificate")
    verify.add_argument('file', help='Instance file')
    verify.add_argument('--cert', help='Certificate file; defaults to the one embedded in the instance')
    verify.add_argument('--kind', choices=["rlt", "sdprlt"], help='Which embedded certificate to check')
    verify.add_argument('-o', '--output', default="-")

    cls = sub.add_parser("classify", help="Exactness label E1-E4")
    cls.add_argument('file', help='Instance file')
    cls.add_argument('-o', '--output', default="-")

    ev = sub.add_parser("eval", help="Evaluate q and the RLT underestimator at a point")
    ev.add_argument('file', help='Instance file')
    ev.add_argument('--point', required=True, help='Comma-separated point in the box')
    ev.add_argument('-o', '--output', default="-")
    return parser


def cmd_gen(args, config: ConfigManager) -> int:
    n = args.n
    kind = ForgeKind(args.kind)
    if kind is ForgeKind.INEXACT_SDPRLT_FAMILY:
        forged = gen_inexact_sdprlt_family(n)
    else:
        spec = config.forge_spec(args.preset, args.seed, magnitude=args.magnitude,
                                 density=args.density, strict_floor=args.strict_floor,
                                 zero_psd_probability=args.zero_psd_probability)
        if kind is ForgeKind.EXACT_RLT:
            if args.partition:
                L = list(parse_partition(args.partition, n).L)
            else:
                L = InstanceForge(spec).random_subset(n)
            forged = gen_exact_rlt(n, L, spec)
        elif kind is ForgeKind.INEXACT_RLT:
            if args.partition:
                partition = parse_partition(args.partition, n)
            else:
                partition = IndexPartition.from_sets(n, B=range(n))
            k = None if args.k is None else args.k - 1
            forged = gen_inexact_rlt(n, partition.B, partition.L, k, spec)
        else:
            if args.point:
                point = parse_point(args.point, n)
            else:
                point = InstanceForge(spec).random_point(
                    n, require_fractional=kind is ForgeKind.EXACT_SDPRLT_INEXACT_RLT)
            if kind is ForgeKind.EXACT_SDPRLT:
                forged = gen_exact_sdprlt(n, point, spec)
            else:
                forged = gen_exact_sdprlt_inexact_rlt(n, point, spec)
    save_instance(args.output, forged)
    return EXIT_OK


def cmd_solve(args, config: ConfigManager) -> int:
    inst, _ = load_instance(args.file)
    workers = config.workers()
    run_rlt, run_global = args.rlt, args.global_
    if not (run_rlt or run_global or args.grid):
        run_rlt = run_global = True
    document = {"format_version": FORMAT_VERSION, "n": inst.n}
    if run_rlt:
        document["rlt"] = solve_rlt(inst, config.get_setting("rlt_dimension_cap", 12), workers).to_dict()
    if run_global:
        document["global"] = solve_global(
            inst,
            tol=config.get_setting("interior_margin", 1e-9),
            dimension_cap=config.get_setting("global_dimension_cap", 12),
            workers=workers,
            psd_tol=config.get_setting("psd_tol", 1e-8)).to_dict()
    if args.grid:
        document["grid"] = solve_grid(inst, args.grid, config.get_setting("grid_dimension_cap", 4),
                                      workers).to_dict()
    write_document(args.output, document)
    return EXIT_OK


def _embedded_certificate(forged, kind: Optional[str]) -> Tuple[str, object]:
    if forged is None:
        raise InvalidInputError("instance has no embedded certificate; pass --cert", code="missing_field")
    if kind in (None, "sdprlt") and forged.sdprlt_cert is not None:
        return "sdprlt", forged.sdprlt_cert
    if kind in (None, "rlt") and forged.rlt_cert is not None:
        return "rlt", forged.rlt_cert
    raise InvalidInputError(f"instance has no embedded {kind or 'rlt/sdprlt'} certificate",
                            code="missing_field")


def cmd_verify(args, config: ConfigManager) -> int:
    inst, forged = load_instance(args.file)
    point: Optional[LiftedPoint] = None
    if args.cert:
        kind, cert, point = load_certificate(args.cert)
        if args.kind and args.kind != kind:
            raise InvalidInputError(f"certificate file holds a {kind} certificate, not {args.kind}")
    else:
        kind, cert = _embedded_certificate(forged, args.kind)
    if point is None and forged is not None:
        point = forged.certified_point
        if point is None:
            point = LiftedPoint.rank_one(forged.designated_point)
    if point is None:
        raise InvalidInputError("no lifted point to verify against", code="missing_field")

    tol = config.get_setting("cert_tol", 1e-8)
    if kind == "rlt":
        report = verify_rlt_cert(inst, point, cert, tol)
    else:
        report = verify_sdprlt_cert(inst, point, cert, tol)
    document = {"format_version": FORMAT_VERSION}
    document.update(report.to_dict())
    write_document(args.output, document)
    return EXIT_OK if report.verified else EXIT_REJECTED


def cmd_classify(args, config: ConfigManager) -> int:
    inst, forged = load_instance(args.file)
    hints = hints_from_forged(forged) if forged is not None else None
    report = classify(inst, hints,
                      tol=config.get_setting("exactness_tol", 1e-7),
                      cert_tol=config.get_setting("cert_tol", 1e-8),
                      rlt_dimension_cap=config.get_setting("rlt_dimension_cap", 12),
                      global_dimension_cap=config.get_setting("global_dimension_cap", 12),
                      workers=config.workers())
    save_report(args.output, report)
    return EXIT_OK


def cmd_eval(args, config: ConfigManager) -> int:
    inst, _ = load_instance(args.file)
    point = parse_point(args.point, inst.n)
    tol = config.get_setting("partition_tol", 1e-9)
    ell = ell_r(inst, point, tol)
    q = eval_q(inst, np.clip(point, 0.0, 1.0))
    first_order = check_first_order(inst, point, config.get_setting("psd_tol", 1e-8))
    write_document(args.output, {
        "format_version": FORMAT_VERSION,
        "point": point.tolist(),
        "q": q,
        "ell_r": ell,
        "first_order": first_order.to_dict(),
    })
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "eval": cmd_eval,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = ConfigManager(args.config)
    setup_logging(args.verbose, config.get_setting("log_file"), config.get_setting("log_level", "WARNING"))
    try:
        return COMMANDS[args.command](args, config)
    except BoxQpError as e:
        logging.error(f"{args.command} failed: {e}")
        write_document("-", {"error": e.to_dict()})
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
