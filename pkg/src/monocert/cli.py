"""Command-line interface.

Exit codes:
    0   success (all certified / all rows valid / probe found a point)
    1   failure: invalid certificate rows, I/O or internal error
    2   campaign finished with undetermined assignments
    3   probe found no feasible point
    64  usage error
    65  malformed certificate file
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .errors import CampaignError, InvalidParameter, MonocertError, ParseError, SchemaError
from .oracle import search_feasible_point
from .pipeline import CampaignConfig, certify, report_summary, run_campaign, verify_file
from .solver import SolverConfig, solve_certificate
from .system import VertexAssignment, build_reduced_system
from .verifier import IntegerCertificate, verify_certificate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDETERMINED = 2
EXIT_NOT_FOUND = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_workers() -> int:
    env = os.environ.get("MONOCERT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"MONOCERT_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _assignment(text: str, V: int) -> VertexAssignment:
    try:
        return VertexAssignment.parse(text, V)
    except InvalidParameter as exc:
        raise UsageError(str(exc))


def _cmd_gen(args) -> int:
    if not 2 <= args.v <= 12:
        raise UsageError("--v must be between 2 and 12")
    workers = args.workers if args.workers is not None else _default_workers()
    cfg = CampaignConfig(
        V=args.v,
        output_path=args.out,
        workers=workers,
        checkpoint_interval=args.checkpoint_interval,
        solver=SolverConfig(seed=args.seed),
        limit=args.limit,
        resume=args.resume,
    )

    def progress(done, total):
        if args.progress:
            print(f"{done}/{total}", file=sys.stderr, flush=True)

    summary = run_campaign(cfg, progress)
    print(f"{summary.certified}/{summary.total} certified")
    print(summary)
    if summary.undetermined:
        print(f"undetermined assignments listed in {args.out}.undetermined")
        return EXIT_UNDETERMINED
    return EXIT_OK


def _cmd_verify(args) -> int:
    result = verify_file(args.input, args.v)
    for line, assignment, reason in result.invalid_rows:
        print(f"INVALID line {line} {assignment}: {reason}")
    print(result)
    if not result.ok:
        return EXIT_FAIL
    if args.complete and (result.missing or result.duplicates):
        print("file does not cover every assignment exactly once")
        return EXIT_FAIL
    return EXIT_OK


def _cmd_single(args) -> int:
    a = _assignment(args.assignment, args.v)
    if args.certificate is not None:
        try:
            cert = IntegerCertificate(a, tuple(int(x) for x in args.certificate.replace("-", ",").split(",")))
        except (ValueError, InvalidParameter) as exc:
            raise UsageError(f"malformed certificate: {exc}")
        report = verify_certificate(cert)
        if report.valid:
            print("VALID")
            return EXIT_OK
        print(f"INVALID: {report.reason}")
        return EXIT_FAIL
    cand = solve_certificate(build_reduced_system(a), SolverConfig(seed=args.seed))
    if not cand.certified:
        print("UNDETERMINED")
        return EXIT_UNDETERMINED
    cert, _ = certify(cand)
    print(cert)
    return EXIT_OK


def _cmd_probe(args) -> int:
    a = _assignment(args.assignment, args.v)
    if args.dim not in (1, 2, 3):
        raise UsageError("--dim must be 1, 2 or 3")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    point = search_feasible_point(a, args.dim, args.restarts, seed=args.seed)
    if point is None:
        print("NOT FOUND", file=sys.stderr)
        return EXIT_NOT_FOUND
    text = point.to_text()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_summary(args) -> int:
    sys.stdout.write(report_summary(args.input))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="monocert", description="Infeasibility certificates for mono-unstable 0-skeletons.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="run a campaign over all assignments")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--limit", type=int, help="only the first N assignments")
    p.add_argument("--checkpoint-interval", type=int, default=1000)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("verify", help="exactly re-verify a certificate file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--v", type=int)
    p.add_argument("--complete", action="store_true", help="fail unless every assignment is covered")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("single", help="solve or verify one system")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--certificate")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_single)

    p = sub.add_parser("probe", help="search for a solution of the shadow system")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("summary", help="report on a campaign output")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=_cmd_summary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"monocert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, SchemaError) as exc:
        print(f"monocert: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, CampaignError, MonocertError) as exc:
        print(f"monocert: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
