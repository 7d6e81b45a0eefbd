"""Campaigns over all assignments for a vertex count, and certificate files.

Certificate file (CSV, one header line)::

    V,assignment,certificate
    10,1-2-3-4-5-6-7-8-9,1-4-7-8-8-7-5-4-2

Assignments without a certificate go to ``<output>.undetermined`` (one
dash-joined assignment per line); progress is checkpointed in
``<output>.ckpt``. Rows are always in lexicographic assignment order.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import multiprocessing
import os
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .errors import CampaignError, InvalidParameter, ParseError, RoundingFailure, SchemaError
from .solver import CertificateCandidate, SolverConfig, solve_certificate, solve_factored, to_candidate
from .system import VertexAssignment, assignment_array, build_reduced_system, count_assignments
from .verifier import (
    ROUNDING_SCHEDULE,
    IntegerCertificate,
    VerificationReport,
    round_to_integer_certificate,
    verify_certificate,
)

log = logging.getLogger(__name__)

HEADER = "V,assignment,certificate"
# tightening applied to gap_tolerance when every rounding of a candidate fails
RESOLVE_FACTORS = (1e-2, 1e-4)


@dataclass(frozen=True)
class CampaignConfig:
    V: int
    output_path: str | os.PathLike
    workers: int = 1
    checkpoint_interval: int = 1000
    solver: SolverConfig = SolverConfig()
    # process only the first `limit` assignments in lexicographic order
    limit: int | None = None
    resume: bool = False

    def __post_init__(self):
        if not isinstance(self.V, int) or not 2 <= self.V <= 12:
            raise InvalidParameter(f"V must be in 2..12, got {self.V!r}")
        if self.workers < 1:
            raise InvalidParameter("workers must be >= 1")
        if self.checkpoint_interval < 1:
            raise InvalidParameter("checkpoint_interval must be >= 1")
        if self.limit is not None and self.limit < 1:
            raise InvalidParameter("limit must be >= 1")

    @property
    def total(self) -> int:
        n = count_assignments(self.V)
        return n if self.limit is None else min(n, self.limit)


@dataclass
class CampaignSummary:
    V: int
    total: int = 0
    certified: int = 0
    undetermined: int = 0
    verify_failures: int = 0
    wall_time_seconds: float = 0.0
    resolves: int = 0

    @property
    def complete(self) -> bool:
        return self.total == count_assignments(self.V)

    def __str__(self) -> str:
        return (
            f"V={self.V}: {self.certified}/{self.total} certified, "
            f"{self.undetermined} undetermined, {self.verify_failures} verify failures "
            f"({self.wall_time_seconds:.1f} s)"
        )


def certify(cand: CertificateCandidate, cfg: SolverConfig = SolverConfig()) -> tuple[IntegerCertificate, int]:
    """Round a certified candidate until exact verification succeeds.

    Tries each denominator in the rounding schedule, then re-solves with a
    tighter duality gap. Returns the certificate and the number of re-solves.
    Raises :class:`CampaignError` if nothing verifies.
    """
    resolves = 0
    for factor in (None,) + RESOLVE_FACTORS:
        if factor is not None:
            tighter = dataclasses.replace(cfg, gap_tolerance=cfg.gap_tolerance * factor,
                                          max_iterations=cfg.max_iterations * 2)
            cand = solve_certificate(build_reduced_system(cand.assignment), tighter)
            resolves += 1
            if not cand.certified:
                break
        for q in ROUNDING_SCHEDULE:
            try:
                cert = round_to_integer_certificate(cand, q)
            except RoundingFailure:
                continue
            if verify_certificate(cert).valid:
                return cert, resolves
    raise CampaignError(f"assignment {cand.assignment}: no rounding of the solver output verified exactly")


@dataclass
class BlockResult:
    start: int
    stop: int
    rows: str = ""
    undetermined_rows: str = ""
    certified: int = 0
    undetermined: int = 0
    resolves: int = 0
    failures: list[str] = field(default_factory=list)


def process_block(V: int, start: int, stop: int, cfg: SolverConfig) -> BlockResult:
    js = assignment_array(V, start, stop)
    out = BlockResult(start, stop)
    rows, und = [], []
    for k, cols in enumerate(zip(*solve_factored(js, cfg))):
        a = VertexAssignment(V, tuple(js[k]))
        cand = to_candidate(a, *cols, cfg)
        if cand.certified:
            try:
                cert, n = certify(cand, cfg)
            except CampaignError as exc:
                out.failures.append(str(exc))
                continue
            out.resolves += n
            out.certified += 1
            rows.append(f"{V},{a},{cert}\n")
        else:
            out.undetermined += 1
            und.append(f"{a}\n")
    out.rows = "".join(rows)
    out.undetermined_rows = "".join(und)
    return out


def _process_block_star(args) -> BlockResult:
    return process_block(*args)


def _fingerprint(cfg: CampaignConfig) -> dict:
    return {
        "V": cfg.V,
        "checkpoint_interval": cfg.checkpoint_interval,
        "solver": dataclasses.asdict(cfg.solver),
    }


def _paths(output) -> tuple[Path, Path, Path]:
    out = Path(output)
    return out, Path(f"{out}.undetermined"), Path(f"{out}.ckpt")


def _load_checkpoint(cfg: CampaignConfig) -> dict | None:
    out, und, ckpt = _paths(cfg.output_path)
    if not (cfg.resume and ckpt.exists() and out.exists() and und.exists()):
        return None
    state = json.loads(ckpt.read_text())
    if state.get("fingerprint") != _fingerprint(cfg):
        raise InvalidParameter(f"checkpoint {ckpt} was written with a different configuration")
    if out.stat().st_size < state["csv_bytes"] or und.stat().st_size < state["undetermined_bytes"]:
        raise InvalidParameter(f"output files are shorter than checkpoint {ckpt} records")
    return state


def _write_checkpoint(ckpt: Path, state: dict) -> None:
    tmp = ckpt.with_name(ckpt.name + ".tmp")
    tmp.write_text(json.dumps(state, sort_keys=True))
    os.replace(tmp, ckpt)


def run_campaign(cfg: CampaignConfig, progress: Callable[[int, int], None] | None = None) -> CampaignSummary:
    """Enumerate, solve, round, verify and persist every assignment for ``cfg.V``.

    ``progress(done, total)`` is called after each checkpoint.
    """
    t0 = time.perf_counter()
    out, und_path, ckpt = _paths(cfg.output_path)
    total = cfg.total
    state = _load_checkpoint(cfg)
    if state is None:
        state = {
            "fingerprint": _fingerprint(cfg),
            "next_index": 0,
            "csv_bytes": 0,
            "undetermined_bytes": 0,
            "certified": 0,
            "undetermined": 0,
            "resolves": 0,
        }
        # fail on unwritable paths before any solving
        with open(out, "w") as f:
            f.write(HEADER + "\n")
        state["csv_bytes"] = out.stat().st_size
        und_path.write_text("")
        _write_checkpoint(ckpt, state)
    else:
        log.info("resuming %s at assignment %d", out, state["next_index"])
        for path, size in ((out, state["csv_bytes"]), (und_path, state["undetermined_bytes"])):
            with open(path, "r+b") as f:
                f.truncate(size)

    step = cfg.checkpoint_interval
    blocks = [(cfg.V, s, min(s + step, total), cfg.solver) for s in range(state["next_index"], total, step)]
    summary = CampaignSummary(cfg.V)

    with open(out, "a") as fout, open(und_path, "a") as fund:
        for res in _run_blocks(blocks, cfg.workers):
            if res.failures:
                summary.total = state["next_index"]
                summary.verify_failures = len(res.failures)
                raise CampaignError("; ".join(res.failures))
            fout.write(res.rows)
            fund.write(res.undetermined_rows)
            fout.flush()
            fund.flush()
            os.fsync(fout.fileno())
            os.fsync(fund.fileno())
            state["next_index"] = res.stop
            state["csv_bytes"] = fout.tell()
            state["undetermined_bytes"] = fund.tell()
            state["certified"] += res.certified
            state["undetermined"] += res.undetermined
            state["resolves"] += res.resolves
            _write_checkpoint(ckpt, state)
            if progress is not None:
                progress(res.stop, total)

    summary.total = state["next_index"]
    summary.certified = state["certified"]
    summary.undetermined = state["undetermined"]
    summary.resolves = state["resolves"]
    summary.wall_time_seconds = time.perf_counter() - t0
    return summary


def _run_blocks(blocks, workers: int) -> Iterator[BlockResult]:
    if workers == 1 or len(blocks) <= 1:
        for b in blocks:
            yield process_block(*b)
        return
    with multiprocessing.get_context("fork").Pool(workers) as pool:
        # imap preserves block order, so the sink output is schedule independent
        yield from pool.imap(_process_block_star, blocks)


# -- certificate files ---------------------------------------------------------


@dataclass(frozen=True)
class Row:
    line: int
    assignment: VertexAssignment | None
    certificate: IntegerCertificate | None
    # set when the row is well-formed but violates the value rules
    schema_problem: str = ""


def _parse_ints(text: str, line: int, what: str) -> tuple[int, ...]:
    parts = text.split("-")
    if not parts or any(not p.isdigit() for p in parts):
        raise ParseError(line, f"malformed {what} {text!r}")
    return tuple(int(p) for p in parts)


def read_certificate_file(path, V: int | None = None) -> Iterator[Row]:
    with open(path) as f:
        header = f.readline().rstrip("\r\n")
        if header != HEADER:
            raise ParseError(1, f"expected header {HEADER!r}, got {header!r}")
        for lineno, raw in enumerate(f, start=2):
            text = raw.strip()
            if not text:
                continue
            fields = text.split(",")
            if len(fields) != 3:
                raise ParseError(lineno, f"expected 3 fields, got {len(fields)}")
            if not fields[0].isdigit():
                raise ParseError(lineno, f"malformed V {fields[0]!r}")
            row_v = int(fields[0])
            if V is None:
                V = row_v
            elif row_v != V:
                raise SchemaError(f"line {lineno}: V={row_v} but file has V={V}")
            j = _parse_ints(fields[1], lineno, "assignment")
            c = _parse_ints(fields[2], lineno, "certificate")
            if len(j) != V - 1 or len(c) != V - 1:
                raise ParseError(lineno, f"V={V} needs {V - 1} entries per list")
            try:
                a = VertexAssignment(V, j)
            except InvalidParameter as exc:
                yield Row(lineno, None, None, str(exc))
                continue
            yield Row(lineno, a, IntegerCertificate(a, c))


@dataclass
class FileVerification:
    V: int | None
    rows: int = 0
    valid: int = 0
    invalid: int = 0
    duplicates: int = 0
    missing: int | None = None
    invalid_rows: list[tuple[int, str, str]] = field(default_factory=list)
    reports: list[VerificationReport] = field(default_factory=list, repr=False)
    wall_time_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.invalid == 0

    def __str__(self) -> str:
        missing = "?" if self.missing is None else self.missing
        return (
            f"V={self.V}: {self.rows} rows, {self.valid} valid, {self.invalid} invalid, "
            f"{self.duplicates} duplicates, {missing} missing"
        )


def verify_file(path, V: int | None = None, keep_reports: bool = False) -> FileVerification:
    """Exactly re-verify every row of a certificate file (integer arithmetic only)."""
    t0 = time.perf_counter()
    result = FileVerification(V)
    seen: set[tuple[int, ...]] = set()
    for row in read_certificate_file(path, V):
        result.rows += 1
        if row.assignment is None:
            result.invalid += 1
            result.invalid_rows.append((row.line, "", row.schema_problem))
            continue
        if result.V is None:
            result.V = row.assignment.V
        if row.assignment.j in seen:
            result.duplicates += 1
        seen.add(row.assignment.j)
        report = verify_certificate(row.certificate)
        if keep_reports:
            result.reports.append(report)
        if report.valid:
            result.valid += 1
        else:
            result.invalid += 1
            result.invalid_rows.append((row.line, str(row.assignment), report.reason))
    if result.V is not None:
        result.missing = count_assignments(result.V) - len(seen)
    result.wall_time_seconds = time.perf_counter() - t0
    return result


def report_summary(path) -> str:
    """Human-readable digest of a campaign's certificate and undetermined files."""
    check = verify_file(path, keep_reports=True)
    coeffs = [c for r in check.reports for c in r.certificate.c]
    pivot_den = max((p.denominator for r in check.reports for p in r.pivots), default=None)
    und_path = Path(f"{path}.undetermined")
    undetermined = und_path.read_text().split() if und_path.exists() else []
    V = check.V
    total = check.rows + len(undetermined)
    lines = [f"V = {V}"]
    full = f" of {count_assignments(V)}" if V else ""
    lines.append(f"total: {total}{full}")
    lines.append(f"certified: {check.rows} ({check.valid} valid, {check.invalid} invalid)")
    lines.append(f"undetermined: {len(undetermined)}")
    if check.duplicates:
        lines.append(f"duplicate rows: {check.duplicates}")
    if coeffs:
        lines.append(
            f"certificate coefficients: min {min(coeffs)}, median {statistics.median(coeffs)}, max {max(coeffs)}"
        )
    if pivot_den is not None:
        lines.append(f"largest pivot denominator: {pivot_den}")
    if undetermined:
        lines.append("undetermined assignments:")
        lines.extend(f"  {a}" for a in undetermined)
    return "\n".join(lines) + "\n"
