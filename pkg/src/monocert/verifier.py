"""Exact integer certificates and their verification in rational arithmetic.

Nothing in the verification path touches floating point: certificate
coefficients are Python integers, the combined matrix is accumulated as the
integer matrix ``2 * sum_i c_i Q_i``, and positive definiteness is decided by
fraction-free symmetric elimination. The elimination keeps every intermediate
entry an integer; its k-th diagonal pivot is the leading principal minor
``D_k``, so the LDL^T pivots are ``d_k = D_k / D_{k-1}`` exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvalidParameter, RoundingFailure
from .solver import CertificateCandidate, Status
from .system import SymmetricRationalMatrix, VertexAssignment, scaled_combination

ROUNDING_SCHEDULE = (10**2, 10**4, 10**8)


class Verdict(str, enum.Enum):
    VALID = "valid"
    INVALID = "invalid"


@dataclass(frozen=True)
class IntegerCertificate:
    """Positive integer coefficients ``c_2..c_V`` for one assignment.

    Construction does not enforce positivity so that malformed certificates can
    still be handed to :func:`verify_certificate` and rejected there.
    """

    assignment: VertexAssignment
    c: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(int(v) for v in self.c))
        if len(self.c) != self.assignment.V - 1:
            raise InvalidParameter(
                f"V={self.assignment.V} needs {self.assignment.V - 1} coefficients, got {len(self.c)}"
            )

    @property
    def positive(self) -> bool:
        return all(v >= 1 for v in self.c)

    def canonical(self) -> "IntegerCertificate":
        g = math.gcd(*self.c)
        if g <= 1:
            return self
        return IntegerCertificate(self.assignment, tuple(v // g for v in self.c))

    def __str__(self) -> str:
        return "-".join(map(str, self.c))


@dataclass(frozen=True)
class VerificationReport:
    certificate: IntegerCertificate
    verdict: Verdict
    pivots: tuple[Fraction, ...]
    failure_index: int | None = None
    reason: str = ""

    @property
    def valid(self) -> bool:
        return self.verdict is Verdict.VALID


def round_to_integer_certificate(cand: CertificateCandidate, max_denominator: int) -> IntegerCertificate:
    """Round each ``c_i`` to the nearest multiple of ``1/max_denominator``, clear
    the denominator and divide out the gcd."""
    if cand.status is not Status.CERTIFIED:
        raise InvalidParameter("only certified candidates can be rounded")
    if max_denominator < 1:
        raise InvalidParameter("max_denominator must be >= 1")
    if any(not (v > 0) for v in cand.c):
        raise InvalidParameter("candidate has a nonpositive coefficient")
    nums = [round(Fraction(v) * max_denominator) for v in cand.c]
    if any(k <= 0 for k in nums):
        raise RoundingFailure(f"coefficient rounded to zero at denominator {max_denominator}")
    g = math.gcd(*nums)
    return IntegerCertificate(cand.assignment, tuple(k // g for k in nums))


def leading_minors(A: Sequence[Sequence[int]]) -> list[int]:
    """Leading principal minors of a symmetric integer matrix.

    Stops after the first zero minor since elimination cannot continue past it.
    """
    n = len(A)
    L = [list(row[: i + 1]) for i, row in enumerate(A)]  # lower triangle
    minors = []
    prev = 1
    for k in range(n):
        pivot = L[k][k]
        minors.append(pivot)
        if pivot == 0:
            break
        col = [0] * k + [L[i][k] for i in range(k, n)]
        for i in range(k + 1, n):
            row = L[i]
            aik = col[i]
            for j in range(k + 1, i + 1):
                row[j] = (pivot * row[j] - aik * col[j]) // prev
        prev = pivot
    return minors


def _pivots(minors: list[int], scale: int = 1) -> tuple[Fraction, ...]:
    out = []
    prev = 1
    for m in minors:
        out.append(Fraction(m, prev * scale))
        prev = m
    return tuple(out)


def _first_nonpositive(pivots) -> int | None:
    for k, d in enumerate(pivots):
        if d <= 0:
            return k
    return None


def check_positive_definite(M: SymmetricRationalMatrix) -> tuple[bool, tuple[Fraction, ...]]:
    """Exact LDL^T in natural order; ``True`` iff every pivot is positive.

    A zero pivot stops the elimination and the result is ``False`` whether or not
    the rest of its row vanishes.
    """
    if not isinstance(M, SymmetricRationalMatrix):
        M = SymmetricRationalMatrix(tuple(tuple(r) for r in M))
    scale = 1
    for row in M.entries:
        for x in row:
            scale = math.lcm(scale, x.denominator)
    A = [[int(x * scale) for x in row] for row in M.entries]
    pivots = _pivots(leading_minors(A), scale)
    ok = len(pivots) == M.order and _first_nonpositive(pivots) is None
    return ok, pivots


def verify_certificate(cert: IntegerCertificate) -> VerificationReport:
    """Rebuild ``sum_i c_i Q_i`` from the assignment and decide positive definiteness."""
    if not cert.positive:
        bad = next(k for k, v in enumerate(cert.c) if v < 1)
        return VerificationReport(cert, Verdict.INVALID, (), None, f"c_{bad + 2} is not a positive integer")
    M2 = scaled_combination(cert.assignment, cert.c)
    pivots = _pivots(leading_minors(M2), 2)
    failure = _first_nonpositive(pivots)
    if failure is None and len(pivots) == cert.assignment.V - 1:
        return VerificationReport(cert, Verdict.VALID, pivots)
    return VerificationReport(cert, Verdict.INVALID, pivots, failure, f"pivot {failure + 1} is {pivots[failure]}")


def is_positive_semidefinite(M: SymmetricRationalMatrix) -> bool:
    """Exact LDL^T with diagonal pivoting; zero pivots are allowed."""
    A = [list(row) for row in M.entries]
    remaining = list(range(M.order))
    while remaining:
        k = max(remaining, key=lambda i: A[i][i])
        akk = A[k][k]
        if akk < 0:
            return False
        if akk == 0:
            return all(A[i][j] == 0 for i in remaining for j in remaining)
        remaining.remove(k)
        for i in remaining:
            f = A[i][k] / akk
            if f:
                for j in remaining:
                    A[i][j] -= f * A[k][j]
    return True


def verify_gram_conditions(R: SymmetricRationalMatrix, assignment: VertexAssignment) -> bool:
    """Does ``R`` look like the Gram matrix of a solution for ``assignment``?

    Checks PSD, zero grand sum (centroid at the origin) and
    ``R_ii <= R_{i j_i}`` for ``i = 2..V``. The zero matrix passes; excluding
    the trivial solution is up to the caller.
    """
    if not isinstance(R, SymmetricRationalMatrix):
        R = SymmetricRationalMatrix(tuple(tuple(r) for r in R))
    V = assignment.V
    if R.order != V:
        raise InvalidParameter(f"Gram matrix must have order {V}, got {R.order}")
    if sum((x for row in R.entries for x in row), Fraction(0)) != 0:
        return False
    for i in range(2, V + 1):
        j = assignment.shadow(i)
        if R.entries[i - 1][i - 1] > R.entries[i - 1][j - 1]:
            return False
    return is_positive_semidefinite(R)
