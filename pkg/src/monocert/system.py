"""Vertex assignments and the reduced homogeneous quadratic systems they induce.

For a choice ``j = (j_2, ..., j_V)`` with ``1 <= j_i < i`` the shadow inequalities

    (r_i - r_{j_i}) . r_i <= 0,    i = 2, ..., V

together with ``r_1 + ... + r_V = 0`` are rewritten as ``r^T Q_i r <= 0`` in the
free variables ``r_1, ..., r_{V-1}`` after substituting ``r_V = -(r_1 + ... + r_{V-1})``.
All matrices here are the dimension-free ``(V-1) x (V-1)`` blocks; the copy for
coordinates in ``R^d`` is ``Q_i (x) I_d`` (see :func:`expand_to_dimension`).

Indexing follows the natural vertex numbering: constraint ``i`` runs over
``2..V`` and row ``k`` of a matrix (0-based) belongs to vertex ``k + 1``.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidParameter

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class VertexAssignment:
    """One shadow choice ``(j_2, ..., j_V)``."""

    V: int
    j: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.V, int) or self.V < 2:
            raise InvalidParameter(f"vertex count must be an integer >= 2, got {self.V!r}")
        j = tuple(int(x) for x in self.j)
        object.__setattr__(self, "j", j)
        if len(j) != self.V - 1:
            raise InvalidParameter(f"V={self.V} needs {self.V - 1} shadow indices, got {len(j)}")
        for i, ji in enumerate(j, start=2):
            if not 1 <= ji <= i - 1:
                raise InvalidParameter(f"j_{i}={ji} outside 1..{i - 1}")

    @classmethod
    def parse(cls, text: str, V: int | None = None) -> "VertexAssignment":
        """Parse ``"1,2,3"`` or ``"1-2-3"``; ``V`` defaults to ``len + 1``."""
        parts = [p for p in re.split(r"[,\-]", text.strip())]
        if not parts or any(not p.strip().isdigit() for p in parts):
            raise InvalidParameter(f"malformed assignment {text!r}")
        j = tuple(int(p) for p in parts)
        if V is None:
            V = len(j) + 1
        return cls(V, j)

    def shadow(self, i: int) -> int:
        """``j_i`` for ``i`` in ``2..V``."""
        return self.j[i - 2]

    def index(self) -> int:
        """Rank in lexicographic order of ``(j_2, ..., j_V)``."""
        k = 0
        for i, ji in enumerate(self.j, start=2):
            k = k * (i - 1) + (ji - 1)
        return k

    def __str__(self) -> str:
        return "-".join(map(str, self.j))


def count_assignments(V: int) -> int:
    if V < 2:
        raise InvalidParameter(f"V must be >= 2, got {V}")
    return math.factorial(V - 1)


def enumerate_assignments(V: int) -> Iterator[VertexAssignment]:
    """All ``(V-1)!`` assignments in lexicographic order."""
    if not isinstance(V, int) or V < 2:
        raise InvalidParameter(f"V must be an integer >= 2, got {V!r}")
    for j in itertools.product(*(range(1, i) for i in range(2, V + 1))):
        yield VertexAssignment(V, j)


def assignment_at(V: int, index: int) -> VertexAssignment:
    """Inverse of :meth:`VertexAssignment.index`."""
    total = count_assignments(V)
    if not 0 <= index < total:
        raise InvalidParameter(f"index {index} outside 0..{total - 1}")
    return VertexAssignment(V, tuple(assignment_array(V, index, index + 1)[0]))


def assignment_array(V: int, start: int, stop: int) -> np.ndarray:
    """Assignments with lexicographic ranks ``start..stop-1`` as an int array ``(count, V-1)``."""
    k = np.arange(start, stop, dtype=np.int64)
    out = np.empty((k.size, V - 1), dtype=np.int64)
    for i in range(V, 1, -1):
        k, digit = np.divmod(k, i - 1)
        out[:, i - 2] = digit + 1
    return out


@dataclass(frozen=True)
class SymmetricRationalMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise InvalidParameter("matrix must be square")
        for a in range(n):
            for b in range(a):
                if rows[a][b] != rows[b][a]:
                    raise InvalidParameter(f"matrix not symmetric at ({a + 1},{b + 1})")
        object.__setattr__(self, "entries", rows)

    @property
    def order(self) -> int:
        return len(self.entries)

    def trace(self) -> Fraction:
        return sum((self.entries[a][a] for a in range(self.order)), Fraction(0))

    def quadratic_form(self, r: Sequence) -> Fraction:
        n = self.order
        return sum(
            (self.entries[a][b] * r[a] * r[b] for a in range(n) for b in range(n)),
            Fraction(0),
        )

    def scaled(self, k) -> "SymmetricRationalMatrix":
        return SymmetricRationalMatrix(tuple(tuple(k * x for x in row) for row in self.entries))

    def __add__(self, other: "SymmetricRationalMatrix") -> "SymmetricRationalMatrix":
        if other.order != self.order:
            raise InvalidParameter("order mismatch")
        return SymmetricRationalMatrix(
            tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries))
        )

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    @classmethod
    def zeros(cls, n: int) -> "SymmetricRationalMatrix":
        return cls(tuple((Fraction(0),) * n for _ in range(n)))


@dataclass(frozen=True)
class QuadraticSystem:
    """Matrices ``Q_2, ..., Q_V`` stored in that order."""

    assignment: VertexAssignment
    matrices: tuple[SymmetricRationalMatrix, ...]

    @property
    def V(self) -> int:
        return self.assignment.V

    def Q(self, i: int) -> SymmetricRationalMatrix:
        return self.matrices[i - 2]

    def combination(self, c: Sequence) -> SymmetricRationalMatrix:
        """``sum_i c_i Q_i`` with ``c`` indexed ``c_2..c_V``."""
        if len(c) != len(self.matrices):
            raise InvalidParameter(f"need {len(self.matrices)} coefficients, got {len(c)}")
        n = self.V - 1
        acc = [[Fraction(0)] * n for _ in range(n)]
        for ci, Qi in zip(c, self.matrices):
            ci = Fraction(ci)
            for a in range(n):
                row = Qi.entries[a]
                for b in range(n):
                    if row[b]:
                        acc[a][b] += ci * row[b]
        return SymmetricRationalMatrix(tuple(map(tuple, acc)))

    def float_matrices(self) -> np.ndarray:
        """Stack ``(V-1, V-1, V-1)``; exact because every entry is a multiple of 1/2."""
        return np.stack([Q.to_numpy() for Q in self.matrices])


def build_reduced_system(a: VertexAssignment) -> QuadraticSystem:
    n = a.V - 1
    mats = []
    for i in range(2, a.V):
        rows = [[Fraction(0)] * n for _ in range(n)]
        p, q = i - 1, a.shadow(i) - 1
        rows[p][p] = Fraction(1)
        rows[p][q] = rows[q][p] = -HALF
        mats.append(SymmetricRationalMatrix(tuple(map(tuple, rows))))
    # r_V = -sum r_k turns (r_V - r_j).r_V into |sum r_k|^2 + r_j . sum r_k
    jv = a.shadow(a.V) - 1
    rows = [[Fraction(1)] * n for _ in range(n)]
    for k in range(n):
        rows[k][jv] += HALF
        rows[jv][k] += HALF
    mats.append(SymmetricRationalMatrix(tuple(map(tuple, rows))))
    return QuadraticSystem(a, tuple(mats))


def scaled_combination(a: VertexAssignment, c: Sequence[int]) -> list[list[int]]:
    """Integer matrix ``2 * sum_i c_i Q_i`` for integer ``c = (c_2, ..., c_V)``.

    Same entries as :func:`build_reduced_system` but accumulated directly in
    Python integers, which keeps exact verification cheap.
    """
    if len(c) != a.V - 1:
        raise InvalidParameter(f"need {a.V - 1} coefficients, got {len(c)}")
    n = a.V - 1
    cv = c[-1]
    jv = a.shadow(a.V) - 1
    M = [[2 * cv] * n for _ in range(n)]
    for k in range(n):
        M[k][jv] += cv
        M[jv][k] += cv
    for i, ci in zip(range(2, a.V), c):
        p, q = i - 1, a.shadow(i) - 1
        M[p][p] += 2 * ci
        M[p][q] -= ci
        M[q][p] -= ci
    return M


def low_rank_factors(js: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectors ``x_i, y_i`` with ``Q_i = (x_i y_i^T + y_i x_i^T) / 2``.

    ``js`` is an int array ``(B, V-1)`` of assignments; returns two float arrays
    ``(B, V-1, V-1)`` whose column ``i - 2`` holds the factors of ``Q_i``.
    Constraint ``i < V`` has ``x = e_i``, ``y = e_i - e_{j_i}``; the eliminated
    constraint has ``x = 1`` and ``y = 1 + e_{j_V}``.
    """
    js = np.atleast_2d(np.asarray(js, dtype=np.int64))
    B, m = js.shape
    n = m
    X = np.zeros((B, n, m))
    Y = np.zeros((B, n, m))
    rows = np.arange(B)
    for k in range(m - 1):
        X[:, k + 1, k] = 1.0
        Y[:, k + 1, k] = 1.0
        Y[rows, js[:, k] - 1, k] -= 1.0
    X[:, :, m - 1] = 1.0
    Y[:, :, m - 1] = 1.0
    Y[rows, js[:, m - 1] - 1, m - 1] += 1.0
    return X, Y


def expand_to_dimension(Q: SymmetricRationalMatrix, d: int) -> SymmetricRationalMatrix:
    """Kronecker product ``Q (x) I_d``."""
    if not isinstance(d, int) or d < 1:
        raise InvalidParameter(f"dimension must be >= 1, got {d!r}")
    n = Q.order
    zero = Fraction(0)
    rows = []
    for a in range(n):
        for s in range(d):
            row = [zero] * (n * d)
            for b in range(n):
                row[b * d + s] = Q.entries[a][b]
            rows.append(tuple(row))
    return SymmetricRationalMatrix(tuple(rows))
