"""Numerical witnesses for the shadow system and small brute-force checks.

These routines never use the reduced matrices: every constraint is evaluated
from vertex coordinates as ``(r_i - r_{j_i}) . r_i`` with ``r_V`` fixed by the
centroid condition, so they serve as an independent check on the builder,
solver and verifier.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParameter
from .system import VertexAssignment

FOUND_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ProbePoint:
    """Vertex coordinates ``r_1..r_V`` (one row each) found by the search."""

    V: int
    d: int
    coordinates: np.ndarray
    assignment: VertexAssignment | None = None

    def __post_init__(self):
        r = np.asarray(self.coordinates, dtype=float)
        if r.shape != (self.V, self.d):
            raise InvalidParameter(f"expected shape ({self.V}, {self.d}), got {r.shape}")
        if np.max(np.abs(r.sum(axis=0))) > 1e-9:
            raise InvalidParameter("vertices are not centred at the origin")
        if np.max(np.abs(r)) < 1 - 1e-12:
            raise InvalidParameter("probe point must be normalized to max |entry| = 1")
        object.__setattr__(self, "coordinates", r)

    def constraint_values(self, assignment: VertexAssignment | None = None) -> np.ndarray:
        a = assignment or self.assignment
        return shadow_values(a, self.coordinates)

    def penalty(self, assignment: VertexAssignment | None = None) -> float:
        return float(np.sum(np.maximum(self.constraint_values(assignment), 0.0) ** 2))

    def to_text(self) -> str:
        return "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in self.coordinates)

    @classmethod
    def from_text(cls, text: str, assignment: VertexAssignment | None = None) -> "ProbePoint":
        rows = [list(map(float, line.split())) for line in text.splitlines() if line.strip()]
        r = np.array(rows, dtype=float)
        return cls(r.shape[0], r.shape[1], r, assignment)


def shadow_values(a: VertexAssignment, r: np.ndarray) -> np.ndarray:
    """``(r_i - r_{j_i}) . r_i`` for ``i = 2..V`` from full coordinates ``(V, d)``."""
    r = np.asarray(r, dtype=float)
    i = np.arange(1, a.V)
    j = np.array(a.j) - 1
    return np.einsum("kd,kd->k", r[i] - r[j], r[i])


def _objective(a: VertexAssignment, d: int, batch: int, margin: float):
    V = a.V
    idx_i = np.arange(1, V)
    idx_j = np.array(a.j) - 1

    def fun(flat):
        x = flat.reshape(batch, V - 1, d)
        r = np.concatenate([x, -x.sum(axis=1, keepdims=True)], axis=1)
        s = np.einsum("bvd,bvd->b", r, r)
        ri, rj = r[:, idx_i], r[:, idx_j]
        g = np.einsum("bkd,bkd->bk", ri - rj, ri) / s[:, None]
        u = np.maximum(g + margin, 0.0)
        val = np.sum(u * u)
        # d/dr of g_k * s: r_i gets 2 r_i - r_j, r_j gets -r_i; scale-invariance term via s
        w = 2.0 * u / s[:, None]
        grad_r = np.zeros_like(r)
        np.add.at(grad_r, (slice(None), idx_i), w[..., None] * (2.0 * ri - rj))
        np.add.at(grad_r, (slice(None), idx_j), -w[..., None] * ri)
        grad_r -= (2.0 * (w * g).sum(axis=1))[:, None, None] * r
        grad_x = grad_r[:, :-1] - grad_r[:, -1:]
        return val, grad_x.ravel()

    return fun


def _normalize(r: np.ndarray) -> np.ndarray:
    return r / np.max(np.abs(r))


def search_feasible_point(
    a: VertexAssignment,
    d: int,
    restarts: int,
    seed: int = 0,
    margin: float = 0.0,
    batch_size: int = 100,
    max_iter: int = 1000,
) -> ProbePoint | None:
    """Multistart quasi-Newton search for a nonzero solution of the shadow system.

    Minimizes the squared hinge penalty of ``(r_i - r_{j_i}).r_i / |r|^2 + margin``
    over centred configurations; the ratio form makes the penalty scale free, so
    the normalization ``max |entry| = 1`` is applied afterwards. Restarts are
    optimized ``batch_size`` at a time as one separable problem. Returns the
    first restart (in seed order) whose normalized point has penalty at most
    1e-12, or ``None``. ``None`` is not a proof of infeasibility.
    """
    if d not in (1, 2, 3):
        raise InvalidParameter(f"dimension must be 1, 2 or 3, got {d}")
    if restarts < 1:
        raise InvalidParameter("restarts must be >= 1")
    if margin < 0:
        raise InvalidParameter("margin must be nonnegative")
    V = a.V
    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((restarts, V - 1, d))
    for lo in range(0, restarts, batch_size):
        x0 = starts[lo : lo + batch_size]
        b = x0.shape[0]
        res = minimize(
            _objective(a, d, b, margin),
            x0.ravel(),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "gtol": 1e-14, "ftol": 1e-300},
        )
        x = res.x.reshape(b, V - 1, d)
        for k in range(b):
            r = np.concatenate([x[k], -x[k].sum(axis=0, keepdims=True)])
            if not np.any(r):
                continue
            r = _normalize(r)
            f = np.sum(np.maximum(shadow_values(a, r), 0.0) ** 2)
            if f <= FOUND_THRESHOLD:
                return ProbePoint(V, d, r, a)
    return None


def brute_force_scan(a: VertexAssignment, d: int = 1, grid_radius: int = 5) -> float:
    """Minimum over nonzero integer grid points of the largest constraint value.

    The free coordinates ``r_1..r_{V-1}`` range over ``[-R, R]^{V-1}``. A
    positive result means no grid point satisfies all inequalities.
    """
    if a.V > 4 or d != 1 or not 1 <= grid_radius <= 20:
        raise InvalidParameter("brute force scan needs V <= 4, d = 1, 1 <= grid_radius <= 20")
    axis = np.arange(-grid_radius, grid_radius + 1, dtype=np.int64)
    pts = np.array(list(itertools.product(axis, repeat=a.V - 1)), dtype=np.int64)
    pts = pts[np.any(pts != 0, axis=1)]
    r = np.concatenate([pts, -pts.sum(axis=1, keepdims=True)], axis=1)
    i = np.arange(1, a.V)
    j = np.array(a.j) - 1
    vals = (r[:, i] - r[:, j]) * r[:, i]
    return float(vals.max(axis=1).min())
