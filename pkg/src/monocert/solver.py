"""Certificate search by semidefinite optimization.

Solves, for one or many reduced systems ``Q_2..Q_V``,

    maximize z  subject to  sum_i c_i Q_i - z I  PSD,  c_i >= z,  |c|_2 <= 1

with a primal log-barrier path-following method. Every ``Q_i`` is a symmetrized
rank-one matrix ``(x y^T + y x^T)/2``, so with ``W = S^{-1}`` the Newton system
only needs the three Gram blocks ``x^T W x``, ``x^T W y``, ``y^T W y``:

    tr(W Q_a W Q_b) = (T_ab T_ba + P_ab R_ab) / 2

All systems in a batch share the order, and each one follows its own barrier
parameter schedule, so a system's trajectory does not depend on its batch mates.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NumericFailure
from .system import QuadraticSystem, VertexAssignment, low_rank_factors

MAX_ORDER = 15


class Status(str, enum.Enum):
    CERTIFIED = "certified"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class SolverConfig:
    z_threshold: float = 1e-6
    feasibility_tolerance: float = 1e-9
    max_iterations: int = 200
    seed: int = 0
    # duality-gap bound nu/t at which the path following stops
    gap_tolerance: float = 1e-7

    def __post_init__(self):
        if not self.z_threshold > 0:
            raise InvalidParameter("z_threshold must be positive")
        if not self.feasibility_tolerance > 0:
            raise InvalidParameter("feasibility_tolerance must be positive")
        if not self.gap_tolerance > 0:
            raise InvalidParameter("gap_tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidParameter("max_iterations must be >= 1")


@dataclass(frozen=True)
class CertificateCandidate:
    assignment: VertexAssignment
    c: tuple[float, ...]
    z: float
    min_eig: float
    status: Status
    iterations: int = 0
    message: str = field(default="", compare=False)

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED


def min_eigenvalue(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParameter("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise NumericFailure("matrix has non-finite entries")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
        raise InvalidParameter("matrix is not symmetric within 1e-12")
    return float(np.linalg.eigvalsh(M)[0])


def _lmi(c: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    half = 0.5 * ((X * c[:, None, :]) @ Y.transpose(0, 2, 1))
    return half + half.transpose(0, 2, 1)


def _barrier(X, Y, cfg: SolverConfig, t0=10.0, mu=30.0, recenter=0.05):
    """Run path following on a batch; returns ``(c, iterations, converged)``."""
    B, n, m = X.shape
    p = m + 1
    nu = n + m + 1
    t_final = nu / cfg.gap_tolerance
    Z = np.concatenate([X, Y], axis=2)
    ZT = np.ascontiguousarray(Z.transpose(0, 2, 1))
    eye = np.eye(n)
    diag = np.arange(m)

    c = np.full((B, m), 0.5 / math.sqrt(m))
    lam = np.linalg.eigvalsh(_lmi(c, X, Y))[:, 0]
    z = np.minimum(lam, c.min(axis=1)) - 1.0
    x = np.concatenate([c, z[:, None]], axis=1)
    t = np.full(B, t0)
    iters = np.zeros(B, dtype=np.int64)
    converged = np.zeros(B, dtype=bool)
    active = np.arange(B)

    for _ in range(cfg.max_iterations):
        if active.size == 0:
            break
        xa, ta = x[active], t[active]
        c, z = xa[:, :m], xa[:, m]
        S = _lmi(c, X[active], Y[active]) - z[:, None, None] * eye
        try:
            W = np.linalg.inv(S)
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(f"singular slack matrix: {exc}") from exc
        WZ = W @ Z[active]
        K = ZT[active] @ WZ
        P, T, R = K[:, :m, :m], K[:, :m, m:], K[:, m:, m:]

        H = np.empty((active.size, p, p))
        g = np.empty((active.size, p))
        # -log det S
        H[:, :m, :m] = 0.5 * (T * T.transpose(0, 2, 1) + P * R)
        hz = -(WZ[:, :, :m] * WZ[:, :, m:]).sum(axis=1)
        H[:, :m, m] = hz
        H[:, m, :m] = hz
        H[:, m, m] = (W * W).sum(axis=(1, 2))
        g[:, :m] = -np.einsum("baa->ba", T)
        g[:, m] = np.einsum("bjj->b", W)
        # -sum log(c_i - z)
        w = 1.0 / (c - z[:, None])
        w2 = w * w
        g[:, :m] -= w
        g[:, m] += w.sum(axis=1)
        H[:, diag, diag] += w2
        H[:, :m, m] -= w2
        H[:, m, :m] -= w2
        H[:, m, m] += w2.sum(axis=1)
        # -log(1 - |c|^2)
        q = 1.0 - (c * c).sum(axis=1)
        g[:, :m] += 2.0 * c / q[:, None]
        H[:, :m, :m] += 4.0 * c[:, :, None] * c[:, None, :] / (q * q)[:, None, None]
        H[:, diag, diag] += (2.0 / q)[:, None]
        # objective -t z
        g[:, m] -= ta

        try:
            dx = -np.linalg.solve(H, g[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(f"singular Newton system: {exc}") from exc
        dec = np.sqrt(np.maximum(-(g * dx).sum(axis=1), 0.0))
        if not np.all(np.isfinite(dec)):
            raise NumericFailure("non-finite Newton decrement")
        # damped Newton keeps the iterate inside the Dikin ellipsoid
        step = np.where(dec < 0.5, 1.0, 1.0 / (1.0 + dec))
        x[active] = xa + step[:, None] * dx
        iters[active] += 1

        centered = dec < recenter
        done = centered & (ta >= t_final)
        t[active] = np.where(centered & ~done, ta * mu, ta)
        converged[active[done]] = True
        active = active[~done]

    return x[:, :m], iters, converged


def solve_factored(js: np.ndarray, cfg: SolverConfig = SolverConfig()):
    """Solve a batch of assignments given as an int array ``(B, V-1)``.

    Returns arrays ``(c, z, min_eig, iterations, converged)``. ``z`` is the best
    objective for the returned ``c``, i.e. ``min(lambda_min(sum c_i Q_i), min_i c_i)``.
    """
    js = np.atleast_2d(np.asarray(js, dtype=np.int64))
    if js.shape[1] > MAX_ORDER:
        raise InvalidParameter(f"solver supports V <= {MAX_ORDER + 1}")
    X, Y = low_rank_factors(js)
    if js.shape[1] == 0:
        raise InvalidParameter("empty system")
    c, iters, converged = _barrier(X, Y, cfg)
    if not np.all(np.isfinite(c)):
        raise NumericFailure("non-finite certificate coefficients")
    min_eig = np.linalg.eigvalsh(_lmi(c, X, Y))[:, 0]
    z = np.minimum(min_eig, c.min(axis=1))
    return c, z, min_eig, iters, converged


def to_candidate(a, c, z, min_eig, iters, converged, cfg) -> CertificateCandidate:
    certified = bool(z >= cfg.z_threshold)
    if certified:
        message = "" if converged else "iteration limit reached"
    elif converged:
        message = f"optimal z={z:.3e} below threshold"
    else:
        message = f"no certificate within {cfg.max_iterations} iterations (z={z:.3e})"
    return CertificateCandidate(
        assignment=a,
        c=tuple(float(v) for v in c),
        z=float(z),
        min_eig=float(min_eig),
        status=Status.CERTIFIED if certified else Status.UNDETERMINED,
        iterations=int(iters),
        message=message,
    )


def solve_assignments(assignments, cfg: SolverConfig = SolverConfig()) -> list[CertificateCandidate]:
    assignments = list(assignments)
    if not assignments:
        return []
    V = assignments[0].V
    if any(a.V != V for a in assignments):
        raise InvalidParameter("all assignments in a batch must share V")
    js = np.array([a.j for a in assignments], dtype=np.int64)
    out = solve_factored(js, cfg)
    return [to_candidate(a, *cols, cfg) for a, *cols in zip(assignments, *out)]


def solve_certificate(sys: QuadraticSystem, cfg: SolverConfig = SolverConfig()) -> CertificateCandidate:
    """Maximize ``z`` in the certificate SDP for a single system."""
    if sys.V - 1 > MAX_ORDER:
        raise InvalidParameter(f"solver supports V <= {MAX_ORDER + 1}")
    X, Y = low_rank_factors(np.array([sys.assignment.j]))
    rebuilt = 0.5 * (X[0].T[:, :, None] * Y[0].T[:, None, :])
    rebuilt = rebuilt + rebuilt.transpose(0, 2, 1)
    if not np.array_equal(rebuilt, sys.float_matrices()):
        raise InvalidParameter("system matrices do not match their assignment")
    return solve_assignments([sys.assignment], cfg)[0]
