"""Independent reference implementations the tests compare against.

Everything here is deliberately written by a different route than the
package: scalar loops instead of vectorized numpy, bisection instead of
scipy's quantile, an interior-point solver (cvxopt) instead of our
projected-gradient method, and an exhaustive lattice search instead of
any solver at all.  Slow is fine; these only see small instances.
"""

from __future__ import annotations

import math

import numpy as np
from cvxopt import matrix, solvers

solvers.options["show_progress"] = False
solvers.options["abstol"] = 1e-9
solvers.options["reltol"] = 1e-9
solvers.options["feastol"] = 1e-9
solvers.options["maxiters"] = 200


def normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF by bisection on math.erf."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def doubled_feature(psi) -> list[float]:
    """Scalar-loop construction of the doubled feature vector.

    Same basis order as the package: control qubit most significant,
    |0> branch in the first dim^2 slots, |1> branch carrying psi (x) psi.
    """
    dim = len(psi)
    out = [0.0] * (2 * dim * dim)
    out[0] = 1.0 / math.sqrt(2.0)
    for i in range(dim):
        for j in range(dim):
            out[dim * dim + i * dim + j] = float(psi[i]) * float(psi[j]) / math.sqrt(2.0)
    return out


def feature_dot(psi_i, psi_j) -> float:
    a, b = doubled_feature(psi_i), doubled_feature(psi_j)
    return math.fsum(x * y for x, y in zip(a, b))


def psi_inner_loops(c1, c2, kernel, y) -> float:
    """<Psi_c1, Psi_c2> by the defining double sum."""
    m = len(y)
    total = 0.0
    for i in range(m):
        if not c1[i]:
            continue
        for j in range(m):
            if c2[j]:
                total += y[i] * y[j] * kernel[i][j]
    return total / (m * m)


def margins_loops(alpha, constraints, kernel, y) -> list[float]:
    """y_i <w, Phi(x_i)> for w = sum_c alpha_c Psi_c, by scalar loops."""
    m = len(y)
    out = []
    for i in range(m):
        acc = 0.0
        for a, c in zip(alpha, constraints):
            for j in range(m):
                if c[j]:
                    acc += a * y[j] * kernel[i][j] / m
        out.append(y[i] * acc)
    return out


def box_dual_reference(kernel: np.ndarray, y: np.ndarray, cost: float) -> tuple[float, np.ndarray]:
    """Per-sample-slack SVM dual via cvxopt.

    max sum(a) - 1/2 a' (yy' * K) a  over  0 <= a_i <= cost / m.
    Returns (optimal value, a*); the value is recomputed from a* on the
    unregularized matrix so the solver's ridge does not bias it.
    """
    m = len(y)
    q = np.outer(y, y) * kernel
    sol = solvers.qp(
        matrix(q + 1e-12 * np.eye(m)),
        matrix(-np.ones(m)),
        matrix(np.vstack([-np.eye(m), np.eye(m)])),
        matrix(np.concatenate([np.zeros(m), np.full(m, cost / m)])),
    )
    if sol["status"] != "optimal":
        raise RuntimeError(f"reference box dual: {sol['status']}")
    a = np.asarray(sol["x"]).ravel()
    value = float(a.sum() - 0.5 * a @ q @ a)
    return value, a


def epigraph_reference(kernel: np.ndarray, y: np.ndarray, cost: float) -> float:
    """One-slack formulation solved over all 2^m aggregate constraints.

    Variables (beta, xi) with w = sum_i beta_i Phi(x_i):
        min 1/2 beta' K beta + cost * xi
        s.t. (1/m) sum_i c_i y_i (K beta)_i >= |c|/m - xi  for every c.
    The c = 0 row doubles as xi >= 0.  m <= 12 keeps this tractable.
    """
    m = len(y)
    if m > 12:
        raise ValueError(f"epigraph reference limited to m <= 12, got {m}")
    rows, rhs = [], []
    for code in range(2 ** m):
        c = np.array([(code >> i) & 1 for i in range(m)], dtype=float)
        rows.append(np.append(-(c * y) @ kernel / m, -1.0))
        rhs.append(-c.sum() / m)
    p = np.zeros((m + 1, m + 1))
    p[:m, :m] = kernel + 1e-12 * np.eye(m)
    p[m, m] = 1e-12
    q = np.zeros(m + 1)
    q[m] = cost
    # xi has near-zero curvature, so the default Cholesky KKT step breaks down
    sol = solvers.qp(
        matrix(p), matrix(q), matrix(np.array(rows)), matrix(np.array(rhs)),
        kktsolver="ldl",
    )
    if sol["status"] != "optimal":
        raise RuntimeError(f"reference epigraph QP: {sol['status']}")
    x = np.asarray(sol["x"]).ravel()
    beta, xi = x[:m], max(x[m], 0.0)
    return float(0.5 * beta @ kernel @ beta + cost * xi)


def nearest_point_reference(v: np.ndarray, cap: float) -> np.ndarray:
    """Projection onto {x >= 0, sum x <= cap} via cvxopt."""
    k = len(v)
    g = np.vstack([-np.eye(k), np.ones((1, k))])
    h = np.append(np.zeros(k), cap)
    sol = solvers.qp(matrix(np.eye(k)), matrix(-np.asarray(v, dtype=float)), matrix(g), matrix(h))
    if sol["status"] != "optimal":
        raise RuntimeError(f"reference projection: {sol['status']}")
    return np.asarray(sol["x"]).ravel()


def restricted_dual_reference(jmat: np.ndarray, b: np.ndarray, cap: float) -> tuple[float, np.ndarray]:
    """max -1/2 a'Ja + b'a over {a >= 0, sum a <= cap} via cvxopt."""
    k = len(b)
    g = np.vstack([-np.eye(k), np.ones((1, k))])
    h = np.append(np.zeros(k), cap)
    sol = solvers.qp(
        matrix(jmat + 1e-12 * np.eye(k)),
        matrix(-np.asarray(b, dtype=float)),
        matrix(g),
        matrix(h),
    )
    if sol["status"] != "optimal":
        raise RuntimeError(f"reference restricted dual: {sol['status']}")
    a = np.asarray(sol["x"]).ravel()
    return float(b @ a - 0.5 * a @ jmat @ a), a


def _lattice(centers: np.ndarray, half_width: float, step: float, cap: float) -> np.ndarray:
    """Feasible lattice points of spacing `step` in a box around `centers`."""
    axes = []
    for c in centers:
        lo = max(0.0, c - half_width)
        hi = min(cap, c + half_width)
        lo_i, hi_i = math.floor(lo / step), math.ceil(hi / step)
        axes.append(np.arange(lo_i, hi_i + 1) * step)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(centers))
    return grid[grid.sum(axis=1) <= cap + 1e-12]

def grid_qp_max(jmat: np.ndarray, b: np.ndarray, cap: float) -> float:
    """Coarse-to-fine lattice maximization of -1/2 a'Ja + b'a.

    Stage one sweeps the whole feasible box at spacing cap/20; each later
    stage re-grids a shrinking window around the incumbent, ending on the
    1e-3 lattice.  Exhaustive at every stage, so the only way to lose the
    optimum is for it to fall outside a window; the windows span twice
    the previous spacing to cover that.
    """
    k = len(b)
    best_x = np.zeros(k)
    best_v = -np.inf
    for step, width in ((cap / 20, cap), (cap / 100, cap / 10), (1e-3, cap / 50)):
        pts = _lattice(best_x, width, step, cap)
        vals = pts @ b - 0.5 * np.einsum("ri,ij,rj->r", pts, jmat, pts)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v, best_x = float(vals[i]), pts[i]
    return best_v
