"""Restricted dual solver and the PSD repair step.

The working-set dual is a small concave QP over the capped simplex,

    max_a  D(a) = -1/2 a^T Jhat a + b^T a
    s.t.   a >= 0,  sum(a) <= C,

with Jhat the PSD projection of the noisily estimated constraint Gram
matrix.  The solver is projected gradient ascent with exact line search,
finished by an active-set stage that solves the KKT system on the current
face, drops constraints with negative multipliers, and adds blocking
bounds along the way.  Optimality is certified by the step-1 projected
gradient fixed-point residual  || a - P(a + grad D(a)) ||_inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

KKT_TOL = 1e-9
ASYM_TOL = 1e-10


def psd_project(s: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: symmetrize, then clamp negative modes."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if s.size and np.max(np.abs(s - s.T)) > ASYM_TOL:
        raise ValueError("matrix asymmetry exceeds tolerance; not a noisy symmetric estimate")
    sym = 0.5 * (s + s.T)
    evals, evecs = scipy.linalg.eigh(sym)
    clipped = np.maximum(evals, 0.0)
    out = (evecs * clipped) @ evecs.T
    return 0.5 * (out + out.T)


def project_capped_simplex(x: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {a >= 0, sum(a) <= cap}."""
    x = np.asarray(x, dtype=float)
    if not cap > 0:
        raise ValueError(f"cap must be positive, got {cap}")
    p = np.maximum(x, 0.0)
    if p.sum() <= cap:
        return p
    # Sum constraint active: shift by the unique tau with sum(max(x - tau, 0)) = cap.
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, x.size + 1)
    rho = np.nonzero(u * ks > css - cap)[0][-1]
    tau = (css[rho] - cap) / (rho + 1.0)
    return np.maximum(x - tau, 0.0)


def optimal_step(slope: float, curvature: float, cap: float) -> tuple[float, float]:
    """Exact maximizer of g(b) = slope*b - curvature*b^2/2 over [0, cap].

    Returns (step, gain).  For positive slope the gain is at least
    min(cap, slope/curvature) * slope / 2, the line-search guarantee the
    cutting-plane analysis leans on.
    """
    if slope <= 0.0:
        return 0.0, 0.0
    if curvature > 0.0:
        beta = min(cap, slope / curvature)
    else:
        beta = cap
    return beta, beta * slope - 0.5 * beta * beta * curvature


@dataclass(frozen=True)
class RestrictedDual:
    """max -1/2 a^T jhat a + b^T a over the capped simplex {a>=0, sum<=c}."""

    jhat: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self) -> None:
        k = self.b.shape[0]
        if self.jhat.shape != (k, k):
            raise ValueError(f"jhat shape {self.jhat.shape} does not match b length {k}")
        if not self.c > 0:
            raise ValueError(f"capacity must be positive, got {self.c}")

    @property
    def k(self) -> int:
        return self.b.shape[0]


@dataclass
class DualSolution:
    alpha: np.ndarray
    objective: float
    residual: float
    iterations: int
    converged: bool


def dual_objective(alpha: np.ndarray, rd: RestrictedDual) -> float:
    return float(rd.b @ alpha - 0.5 * alpha @ rd.jhat @ alpha)


def kkt_residual(alpha: np.ndarray, rd: RestrictedDual) -> float:
    if rd.k == 0:
        return 0.0
    grad = rd.b - rd.jhat @ alpha
    return float(np.max(np.abs(alpha - project_capped_simplex(alpha + grad, rd.c))))


def _face_target(j, b, c, free, s_active):
    """Stationary point of the face QP; lam is the sum multiplier.

    consistent=False flags an unbounded face (rank-deficient block with
    gradient leaking into its null space).
    """
    k = b.shape[0]
    target = np.zeros(k)
    lam = 0.0
    if free.size == 0:
        return target, lam, True
    jf = j[np.ix_(free, free)]
    bf = b[free]
    if s_active:
        kf = free.size
        mat = np.zeros((kf + 1, kf + 1))
        mat[:kf, :kf] = jf
        mat[:kf, kf] = 1.0
        mat[kf, :kf] = 1.0
        rhs = np.append(bf, c)
        sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        target[free] = sol[:kf]
        lam = float(sol[kf])
        gap = float(np.max(np.abs(mat @ sol - rhs)))
    else:
        sol, *_ = np.linalg.lstsq(jf, bf, rcond=None)
        target[free] = sol
        gap = float(np.max(np.abs(jf @ sol - bf)))
    consistent = gap <= 1e-9 * max(1.0, float(np.max(np.abs(bf))), c)
    return target, lam, consistent


def _blocking_step(alpha, d, c, s_active, cap):
    """Largest step <= cap keeping alpha + step*d feasible, with the blocker."""
    beta = cap
    block = None
    neg = np.flatnonzero(d < -1e-15)
    if neg.size:
        ratios = -alpha[neg] / d[neg]
        loc = int(np.argmin(ratios))
        if ratios[loc] < beta:
            beta, block = float(ratios[loc]), int(neg[loc])
    if not s_active:
        dsum = float(d.sum())
        if dsum > 1e-15:
            room = (c - float(alpha.sum())) / dsum
            if room < beta:
                beta, block = room, -1  # -1 marks the sum constraint
    return max(beta, 0.0), block


def _active_set(rd: RestrictedDual, start: np.ndarray, max_rounds: int) -> np.ndarray:
    """Primal active-set refinement from a feasible start; best effort.

    The caller certifies the result via kkt_residual, so internal
    tolerances only steer the search.
    """
    j, b, c = rd.jhat, rd.b, rd.c
    k = rd.k
    alpha = project_capped_simplex(np.array(start, dtype=float), c)
    zero_thr = 1e-11 * max(1.0, c)
    zero = alpha <= zero_thr
    alpha[zero] = 0.0
    s_active = float(alpha.sum()) >= c * (1.0 - 1e-12)
    mult_tol = 1e-10 * max(1.0, float(np.max(np.abs(b))) if k else 0.0, c)

    for _ in range(max_rounds):
        free = np.flatnonzero(~zero)
        target, lam, consistent = _face_target(j, b, c, free, s_active)
        if not consistent:
            # Unbounded face: the gradient leaks into null(J_FF), so there
            # is a flat ascent ray.  Walk it to its blocking constraint.
            jf = j[np.ix_(free, free)]
            bf = b[free]
            if s_active:
                stack = np.vstack([jf, np.ones((1, free.size))])
                row_part, *_ = np.linalg.lstsq(stack, stack @ bf, rcond=None)
            else:
                row_part, *_ = np.linalg.lstsq(jf, jf @ bf, rcond=None)
            d_f = bf - row_part
            if float(np.max(np.abs(d_f), initial=0.0)) <= 1e-12 * max(1.0, float(np.max(np.abs(bf)))):
                break
            d = np.zeros(k)
            d[free] = d_f
            beta, block = _blocking_step(alpha, d, c, s_active, np.inf)
            if block is None or not np.isfinite(beta):
                break
            alpha = alpha + beta * d
            if block == -1:
                s_active = True
            else:
                zero[block] = True
            alpha = np.maximum(alpha, 0.0)
            alpha[zero] = 0.0
            continue

        d = target - alpha
        if float(np.max(np.abs(d), initial=0.0)) <= 1e-13 * max(1.0, c):
            # Stationary on this face: examine multipliers.
            g = b - j @ alpha
            if s_active:
                lam = float(np.mean(g[free])) if free.size else lam
                if lam < -mult_tol:
                    s_active = False
                    continue
            else:
                lam = 0.0
            bound = np.flatnonzero(zero)
            if bound.size:
                mu = lam - g[bound]
                worst = int(np.argmin(mu))
                if mu[worst] < -mult_tol:
                    zero[bound[worst]] = False
                    continue
            return alpha
        beta, block = _blocking_step(alpha, d, c, s_active, 1.0)
        alpha = alpha + beta * d
        if block == -1:
            s_active = True
        elif block is not None:
            zero[block] = True
        alpha = np.maximum(alpha, 0.0)
        alpha[zero] = 0.0
    return alpha


def solve_restricted_dual(
    rd: RestrictedDual, tol: float = KKT_TOL, max_iter: int | None = None
) -> DualSolution:
    """Projected gradient ascent with exact line search and face polish.

    Non-convergence within the iteration cap is reported on the returned
    solution (converged=False, best feasible iterate kept), never hidden.
    """
    k = rd.k
    if max_iter is None:
        max_iter = 10_000 * max(k, 1)
    j, b, c = rd.jhat, rd.b, rd.c

    lip = float(np.max(scipy.linalg.eigvalsh(j))) if k else 0.0
    if lip <= 1e-30:
        # Linear objective: optimum sits at a vertex of the capped simplex.
        alpha = np.zeros(k)
        if k and np.max(b) > 0:
            alpha[int(np.argmax(b))] = c
        return DualSolution(alpha, dual_objective(alpha, rd), kkt_residual(alpha, rd), 0, True)

    step = 1.0 / lip
    alpha = project_capped_simplex(b * step, c)
    best = alpha
    best_res = kkt_residual(alpha, rd)
    next_polish = 10
    it = 0
    for it in range(1, max_iter + 1):
        grad = b - j @ alpha
        direction = project_capped_simplex(alpha + step * grad, c) - alpha
        stalled = float(np.max(np.abs(direction))) < 1e-16
        if stalled or it >= next_polish:
            res = kkt_residual(alpha, rd)
            if res < best_res:
                best, best_res = alpha, res
            if best_res <= tol:
                return DualSolution(best, dual_objective(best, rd), best_res, it, True)
            polished = _active_set(rd, alpha, max_rounds=40 * (k + 1))
            res_p = kkt_residual(polished, rd)
            if res_p < best_res:
                best, best_res = polished, res_p
            if best_res <= tol:
                return DualSolution(best, dual_objective(best, rd), best_res, it, True)
            next_polish = max(next_polish * 2, it + 1)
            if stalled:
                break
        beta, _ = optimal_step(float(direction @ grad), float(direction @ (j @ direction)), 1.0)
        if beta <= 0.0:
            break
        alpha = alpha + beta * direction

    res = kkt_residual(alpha, rd)
    if res < best_res:
        best, best_res = alpha, res
    if best_res > tol:
        # The line search can zero out before the first scheduled polish;
        # always leave through the active-set finisher.
        polished = _active_set(rd, best, max_rounds=40 * (k + 1))
        res_p = kkt_residual(polished, rd)
        if res_p < best_res:
            best, best_res = polished, res_p
    return DualSolution(best, dual_objective(best, rd), best_res, it, best_res <= tol)
