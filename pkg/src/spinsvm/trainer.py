"""Cutting-plane training of the structural soft-margin l1-SVM.

Both trainers grow a working set of aggregate constraints c in {0,1}^m,
solve the restricted dual over it, and add the most violated constraint
c_i = 1[margin_i < 1] until the averaged hinge of the new constraint is
within tolerance of the current slack estimate.

train_svmperf runs the classical loop on exact kernel inner products.
train replaces every inner product with oracle estimates: the working-set
Gram matrix is re-estimated each iteration at a tightening tolerance
eps_J(t) = 1/(C t t_max), repaired onto the PSD cone, and margins are
estimated once per sample at fixed half-width eps.  The slack estimate is
inflated by 1/t_max and the stopping test compares against xi_hat + 2 eps
so that noise at the guaranteed coverage level cannot force a premature
or missed stop.

Per-iteration work is one kernel matvec (for the newly added constraint)
plus O(k^2) oracle calls, so dense-Gram training at m = 1000 takes
seconds and row-mode training at m = 10^4 stays within minutes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .feature_kernel import FEATURE_RADIUS, KernelCache, gram
from .oracle import InnerProductOracle
from .qp_solver import RestrictedDual, psd_project, solve_restricted_dual

TERMINATED_TOLERANCE = "tolerance"
TERMINATED_CAP = "cap"


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1e4
    eps: float = 1e-2
    delta: float = 1e-1
    t_max: int = 50

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")


@dataclass
class Model:
    """Trained state: working set, dual weights, and slack estimate.

    alpha is zero-padded to the full constraint list (the constraint
    added on the final iteration never enters a dual solve), so
    w = sum_c alpha_c Psi_c holds over `constraints` as stored.
    """

    constraints: np.ndarray  # (k, m) uint8
    alpha: np.ndarray  # (k,)
    xi_hat: float
    psi_min: float
    iterations: int
    terminated_by: str
    norms: np.ndarray  # (k,) exact ||Psi_c||
    kind: str  # "hybrid" | "cutting-plane"
    C: float
    eps: float
    delta: float = 0.0
    t_max: int = 0
    oracle_mode: str = "exact"
    oracle_seed: int = 0


@dataclass
class IterationRecord:
    t: int
    working_size: int  # constraints in the dual solve
    alpha: np.ndarray
    xi_hat: float
    hinge: float
    added: bool  # False when the drawn constraint was already present
    terminated: bool


def tolerance_schedule(t: int, cfg: TrainConfig, m: int) -> tuple[float, float, float]:
    """(eps_J, delta_J, delta_zeta) for iteration t >= 1.

    The Gram tolerance tightens as 1/(C t t_max) with confidence budget
    delta/(2 t^2 t_max); margin estimates share delta/(2 m t_max) each, so
    the total failure probability over a run stays below delta.
    """
    if t < 1:
        raise ValueError(f"iteration index must be >= 1, got {t}")
    eps_j = 1.0 / (cfg.C * t * cfg.t_max)
    delta_j = cfg.delta / (2.0 * t * t * cfg.t_max)
    delta_zeta = cfg.delta / (2.0 * m * cfg.t_max)
    return eps_j, delta_j, delta_zeta


def exact_jblock(constraints: np.ndarray, cache: KernelCache) -> np.ndarray:
    """Exact working-set Gram: J_cc' = <Psi_c, Psi_c'>."""
    constraints = np.atleast_2d(np.asarray(constraints))
    u = constraints.astype(float) * cache.labels[None, :]
    q = np.array([cache.matvec(row) for row in u])
    return (u @ q.T) / (cache.m * cache.m)


def estimate_jtilde(
    constraints: np.ndarray,
    cache: KernelCache,
    orc: InnerProductOracle,
    eps_j: float,
    delta_j: float,
    exact: np.ndarray | None = None,
) -> np.ndarray:
    """Noisy symmetric estimate of the working-set Gram.

    One oracle call per unordered pair, upper triangle in row-major
    order, mirrored below; fresh estimates on every invocation.
    """
    if exact is None:
        exact = exact_jblock(constraints, cache)
    k = exact.shape[0]
    jt = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            jt[i, j] = jt[j, i] = orc.estimate(exact[i, j], eps_j, delta_j)
    return jt


class _WorkingSet:
    """Constraint rows plus the cached matvecs that make iterations cheap."""

    def __init__(self, cache: KernelCache) -> None:
        self.cache = cache
        self.rows: list[np.ndarray] = []
        self._seen: set[bytes] = set()
        self.q: list[np.ndarray] = []  # K (c * y) per constraint
        self.ones: list[int] = []
        self.jx = np.zeros((0, 0))  # exact <Psi_c, Psi_c'> block

    @property
    def k(self) -> int:
        return len(self.rows)

    def add(self, c: np.ndarray) -> bool:
        c = np.asarray(c, dtype=np.uint8)
        key = c.tobytes()
        if key in self._seen:
            return False
        m = self.cache.m
        u = c.astype(float) * self.cache.labels
        q = self.cache.matvec(u)
        cross = np.array([u @ qi for qi in self.q]) / (m * m)
        diag = float(u @ q) / (m * m)
        jx = np.zeros((self.k + 1, self.k + 1))
        jx[: self.k, : self.k] = self.jx
        jx[-1, :-1] = jx[:-1, -1] = cross
        jx[-1, -1] = diag
        self.jx = jx
        self.rows.append(c)
        self._seen.add(key)
        self.q.append(q)
        self.ones.append(int(c.sum()))
        return True

    def margins(self, alpha: np.ndarray) -> np.ndarray:
        """Exact <w, y_i Phi(x_i)> for w = sum alpha_c Psi_c."""
        m = self.cache.m
        agg = np.zeros(m)
        for a, q in zip(alpha, self.q):
            if a != 0.0:
                agg += a * q
        return self.cache.labels * agg / m

    def norms(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.jx), 0.0))


def _psi_min(norms: np.ndarray) -> float:
    positive = norms[norms > 0.0]
    return float(positive.min()) if positive.size else 0.0


def _as_cache(data: Dataset | KernelCache, max_dense: int) -> KernelCache:
    if isinstance(data, KernelCache):
        return data
    return gram(data, max_dense=max_dense)


def _initial_constraint(c_init: np.ndarray | None, m: int) -> np.ndarray:
    if c_init is None:
        return np.ones(m, dtype=np.uint8)
    c = np.asarray(c_init, dtype=np.uint8)
    if c.shape != (m,) or not np.all((c == 0) | (c == 1)):
        raise ValueError("c_init must be a 0/1 vector of length m")
    return c


def train(
    data: Dataset | KernelCache,
    cfg: TrainConfig,
    orc: InnerProductOracle,
    c_init: np.ndarray | None = None,
    max_dense: int = 4000,
    trace: list[IterationRecord] | None = None,
) -> Model:
    """Oracle-based cutting-plane training (the hybrid loop).

    Raises RuntimeError if the restricted dual ever fails to converge;
    a repeated noisy constraint stops the run early as a cap exit (the
    restricted problem could no longer change).
    """
    cache = _as_cache(data, max_dense)
    m = cache.m
    ws = _WorkingSet(cache)
    ws.add(_initial_constraint(c_init, m))

    alpha = np.zeros(1)
    xi_hat = 1.0 / cfg.t_max
    terminated_by = TERMINATED_CAP
    iterations = 0
    for t in range(1, cfg.t_max + 1):
        iterations = t
        eps_j, delta_j, delta_zeta = tolerance_schedule(t, cfg, m)
        jt = estimate_jtilde(np.array(ws.rows), cache, orc, eps_j, delta_j, exact=ws.jx)
        jhat = psd_project(jt)
        b = np.array(ws.ones, dtype=float) / m
        sol = solve_restricted_dual(RestrictedDual(jhat, b, cfg.C))
        if not sol.converged:
            raise RuntimeError(
                f"restricted dual failed to converge at iteration {t} "
                f"(residual {sol.residual:.3e})"
            )
        alpha = sol.alpha
        xi_hat = max(float(np.max(b - jhat @ alpha)), 0.0) + 1.0 / cfg.t_max

        zetas = orc.estimate_many(ws.margins(alpha), cfg.eps, delta_zeta)
        hinge = float(np.mean(np.maximum(0.0, 1.0 - zetas)))
        c_new = (zetas < 1.0).astype(np.uint8)
        added = ws.add(c_new)

        stop = hinge <= xi_hat + 2.0 * cfg.eps
        if trace is not None:
            trace.append(IterationRecord(t, len(alpha), alpha.copy(), xi_hat, hinge, added, stop))
        if stop:
            terminated_by = TERMINATED_TOLERANCE
            break
        if not added:
            terminated_by = TERMINATED_CAP  # noisy duplicate: the dual is stuck
            break

    norms = ws.norms()
    full_alpha = np.zeros(ws.k)
    full_alpha[: alpha.shape[0]] = alpha
    return Model(
        constraints=np.array(ws.rows, dtype=np.uint8),
        alpha=full_alpha,
        xi_hat=float(xi_hat),
        psi_min=_psi_min(norms),
        iterations=iterations,
        terminated_by=terminated_by,
        norms=norms,
        kind="hybrid",
        C=cfg.C,
        eps=cfg.eps,
        delta=cfg.delta,
        t_max=cfg.t_max,
        oracle_mode=orc.mode,
        oracle_seed=orc.seed,
    )


def train_svmperf(
    data: Dataset | KernelCache,
    C: float,
    eps: float,
    t_max: int = 1000,
    c_init: np.ndarray | None = None,
    max_dense: int = 4000,
) -> Model:
    """Classical cutting-plane training on exact inner products.

    The kernel is whatever the cache holds, so the same loop serves the
    ground-state kernel and classical baselines.
    """
    if not C > 0 or not eps > 0:
        raise ValueError("C and eps must be positive")
    cache = _as_cache(data, max_dense)
    m = cache.m
    ws = _WorkingSet(cache)
    ws.add(_initial_constraint(c_init, m))

    alpha = np.zeros(1)
    xi = 0.0
    terminated_by = TERMINATED_CAP
    iterations = 0
    for t in range(1, t_max + 1):
        iterations = t
        b = np.array(ws.ones, dtype=float) / m
        sol = solve_restricted_dual(RestrictedDual(ws.jx, b, C))
        if not sol.converged:
            raise RuntimeError(
                f"restricted dual failed to converge at iteration {t} "
                f"(residual {sol.residual:.3e})"
            )
        alpha = sol.alpha
        xi = max(float(np.max(b - ws.jx @ alpha)), 0.0)

        margins = ws.margins(alpha)
        c_new = (margins < 1.0).astype(np.uint8)
        violation = float(np.mean(np.maximum(0.0, 1.0 - margins)))
        added = ws.add(c_new)
        if violation <= xi + eps:
            terminated_by = TERMINATED_TOLERANCE
            break
        if not added:
            terminated_by = TERMINATED_CAP
            break

    norms = ws.norms()
    full_alpha = np.zeros(ws.k)
    full_alpha[: alpha.shape[0]] = alpha
    return Model(
        constraints=np.array(ws.rows, dtype=np.uint8),
        alpha=full_alpha,
        xi_hat=float(xi),
        psi_min=_psi_min(norms),
        iterations=iterations,
        terminated_by=terminated_by,
        norms=norms,
        kind="cutting-plane",
        C=float(C),
        eps=float(eps),
    )


def primal_value(model: Model, cache: KernelCache) -> float:
    """P(w, xi_hat) = 1/2 ||w||^2 + C xi_hat with the exact Gram."""
    jx = exact_jblock(model.constraints, cache)
    return 0.5 * float(model.alpha @ jx @ model.alpha) + model.C * model.xi_hat


def hinge_mean(model: Model, cache: KernelCache) -> float:
    """(1/m) sum_i max(0, 1 - <w, y_i Phi(x_i)>) with exact margins.

    This equals the largest violation over all 2^m aggregate constraints,
    so hinge_mean(model) <= xi certifies (w, xi) feasible.
    """
    u = model.constraints.astype(float) * cache.labels[None, :]
    agg = np.zeros(cache.m)
    for a, row in zip(model.alpha, u):
        if a != 0.0:
            agg += a * cache.matvec(row)
    margins = cache.labels * agg / cache.m
    return float(np.mean(np.maximum(0.0, 1.0 - margins)))


MODEL_MAGIC = "spinsvm-model v1"


def save_model(model: Model, path: str) -> None:
    """Plain-text model file; floats are written with repr for exact round-trips."""
    lines = [
        MODEL_MAGIC,
        f"kind {model.kind}",
        f"C {model.C!r}",
        f"eps {model.eps!r}",
        f"delta {model.delta!r}",
        f"t_max {model.t_max}",
        f"oracle_mode {model.oracle_mode}",
        f"oracle_seed {model.oracle_seed}",
        f"m {model.constraints.shape[1]}",
        f"iterations {model.iterations}",
        f"terminated_by {model.terminated_by}",
        f"xi_hat {model.xi_hat!r}",
        f"psi_min {model.psi_min!r}",
        f"constraints {model.constraints.shape[0]}",
    ]
    for row, a, nrm in zip(model.constraints, model.alpha, model.norms):
        bits = "".join("1" if x else "0" for x in row)
        lines.append(f"{bits} {float(a)!r} {float(nrm)!r}")
    lines.append("end")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> Model:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file (bad magic line)")

    fields: dict[str, str] = {}
    idx = 1
    while idx < len(lines) and " " in lines[idx]:
        key, _, value = lines[idx].partition(" ")
        fields[key] = value
        idx += 1
        if key == "constraints":
            break
    required = [
        "kind", "C", "eps", "delta", "t_max", "oracle_mode", "oracle_seed",
        "m", "iterations", "terminated_by", "xi_hat", "psi_min", "constraints",
    ]
    missing = [key for key in required if key not in fields]
    if missing:
        raise ValueError(f"{path}: missing model fields {missing}")

    m = int(fields["m"])
    k = int(fields["constraints"])
    body = lines[idx : idx + k]
    if len(body) != k or idx + k >= len(lines) or lines[idx + k] != "end":
        raise ValueError(f"{path}: expected {k} constraint lines terminated by 'end'")
    constraints = np.zeros((k, m), dtype=np.uint8)
    alpha = np.zeros(k)
    norms = np.zeros(k)
    for row_no, line in enumerate(body):
        parts = line.split(" ")
        if len(parts) != 3 or len(parts[0]) != m or set(parts[0]) - {"0", "1"}:
            raise ValueError(f"{path}: malformed constraint line {row_no + 1}")
        constraints[row_no] = np.frombuffer(parts[0].encode("ascii"), dtype=np.uint8) - ord("0")
        alpha[row_no] = float(parts[1])
        norms[row_no] = float(parts[2])
    return Model(
        constraints=constraints,
        alpha=alpha,
        xi_hat=float(fields["xi_hat"]),
        psi_min=float(fields["psi_min"]),
        iterations=int(fields["iterations"]),
        terminated_by=fields["terminated_by"],
        norms=norms,
        kind=fields["kind"],
        C=float(fields["C"]),
        eps=float(fields["eps"]),
        delta=float(fields["delta"]),
        t_max=int(fields["t_max"]),
        oracle_mode=fields["oracle_mode"],
        oracle_seed=int(fields["oracle_seed"]),
    )


@dataclass
class AuditRow:
    t: int
    dual_before: float
    dual_after: float
    increase: float
    bound: float
    ok: bool


@dataclass
class AuditReport:
    rows: list[AuditRow] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(not r.ok for r in self.rows)


def dual_increase_audit(
    model: Model, cache: KernelCache, radius: float = FEATURE_RADIUS
) -> AuditReport:
    """Check the per-iteration dual increase of an exact-oracle run.

    Every iteration that did not fire the stopping test must raise the
    restricted dual optimum by at least min(C eps / 2, eps^2 / 8 R^2) -
    C / t_max.  Prefix duals are recomputed from scratch on the exact
    Gram, so this is an independent replay, not a log of the run.
    """
    jx = exact_jblock(model.constraints, cache)
    m = cache.m
    ones = model.constraints.sum(axis=1).astype(float)
    # The C/t_max slack mirrors the xi_hat inflation; the classical loop has neither.
    slack = model.C / model.t_max if model.t_max else 0.0
    bound = min(model.C * model.eps / 2.0, model.eps**2 / (8.0 * radius**2)) - slack

    def prefix_opt(k: int) -> float:
        rd = RestrictedDual(jx[:k, :k], ones[:k] / m, model.C)
        sol = solve_restricted_dual(rd)
        if not sol.converged:
            raise RuntimeError(f"audit dual failed to converge on prefix {k}")
        return sol.objective

    report = AuditReport()
    duals = [prefix_opt(k) for k in range(1, model.constraints.shape[0] + 1)]
    for t in range(1, model.iterations):  # iteration t solved prefix t, then grew it
        inc = duals[t] - duals[t - 1]
        report.rows.append(AuditRow(t, duals[t - 1], duals[t], inc, bound, inc >= bound))
    return report
