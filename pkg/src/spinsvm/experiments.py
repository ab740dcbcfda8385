"""Benchmark harnesses: the two headline tables and the RBF baseline.

Table 1 sweeps the training-set size on a fixed N = 6 chain family,
reporting the smallest working-set norm psi_min, iteration count, test
accuracy of the oracle-trained model, and a classically trained RBF
baseline on the raw (J, Delta) coordinates.  Table 2 sweeps the chain
length with randomly drawn profile parameters and reports psi_min
statistics over instances; models there are trained on the full set.

Every quantity is a pure function of (configuration, seed): per-run
seeds are derived from the base seed and the row coordinates, not from
call order, and wall-clock timing is kept out of the report payload so
repeated runs are byte-identical.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .classifier import evaluate
from .dataset import Dataset, balance_ratio, generate, split
from .feature_kernel import KernelCache, gram
from .oracle import InnerProductOracle
from .spin_chain import ChainConfig
from .trainer import Model, TrainConfig, train, train_svmperf

TABLE1_CHAIN = dict(n_spins=6, mu0=1.8, k_j=1, k_delta=9, gamma=0.2)
TABLE1_M = (100, 1000)
TABLE2_N = (4, 5, 6, 7, 8)
SIZE_CAP = 10_000
BALANCE_LIMIT = 0.7
RBF_C_GRID = tuple(10.0**k for k in range(0, 6))
RBF_GAMMA_GRID = tuple(2.0**k for k in range(-4, 5))

# Table 2 profile draws: k_J in {1..4}, k_Delta in {1..10}, Gamma in [0.1, 1].
TABLE2_KJ = (1, 4)
TABLE2_KDELTA = (1, 10)
TABLE2_GAMMA = (0.1, 1.0)


def _derive(seed: int, *key: int) -> int:
    """Order-independent 64-bit seed for the (seed, key...) coordinate."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(2, np.uint64)[0])


def _generate_balanced(
    config, m: int, seed: int, key: tuple[int, ...], budget: int = 20
) -> Dataset:
    """Draw datasets until the label split is within BALANCE_LIMIT."""
    for attempt in range(budget):
        ds = generate(config, m, _derive(seed, *key, attempt))
        if balance_ratio(ds) <= BALANCE_LIMIT:
            return ds
    raise RuntimeError(
        f"no draw within balance limit {BALANCE_LIMIT} after {budget} attempts "
        f"for m = {m}, config {config}"
    )


@dataclass
class Table1Row:
    m: int
    psi_min: float
    iterations: int
    accuracy: float
    rbf_accuracy: float


@dataclass
class Table2Row:
    n_spins: int
    psi_min_mean: float
    psi_min_min: float
    psi_min_sd: float
    mean_iterations: float
    instances: int


@dataclass
class ExperimentReport:
    kind: str  # "table1" | "table2"
    seed: int
    rows: list = field(default_factory=list)
    wall_seconds: list = field(default_factory=list)  # stderr-only, not in TSV

    def to_tsv(self) -> str:
        if self.kind == "table1":
            lines = ["m\tpsi_min\titerations\taccuracy\trbf_accuracy"]
            for r in self.rows:
                lines.append(
                    f"{r.m}\t{r.psi_min:.10g}\t{r.iterations}\t"
                    f"{r.accuracy:.10g}\t{r.rbf_accuracy:.10g}"
                )
        else:
            lines = ["n\tpsi_min_mean\tpsi_min_min\tpsi_min_sd\tmean_iterations\tinstances"]
            for r in self.rows:
                lines.append(
                    f"{r.n_spins}\t{r.psi_min_mean:.10g}\t{r.psi_min_min:.10g}\t"
                    f"{r.psi_min_sd:.10g}\t{r.mean_iterations:.10g}\t{r.instances}"
                )
        return "\n".join(lines) + "\n"

    def write_tsv(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_tsv())

    def summary(self) -> str:
        label = "training-set sweep" if self.kind == "table1" else "chain-length sweep"
        out = [f"{label} (seed {self.seed}):"]
        for row, secs in zip(self.rows, self.wall_seconds):
            if self.kind == "table1":
                out.append(
                    f"  m={row.m}: psi_min={row.psi_min:.3e} iters={row.iterations} "
                    f"acc={row.accuracy:.3f} rbf={row.rbf_accuracy:.3f} [{secs:.1f}s]"
                )
            else:
                out.append(
                    f"  N={row.n_spins}: psi_min mean={row.psi_min_mean:.3e} "
                    f"min={row.psi_min_min:.3e} sd={row.psi_min_sd:.3e} "
                    f"iters={row.mean_iterations:.1f} ({row.instances} instances) [{secs:.1f}s]"
                )
        return "\n".join(out)


def _check_size(m: int) -> None:
    if m > SIZE_CAP:
        raise ValueError(
            f"m = {m} is out of scope for this desk-scale build (cap {SIZE_CAP}); "
            f"runs beyond the cap need the full-scale pipeline"
        )


def rbf_baseline(
    train_ds: Dataset,
    test_ds: Dataset,
    seed: int,
    c_grid: tuple = RBF_C_GRID,
    gamma_grid: tuple = RBF_GAMMA_GRID,
    holdout: float = 0.2,
    eps: float = 1e-2,
) -> float:
    """Grid-searched RBF classifier on raw (J, Delta), trained classically.

    Hyperparameters are picked on a holdout slice of the training set
    (ties go to the earliest grid entry, C varying slowest), the winner
    is retrained on the full training set, and test accuracy is returned.
    """
    fit_ds, hold_ds = split(train_ds, 1.0 - holdout, _derive(seed, 0))

    scores = np.zeros((len(c_grid), len(gamma_grid)))
    for gi, gamma_val in enumerate(gamma_grid):
        cache = _rbf_cache(fit_ds, gamma_val)
        for ci, c_val in enumerate(c_grid):
            model = train_svmperf(cache, C=c_val, eps=eps)
            preds = _rbf_predictions(model, fit_ds, hold_ds, gamma_val)
            scores[ci, gi] = np.mean(preds == hold_ds.labels)
    best_ci, best_gi = np.unravel_index(int(np.argmax(scores)), scores.shape)

    cache = _rbf_cache(train_ds, gamma_grid[best_gi])
    model = train_svmperf(cache, C=c_grid[best_ci], eps=eps)
    preds = _rbf_predictions(model, train_ds, test_ds, gamma_grid[best_gi])
    return float(np.mean(preds == test_ds.labels))


def _rbf_cache(ds: Dataset, gamma_val: float) -> KernelCache:
    sq = cdist(ds.points, ds.points, "sqeuclidean")
    return KernelCache(ds.labels, kernel=np.exp(-gamma_val * sq))


def _rbf_predictions(
    model: Model, fit_ds: Dataset, eval_ds: Dataset, gamma_val: float
) -> np.ndarray:
    v = model.alpha @ (model.constraints.astype(float) * fit_ds.labels[None, :])
    kx = np.exp(-gamma_val * cdist(fit_ds.points, eval_ds.points, "sqeuclidean"))
    values = v @ kx / fit_ds.m
    return np.where(values >= 0.0, 1, -1).astype(np.int64)


def run_table1(
    m_values: tuple = TABLE1_M,
    seed: int = 0,
    oracle_mode: str = "gaussian",
    train_cfg: TrainConfig = TrainConfig(),
    train_frac: float = 0.7,
    with_rbf: bool = True,
    max_dense: int = 4000,
) -> ExperimentReport:
    """Size sweep on the fixed N = 6 family; 70/30 split per size."""
    config = ChainConfig(**TABLE1_CHAIN)
    report = ExperimentReport(kind="table1", seed=seed)
    for m in m_values:
        _check_size(m)
        t0 = time.perf_counter()
        ds = _generate_balanced(config, m, seed, key=(1, m))
        train_part, test_part = split(ds, train_frac, _derive(seed, 2, m))
        orc = InnerProductOracle(oracle_mode, seed=_derive(seed, 3, m))
        model = train(gram(train_part, max_dense=max_dense), train_cfg, orc)
        acc_orc = InnerProductOracle(oracle_mode, seed=_derive(seed, 4, m))
        acc = evaluate(model, test_part, train_part, acc_orc, train_cfg.eps, train_cfg.delta)
        rbf_acc = (
            rbf_baseline(train_part, test_part, _derive(seed, 5, m)) if with_rbf else float("nan")
        )
        report.rows.append(Table1Row(m, model.psi_min, model.iterations, acc, rbf_acc))
        report.wall_seconds.append(time.perf_counter() - t0)
    return report


def _draw_table2_instance(n: int, m: int, seed: int, inst: int, budget: int = 40) -> Dataset:
    """One random-profile instance: redraw the whole profile (not just the
    point cloud) until the labels are within the balance limit.

    The transverse profile sin(k_Delta pi j / N) vanishes on gcd(k_Delta, N)
    of the sites; draws dark on half the chain or more sit close to
    classical diagonal Hamiltonians with trivially separable labels, so
    they are redrawn along with unbalanced ones.
    """
    for attempt in range(budget):
        rng = np.random.default_rng(_derive(seed, 6, n, inst, attempt))
        k_j = int(rng.integers(TABLE2_KJ[0], TABLE2_KJ[1] + 1))
        k_delta = int(rng.integers(TABLE2_KDELTA[0], TABLE2_KDELTA[1] + 1))
        gamma = float(rng.uniform(*TABLE2_GAMMA))
        if 2 * math.gcd(k_delta, n) >= n:
            continue
        config = ChainConfig(n_spins=n, mu0=0.3 * n, k_j=k_j, k_delta=k_delta, gamma=gamma)
        ds = generate(config, m, _derive(seed, 7, n, inst, attempt))
        if balance_ratio(ds) <= BALANCE_LIMIT:
            return ds
    raise RuntimeError(
        f"no profile draw within balance limit {BALANCE_LIMIT} after {budget} "
        f"attempts for N = {n}, instance {inst}"
    )


def run_table2(
    n_values: tuple = TABLE2_N,
    instances: int = 10,
    m: int = 1000,
    seed: int = 0,
    oracle_mode: str = "gaussian",
    train_cfg: TrainConfig = TrainConfig(),
    max_dense: int = 4000,
) -> ExperimentReport:
    """Chain-length sweep with random profiles; psi_min statistics per N."""
    _check_size(m)
    if instances < 1:
        raise ValueError(f"instances must be >= 1, got {instances}")
    report = ExperimentReport(kind="table2", seed=seed)
    for n in n_values:
        t0 = time.perf_counter()
        psi_mins = []
        iter_counts = []
        for inst in range(instances):
            ds = _draw_table2_instance(n, m, seed, inst)
            orc = InnerProductOracle(oracle_mode, seed=_derive(seed, 8, n, inst))
            model = train(gram(ds, max_dense=max_dense), train_cfg, orc)
            psi_mins.append(model.psi_min)
            iter_counts.append(model.iterations)
        psi_arr = np.array(psi_mins)
        sd = float(np.std(psi_arr, ddof=1)) if instances > 1 else 0.0
        report.rows.append(
            Table2Row(
                n_spins=n,
                psi_min_mean=float(psi_arr.mean()),
                psi_min_min=float(psi_arr.min()),
                psi_min_sd=sd,
                mean_iterations=float(np.mean(iter_counts)),
                instances=instances,
            )
        )
        report.wall_seconds.append(time.perf_counter() - t0)
    return report
