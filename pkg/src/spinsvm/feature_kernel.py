"""Ground-state feature map, its kernel, and working-set inner products.

The feature vector for a ground state |psi> doubles the register and adds
a control qubit,

    Phi(psi) = (|0>|0...0> + |1>|psi>|psi>) / sqrt(2),

so every feature vector has unit norm (radius R = 1) and inner products
reduce to a function of the state overlap:

    <Phi(psi_i), Phi(psi_j)> = (1 + <psi_i|psi_j>^2) / 2  in [1/2, 1].

Working-set constraints c in {0,1}^m act through the aggregate vector
Psi_c = (1/m) sum_i c_i y_i Phi(x_i); all quantities below are expressed
in kernel entries and never materialize feature space, except for the
explicit small-N helpers used to cross-check the reduction.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .spin_chain import _magnetization_weights

FEATURE_RADIUS = 1.0
EXPLICIT_MAX_SPINS = 5
DEFAULT_MAX_DENSE = 4000
_ROW_CACHE = 512
_BLOCK = 256


def feature_inner(psi_i: np.ndarray, psi_j: np.ndarray) -> float:
    psi_i = np.asarray(psi_i, dtype=float)
    psi_j = np.asarray(psi_j, dtype=float)
    if psi_i.shape != psi_j.shape:
        raise ValueError(f"amplitude vectors differ in shape: {psi_i.shape} vs {psi_j.shape}")
    overlap = float(psi_i @ psi_j)
    return 0.5 * (1.0 + overlap * overlap)


def explicit_feature(psi: np.ndarray) -> np.ndarray:
    """Materialized Phi(psi), dimension 2^(2N+1).  Cross-check scale only.

    Basis order is |control>|reg1>|reg2> with the control qubit most
    significant: the |0> branch occupies the first 2^(2N) slots (all of
    its weight on global index 0), the |1> branch holds psi (x) psi.
    """
    psi = np.asarray(psi, dtype=float)
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != (1 << n):
        raise ValueError(f"amplitude vector length {dim} is not a power of two")
    if n > EXPLICIT_MAX_SPINS:
        raise ValueError(f"explicit features are limited to N <= {EXPLICIT_MAX_SPINS} spins")
    out = np.zeros(2 * dim * dim)
    out[0] = 1.0
    out[dim * dim :] = np.kron(psi, psi)
    return out / np.sqrt(2.0)


class KernelCache:
    """Gram-matrix access that stays O(m * B) in memory for large m.

    Dense mode stores the full kernel matrix.  Above max_dense rows the
    cache keeps only the ground states and recomputes kernel rows in
    blocks, memoizing single rows LRU-style for repeated point queries.
    """

    def __init__(
        self,
        labels: np.ndarray,
        kernel: np.ndarray | None = None,
        psi_matrix: np.ndarray | None = None,
        max_dense: int = DEFAULT_MAX_DENSE,
    ) -> None:
        self.labels = np.asarray(labels, dtype=np.int64)
        self.m = self.labels.shape[0]
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be +-1")
        self._psi = None if psi_matrix is None else np.asarray(psi_matrix, dtype=float)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        if kernel is not None:
            kernel = np.asarray(kernel, dtype=float)
            if kernel.shape != (self.m, self.m):
                raise ValueError(f"kernel shape {kernel.shape} does not match m = {self.m}")
            self._k = 0.5 * (kernel + kernel.T)
        elif self._psi is not None:
            if self._psi.shape[0] != self.m:
                raise ValueError("psi_matrix row count does not match labels")
            if self.m <= max_dense:
                overlaps = self._psi @ self._psi.T
                k = 0.5 * (1.0 + overlaps * overlaps)
                self._k = 0.5 * (k + k.T)
            else:
                self._k = None
        else:
            raise ValueError("need a kernel matrix or a psi_matrix")

    @property
    def dense(self) -> bool:
        return self._k is not None

    @property
    def kernel(self) -> np.ndarray:
        if self._k is None:
            raise ValueError("kernel matrix not materialized in row mode")
        return self._k

    def _compute_rows(self, idx: np.ndarray) -> np.ndarray:
        overlaps = self._psi[idx] @ self._psi.T
        return 0.5 * (1.0 + overlaps * overlaps)

    def row(self, i: int) -> np.ndarray:
        if self._k is not None:
            return self._k[i]
        i = int(i)
        if i in self._rows:
            self._rows.move_to_end(i)
            return self._rows[i]
        r = self._compute_rows(np.array([i]))[0]
        self._rows[i] = r
        if len(self._rows) > _ROW_CACHE:
            self._rows.popitem(last=False)
        return r

    def entry(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def submatrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self._k is not None:
            return self._k[np.ix_(rows, cols)]
        return self._compute_rows(rows)[:, cols]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self._k is not None:
            return self._k @ v
        out = np.empty(self.m)
        for start in range(0, self.m, _BLOCK):
            idx = np.arange(start, min(start + _BLOCK, self.m))
            out[idx] = self._compute_rows(idx) @ v
        return out


def gram(ds: Dataset, max_dense: int = DEFAULT_MAX_DENSE) -> KernelCache:
    """Kernel cache over a dataset's ground states."""
    cache = KernelCache(ds.labels, psi_matrix=ds.psi_matrix, max_dense=max_dense)
    if cache.dense:
        k = cache.kernel
        if np.max(np.abs(np.diag(k) - 1.0)) > 1e-12:
            raise AssertionError("kernel diagonal drifted from 1")
        if k.min() < 0.5 - 1e-12 or k.max() > 1.0 + 1e-12:
            raise AssertionError("kernel entries left [1/2, 1]")
    return cache


def _support(c: np.ndarray, m: int) -> np.ndarray:
    c = np.asarray(c)
    if c.shape != (m,):
        raise ValueError(f"constraint length {c.shape} does not match m = {m}")
    return np.flatnonzero(c)


def psi_inner(c: np.ndarray, c2: np.ndarray, cache: KernelCache) -> float:
    """<Psi_c, Psi_c'> = (1/m^2) sum_{ij} c_i c'_j y_i y_j K_ij."""
    rows = _support(c, cache.m)
    cols = _support(c2, cache.m)
    if rows.size == 0 or cols.size == 0:
        return 0.0
    y = cache.labels
    sub = cache.submatrix(rows, cols)
    return float(y[rows] @ sub @ y[cols]) / (cache.m * cache.m)


@dataclass(frozen=True)
class PsiStats:
    norm: float
    eta: float
    ones: int


def psi_stats(c: np.ndarray, cache: KernelCache) -> PsiStats:
    """Norm of Psi_c and the scale eta_c = sqrt(|c|_1 / m) that bounds it."""
    ones = int(np.sum(np.asarray(c) != 0))
    norm = float(np.sqrt(max(psi_inner(c, c, cache), 0.0)))
    return PsiStats(norm=norm, eta=float(np.sqrt(ones / cache.m)), ones=ones)


def margin_inner(c: np.ndarray, i: int, cache: KernelCache) -> float:
    """<Psi_c, y_i Phi(x_i)> = (1/m) sum_j c_j y_j y_i K_ji."""
    cols = _support(c, cache.m)
    if cols.size == 0:
        return 0.0
    y = cache.labels
    return float(y[i]) * float(cache.row(int(i))[cols] @ y[cols]) / cache.m


def margin_vector(c: np.ndarray, cache: KernelCache) -> np.ndarray:
    """All margins <Psi_c, y_i Phi(x_i)> at once, one kernel matvec."""
    c = np.asarray(c, dtype=float)
    if c.shape != (cache.m,):
        raise ValueError(f"constraint length {c.shape} does not match m = {cache.m}")
    y = cache.labels.astype(float)
    return y * cache.matvec(c * y) / cache.m


def witness_vector(n_spins: int, mu0: float) -> np.ndarray:
    """Explicit normal vector separating the classes without training.

    W puts the squared-magnetization operator on the control-1 branch and
    -mu0 on the |0>|0...0> slot, so <W, Phi(psi)> = (M(psi) - mu0)/sqrt(2)
    and the sign of the inner product reproduces the label rule exactly.
    """
    if n_spins > EXPLICIT_MAX_SPINS:
        raise ValueError(f"witness construction is limited to N <= {EXPLICIT_MAX_SPINS} spins")
    dim = 1 << n_spins
    w = np.zeros(2 * dim * dim)
    w[0] = -mu0
    diag = _magnetization_weights(n_spins)
    idx = dim * dim + np.arange(dim) * (dim + 1)
    w[idx] = diag
    return w


def witness_check(ds: Dataset) -> bool:
    """True iff sign(<W, Phi(psi_i)>) matches every label (0 counts as +1)."""
    w = witness_vector(ds.config.n_spins, ds.config.mu0)
    for s in ds.samples:
        value = float(w @ explicit_feature(s.psi))
        pred = 1 if value >= 0 else -1
        if pred != s.label:
            return False
    return True
