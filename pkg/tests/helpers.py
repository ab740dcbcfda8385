"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from spinsvm.dataset import Dataset, Sample, generate
from spinsvm.spin_chain import ChainConfig

# filled by the acceptance checks, replayed by the conftest summary hook
ACCEPTANCE_VERDICTS: list[str] = []


def small_config(n: int = 3, mu0: float | None = None, k_j: int = 1, k_delta: int = 2,
                 gamma: float = 0.3) -> ChainConfig:
    return ChainConfig(n, 0.45 * n if mu0 is None else mu0, k_j, k_delta, gamma)


def small_dataset(m: int = 24, seed: int = 5, n: int = 3, **kw) -> Dataset:
    return generate(small_config(n=n, **kw), m, seed)


def two_class_dataset(rng: np.random.Generator, n_lo: int = 2, n_hi: int = 4,
                      m_lo: int = 8, m_hi: int = 20, budget: int = 40) -> Dataset:
    """Random chain plus dataset, redrawn until both labels appear."""
    for _ in range(budget):
        n = int(rng.integers(n_lo, n_hi + 1))
        config = ChainConfig(
            n,
            float(rng.uniform(0.3, 0.7)) * n,
            int(rng.integers(0, 4)),
            int(rng.integers(1, 2 * n + 1)),
            float(rng.uniform(0.1, 1.0)),
        )
        m = int(rng.integers(m_lo, m_hi + 1))
        ds = generate(config, m, int(rng.integers(0, 2**31)))
        if len(set(ds.labels.tolist())) == 2:
            return ds
    raise RuntimeError("no two-class dataset within budget")


def flip_labels(ds: Dataset, rng: np.random.Generator, frac: float) -> Dataset:
    """Deterministically flip a fraction of labels to break separability."""
    n_flip = max(1, int(frac * ds.m))
    idx = set(rng.choice(ds.m, size=n_flip, replace=False).tolist())
    samples = tuple(
        Sample(s.point, -s.label if i in idx else s.label, s.psi)
        for i, s in enumerate(ds.samples)
    )
    return Dataset(ds.config, samples, seed=ds.seed)
