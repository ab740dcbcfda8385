"""Labeled coupling-point datasets and their on-disk CSV form.

A sample is a coupling point x = (J, Delta) with the ground state it
induces and the magnetization label.  Files store only (J, Delta, label);
ground states are recomputed on load and the stored label is checked
against the recomputed one, so a file paired with the wrong chain
configuration fails loudly instead of silently relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .spin_chain import ChainConfig, CouplingPoint, ground_state_for, label_point, magnetization

CSV_HEADER = "J,Delta,label"


@dataclass(eq=False)
class Sample:
    point: CouplingPoint
    label: int
    psi: np.ndarray


@dataclass(eq=False)
class Dataset:
    config: ChainConfig
    samples: list[Sample]
    seed: int | None = None

    @property
    def m(self) -> int:
        return len(self.samples)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    @cached_property
    def points(self) -> np.ndarray:
        """(m, 2) array of raw (J, Delta) coordinates."""
        return np.array([[s.point.j, s.point.delta] for s in self.samples])

    @cached_property
    def psi_matrix(self) -> np.ndarray:
        """(m, 2^N) row-stacked ground states."""
        return np.array([s.psi for s in self.samples])


def generate(
    config: ChainConfig,
    m: int,
    seed: int,
    low: float = -2.0,
    high: float = 2.0,
) -> Dataset:
    """Draw m points uniformly from [low, high]^2 and label them.

    Sample i uses the substream spawned from (seed, i), so any prefix of
    the dataset is independent of m and of evaluation order.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not low < high:
        raise ValueError(f"need low < high, got [{low}, {high}]")
    samples = []
    for child in np.random.SeedSequence(seed).spawn(m):
        rng = np.random.default_rng(child)
        j, delta = rng.uniform(low, high, size=2)
        point = CouplingPoint(float(j), float(delta))
        psi = ground_state_for(config, point)
        label = label_point(magnetization(psi), config.mu0)
        samples.append(Sample(point, label, psi))
    return Dataset(config, samples, seed)


def balance_ratio(ds: Dataset) -> float:
    """Fraction of the majority class, in [1/2, 1]."""
    if ds.m == 0:
        raise ValueError("empty dataset has no balance ratio")
    pos = int(np.sum(ds.labels == 1))
    return max(pos, ds.m - pos) / ds.m


def split(ds: Dataset, train_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffled train/test split with |train| = round(train_frac * m)."""
    if ds.m < 2:
        raise ValueError(f"cannot split a dataset with m = {ds.m}")
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    n_train = int(np.floor(train_frac * ds.m + 0.5))
    if n_train == 0 or n_train == ds.m:
        raise ValueError(f"train_frac {train_frac} leaves one side of the split empty")
    perm = np.random.default_rng(seed).permutation(ds.m)
    train = [ds.samples[i] for i in perm[:n_train]]
    test = [ds.samples[i] for i in perm[n_train:]]
    return Dataset(ds.config, train, ds.seed), Dataset(ds.config, test, ds.seed)


def save(ds: Dataset, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(CSV_HEADER + "\n")
        for s in ds.samples:
            fh.write(f"{float(s.point.j)!r},{float(s.point.delta)!r},{s.label}\n")


def load(path: str, config: ChainConfig) -> Dataset:
    """Read a CSV written by save() and rebuild ground states under config.

    Raises ValueError on a malformed file or when a stored label disagrees
    with the label recomputed from config (wrong chain parameters).
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or (len(lines) == 1 and not lines[0].strip()):
        raise ValueError(f"{path}: empty dataset file")
    if lines[0].strip() != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}, got {lines[0]!r}")
    rows = [ln for ln in lines[1:] if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: no samples after header")

    samples = []
    for lineno, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            j, delta = float(parts[0]), float(parts[1])
            label = int(parts[2])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: unparsable row {row!r}") from exc
        if label not in (1, -1):
            raise ValueError(f"{path}:{lineno}: label must be 1 or -1, got {label}")
        point = CouplingPoint(j, delta)
        psi = ground_state_for(config, point)
        recomputed = label_point(magnetization(psi), config.mu0)
        if recomputed != label:
            raise ValueError(
                f"{path}:{lineno}: stored label {label} disagrees with label {recomputed} "
                f"recomputed under the given chain configuration"
            )
        samples.append(Sample(point, label, psi))
    return Dataset(config, samples, None)
