"""Soft-margin structural SVMs over spin-chain ground states.

Datasets are labeled by a magnetization threshold on transverse-field
Ising ground states; training runs a cutting-plane method whose kernel
entries can be replaced by bounded-noise estimates, mimicking a quantum
device that only returns inner products to finite precision.
"""

from .classifier import evaluate, predict, predict_many
from .dataset import Dataset, Sample, generate, load, save, split
from .feature_kernel import (
    KernelCache,
    explicit_feature,
    feature_inner,
    gram,
    witness_vector,
)
from .oracle import InnerProductOracle, sigma_for
from .qp_solver import RestrictedDual, psd_project, solve_restricted_dual
from .spin_chain import (
    ChainConfig,
    CouplingPoint,
    build_hamiltonian,
    ground_state,
    ground_state_for,
    magnetization,
)
from .trainer import (
    Model,
    TrainConfig,
    dual_increase_audit,
    load_model,
    save_model,
    train,
    train_svmperf,
)

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "CouplingPoint",
    "Dataset",
    "InnerProductOracle",
    "KernelCache",
    "Model",
    "RestrictedDual",
    "Sample",
    "TrainConfig",
    "build_hamiltonian",
    "dual_increase_audit",
    "evaluate",
    "explicit_feature",
    "feature_inner",
    "generate",
    "gram",
    "ground_state",
    "ground_state_for",
    "load",
    "load_model",
    "magnetization",
    "predict",
    "predict_many",
    "psd_project",
    "save",
    "save_model",
    "sigma_for",
    "solve_restricted_dual",
    "split",
    "train",
    "train_svmperf",
    "witness_vector",
]
