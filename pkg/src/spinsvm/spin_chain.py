"""Transverse-field Ising chains with site-dependent couplings.

The Hamiltonian on N spins is

    H = - sum_j J_j Z_j Z_{j+1} + sum_j (D_j X_j + G_j Z_j),

acting on the computational basis |q_1 ... q_N> with q_1 the most
significant bit.  Periodic chains identify Z_{N+1} with Z_1; open chains
drop the j = N bond.  Coupling profiles are parameterized by a point
(J, Delta) in the plane:

    J_j = J * cos(k_J pi (j-1) / N),   D_j = Delta * sin(k_D pi j / N),

with a uniform longitudinal field G_j = Gamma.  Labels come from the
mean squared magnetization of the ground state,

    M(psi) = (1/N) <psi| (sum_j Z_j)^2 |psi>  in [0, N],

thresholded at mu0 (values on the threshold count as +1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

BOUNDARIES = ("periodic", "open")

# Eigenvector conventions: unit norm, first component above this
# threshold made positive, degenerate levels broken lexicographically.
SIGN_EPS = 1e-12
DEGENERACY_GAP = 1e-10
SYMMETRY_TOL = 1e-10
RESIDUAL_REL = 1e-9


@dataclass(frozen=True)
class ChainConfig:
    """Fixed chain family: everything except the sampled (J, Delta) point."""

    n_spins: int
    mu0: float
    k_j: int
    k_delta: int
    gamma: float
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if self.n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {self.n_spins}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if self.k_j < 0 or self.k_delta < 0:
            raise ValueError("profile indices k_j, k_delta must be >= 0")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")


@dataclass(frozen=True)
class CouplingPoint:
    """A sampled coupling-plane point x = (J, Delta)."""

    j: float
    delta: float


def coupling_profiles(
    config: ChainConfig, point: CouplingPoint
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Site-resolved couplings (J_j, D_j, G_j) for j = 1..N as arrays."""
    n = config.n_spins
    sites = np.arange(1, n + 1, dtype=float)
    j_bonds = point.j * np.cos(config.k_j * np.pi * (sites - 1.0) / n)
    delta_fields = point.delta * np.sin(config.k_delta * np.pi * sites / n)
    gamma_fields = np.full(n, float(config.gamma))
    return j_bonds, delta_fields, gamma_fields


@lru_cache(maxsize=32)
def _site_z(n: int) -> np.ndarray:
    """z[j, b] = <b|Z_{j+1}|b> for the n-spin computational basis."""
    basis = np.arange(1 << n, dtype=np.uint64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)[:, None]
    bits = (basis[None, :] >> shifts) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(float)


@lru_cache(maxsize=32)
def _magnetization_weights(n: int) -> np.ndarray:
    ones = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(float)
    w = (n - 2.0 * ones) ** 2 / n
    w.setflags(write=False)
    return w


def build_hamiltonian(
    j_bonds: np.ndarray,
    delta_fields: np.ndarray,
    gamma_fields: np.ndarray,
    boundary: str = "periodic",
) -> np.ndarray:
    """Dense H for the given site couplings.

    Arrays must share one length N >= 1.  The result is a real symmetric
    (2^N, 2^N) matrix; the diagonal carries the ZZ and Z terms, X_j flips
    the j-th bit.
    """
    j_bonds = np.asarray(j_bonds, dtype=float)
    delta_fields = np.asarray(delta_fields, dtype=float)
    gamma_fields = np.asarray(gamma_fields, dtype=float)
    n = j_bonds.shape[0]
    if delta_fields.shape != (n,) or gamma_fields.shape != (n,):
        raise ValueError("coupling arrays must share one length")
    if n < 1:
        raise ValueError("need at least one site")
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")

    dim = 1 << n
    z = _site_z(n)
    n_bonds = n if boundary == "periodic" else n - 1
    diag = gamma_fields @ z
    for j in range(n_bonds):
        diag -= j_bonds[j] * z[j] * z[(j + 1) % n]

    h = np.zeros((dim, dim))
    h[np.diag_indices(dim)] = diag
    basis = np.arange(dim)
    for j in range(n):
        flipped = basis ^ (1 << (n - 1 - j))
        h[basis, flipped] += delta_fields[j]
    return h


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    for x in psi:
        if abs(x) > SIGN_EPS:
            return psi if x > 0 else -psi
    return psi


def ground_state(h: np.ndarray) -> np.ndarray:
    """Lowest eigenvector of a symmetric matrix, deterministically chosen.

    Ties within DEGENERACY_GAP of the bottom eigenvalue are broken by
    picking the lexicographically greatest amplitude vector after the
    sign fix, so repeated calls on equal input agree bit for bit.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("Hamiltonian contains non-finite entries")
    asym = np.max(np.abs(h - h.T)) if h.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")

    try:
        evals, evecs = scipy.linalg.eigh(h)
    except scipy.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed to converge: {exc}") from exc

    cluster = np.flatnonzero(evals - evals[0] < DEGENERACY_GAP)
    best = None
    for idx in cluster:
        cand = _fix_sign(np.ascontiguousarray(evecs[:, idx]))
        if best is None or tuple(cand) > tuple(best):
            best = cand
    psi = best / np.linalg.norm(best)

    scale = float(np.max(np.abs(evals)))
    residual = float(np.linalg.norm(h @ psi - evals[0] * psi))
    if residual > RESIDUAL_REL * scale:
        raise RuntimeError(
            f"eigenpair residual {residual:.3e} exceeds {RESIDUAL_REL:.0e} * |H| = {RESIDUAL_REL * scale:.3e}"
        )
    return psi


def magnetization(psi: np.ndarray) -> float:
    """Mean squared magnetization (1/N) <psi|(sum_j Z_j)^2|psi>.

    Diagonal in the computational basis: basis state b contributes
    (N - 2 popcount(b))^2 / N.
    """
    psi = np.asarray(psi, dtype=float)
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != (1 << n):
        raise ValueError(f"amplitude vector length {dim} is not a power of two")
    return float(_magnetization_weights(n) @ (psi * psi))


def label_point(m_value: float, mu0: float) -> int:
    return 1 if m_value >= mu0 else -1


def ground_state_for(config: ChainConfig, point: CouplingPoint) -> np.ndarray:
    """Ground state of the chain at one coupling-plane point."""
    j_bonds, delta_fields, gamma_fields = coupling_profiles(config, point)
    h = build_hamiltonian(j_bonds, delta_fields, gamma_fields, config.boundary)
    return ground_state(h)
