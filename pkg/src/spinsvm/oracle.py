"""Inner-product estimation with calibrated Gaussian noise.

A hardware estimate of an inner product is modeled as the true value plus
N(0, sigma^2) noise with sigma chosen so that

    P(|error| <= eps) = 1 - delta  exactly:  sigma = eps / z,
    z = Phi^{-1}(1 - delta/2).

Draws are reproducible and schedule-independent: call k of an oracle
seeded with s uses the substream (s, k), so interleaving, batching, or
re-running any prefix of calls never changes a draw.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

MODES = ("exact", "gaussian")


def _check_tolerances(eps: float, delta: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def sigma_for(eps: float, delta: float) -> float:
    """Noise scale giving two-sided coverage 1 - delta at half-width eps."""
    _check_tolerances(eps, delta)
    return float(eps / ndtri(1.0 - delta / 2.0))


class InnerProductOracle:
    """Stateful estimator; `calls` counts every estimate ever made."""

    def __init__(self, mode: str = "exact", seed: int = 0) -> None:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.mode = mode
        self.seed = int(seed)
        self.calls = 0

    def _draw(self, sigma: float) -> float:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.calls,))
        )
        return float(rng.normal(0.0, sigma))

    def estimate(self, value: float, eps: float, delta: float) -> float:
        """One noisy (or exact) estimate of `value`; consumes one call slot."""
        _check_tolerances(eps, delta)
        out = float(value)
        if self.mode == "gaussian":
            out += self._draw(sigma_for(eps, delta))
        self.calls += 1
        return out

    def estimate_many(self, values: np.ndarray, eps: float, delta: float) -> np.ndarray:
        """Elementwise estimates; consumes one call slot per entry."""
        _check_tolerances(eps, delta)
        values = np.asarray(values, dtype=float)
        out = values.copy()
        if self.mode == "gaussian":
            sigma = sigma_for(eps, delta)
            flat = out.reshape(-1)
            for i in range(flat.size):
                flat[i] += self._draw(sigma)
                self.calls += 1
        else:
            self.calls += values.size
        return out
