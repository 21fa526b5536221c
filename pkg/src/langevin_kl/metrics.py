"""Empirical estimators bridging Monte Carlo ensembles and the exact oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_oracle import GaussianLaw

__all__ = ["MomentSummary", "summarize", "empirical_w2_1d", "z_scores_vs_oracle"]


@dataclass(frozen=True)
class MomentSummary:
    """Unbiased moment estimates with standard errors.

    second_moment is defined as tr(cov) + ||mean||^2 so the identity holds
    exactly by construction.
    """

    mean: np.ndarray  # (d,)
    cov: np.ndarray  # (d, d), unbiased
    second_moment: float
    n: int
    mean_se: np.ndarray  # (d,)
    cov_se: np.ndarray  # (d, d)
    second_moment_se: float


def summarize(e) -> MomentSummary:
    """Moment summary of an Ensemble (or a raw (n, d) sample array)."""
    x = np.asarray(getattr(e, "states", e), dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected samples of shape (n, d), got {x.shape}")
    n, d = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 samples for standard errors, got {n}")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (n - 1)
    second = float(np.trace(cov) + mean @ mean)

    mean_se = np.sqrt(np.clip(np.diagonal(cov), 0.0, None) / n)
    # var of a covariance entry: Var[(x_a - mu_a)(x_b - mu_b)] / n
    sq = xc * xc
    second_prod = sq.T @ sq / n
    cov_var = np.clip(second_prod - cov * cov, 0.0, None)
    cov_se = np.sqrt(cov_var / n)
    s = np.sum(x * x, axis=1)
    second_se = float(s.std(ddof=1) / math.sqrt(n))

    return MomentSummary(
        mean=mean,
        cov=cov,
        second_moment=second,
        n=n,
        mean_se=mean_se,
        cov_se=cov_se,
        second_moment_se=second_se,
    )


def empirical_w2_1d(samples_a, samples_b) -> float:
    """1-D Wasserstein-2 between equal-size samples via the sorted coupling."""
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if a.size != b.size:
        raise ValueError(f"sample counts differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("need at least one sample")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _safe_z(diff: np.ndarray, se: np.ndarray) -> np.ndarray:
    diff = np.asarray(diff, dtype=float)
    se = np.asarray(se, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = diff / se
    z = np.where((se == 0) & (diff == 0), 0.0, z)
    return np.where((se == 0) & (diff != 0), np.inf * np.sign(diff), z)


def z_scores_vs_oracle(s: MomentSummary, law: GaussianLaw) -> dict:
    """(estimate - oracle)/SE for mean, covariance and second moment."""
    if s.mean.size != law.d:
        raise ValueError(f"dimension mismatch: summary d={s.mean.size}, law d={law.d}")
    oracle_second = float(np.trace(law.cov) + law.mean @ law.mean)
    return {
        "mean": _safe_z(s.mean - law.mean, s.mean_se),
        "cov": _safe_z(s.cov - law.cov, s.cov_se),
        "second_moment": float(_safe_z(s.second_moment - oracle_second, s.second_moment_se)),
    }
