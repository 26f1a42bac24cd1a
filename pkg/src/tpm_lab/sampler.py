"""Monte Carlo sampling of outcome pairs and exponential-average estimation.

Exponential averages are notoriously heavy-tailed estimators; this module
exists to demonstrate that behavior against the exact values, not to fix
it (no importance sampling, no variance reduction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .tpm import JointDistribution

__all__ = [
    "TrajectorySample",
    "EstimatorReport",
    "sample_trajectories",
    "estimate_exponential_average",
]


class TrajectorySample(NamedTuple):
    """One realized experiment: first outcome n, then second outcome m."""

    first_outcome: int
    second_outcome: int


@dataclass(frozen=True)
class EstimatorReport:
    """Sample mean with a jackknife error bar and optional exact comparison.

    ``z_score`` is (mean − exact)/std_error; it is None when no exact value
    was supplied or when the standard error is zero (single sample or a
    constant weight table).
    """

    sample_count: int
    mean: float
    std_error: float
    exact_value: float | None = None
    z_score: float | None = None


def sample_trajectories(jd: JointDistribution, count: int,
                        rng: np.random.Generator) -> list[TrajectorySample]:
    """Draw i.i.d. outcome pairs from the joint distribution.

    Inverse-CDF sampling: first n from p(n), then m from the row p(·|n).
    Mass below the distribution's support epsilon is dropped and the
    remainder renormalized, so every returned pair lies on the support
    mask. Deterministic for a fixed generator state.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    p = np.where(jd.support_mask, jd.p_joint, 0.0)
    row_mass = p.sum(axis=1)
    total = float(row_mass.sum())
    if total <= jd.support_epsilon:
        raise ValueError(
            "distribution is degenerate: all probability mass lies below "
            f"support epsilon {jd.support_epsilon:.1e}")

    first_cdf = np.cumsum(row_mass) / total
    # Zero-mass rows/cells occupy zero-width CDF intervals; searchsorted
    # with side='right' can never select them for u in [0, 1).
    ns = np.searchsorted(first_cdf, rng.random(count), side="right")
    ns = np.minimum(ns, p.shape[0] - 1)

    row_cdfs = np.cumsum(p, axis=1)
    row_totals = row_cdfs[:, -1].copy()
    row_totals[row_totals <= 0] = 1.0  # zero-mass rows are never selected
    row_cdfs /= row_totals[:, None]
    u = rng.random(count)
    ms = np.sum(row_cdfs[ns] <= u[:, None], axis=1)
    ms = np.minimum(ms, p.shape[1] - 1)
    return [TrajectorySample(int(n), int(m)) for n, m in zip(ns, ms)]


def estimate_exponential_average(samples: Sequence[TrajectorySample],
                                 weight_table,
                                 exact: float | None = None) -> EstimatorReport:
    """Estimate ⟨e^{−w}⟩ from sampled outcome pairs.

    ``weight_table[n, m]`` gives the exponent for pair (n, m); it must be
    finite at every sampled pair (off-support cells may be NaN — they are
    never sampled). The error bar is the delete-one jackknife standard
    error of the sample mean.
    """
    if not len(samples):
        raise ValueError("need at least one sample")
    w = np.asarray(weight_table, dtype=float)
    ns = np.fromiter((s.first_outcome for s in samples), dtype=np.intp,
                     count=len(samples))
    ms = np.fromiter((s.second_outcome for s in samples), dtype=np.intp,
                     count=len(samples))
    weights = w[ns, ms]
    if not np.all(np.isfinite(weights)):
        bad = int(np.flatnonzero(~np.isfinite(weights))[0])
        raise ValueError(
            f"non-finite weight at sampled pair "
            f"({ns[bad]}, {ms[bad]}): {weights[bad]!r}")
    values = np.exp(-weights)
    n = values.size
    mean = float(values.mean())
    if n == 1:
        std_error = 0.0
    else:
        loo = (values.sum() - values) / (n - 1)
        std_error = float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
    z_score = None
    if exact is not None and std_error > 0:
        z_score = (mean - float(exact)) / std_error
    return EstimatorReport(sample_count=n, mean=mean, std_error=std_error,
                           exact_value=None if exact is None else float(exact),
                           z_score=z_score)
