"""Tests for trajectory sampling and the jackknife estimator."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import random_rank1_experiment
from tpm_lab.sampler import (
    TrajectorySample,
    estimate_exponential_average,
    sample_trajectories,
)
from tpm_lab.tpm import (
    distribution_from_joint,
    joint_distribution,
    mutual_information_table,
)

# 99.9% quantile of the chi-square distribution with 8 degrees of freedom
# (9 joint cells, 1 normalization constraint).
CHI2_8_Q999 = 26.12448155837614


def uniform_2x2():
    return distribution_from_joint(np.full((2, 2), 0.25))


def fixed_qutrit_scenario():
    """A fixed full-support scenario whose I_nm actually varies, so the
    estimator has nonzero spread and z-scores are defined."""
    experiment = random_rank1_experiment(3, np.random.default_rng(52))
    jd = joint_distribution(experiment)
    assert jd.full_support
    return jd, mutual_information_table(jd)


def test_point_mass_distribution():
    jd = distribution_from_joint(np.array([[1.0]]))
    samples = sample_trajectories(jd, 50, np.random.default_rng(0))
    assert all(s == TrajectorySample(0, 0) for s in samples)
    report = estimate_exponential_average(samples, np.array([[0.7]]))
    assert report.sample_count == 50
    assert report.mean == pytest.approx(np.exp(-0.7), abs=1e-15)
    assert report.std_error == 0.0
    assert report.z_score is None


def test_uniform_marginal_frequencies():
    count = 10_000
    samples = sample_trajectories(uniform_2x2(), count,
                                  np.random.default_rng(3))
    ns = np.array([s.first_outcome for s in samples])
    ms = np.array([s.second_outcome for s in samples])
    # Binomial(10^4, 1/2) has sigma = 50; allow 4 sigma.
    assert abs(ns.sum() - count / 2) < 200
    assert abs(ms.sum() - count / 2) < 200
    cells = np.zeros((2, 2))
    for n, m in zip(ns, ms):
        cells[n, m] += 1
    # Binomial(10^4, 1/4) has sigma ~ 43; allow 4 sigma.
    assert np.all(np.abs(cells - count / 4) < 175)


def test_sampling_is_deterministic_per_seed():
    jd = uniform_2x2()
    a = sample_trajectories(jd, 100, np.random.default_rng(11))
    b = sample_trajectories(jd, 100, np.random.default_rng(11))
    c = sample_trajectories(jd, 100, np.random.default_rng(12))
    assert a == b
    assert a != c


def test_never_samples_off_support():
    jd = distribution_from_joint(np.diag([0.5, 0.5]))
    samples = sample_trajectories(jd, 1000, np.random.default_rng(5))
    assert all(s.first_outcome == s.second_outcome for s in samples)


def test_zero_width_cells_never_selected():
    jd = distribution_from_joint(np.array([[0.5, 0.0, 0.5]]))
    samples = sample_trajectories(jd, 1000, np.random.default_rng(17))
    assert all(s.second_outcome in (0, 2) for s in samples)


def test_degenerate_distribution_raises():
    jd = distribution_from_joint(np.array([[1.0]]), support_epsilon=2.0)
    with pytest.raises(ValueError, match="degenerate"):
        sample_trajectories(jd, 10, np.random.default_rng(0))


def test_count_and_sample_validation():
    jd = uniform_2x2()
    with pytest.raises(ValueError):
        sample_trajectories(jd, 0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        estimate_exponential_average([], np.zeros((2, 2)))


def test_nonfinite_weight_rejected():
    samples = [TrajectorySample(0, 1)]
    weights = np.array([[0.0, np.nan], [0.0, 0.0]])
    with pytest.raises(ValueError, match=r"\(0, 1\)"):
        estimate_exponential_average(samples, weights)


def test_all_zero_weights():
    samples = sample_trajectories(uniform_2x2(), 200,
                                  np.random.default_rng(1))
    report = estimate_exponential_average(samples, np.zeros((2, 2)),
                                          exact=1.0)
    assert report.mean == 1.0
    assert report.std_error == 0.0
    assert report.exact_value == 1.0
    assert report.z_score is None


def test_single_sample_has_zero_std_error():
    samples = sample_trajectories(uniform_2x2(), 1,
                                  np.random.default_rng(9))
    report = estimate_exponential_average(samples,
                                          np.arange(4.0).reshape(2, 2))
    assert report.sample_count == 1
    assert report.std_error == 0.0
    assert report.z_score is None


def test_jackknife_matches_classic_standard_error():
    # For a plain sample mean the delete-one jackknife reduces exactly to
    # s / sqrt(n) with s the ddof=1 standard deviation.
    weights = np.array([[0.1, 0.7], [0.3, 1.9]])
    samples = sample_trajectories(uniform_2x2(), 500,
                                  np.random.default_rng(23))
    report = estimate_exponential_average(samples, weights)
    values = np.array([np.exp(-weights[s.first_outcome, s.second_outcome])
                       for s in samples])
    classic = np.std(values, ddof=1) / np.sqrt(len(values))
    assert report.mean == pytest.approx(values.mean(), abs=1e-15)
    assert report.std_error == pytest.approx(classic, rel=1e-12)


def test_z_score_within_three_sigma_on_full_support():
    jd, mi = fixed_qutrit_scenario()
    samples = sample_trajectories(jd, 100_000, np.random.default_rng(99))
    report = estimate_exponential_average(samples, mi.i_table,
                                          exact=mi.exp_average)
    assert report.exact_value == pytest.approx(1.0, abs=1e-10)
    assert abs(report.z_score) <= 3.0


def test_z_scores_roughly_standard_normal_across_seeds():
    jd, mi = fixed_qutrit_scenario()
    zs = []
    for seed in range(200):
        samples = sample_trajectories(jd, 10_000,
                                      np.random.default_rng(4000 + seed))
        report = estimate_exponential_average(samples, mi.i_table,
                                              exact=mi.exp_average)
        zs.append(report.z_score)
    zs = np.array(zs)
    assert abs(zs.mean()) <= 0.3
    assert 0.7 <= zs.std() <= 1.4


def test_empirical_frequencies_match_joint_chi_square():
    jd, _ = fixed_qutrit_scenario()
    count = 100_000
    passes = 0
    seeds = 40
    for seed in range(seeds):
        samples = sample_trajectories(jd, count,
                                      np.random.default_rng(5000 + seed))
        observed = np.zeros(jd.shape)
        for s in samples:
            observed[s.first_outcome, s.second_outcome] += 1
        expected = count * jd.p_joint
        statistic = float(np.sum((observed - expected) ** 2 / expected))
        # 9 cells, 1 constraint: 8 degrees of freedom.
        if statistic <= CHI2_8_Q999:
            passes += 1
    assert passes >= int(0.95 * seeds)
