import math

import numpy as np
import pytest

from paulikit import core
from paulikit.quantum import SampleBatch, draw_samples
from paulikit.tester import (
    REGIME_LARGE_EPS,
    REGIME_MID_EPS,
    REGIME_SMALL_EPS,
    collision_norm_estimate,
    default_c_plan,
    plan_test_samples,
    run_test_roc,
)
from paulikit.tester import test_uniformity as uniformity_verdict

from conftest import random_dense


# ---------------------------------------------------------------------------
# Planner


def test_plan_pinned_values():
    # p=2, k=16, eps=0.2 < k^(-1/2)=0.25: small-eps row k^(-1/2) eps^-2
    assert plan_test_samples(2, 2, 0.2, 1.0).N == 7
    # p=1: threshold k^0 = 1, always the small-eps row: sqrt(k)/eps^2
    assert plan_test_samples(1, 2, 0.2, 1.0).N == 100
    # p=inf large-eps row: 1/eps
    plan = plan_test_samples(math.inf, 2, 0.5, 1.0)
    assert plan.N == 2 and plan.regime == REGIME_LARGE_EPS


def test_plan_regime_boundaries():
    # p <= 2 boundary at k^(-(p-1)/p) = 2^(-2n(p-1)/p)
    assert plan_test_samples(2, 2, 0.25, 1.0).regime == REGIME_LARGE_EPS
    assert plan_test_samples(2, 2, 0.2499, 1.0).regime == REGIME_SMALL_EPS
    # p > 2 boundaries at c_plan * n/4^n = 0.125 and 1/2^n = 0.25
    assert plan_test_samples(3, 2, 0.2, 1.0).regime == REGIME_MID_EPS
    assert plan_test_samples(3, 2, 0.12, 1.0).regime == REGIME_SMALL_EPS
    assert plan_test_samples(3, 2, 0.3, 1.0).regime == REGIME_LARGE_EPS
    # the small-eps boundary scales with c_plan
    assert plan_test_samples(3, 2, 0.3, 4.0).regime == REGIME_SMALL_EPS


def test_plan_epsilon_ranges():
    with pytest.raises(ValueError):
        plan_test_samples(1, 2, 1.2, 1.0)
    # p > 2 rows accept eps up to 2 and clamp N >= 1
    assert plan_test_samples(math.inf, 2, 1.8, 1.0).N == 1
    with pytest.raises(ValueError):
        plan_test_samples(math.inf, 2, 2.3, 1.0)


def test_default_c_plan_families():
    assert default_c_plan(1.5) == default_c_plan(2)
    assert default_c_plan(3) == default_c_plan(math.inf)
    assert default_c_plan(2) != default_c_plan(3)


# ---------------------------------------------------------------------------
# Collision statistic


def test_collision_estimate_extremes():
    all_same = SampleBatch(n=1, outcomes=np.array([2, 2, 2]), seed=(1,), count=3)
    assert collision_norm_estimate(all_same) == 1.0
    distinct = SampleBatch(n=1, outcomes=np.array([0, 1, 2, 3]), seed=(1,), count=4)
    assert collision_norm_estimate(distinct) == 0.0
    with pytest.raises(ValueError):
        collision_norm_estimate(SampleBatch(n=1, outcomes=np.array([0]), seed=(1,), count=1))


def test_collision_estimate_unbiased():
    # mean over many seeded batches within 4 standard errors of sum P(i)^2
    P = core.depolarizing_channel(0.5, 1)
    truth = float((P.to_dense() ** 2).sum())
    values = []
    for t in range(1000):
        batch = draw_samples(P, 40, (20, t))
        values.append(collision_norm_estimate(batch))
    stderr = np.std(values, ddof=1) / math.sqrt(len(values))
    assert abs(np.mean(values) - truth) < 4 * stderr


def test_collision_estimate_uniform_mean():
    values = []
    for t in range(100):
        batch = draw_samples(core.uniform_channel(2), 10**5, (21, t))
        values.append(collision_norm_estimate(batch))
    stderr = np.std(values, ddof=1) / 10.0
    assert abs(np.mean(values) - 1 / 16) < 3 * stderr


def test_statistic_vanishes_in_large_sample_limit():
    batch = draw_samples(core.uniform_channel(2), 10**6, 22)
    verdict = uniformity_verdict(batch, 1, 0.5)
    assert abs(collision_norm_estimate(batch) - 1 / 16) < 1e-3
    assert not verdict.reject


def test_l2_identity_for_random_distributions():
    # l2(P, U)^2 = sum P(i)^2 - 1/k, the algebra behind the threshold
    U = core.uniform_channel(2)
    for seed in range(10):
        P = random_dense(2, (23, seed))
        lhs = core.lp_distance(P, U, 2) ** 2
        rhs = float((P.to_dense() ** 2).sum()) - 1 / 16
        assert lhs == pytest.approx(rhs, abs=1e-12)


# ---------------------------------------------------------------------------
# Verdicts


def test_verdict_consistency_and_underpowered_flag():
    batch = draw_samples(core.uniform_channel(2), 8, 24)
    verdict = uniformity_verdict(batch, 1, 0.5)
    assert verdict.reject == (verdict.statistic > verdict.threshold)
    assert verdict.underpowered  # plan wants 96 samples at the calibrated c
    big = draw_samples(core.uniform_channel(2), 96, 24)
    assert not uniformity_verdict(big, 1, 0.5).underpowered


def test_point_mass_always_rejected():
    P = core.identity_channel(2)
    for p in (1, 2, math.inf):
        plan = plan_test_samples(p, 2, 0.5, default_c_plan(p))
        rejections = 0
        for t in range(50):
            batch = draw_samples(P, plan.N, (25, t))
            rejections += uniformity_verdict(batch, p, 0.5).reject
        assert rejections >= 2 * 50 / 3


def test_uniform_rarely_rejected():
    P = core.uniform_channel(2)
    for p in (1, 2, math.inf):
        plan = plan_test_samples(p, 2, 0.5, default_c_plan(p))
        rejections = 0
        for t in range(50):
            batch = draw_samples(P, plan.N, (26, t))
            rejections += uniformity_verdict(batch, p, 0.5).reject
        assert rejections <= 50 / 3


def test_rejection_rate_monotone_in_distance():
    # depolarizing family: l1(P_q, U) = 2 (1-q)(1 - 1/k); sweep distances
    # around the planned eps and check the rate never decreases
    eps, n, trials = 0.1, 2, 200
    rates = []
    for distance in (0.02, 0.05, eps, 2 * eps):
        q = 1.0 - distance / (2 * (1 - 1 / 16))
        P = core.depolarizing_channel(q, n)
        plan = plan_test_samples(1, n, eps, default_c_plan(1))
        rejections = sum(
            uniformity_verdict(draw_samples(P, plan.N, (27, round(1e3 * distance), t)), 1, eps).reject
            for t in range(trials)
        )
        rates.append(rejections / trials)
    assert rates[-1] >= rates[-2]  # rate at 2 eps >= rate at eps
    for lo, hi in zip(rates, rates[1:]):
        assert hi >= lo - 0.05  # non-decreasing up to Monte-Carlo slack


def test_roc_records():
    roc = run_test_roc(core.uniform_channel(2), 1, 0.5, trials=20, seed=28)
    assert roc.type_i_rate is not None and roc.type_ii_rate is None
    assert roc.type_i_rate <= 1 / 3
    roc = run_test_roc(core.identity_channel(2), 1, 0.5, trials=20, seed=29)
    assert roc.type_ii_rate is not None and roc.type_ii_rate <= 1 / 3
    assert roc.true_distance == pytest.approx(2 - 2 / 16)
    single = run_test_roc(core.identity_channel(2), 1, 0.5, trials=1, seed=30)
    again = run_test_roc(core.identity_channel(2), 1, 0.5, trials=1, seed=30)
    assert single == again
