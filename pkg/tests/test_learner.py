import math

import numpy as np
import pytest

from paulikit import core
from paulikit.core import PauliDistribution, ShapeError, lp_distance
from paulikit.learner import (
    REGIME_CROSSOVER,
    REGIME_LARGE_EPS,
    REGIME_P_GE_2,
    REGIME_SMALL_EPS,
    learn_empirical,
    median_estimate,
    plan_sample_size,
    run_learning_trial,
)
from paulikit.quantum import SampleBatch, draw_samples


# ---------------------------------------------------------------------------
# Planner


def test_plan_pinned_values():
    assert plan_sample_size(1, 2, 0.5, 1 / 3).N_upper == 192  # 3 * 16 * 4
    assert plan_sample_size(math.inf, 3, 0.1, 1 / 3).N_upper == 300
    assert plan_sample_size(2, 3, 0.1, 0.1).N_upper == 1000  # exponent vanishes at p=2


def test_plan_regimes():
    assert plan_sample_size(1, 2, 0.5, 1 / 3).regime == REGIME_SMALL_EPS
    assert plan_sample_size(2, 3, 0.1, 0.1).regime == REGIME_P_GE_2
    # p=1.5, n=2: threshold 4^(-2/3) ~ 0.397, band up to ~0.794
    assert plan_sample_size(1.5, 2, 0.3, 0.5).regime == REGIME_SMALL_EPS
    assert plan_sample_size(1.5, 2, 0.5, 0.5).regime == REGIME_CROSSOVER
    assert plan_sample_size(1.5, 2, 0.9, 0.5).regime == REGIME_LARGE_EPS


def test_plan_tie_resolves_to_small_eps_branch():
    # exactly at the upper band edge both closed forms coincide; the branch
    # taken must be the small-eps one
    p, n = 1.5, 2
    eps = 2 * 4.0 ** (-(n * (p - 1)) / p)
    plan = plan_sample_size(p, n, eps, 0.5)
    expected = 4.0 ** (n * (2 - p) / p) * eps**-2
    assert plan.N_upper == math.ceil(expected / 0.5)
    assert plan.regime == REGIME_CROSSOVER


def test_plan_lower_bound_branches():
    # p=1: always the dimension-dependent branch
    plan = plan_sample_size(1, 2, 0.5, 1 / 3)
    assert plan.N_lower == math.ceil(16 * 4)
    # large-eps lower branch
    plan = plan_sample_size(1.5, 2, 0.9, 0.5)
    assert plan.N_lower == math.ceil((1 / 0.9) ** 3)
    assert plan.N_upper >= 1 and plan.N_lower >= 1


def test_plan_validation():
    with pytest.raises(ValueError):
        plan_sample_size(0.5, 2, 0.5, 0.5)
    with pytest.raises(ValueError):
        plan_sample_size(1, 2, 1.5, 0.5)
    with pytest.raises(ValueError):
        plan_sample_size(1, 0, 0.5, 0.5)


# ---------------------------------------------------------------------------
# Empirical learner


def test_learn_empirical_counting():
    batch = SampleBatch(n=1, outcomes=np.array([0, 0, 0, 0]), seed=(1,), count=4)
    assert learn_empirical(batch).as_mapping() == {0: 1.0}
    batch = SampleBatch(n=1, outcomes=np.array([0, 0, 1, 3]), seed=(1,), count=4)
    assert learn_empirical(batch).as_mapping() == {0: 0.5, 1: 0.25, 3: 0.25}


def test_learn_empirical_rejects_empty():
    with pytest.raises(ValueError):
        learn_empirical(SampleBatch(n=1, outcomes=np.array([], dtype=int), seed=(1,), count=0))


def test_learn_empirical_mass_and_support():
    P = core.depolarizing_channel(0.6, 2)
    batch = draw_samples(P, 500, 9)
    est = learn_empirical(batch)
    assert est.support_probs().sum() == pytest.approx(1.0, abs=1e-12)
    assert set(est.support().tolist()) == set(np.unique(batch.outcomes).tolist())


def test_median_estimate():
    a = PauliDistribution.from_sparse(1, {0: 0.5, 1: 0.5})
    assert median_estimate([a, a, a]).as_mapping() == pytest.approx(a.as_mapping())
    with pytest.raises(ValueError):
        median_estimate([])


# ---------------------------------------------------------------------------
# Trials


def test_trial_identity_channel_is_exact():
    P = core.identity_channel(2)
    plan = plan_sample_size(1, 2, 0.3, 1 / 3)
    trial = run_learning_trial(P, plan, 5)
    assert trial.error == 0.0 and trial.success


def test_trial_deterministic_under_seed():
    P = core.depolarizing_channel(0.3, 2)
    plan = plan_sample_size(1, 2, 0.3, 1 / 3)
    t1 = run_learning_trial(P, plan, (8, 0))
    t2 = run_learning_trial(P, plan, (8, 0))
    assert t1 == t2


def test_trial_shape_mismatch():
    plan = plan_sample_size(1, 2, 0.3, 1 / 3)
    with pytest.raises(ShapeError):
        run_learning_trial(core.identity_channel(3), plan, 0)


def test_planned_samples_meet_guarantee():
    # l1(P-hat, P) <= 0.3 in at least 2/3 of seeded trials at the planned N
    P = core.depolarizing_channel(0.5, 2)
    plan = plan_sample_size(1, 2, 0.3, 1 / 3)
    failures = sum(
        not run_learning_trial(P, plan, (10, t)).success for t in range(200)
    )
    assert failures <= 200 / 3


def test_error_improves_with_more_samples():
    # median lp error at 4N strictly below median at N
    for p, n in ((1, 2), (2, 3), (math.inf, 3)):
        P = core.depolarizing_channel(0.4, n)
        plan_small = plan_sample_size(p, n, 0.3, 1 / 3)
        med = {}
        for factor in (1, 4):
            errors = []
            for t in range(100):
                batch = draw_samples(P, plan_small.N_upper * factor, (11, factor, t))
                errors.append(lp_distance(learn_empirical(batch), P, p))
            med[factor] = np.median(errors)
        assert med[4] < med[1]


def test_dimension_growth_for_l1():
    # at fixed N, median l1 error grows like sqrt(4^n): ratio n=3 vs n=2
    # should be ~2, within a factor 1.5
    med = {}
    for n in (2, 3):
        P = core.uniform_channel(n)
        errors = []
        for t in range(100):
            batch = draw_samples(P, 4096, (12, n, t))
            errors.append(lp_distance(learn_empirical(batch), P, 1))
        med[n] = np.median(errors)
    ratio = med[3] / med[2]
    assert 2.0 / 1.5 <= ratio <= 2.0 * 1.5
