"""Empirical (plug-in) learning of the error distribution with exact
sample-size planning.

The learner itself is the obvious one: draw N samples, report observed
frequencies.  What makes it usable is the planner, which turns a target
norm order p, accuracy epsilon and failure probability delta into the exact
sufficient sample count, and reports the matching order-of-magnitude lower
bound alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LpParams, PauliDistribution, ShapeError, lp_distance
from .quantum import SampleBatch, draw_samples
from .rng import normalize_seed

REGIME_SMALL_EPS = "small-eps"
REGIME_CROSSOVER = "crossover"
REGIME_LARGE_EPS = "large-eps"
REGIME_P_GE_2 = "p-ge-2"


@dataclass(frozen=True)
class SamplePlan:
    """Planned sample count for learning to lp accuracy epsilon.

    ``N_upper`` is an exact sufficient count (including the 1/delta
    prefactor).  ``N_lower`` is the matching lower-bound formula evaluated
    with constant 1 -- an order-of-magnitude floor, not a certified bound,
    so ``N_upper >= N_lower`` is not guaranteed.
    """

    p: float
    epsilon: float
    delta: float
    n: int
    N_upper: int
    N_lower: int
    regime: str


def plan_sample_size(p: float, n: int, epsilon: float, delta: float) -> SamplePlan:
    """Sufficient (and floor) sample counts for the plug-in learner.

    Branch structure for 1 <= p < 2 (with threshold t = 4^(-n(p-1)/p)):
    below t the dimension-dependent eps^-2 rate applies, above 2t the
    dimension-free rate applies, and in the crossover band [t, 2t] both
    orders collapse to 4^n.  For p >= 2 the count is dimension-free.
    Boundary ties resolve to the small-epsilon branch (the larger count).
    """
    params = LpParams(p, epsilon, delta)
    p, epsilon, delta = params.p, params.epsilon, params.delta
    if n <= 0:
        raise ValueError(f"qubit count must be positive, got {n}")

    if p >= 2:
        regime = REGIME_P_GE_2
        upper = epsilon**-2
        lower = epsilon**-2
    else:
        threshold = 4.0 ** (-(n * (p - 1.0)) / p)
        if epsilon <= threshold:
            regime = REGIME_SMALL_EPS
        elif epsilon <= 2.0 * threshold:
            regime = REGIME_CROSSOVER
        else:
            regime = REGIME_LARGE_EPS

        if epsilon <= 2.0 * threshold:
            upper = 4.0 ** (n * (2.0 - p) / p) * epsilon**-2
        else:
            upper = 0.25 * (2.0 / epsilon) ** (p / (p - 1.0))
        if epsilon <= threshold:
            lower = 4.0 ** (n * (2.0 - p) / p) * epsilon**-2
        else:
            lower = (1.0 / epsilon) ** (p / (p - 1.0))

    return SamplePlan(
        p=p,
        epsilon=epsilon,
        delta=delta,
        n=n,
        N_upper=max(1, math.ceil(upper / delta)),
        N_lower=max(1, math.ceil(lower)),
        regime=regime,
    )


def learn_empirical(samples: SampleBatch) -> PauliDistribution:
    """Observed-frequency estimate; its support is the set of seen outcomes."""
    if samples.count < 1:
        raise ValueError("cannot learn from an empty batch")
    values, counts = np.unique(samples.outcomes, return_counts=True)
    weights = dict(zip(values.tolist(), (counts / samples.count).tolist()))
    return PauliDistribution.from_sparse(samples.n, weights)


def median_estimate(estimates: list[PauliDistribution]) -> PauliDistribution:
    """Coordinate-wise median of independent estimates, renormalized once.

    Optional confidence boost; the plain planner guarantee never relies on
    it.
    """
    if not estimates:
        raise ValueError("need at least one estimate")
    n = estimates[0].n
    if any(e.n != n for e in estimates):
        raise ShapeError("estimates describe different system sizes")
    union = np.array(sorted(set().union(*(e.support().tolist() for e in estimates))))
    stacked = np.zeros((len(estimates), len(union)))
    for row, est in enumerate(estimates):
        pos = np.searchsorted(union, est.support())
        stacked[row, pos] = est.support_probs()
    med = np.median(stacked, axis=0)
    total = med.sum()
    if total <= 0:
        raise ValueError("median estimate has no mass")
    return PauliDistribution.from_sparse(n, dict(zip(union.tolist(), (med / total).tolist())))


@dataclass(frozen=True)
class LearningTrial:
    """One planned learning run against a known channel."""

    error: float
    success: bool
    N: int
    seed: tuple[int, ...]


def run_learning_trial(P: PauliDistribution, plan: SamplePlan, seed) -> LearningTrial:
    """Draw plan.N_upper fresh samples, learn, and score the lp error."""
    if plan.n != P.n:
        raise ShapeError(f"plan is for n={plan.n}, channel has n={P.n}")
    batch = draw_samples(P, plan.N_upper, seed)
    estimate = learn_empirical(batch)
    error = lp_distance(estimate, P, plan.p)
    return LearningTrial(
        error=error,
        success=bool(error <= plan.epsilon),
        N=plan.N_upper,
        seed=normalize_seed(seed),
    )
