"""
Exact inference for noisy pooled tests
======================================

A population of n individuals has an unknown infection state, one bit
per person. Pooling several samples into one assay gives a test that
fires (noisily) when at least one pooled sample is infected. With n
small enough we can hold the full posterior over all 2**n states and
update it exactly after every result.
"""

import numpy as np

from pooltest import (
    InconsistentEvidenceError,
    Posterior,
    Prior,
    TestParams,
    TestRecord,
    group_from_members,
    group_members,
)

# Four people, each infected with probability 0.1 a priori.
prior = Prior.uniform(4, 0.1)
posterior = Posterior.from_prior(prior)
print(f"population        {prior.n}")
print(f"prior entropy     {posterior.entropy_bits():.6f} bits")

# The assay is imperfect: it detects an infected pool 80% of the time
# (sensitivity) and stays quiet on a clean pool 80% of the time
# (specificity).
params = TestParams(sensitivity=0.8, specificity=0.8)
print(f"test params       rho={params.rho:.2f}, gamma={params.gamma:.6f} bits")

# Pool individuals 0 and 2 and observe a positive result.
pool = group_from_members([0, 2], prior.n)
posterior = posterior.updated(TestRecord(group=pool, outcome=1, params=params))
print(f"\nafter positive on {group_members(pool)}:")
print(f"  entropy         {posterior.entropy_bits():.6f} bits")
print(f"  marginals       {np.round(posterior.marginals(), 4)}")

# A negative on the complementary pool pushes the other way.
other = group_from_members([1, 3], prior.n)
posterior = posterior.updated(TestRecord(group=other, outcome=0, params=params))
print(f"after negative on {group_members(other)}:")
print(f"  entropy         {posterior.entropy_bits():.6f} bits")
print(f"  marginals       {np.round(posterior.marginals(), 4)}")

# The posterior also answers pool-level questions: the probability that
# a hypothetical pool would contain at least one infected sample.
print(f"\nP(pool {group_members(pool)} infected) = {posterior.infection_prob(pool):.4f}")
probs = posterior.all_infection_probs()
print(f"all {probs.size} pool probabilities computed at once; max {probs.max():.4f}")

# Perfectly reliable tests admit no contradiction: seeing a positive and
# then a negative on the same singleton leaves no consistent state.
noiseless = TestParams(1.0, 1.0)
sure = Posterior.from_prior(prior).updated(TestRecord(0b0001, 1, noiseless))
try:
    sure.updated(TestRecord(0b0001, 0, noiseless))
except InconsistentEvidenceError as exc:
    print(f"\ncontradictory noiseless evidence rejected: {exc}")
