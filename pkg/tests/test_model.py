"""Core model tests: entropies, likelihoods, posterior updates, transforms.

Derived expectations are frozen from independent oracles: direct formula
evaluation for entropy values, hand enumeration for the small posterior
examples, and a naive per-group scan for the subset-sum transform.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pooltest.design import utility
from pooltest.model import (
    MAX_POPULATION,
    InconsistentEvidenceError,
    Posterior,
    Prior,
    TestParams,
    TestRecord,
    binary_entropy,
    group_from_members,
    group_hit,
    group_members,
    likelihood,
    prior_entropy,
)

# Frozen by direct evaluation of h(p) = -p log2 p - (1-p) log2 (1-p).
H_01 = 0.4689955935892812
H_08 = 0.7219280948873623


def dyadic_mass(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random posterior whose entries are exact multiples of 2**-40.

    Every partial sum of such a vector is itself an exact double, so any
    summation order produces bit-identical results; these fixtures make
    "equals exactly" assertions meaningful.
    """
    weights = rng.dirichlet(np.ones(1 << n))
    counts = rng.multinomial(1 << 40, weights)
    return counts / float(1 << 40)


def naive_infection_probs(mass: np.ndarray, n: int) -> np.ndarray:
    """O(4^n) reference: for each group, sum the mass of disjoint states."""
    out = np.zeros(1 << n)
    states = np.arange(1 << n)
    for g in range(1, 1 << n):
        out[g] = 1.0 - mass[(states & g) == 0].sum()
    return out


class TestBinaryEntropy:
    def test_extremes(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_frozen_values(self):
        assert binary_entropy(0.1) == pytest.approx(H_01, abs=1e-12)
        assert binary_entropy(0.8) == pytest.approx(H_08, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            binary_entropy(-0.1)
        with pytest.raises(ValueError):
            binary_entropy(1.1)

    def test_vectorized(self):
        vals = binary_entropy(np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(vals, [0.0, 1.0, 0.0])

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_symmetry(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)


class TestTestParams:
    def test_derived_constants(self):
        p = TestParams(sensitivity=0.9, specificity=0.6)
        assert p.rho == pytest.approx(0.5)
        assert p.gamma == pytest.approx(binary_entropy(0.9) - binary_entropy(0.6))
        assert p.h_sigma == pytest.approx(binary_entropy(0.6))

    def test_symmetric_gamma_is_exactly_zero(self):
        assert TestParams(0.8, 0.8).gamma == 0.0

    def test_rejects_uninformative(self):
        with pytest.raises(ValueError):
            TestParams(sensitivity=0.5, specificity=0.5)
        with pytest.raises(ValueError):
            TestParams(sensitivity=0.3, specificity=0.6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            TestParams(sensitivity=0.0, specificity=0.9)
        with pytest.raises(ValueError):
            TestParams(sensitivity=1.1, specificity=0.9)

    def test_noiseless_allowed(self):
        p = TestParams(1.0, 1.0)
        assert p.rho == 1.0
        assert p.gamma == 0.0

    def test_positive_prob(self):
        p = TestParams(0.8, 0.7)
        assert p.positive_prob(1) == 0.8
        assert p.positive_prob(0) == pytest.approx(0.3)


class TestPrior:
    def test_entropy_frozen(self):
        assert prior_entropy(Prior.uniform(10, 0.1)) == pytest.approx(4.68996, abs=5e-6)
        assert prior_entropy(Prior.uniform(3, 0.5)) == 3.0
        assert prior_entropy(Prior([0.1, 0.5])) == pytest.approx(1.468996, abs=5e-7)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            Prior([0.0, 0.5])
        with pytest.raises(ValueError):
            Prior([1.0])
        with pytest.raises(ValueError):
            Prior([])

    def test_population_cap(self):
        Prior.uniform(MAX_POPULATION, 0.1)
        with pytest.raises(ValueError):
            Prior.uniform(MAX_POPULATION + 1, 0.1)


class TestGroups:
    def test_group_hit(self):
        assert group_hit(0b011, 0b100) == 0
        assert group_hit(0b011, 0b010) == 1
        assert group_hit(0b111, 0b000) == 0

    def test_group_hit_width_check(self):
        with pytest.raises(ValueError):
            group_hit(0b1000, 0b001, n=3)

    def test_member_round_trip(self):
        assert group_members(0b1011) == [0, 1, 3]
        assert group_from_members([0, 1, 3], n=4) == 0b1011
        with pytest.raises(ValueError):
            group_from_members([4], n=4)


class TestLikelihood:
    def test_single_record_values(self):
        hit = 0b001  # state infects the tested singleton
        assert likelihood([TestRecord(0b001, 1, TestParams(1.0, 1.0))], hit) == 1.0
        assert likelihood([TestRecord(0b001, 1, TestParams(0.8, 0.8))], hit) == pytest.approx(0.8)
        miss = 0b010
        assert likelihood([TestRecord(0b001, 1, TestParams(0.8, 0.8))], miss) == pytest.approx(0.2)

    def test_factorizes(self):
        p = TestParams(0.8, 0.7)
        recs = [TestRecord(0b001, 1, p), TestRecord(0b011, 0, p)]
        single = [likelihood([r], 0b010) for r in recs]
        assert likelihood(recs, 0b010) == pytest.approx(single[0] * single[1])

    def test_outcome_validation(self):
        with pytest.raises(ValueError):
            TestRecord(0b1, 2, TestParams(0.8, 0.8))


class TestPosteriorUpdate:
    def test_hand_enumerated_example(self):
        # n=2 uniform, test individual 0 with s=sigma=0.8, observe positive:
        # unnormalized (0.25*0.2, 0.25*0.8, 0.25*0.2, 0.25*0.8) -> (.1,.4,.1,.4)
        post = Posterior.from_prior(Prior.uniform(2, 0.5))
        post = post.updated(TestRecord(0b01, 1, TestParams(0.8, 0.8)))
        np.testing.assert_allclose(post.mass, [0.1, 0.4, 0.1, 0.4], atol=1e-12)
        assert post.entropy_bits() == pytest.approx(1.721928, abs=5e-7)
        np.testing.assert_allclose(post.marginals(), [0.8, 0.5], atol=1e-12)

    def test_noiseless_negative_excludes_hits(self):
        post = Posterior.from_prior(Prior.uniform(3, 0.3))
        post = post.updated(TestRecord(0b011, 0, TestParams(1.0, 1.0)))
        states = np.arange(8)
        assert np.all(post.mass[(states & 0b011) != 0] == 0.0)

    def test_normalization_invariant(self):
        rng = np.random.default_rng(42)
        post = Posterior.from_prior(Prior.uniform(4, 0.2))
        p = TestParams(0.7, 0.9)
        for _ in range(50):
            record = TestRecord(int(rng.integers(1, 16)), int(rng.integers(2)), p)
            post = post.updated(record)
            assert post.mass_check() <= 1e-12

    def test_inconsistent_evidence_raises(self):
        post = Posterior.from_prior(Prior.uniform(2, 0.5))
        noiseless = TestParams(1.0, 1.0)
        post = post.updated(TestRecord(0b01, 1, noiseless))
        # a noiseless negative on the same singleton contradicts the
        # noiseless positive: every state loses all mass at once
        with pytest.raises(InconsistentEvidenceError):
            post.updated(TestRecord(0b01, 0, noiseless))

    def test_immutable_mass(self):
        post = Posterior.from_prior(Prior.uniform(2, 0.5))
        with pytest.raises(ValueError):
            post.mass[0] = 0.5

    @settings(deadline=None, max_examples=25)
    @given(st.data())
    def test_update_order_invariance(self, data):
        n = data.draw(st.integers(2, 4), label="n")
        params = TestParams(0.8, 0.7)
        k = data.draw(st.integers(2, 4), label="tests")
        records = [
            TestRecord(
                data.draw(st.integers(1, (1 << n) - 1)),
                data.draw(st.integers(0, 1)),
                params,
            )
            for _ in range(k)
        ]
        perm = data.draw(st.permutations(records), label="perm")
        base = Posterior.from_prior(Prior.uniform(n, 0.3))
        a = b = base
        for r in records:
            a = a.updated(r)
        for r in perm:
            b = b.updated(r)
        np.testing.assert_allclose(a.mass, b.mass, atol=1e-10)


class TestPosteriorEntropy:
    def test_uniform_and_point_mass(self):
        uniform = Posterior.from_mass(np.full(16, 1.0 / 16.0))
        assert uniform.entropy_bits() == pytest.approx(4.0, abs=1e-12)
        point = np.zeros(16)
        point[5] = 1.0
        assert Posterior.from_mass(point).entropy_bits() == 0.0


class TestInfectionProb:
    def test_independent_prior_closed_form(self):
        post = Posterior.from_prior(Prior.uniform(10, 0.1))
        assert post.infection_prob(0b11111) == pytest.approx(0.409510, abs=5e-7)

    def test_point_mass_and_full_group(self):
        point = np.zeros(8)
        point[0b101] = 1.0
        post = Posterior.from_mass(point)
        assert post.infection_prob(0b001) == 1.0
        assert post.infection_prob(0b010) == 0.0
        full = Posterior.from_prior(Prior.uniform(3, 0.2))
        assert full.infection_prob(0b111) == pytest.approx(1.0 - full.mass[0], abs=1e-15)

    def test_rejects_empty_group(self):
        post = Posterior.from_prior(Prior.uniform(3, 0.2))
        with pytest.raises(ValueError):
            post.infection_prob(0)

    def test_monotone_in_group(self):
        rng = np.random.default_rng(7)
        post = Posterior.from_mass(dyadic_mass(5, rng))
        probs = post.all_infection_probs()
        for g in range(1, 32):
            for i in range(5):
                wider = g | (1 << i)
                assert probs[g] <= probs[wider]


class TestAllInfectionProbs:
    def test_matches_naive_exactly(self):
        rng = np.random.default_rng(123)
        for n in range(2, 9):
            for _ in range(10):
                mass = dyadic_mass(n, rng)
                post = Posterior.from_mass(mass)
                got = post.all_infection_probs()
                want = naive_infection_probs(mass, n)
                assert np.array_equal(got, want), f"transform mismatch at n={n}"

    def test_empty_group_zero(self):
        post = Posterior.from_prior(Prior.uniform(4, 0.3))
        assert post.all_infection_probs()[0] == 0.0

    def test_independent_prior_closed_form(self):
        q = np.array([0.1, 0.25, 0.4])
        post = Posterior.from_prior(Prior(q))
        probs = post.all_infection_probs()
        for g in range(1, 8):
            healthy = np.prod([1.0 - q[i] for i in range(3) if g >> i & 1])
            assert probs[g] == pytest.approx(1.0 - healthy, abs=1e-12)

    def test_agrees_with_single_group_path(self):
        rng = np.random.default_rng(5)
        post = Posterior.from_mass(dyadic_mass(6, rng))
        probs = post.all_infection_probs()
        for g in rng.integers(1, 64, size=20):
            assert probs[g] == post.infection_prob(int(g))


class TestInformationAccounting:
    def test_expected_entropy_drop_equals_utility(self):
        # Outcome-weighted entropy of the two updated posteriors must fall
        # short of the current entropy by exactly the utility at the
        # group's hit probability.
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            mass = rng.dirichlet(np.ones(1 << n))
            post = Posterior.from_mass(mass)
            g = int(rng.integers(1, 1 << n))
            p = TestParams(
                sensitivity=float(rng.uniform(0.55, 0.99)),
                specificity=float(rng.uniform(0.55, 0.99)),
            )
            f = post.infection_prob(g)
            p1 = f * p.sensitivity + (1.0 - f) * (1.0 - p.specificity)
            up1 = post.updated(TestRecord(g, 1, p))
            up0 = post.updated(TestRecord(g, 0, p))
            lhs = p1 * up1.entropy_bits() + (1.0 - p1) * up0.entropy_bits()
            rhs = post.entropy_bits() - utility(f, p)
            assert lhs == pytest.approx(rhs, abs=1e-9)
