"""Design tests: utility curve, closed-form optimum, selection, stopping.

Independent oracles: the utility expectation is recomputed from the raw
entropy formula inline, the optimum is cross-checked by a coarse-to-fine
grid argmax, and exhaustive selection is checked against a brute-force
scan that applies the same tie-break by explicit key comparison.
"""

import numpy as np
import pytest

from pooltest.design import (
    DesignTarget,
    Selection,
    StoppingConfig,
    information_ledger,
    optimal_f,
    predictive_positive,
    select_group,
    stopping_met,
    utility,
)
from pooltest.model import Posterior, Prior, TestParams

from test_model import dyadic_mass

SWEEP = [round(0.55 + 0.05 * i, 2) for i in range(9)] + [0.99]


def entropy_formula(p: float) -> float:
    """Raw h(p), independent of the library implementation."""
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def utility_formula(f: float, s: float, sigma: float) -> float:
    """J(f) straight from its definition."""
    u = (s + sigma - 1.0) * f + 1.0 - sigma
    return entropy_formula(u) - entropy_formula(sigma) - (
        entropy_formula(s) - entropy_formula(sigma)
    ) * f


def grid_argmax(params: TestParams, rounds: int = 6, points: int = 1001) -> float:
    """Coarse-to-fine argmax of the utility; concavity makes zooming safe."""
    lo, hi = 0.0, 1.0
    for _ in range(rounds):
        xs = np.linspace(lo, hi, points)
        best = xs[int(np.argmax(utility(xs, params)))]
        width = (hi - lo) / (points - 1)
        lo, hi = max(0.0, best - 2 * width), min(1.0, best + 2 * width)
    return float(best)


def brute_force_selection(post: Posterior, params: TestParams) -> Selection:
    """Reference scan of every group with the documented tie-break."""
    best_key, best = None, None
    for g in range(1, 1 << post.n):
        f = post.infection_prob(g)
        j = utility(f, params)
        key = (-j, bin(g).count("1"), g)
        if best_key is None or key < best_key:
            best_key, best = key, Selection(group=g, f=f, utility_bits=j)
    return best


class TestUtility:
    def test_frozen_symmetric_value(self):
        assert utility(0.5, TestParams(0.8, 0.8)) == pytest.approx(0.278072, abs=5e-7)

    def test_matches_formula(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            s = float(rng.uniform(0.55, 1.0))
            sigma = float(rng.uniform(0.55, 1.0))
            f = float(rng.uniform(0.0, 1.0))
            assert utility(f, TestParams(s, sigma)) == pytest.approx(
                utility_formula(f, s, sigma), abs=1e-12
            )

    def test_noiseless_reduces_to_outcome_entropy(self):
        p = TestParams(1.0, 1.0)
        for f in (0.1, 0.25, 0.5, 0.9):
            assert utility(f, p) == pytest.approx(entropy_formula(f), abs=1e-12)

    def test_endpoints_exactly_zero(self):
        # exact zeros let point-mass tie-breaking compare utilities with ==
        for s in SWEEP:
            for sigma in SWEEP:
                p = TestParams(s, sigma)
                assert utility(0.0, p) == 0.0
                assert utility(1.0, p) == 0.0

    def test_non_negative_and_concave(self):
        xs = np.linspace(0.0, 1.0, 401)
        for s in SWEEP:
            for sigma in SWEEP:
                j = utility(xs, TestParams(s, sigma))
                assert np.all(j >= -1e-15)
                second = np.diff(j, 2)
                assert np.all(second <= 1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            utility(-0.01, TestParams(0.8, 0.8))
        with pytest.raises(ValueError):
            utility(1.01, TestParams(0.8, 0.8))

    def test_vectorized_matches_scalar(self):
        p = TestParams(0.9, 0.7)
        xs = np.array([0.0, 0.3, 0.77, 1.0])
        np.testing.assert_array_equal(utility(xs, p), [utility(float(x), p) for x in xs])


class TestOptimalF:
    def test_symmetric_params_exactly_half(self):
        for v in (0.55, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0):
            assert optimal_f(TestParams(v, v)).f_star == 0.5

    def test_frozen_asymmetric_value(self):
        target = optimal_f(TestParams(sensitivity=0.9, specificity=0.6))
        assert target.f_star == pytest.approx(0.534537, abs=1e-6)

    def test_matches_grid_argmax(self):
        for s in SWEEP:
            for sigma in SWEEP:
                p = TestParams(s, sigma)
                f_star = optimal_f(p).f_star
                assert f_star == pytest.approx(grid_argmax(p), abs=1e-6)
                assert 0.0 < f_star < 1.0

    def test_is_argmax_value(self):
        xs = np.linspace(0.0, 1.0, 2001)
        for s, sigma in [(0.9, 0.6), (0.6, 0.9), (0.99, 0.55), (0.8, 0.8)]:
            p = TestParams(s, sigma)
            assert utility(optimal_f(p).f_star, p) >= np.max(utility(xs, p)) - 1e-12


class TestPredictivePositive:
    def test_endpoints(self):
        p = TestParams(0.9, 0.7)
        assert predictive_positive(0.0, p) == pytest.approx(0.3, abs=1e-15)
        assert predictive_positive(1.0, p) == 0.9

    def test_symmetric_midpoint(self):
        assert predictive_positive(0.5, TestParams(0.8, 0.8)) == 0.5

    def test_stays_in_band(self):
        p = TestParams(0.85, 0.65)
        u = predictive_positive(np.linspace(0, 1, 101), p)
        assert np.all(u >= 1.0 - p.specificity) and np.all(u <= p.sensitivity)


class TestSelectGroup:
    def test_iid_prior_picks_seven_of_ten(self):
        post = Posterior.from_prior(Prior.uniform(10, 0.1))
        p = TestParams(0.8, 0.8)
        sel = select_group(post, p)
        assert bin(sel.group).count("1") == 7
        assert sel.group == 0b1111111  # tie-break settles on the lowest encoding
        assert sel.f == pytest.approx(1.0 - 0.9**7, abs=1e-12)
        assert sel.f == pytest.approx(0.521703, abs=5e-7)
        assert sel.utility_bits == pytest.approx(utility_formula(sel.f, 0.8, 0.8), abs=1e-12)
        # size 7 beats size 6: the margin itself is tiny but strict
        f6 = 1.0 - 0.9**6
        assert sel.utility_bits > utility(f6, p)

    def test_point_mass_returns_first_singleton(self):
        point = np.zeros(1 << 4)
        point[0b1010] = 1.0
        sel = select_group(Posterior.from_mass(point), TestParams(0.8, 0.8))
        assert sel == Selection(group=1, f=0.0, utility_bits=0.0)

    def test_greedy_agrees_on_iid_instance(self):
        post = Posterior.from_prior(Prior.uniform(10, 0.1))
        p = TestParams(0.8, 0.8)
        assert select_group(post, p, "greedy") == select_group(post, p, "exhaustive")

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(31)
        p = TestParams(0.85, 0.75)
        for _ in range(20):
            post = Posterior.from_mass(dyadic_mass(5, rng))
            assert select_group(post, p) == brute_force_selection(post, p)

    def test_deterministic(self):
        post = Posterior.from_prior(Prior.uniform(6, 0.15))
        p = TestParams(0.9, 0.8)
        assert select_group(post, p) == select_group(post, p)

    def test_unknown_strategy(self):
        post = Posterior.from_prior(Prior.uniform(3, 0.2))
        with pytest.raises(ValueError):
            select_group(post, TestParams(0.8, 0.8), "annealing")


class TestStopping:
    def test_trivial_deltas(self):
        h = 4.68996
        assert stopping_met(h, StoppingConfig(1.0, h, 30))
        assert not stopping_met(0.001, StoppingConfig(0.0, h, 30))
        assert stopping_met(0.0, StoppingConfig(0.0, h, 30))

    def test_threshold_example(self):
        cfg = StoppingConfig(0.6, 4.68996, 30)
        assert cfg.threshold_bits == pytest.approx(2.813976, abs=1e-6)
        assert not stopping_met(2.9, cfg)
        assert stopping_met(2.8, cfg)

    def test_validation(self):
        with pytest.raises(ValueError):
            StoppingConfig(1.5, 4.0, 30)
        with pytest.raises(ValueError):
            StoppingConfig(0.5, 4.0, 0)
        with pytest.raises(ValueError):
            StoppingConfig(0.5, -1.0, 30)
        with pytest.raises(ValueError):
            stopping_met(-0.1, StoppingConfig(0.5, 4.0, 30))


class TestInformationLedger:
    def test_empty_trace(self):
        assert information_ledger([]) == 0.0

    def test_single_step(self):
        p = TestParams(0.8, 0.8)
        assert information_ledger([(0.5, p)]) == pytest.approx(0.278072, abs=5e-7)

    def test_additive(self):
        p = TestParams(0.9, 0.7)
        steps = [(0.2, p), (0.5, p), (0.8, p)]
        assert information_ledger(steps) == pytest.approx(
            sum(utility(f, p) for f, _ in steps), abs=1e-12
        )


class TestDesignTarget:
    def test_carries_params(self):
        p = TestParams(0.9, 0.6)
        target = optimal_f(p)
        assert isinstance(target, DesignTarget)
        assert target.params == p
