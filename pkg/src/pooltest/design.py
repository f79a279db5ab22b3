"""Information-optimal pool design and stopping rules.

The one-test utility of pooling a group with infection probability f is
the mutual information between the unknown states and the test outcome,

    J(f) = h(rho f + 1 - sigma) - h(sigma) - gamma f   [bits],

a concave function of f with a closed-form maximizer. Selection searches
for the group whose posterior infection probability gives the largest J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Tuple

import numpy as np

from pooltest.model import Posterior, TestParams, binary_entropy

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DesignTarget:
    """The utility-maximizing group-infection probability for a test model."""

    f_star: float
    params: TestParams


@dataclass(frozen=True)
class StoppingConfig:
    """Entropy stopping rule: halt once posterior entropy falls to
    delta * prior_entropy_bits, or after max_tests regardless."""

    delta: float
    prior_entropy_bits: float
    max_tests: int

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if self.prior_entropy_bits < 0.0:
            raise ValueError("prior entropy must be non-negative")
        if self.max_tests < 1:
            raise ValueError("max_tests must be a positive count")

    @property
    def threshold_bits(self) -> float:
        return self.delta * self.prior_entropy_bits


class Selection(NamedTuple):
    """Chosen group with the posterior f and utility it was chosen at."""

    group: int
    f: float
    utility_bits: float


def utility(f, params: TestParams):
    """Expected information gain (bits) of one pooled test at hit
    probability f. Vectorized over f.

    The predictive positive probability is evaluated in the convex form
    f*s + (1-f)*(1-sigma) so that J(0) and J(1) are exactly 0.0 for
    symmetric entropy terms; ties between uninformative groups then
    resolve deterministically.
    """
    arr = np.asarray(f, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("f must lie in [0, 1]")
    u = arr * params.sensitivity + (1.0 - arr) * (1.0 - params.specificity)
    u = np.clip(u, 0.0, 1.0)  # guard one-ulp excursions from the products
    j = binary_entropy(u) - params.h_sigma - params.gamma * arr
    return float(j) if arr.ndim == 0 else j


def predictive_positive(f, params: TestParams):
    """P(next outcome = 1) at hit probability f: rho*f + 1 - sigma,
    computed as a convex combination so it stays inside [1-sigma, s]."""
    arr = np.asarray(f, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("f must lie in [0, 1]")
    u = arr * params.sensitivity + (1.0 - arr) * (1.0 - params.specificity)
    return float(u) if arr.ndim == 0 else u


def optimal_f(params: TestParams) -> DesignTarget:
    """Closed-form argmax of the utility.

    Setting J'(f) = 0 gives predictive probability u* = sigmoid(-gamma *
    ln2 / rho), hence f* = (u* - (1 - sigma)) / rho. The sigmoid form
    avoids overflow of 2**(gamma/rho) for extreme parameters. Symmetric
    s = sigma lands exactly on 0.5.
    """
    z = -params.gamma * _LN2 / params.rho
    if z >= 0.0:
        u_star = 1.0 / (1.0 + math.exp(-z))
    else:
        e = math.exp(z)
        u_star = e / (1.0 + e)
    f_star = (u_star - (1.0 - params.specificity)) / params.rho
    f_star = min(max(f_star, 1e-12), 1.0 - 1e-12)
    return DesignTarget(f_star=f_star, params=params)


def select_group(posterior: Posterior, params: TestParams, strategy: str = "exhaustive") -> Selection:
    """Pick the non-empty group maximizing the utility under the posterior.

    exhaustive: scans all 2**n - 1 groups via the subset-sum transform;
    ties broken by smallest group size, then smallest integer encoding,
    so replays are deterministic.

    greedy: forward selection, repeatedly adding the individual whose
    inclusion raises the utility most (lowest index on ties) until no
    single addition improves it.
    """
    probs = posterior.all_infection_probs()
    utils = utility(probs, params)
    if strategy == "exhaustive":
        best = np.max(utils[1:])
        ties = np.nonzero(utils == best)[0]
        ties = ties[ties > 0]
        sizes = np.bitwise_count(ties)
        ties = ties[sizes == sizes.min()]
        g = int(ties.min())
        return Selection(group=g, f=float(probs[g]), utility_bits=float(utils[g]))
    if strategy == "greedy":
        g = 0
        current = -np.inf
        while True:
            best_gain, best_g = current, g
            for i in range(posterior.n):
                bit = 1 << i
                if g & bit:
                    continue
                cand = g | bit
                if utils[cand] > best_gain:
                    best_gain, best_g = utils[cand], cand
            if best_g == g:
                break
            g, current = best_g, best_gain
        return Selection(group=g, f=float(probs[g]), utility_bits=float(utils[g]))
    raise ValueError(f"unknown selection strategy: {strategy!r}")


def stopping_met(entropy_now: float, cfg: StoppingConfig) -> bool:
    """True once the realized posterior entropy reaches the threshold."""
    if entropy_now < 0.0:
        raise ValueError("entropy cannot be negative")
    # the 2^n-state entropy and the per-individual prior sum are equal in
    # exact math but round differently, so the boundary case (delta = 1,
    # no tests yet) needs ulp-scale slack to register as met
    return entropy_now <= cfg.threshold_bits + 1e-12


def information_ledger(steps: Iterable[Tuple[float, TestParams]]) -> float:
    """Sum of per-test utilities along a trace of (f, params) pairs.

    This is the planned-information account of the campaign: the posterior
    entropy after t tests equals the prior entropy minus this sum in
    expectation, so ledger >= (1-delta)*H is the bound-side stopping rule.
    """
    return float(sum(utility(f, params) for f, params in steps))
