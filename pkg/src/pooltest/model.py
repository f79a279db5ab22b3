"""Exact probabilistic model for noisy pooled testing.

A population of n individuals has unknown binary infection states. States
and pools (groups) are encoded as n-bit integers: bit i set means
individual i is infected / included. The posterior over all 2**n states is
stored densely, so everything here is exact inference; population size is
capped at MAX_POPULATION.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Dense 2**n posteriors: above this the exact engine refuses to run.
MAX_POPULATION = 20

_LOG2 = np.log(2.0)


class InconsistentEvidenceError(ValueError):
    """All posterior mass vanished: the observed results contradict a
    noiseless test parameter (only reachable when s == 1 or sigma == 1)."""


def binary_entropy(p):
    """Entropy of a Bernoulli(p) in bits, with 0*log(0) == 0.

    Accepts scalars or arrays; raises for values outside [0, 1].
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"probability outside [0, 1]: {p}")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(arr * np.log2(arr) + (1.0 - arr) * np.log2(1.0 - arr))
    h = np.where((arr == 0.0) | (arr == 1.0), 0.0, h)
    return float(h) if np.isscalar(p) or getattr(p, "ndim", 0) == 0 else h


@dataclass(frozen=True)
class TestParams:
    """Sensitivity / specificity of one pooled test, with derived constants.

    rho = sensitivity + specificity - 1 must be positive: a test with
    rho <= 0 carries no information and is rejected outright. gamma and
    h_sigma (bits) are always recomputed from the two inputs.
    """

    __test__ = False  # "Test" prefix is domain language, not a pytest class

    sensitivity: float
    specificity: float
    rho: float = field(init=False, repr=False)
    gamma: float = field(init=False, repr=False)
    h_sigma: float = field(init=False, repr=False)

    def __post_init__(self):
        s, sigma = self.sensitivity, self.specificity
        if not (0.0 < s <= 1.0 and 0.0 < sigma <= 1.0):
            raise ValueError(f"sensitivity/specificity must lie in (0, 1]: s={s}, sigma={sigma}")
        rho = s + sigma - 1.0
        if rho <= 0.0:
            raise ValueError(f"uninformative test: s + sigma - 1 = {rho} <= 0")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "gamma", binary_entropy(s) - binary_entropy(sigma))
        object.__setattr__(self, "h_sigma", binary_entropy(sigma))

    def positive_prob(self, hit: int) -> float:
        """P(Y = 1) given whether the pool contains an infected member."""
        return self.sensitivity if hit else 1.0 - self.specificity


@dataclass(frozen=True)
class TestRecord:
    """One observed pooled-test result and the parameters assumed when it
    was incorporated into a posterior."""

    __test__ = False  # "Test" prefix is domain language, not a pytest class

    group: int
    outcome: int
    params: TestParams

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome}")
        if self.group < 0:
            raise ValueError("group bitmask must be non-negative")


class Prior:
    """Independent Bernoulli prior: individual i is infected w.p. q[i]."""

    def __init__(self, q: Sequence[float] | np.ndarray):
        q = np.asarray(q, dtype=float)
        if q.ndim != 1 or q.size < 1:
            raise ValueError("prior must be a non-empty 1-d probability vector")
        if q.size > MAX_POPULATION:
            raise ValueError(f"population {q.size} exceeds exact-inference cap {MAX_POPULATION}")
        if np.any(q <= 0.0) or np.any(q >= 1.0):
            raise ValueError("prior probabilities must lie strictly inside (0, 1)")
        self.q = q
        self.q.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.q.size)

    def entropy_bits(self) -> float:
        return float(np.sum(binary_entropy(self.q)))

    @classmethod
    def uniform(cls, n: int, q: float) -> "Prior":
        return cls(np.full(n, float(q)))


def prior_entropy(prior: Prior) -> float:
    """Total prior uncertainty in bits: sum of per-individual entropies."""
    return prior.entropy_bits()


def group_hit(group: int, state: int, n: int | None = None) -> int:
    """1 iff the pool and the infection state share a set bit."""
    if n is not None:
        limit = 1 << n
        if group >= limit or state >= limit:
            raise ValueError(f"group/state wider than population size {n}")
    return 1 if (group & state) else 0


def likelihood(records: Iterable[TestRecord], state: int) -> float:
    """Probability of a sequence of test results given a fixed state.

    Results are conditionally independent given the state, so this is a
    plain product of per-test factors.
    """
    prob = 1.0
    for rec in records:
        p = rec.params
        hit = 1 if (rec.group & state) else 0
        if rec.outcome == 1:
            prob *= 1.0 - p.specificity + p.rho * hit
        else:
            prob *= p.specificity - p.rho * hit
    return prob


def group_members(group: int) -> list[int]:
    """Indices of the individuals pooled in a group bitmask."""
    out = []
    i = 0
    g = group
    while g:
        if g & 1:
            out.append(i)
        g >>= 1
        i += 1
    return out


def group_from_members(members: Iterable[int], n: int) -> int:
    mask = 0
    for i in members:
        if not 0 <= i < n:
            raise ValueError(f"individual index {i} outside population of {n}")
        mask |= 1 << i
    return mask


class Posterior:
    """Dense probability mass over all 2**n infection states.

    Immutable: updates return new instances, so posteriors can be shared
    freely across threads. Mass is kept both linearly and in the log
    domain; updates happen in logs to survive long test sequences, then
    renormalize.
    """

    __slots__ = ("n", "mass", "log_mass")

    def __init__(self, n: int, mass: np.ndarray, log_mass: np.ndarray):
        self.n = n
        self.mass = mass
        self.log_mass = log_mass
        self.mass.setflags(write=False)
        self.log_mass.setflags(write=False)

    @classmethod
    def from_prior(cls, prior: Prior) -> "Posterior":
        n = prior.n
        states = np.arange(1 << n, dtype=np.int64)
        log_mass = np.zeros(1 << n)
        for i in range(n):
            bit = (states >> i) & 1
            log_mass += np.where(bit == 1, np.log(prior.q[i]), np.log1p(-prior.q[i]))
        return cls._from_log(n, log_mass)

    @classmethod
    def from_mass(cls, mass: Sequence[float] | np.ndarray) -> "Posterior":
        """Build a posterior from an explicit mass vector of length 2**n.

        The vector must already be normalized to 1 within 1e-9; it is kept
        bit-for-bit (division by the exact total only), so exact-arithmetic
        test fixtures survive construction.
        """
        mass = np.asarray(mass, dtype=float)
        size = mass.size
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise ValueError(f"mass length must be a power of two >= 2, got {size}")
        if n > MAX_POPULATION:
            raise ValueError(f"population {n} exceeds exact-inference cap {MAX_POPULATION}")
        if np.any(mass < 0.0):
            raise ValueError("mass entries cannot be negative")
        total = float(mass.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mass must sum to 1, got {total}")
        mass = mass / total
        with np.errstate(divide="ignore"):
            log_mass = np.log(mass)
        return cls(n, mass, log_mass)

    @classmethod
    def _from_log(cls, n: int, log_unnorm: np.ndarray) -> "Posterior":
        peak = np.max(log_unnorm)
        if peak == -np.inf:
            raise InconsistentEvidenceError(
                "posterior mass is identically zero: results contradict a "
                "noiseless sensitivity/specificity of 1"
            )
        mass = np.exp(log_unnorm - peak)
        total = mass.sum()
        mass = mass / total
        log_mass = log_unnorm - (peak + np.log(total))
        return cls(n, mass, log_mass)

    def updated(self, record: TestRecord) -> "Posterior":
        """Condition on one test result (Bayes in the log domain)."""
        if record.group >= (1 << self.n):
            raise ValueError(f"group wider than population size {self.n}")
        p = record.params
        states = np.arange(1 << self.n, dtype=np.int64)
        hit = (states & record.group) != 0
        if record.outcome == 1:
            q_hit, q_miss = p.sensitivity, 1.0 - p.specificity
        else:
            q_hit, q_miss = 1.0 - p.sensitivity, p.specificity
        with np.errstate(divide="ignore"):
            log_factor = np.where(hit, np.log(q_hit), np.log(q_miss))
        return Posterior._from_log(self.n, self.log_mass + log_factor)

    def entropy_bits(self) -> float:
        m = self.mass
        nz = m > 0.0
        return float(-np.sum(m[nz] * np.log2(m[nz])))

    def marginals(self) -> np.ndarray:
        """Per-individual infection probabilities under the current mass."""
        states = np.arange(1 << self.n, dtype=np.int64)
        out = np.empty(self.n)
        for i in range(self.n):
            out[i] = self.mass[(states >> i) & 1 == 1].sum()
        return out

    def infection_prob(self, group: int) -> float:
        """Probability the pool contains at least one infected member."""
        if group <= 0 or group >= (1 << self.n):
            raise ValueError(f"group must be a non-empty subset of the {self.n} individuals")
        states = np.arange(1 << self.n, dtype=np.int64)
        f = 1.0 - self.mass[(states & group) == 0].sum()
        return float(min(max(f, 0.0), 1.0))

    def all_infection_probs(self) -> np.ndarray:
        """Infection probability of every group, indexed by group bitmask.

        Uses the subset-sum (zeta) transform: after the i-th pass,
        acc[m] holds the mass of all states whose bits outside the first
        i positions match m. Total cost O(n * 2**n) instead of O(4**n).
        """
        acc = self.mass.copy()
        for i in range(self.n):
            half = 1 << i
            acc = acc.reshape(-1, half << 1)
            acc[:, half:] += acc[:, :half]
        acc = acc.ravel()  # acc[m] = P(state is a subset of m)
        full = (1 << self.n) - 1
        out = 1.0 - acc[full ^ np.arange(1 << self.n)]
        out[0] = 0.0  # empty pool can never contain an infected member
        np.clip(out, 0.0, 1.0, out=out)  # shed one-ulp drift off long update chains
        return out

    def mass_check(self) -> float:
        """|sum(mass) - 1|, useful for invariant assertions."""
        return abs(float(self.mass.sum()) - 1.0)
