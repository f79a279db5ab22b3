"""Ground-truth simulation of adaptive pooled-testing campaigns.

An episode draws a hidden infection state, then loops: select a pool with
the assumed test model, draw a noisy outcome from the true model, update.
Mismatched episodes keep two posteriors: the selection posterior sees the
assumed parameters, the scoring posterior sees the true ones; stopping
and entropy metrics are evaluated on the scoring posterior. Sweeps repeat
episodes over a grid of assumed-parameter cells with per-run seeds split
deterministically from one base seed, so any run is reproducible alone
and worker count never changes results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from pooltest.bounds import GaussianFit, InsufficientDataError, estimate_nu
from pooltest.design import Selection, StoppingConfig, select_group, stopping_met
from pooltest.model import Posterior, Prior, TestParams, TestRecord, prior_entropy


class UndefinedAUCError(ValueError):
    """AUC needs at least one infected and one healthy individual."""


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything one simulated campaign needs.

    truth_mode "prior" draws the hidden state from the prior; "fixed_k"
    places exactly k_infected infections uniformly at random. The seed
    feeds a dedicated generator per episode: ground truth first, then one
    uniform draw per test outcome.
    """

    prior: Prior
    true_params: TestParams
    assumed_params: TestParams
    stopping: StoppingConfig
    strategy: str = "exhaustive"
    truth_mode: str = "prior"
    k_infected: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.truth_mode not in ("prior", "fixed_k"):
            raise ValueError(f"unknown truth_mode: {self.truth_mode!r}")
        if self.truth_mode == "fixed_k" and not 0 <= self.k_infected <= self.prior.n:
            raise ValueError(
                f"k_infected={self.k_infected} outside population of {self.prior.n}"
            )
        if self.strategy not in ("exhaustive", "greedy"):
            raise ValueError(f"unknown selection strategy: {self.strategy!r}")
        expected = prior_entropy(self.prior)
        if abs(self.stopping.prior_entropy_bits - expected) > 1e-9:
            raise ValueError(
                "stopping.prior_entropy_bits disagrees with the prior: "
                f"{self.stopping.prior_entropy_bits} vs {expected}"
            )

    @property
    def matched(self) -> bool:
        return self.assumed_params == self.true_params


def make_stopping(prior: Prior, delta: float, max_tests: int) -> StoppingConfig:
    """StoppingConfig with the entropy reference taken from the prior."""
    return StoppingConfig(
        delta=delta, prior_entropy_bits=prior_entropy(prior), max_tests=max_tests
    )


@dataclass(frozen=True)
class StepRecord:
    """One test in an episode, recorded after the posterior updates."""

    group: int
    f: float
    outcome: int
    entropy_true: float
    entropy_selection: float
    marginals: np.ndarray


@dataclass(frozen=True)
class EpisodeTrace:
    """Full record of one episode."""

    x_true: int
    steps: Tuple[StepRecord, ...]
    stopped: bool
    prior_entropy_bits: float

    @property
    def stop_iteration(self) -> int:
        return len(self.steps)

    @property
    def f_values(self) -> List[float]:
        return [s.f for s in self.steps]

    @property
    def entropies_true(self) -> List[float]:
        return [s.entropy_true for s in self.steps]

    def first_crossing(self, delta: float, max_tests: int) -> int:
        """First iteration with scoring entropy at or below delta * H0;
        censored runs count as max_tests."""
        threshold = delta * self.prior_entropy_bits
        if delta >= 1.0:
            return 0
        for t, h in enumerate(self.entropies_true, start=1):
            if h <= threshold:
                return t
        return max_tests

    def marginals_after(self, t: int) -> np.ndarray:
        """Selection-posterior marginals after t tests (final state if the
        episode stopped earlier)."""
        if not self.steps or t <= 0:
            raise ValueError("no marginals recorded before the first test")
        return self.steps[min(t, len(self.steps)) - 1].marginals


def sample_ground_truth(cfg: EpisodeConfig, rng: np.random.Generator) -> int:
    """Draw the hidden infection state as a bitmask."""
    n = cfg.prior.n
    if cfg.truth_mode == "fixed_k":
        positions = rng.choice(n, size=cfg.k_infected, replace=False)
        state = 0
        for i in positions:
            state |= 1 << int(i)
        return state
    bits = rng.random(n) < cfg.prior.q
    return int(sum(1 << i for i in range(n) if bits[i]))


def simulate_outcome(group: int, x_true: int, true_params: TestParams, rng: np.random.Generator) -> int:
    """Draw one noisy test result for a pool against the hidden state."""
    if group <= 0:
        raise ValueError("cannot test an empty pool")
    p_pos = true_params.positive_prob(1 if group & x_true else 0)
    return int(rng.random() < p_pos)


def run_episode(cfg: EpisodeConfig, rng: Optional[np.random.Generator] = None) -> EpisodeTrace:
    """Simulate one adaptive campaign to stopping or budget exhaustion.

    Matched configs share a single posterior object for selection and
    scoring, so the two views are identical by construction.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    x_true = sample_ground_truth(cfg, rng)
    sel_post = Posterior.from_prior(cfg.prior)
    true_post = sel_post  # matched: one shared posterior
    matched = cfg.matched

    steps: List[StepRecord] = []
    entropy_true = true_post.entropy_bits()
    while len(steps) < cfg.stopping.max_tests and not stopping_met(entropy_true, cfg.stopping):
        sel: Selection = select_group(sel_post, cfg.assumed_params, cfg.strategy)
        outcome = simulate_outcome(sel.group, x_true, cfg.true_params, rng)
        sel_post = sel_post.updated(TestRecord(sel.group, outcome, cfg.assumed_params))
        if matched:
            true_post = sel_post
        else:
            true_post = true_post.updated(TestRecord(sel.group, outcome, cfg.true_params))
        entropy_true = true_post.entropy_bits()
        steps.append(
            StepRecord(
                group=sel.group,
                f=sel.f,
                outcome=outcome,
                entropy_true=entropy_true,
                entropy_selection=sel_post.entropy_bits(),
                marginals=sel_post.marginals(),
            )
        )
    return EpisodeTrace(
        x_true=x_true,
        steps=tuple(steps),
        stopped=stopping_met(entropy_true, cfg.stopping),
        prior_entropy_bits=cfg.stopping.prior_entropy_bits,
    )


def auc(marginals: Sequence[float], x_true: int, ties: str = "half") -> float:
    """Probability a random infected individual's marginal beats a random
    healthy one's.

    ties="half" scores equal marginals 0.5 (standard convention; the
    all-equal start then scores 0.5, not 0); ties="strict" counts only
    strict wins.
    """
    if ties not in ("half", "strict"):
        raise ValueError(f"unknown tie rule: {ties!r}")
    m = np.asarray(marginals, dtype=float)
    idx = np.arange(m.size)
    infected = (x_true >> idx) & 1 == 1
    pos, neg = m[infected], m[~infected]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedAUCError("need at least one infected and one healthy individual")
    diff = pos[:, None] - neg[None, :]
    wins = float(np.count_nonzero(diff > 0))
    if ties == "half":
        wins += 0.5 * float(np.count_nonzero(diff == 0))
    return wins / (pos.size * neg.size)


class StopStat(NamedTuple):
    mean: float
    std: float


@dataclass(frozen=True)
class CellReport:
    """Aggregates for one assumed-parameter cell of a sweep."""

    sigma_prime: float
    s_prime: float
    matched: bool
    n_runs: int
    mean_entropy: np.ndarray
    sem_entropy: np.ndarray
    stop_times: Dict[float, StopStat]
    stop_fraction: Dict[float, np.ndarray]
    auc_mean: Dict[int, float]
    fit: Optional[GaussianFit]


@dataclass(frozen=True)
class SweepReport:
    """Per-cell aggregates for a grid of assumed parameters."""

    cells: Tuple[CellReport, ...]
    runs: int
    base_seed: int
    deltas: Tuple[float, ...]
    checkpoints: Tuple[int, ...]
    max_tests: int
    prior_entropy_bits: float

    def cell(self, sigma_prime: float, s_prime: float) -> CellReport:
        for c in self.cells:
            if c.sigma_prime == sigma_prime and c.s_prime == s_prime:
                return c
        raise KeyError(f"no cell for sigma'={sigma_prime}, s'={s_prime}")


def _aggregate_cell(
    traces: Sequence[EpisodeTrace],
    sigma_prime: float,
    s_prime: float,
    matched: bool,
    max_tests: int,
    deltas: Sequence[float],
    checkpoints: Sequence[int],
    window: Tuple[int, int],
) -> CellReport:
    runs = len(traces)
    # Entropy matrix with carry-forward: stopped runs hold their final
    # entropy through later iterations (prior entropy if stopped at once).
    entropy = np.empty((runs, max_tests))
    for r, tr in enumerate(traces):
        seq = tr.entropies_true
        last = tr.prior_entropy_bits if not seq else seq[-1]
        padded = list(seq) + [last] * (max_tests - len(seq))
        entropy[r] = padded[:max_tests]
    mean_entropy = entropy.mean(axis=0)
    sem_entropy = entropy.std(axis=0, ddof=1) / np.sqrt(runs) if runs > 1 else np.zeros(max_tests)

    stop_times: Dict[float, StopStat] = {}
    stop_fraction: Dict[float, np.ndarray] = {}
    for d in deltas:
        crossings = np.array([tr.first_crossing(d, max_tests) for tr in traces], dtype=float)
        std = float(crossings.std(ddof=1)) if runs > 1 else 0.0
        stop_times[d] = StopStat(mean=float(crossings.mean()), std=std)
        ts = np.arange(1, max_tests + 1)
        stop_fraction[d] = (crossings[None, :] <= ts[:, None]).mean(axis=1)

    auc_mean: Dict[int, float] = {}
    for c in checkpoints:
        scores = []
        for tr in traces:
            try:
                scores.append(auc(tr.marginals_after(c), tr.x_true))
            except UndefinedAUCError:
                continue  # all-infected / all-healthy draws carry no AUC
        auc_mean[c] = float(np.mean(scores)) if scores else float("nan")

    try:
        fit = estimate_nu([tr.f_values for tr in traces], window=window)
    except InsufficientDataError:
        fit = None  # every run stopped before the fit window opened
    return CellReport(
        sigma_prime=sigma_prime,
        s_prime=s_prime,
        matched=matched,
        n_runs=runs,
        mean_entropy=mean_entropy,
        sem_entropy=sem_entropy,
        stop_times=stop_times,
        stop_fraction=stop_fraction,
        auc_mean=auc_mean,
        fit=fit,
    )


def run_sweep(
    base: EpisodeConfig,
    grid: Sequence[Tuple[float, float]],
    runs: int,
    checkpoints: Sequence[int] = (4, 8),
    deltas: Sequence[float] = (0.8, 0.7, 0.6),
    workers: int = 1,
    matched_window: Tuple[int, int] = (5, 15),
    mismatched_window: Tuple[int, int] = (3, 7),
) -> SweepReport:
    """Repeat episodes over a grid of assumed-parameter cells.

    grid entries are (sigma_prime, s_prime). Episodes run with the
    loosest stopping target in deltas; per-delta stop statistics are read
    off the recorded entropy traces afterward. Run r of cell c always
    draws from the seed split (base.seed, cell=c, run=r), so reports are
    identical for any worker count.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    deltas = tuple(deltas)
    checkpoints = tuple(checkpoints)
    run_delta = min(deltas)
    max_tests = base.stopping.max_tests
    if any(c < 1 or c > max_tests for c in checkpoints):
        raise ValueError(f"checkpoints must lie in 1..{max_tests}")

    cells: List[CellReport] = []
    for cell_idx, (sigma_p, s_p) in enumerate(grid):
        cell_params = TestParams(sensitivity=s_p, specificity=sigma_p)
        cfg = replace(
            base,
            assumed_params=cell_params,
            stopping=replace(base.stopping, delta=run_delta),
        )

        def one_run(r: int, _cfg: EpisodeConfig = cfg, _cell: int = cell_idx) -> EpisodeTrace:
            seq = np.random.SeedSequence(base.seed, spawn_key=(_cell, r))
            return run_episode(_cfg, rng=np.random.default_rng(seq))

        if workers == 1:
            traces = [one_run(r) for r in range(runs)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                traces = list(pool.map(one_run, range(runs)))
        window = matched_window if cfg.matched else mismatched_window
        cells.append(
            _aggregate_cell(
                traces, sigma_p, s_p, cfg.matched, max_tests, deltas, checkpoints, window
            )
        )
    return SweepReport(
        cells=tuple(cells),
        runs=runs,
        base_seed=base.seed,
        deltas=deltas,
        checkpoints=checkpoints,
        max_tests=max_tests,
        prior_entropy_bits=base.stopping.prior_entropy_bits,
    )
