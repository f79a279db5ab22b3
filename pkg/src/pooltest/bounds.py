"""Closed-form sample-complexity machinery.

A quadratic minorant of the utility turns the stopping-time question into
moment arithmetic: if the achieved hit probabilities behave like draws
from N(f_center, nu^2), the information collected by test T concentrates,
and Chebyshev's inequality lower-bounds the probability that the entropy
target is met. The same algebra prices the penalty for designing with
wrong test parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from pooltest.design import optimal_f
from pooltest.model import TestParams


class InsufficientDataError(ValueError):
    """Too few trace samples to fit a Gaussian."""


class InfeasibleBoundError(ValueError):
    """Mean per-test information under the minorant is not positive, so
    the bound is vacuous for these inputs."""


@dataclass(frozen=True)
class GaussianFit:
    """Normal fit of the achieved hit probabilities across iterations."""

    mean: float
    nu: float
    window: Tuple[int, int]

    def __post_init__(self):
        if self.nu < 0.0:
            raise ValueError("nu is a standard deviation and cannot be negative")


class MinorantMoments(NamedTuple):
    B_A: float
    E_F: float
    V_F: float


@dataclass(frozen=True)
class ComplexityReport:
    """Everything the bound machinery can say about one configuration."""

    A: float
    B_A: float
    E_F: float
    V_F: float
    T_E: float
    feasible: bool
    f_star: float
    alpha: Optional[float] = None
    f_prime: Optional[float] = None
    probability_curve: Dict[int, float] = field(default_factory=dict)


def quadratic_coeff(params: TestParams, A: float) -> float:
    """Linear coefficient B_A of the quadratic minorant.

    B_A = 2A(0.5 - sigma)rho + gamma: substituting u = rho x + 1 - sigma
    into h(u) >= -A(u - 0.5)^2 + 1 and collecting the x term picks up
    +gamma from the -gamma*x part of the utility.
    """
    return 2.0 * A * (0.5 - params.specificity) * params.rho + params.gamma


def J_quadratic(x, params: TestParams, A: float = 4.0):
    """Quadratic minorant of the utility at hit probability x.

    For A = 4 this never exceeds utility(x) because h(u) >= -4(u-0.5)^2+1
    on [0, 1]; it is tight where the predictive probability equals 0.5.
    Vectorized over x.
    """
    if A <= 0.0:
        raise ValueError("A must be positive")
    arr = np.asarray(x, dtype=float)
    rho, sigma = params.rho, params.specificity
    b = quadratic_coeff(params, A)
    c = 0.5 - sigma
    j = -A * rho * rho * arr * arr - b * arr - A * c * c + 1.0 - params.h_sigma
    return float(j) if arr.ndim == 0 else j


def minorant_moments(f_center: float, nu: float, params: TestParams, A: float = 4.0) -> MinorantMoments:
    """Mean and variance of J_quadratic(F) for F ~ N(f_center, nu^2).

    E uses E[F^2] = f^2 + nu^2; V uses the Gaussian moments Var(F^2) =
    4 f^2 nu^2 + 2 nu^4 and Cov(F^2, F) = 2 f nu^2. E_F <= 0 is reported
    by the caller as an infeasible bound, not raised here.
    """
    if nu < 0.0:
        raise ValueError("nu cannot be negative")
    if A <= 0.0:
        raise ValueError("A must be positive")
    rho = params.rho
    b = quadratic_coeff(params, A)
    e_f = J_quadratic(f_center, params, A) - A * rho * rho * nu * nu
    v_f = 2.0 * (A * rho * rho * nu * nu) ** 2 + (b + 2.0 * A * rho * rho * f_center) ** 2 * nu * nu
    return MinorantMoments(B_A=b, E_F=float(e_f), V_F=float(v_f))


def sample_complexity(prior_H: float, delta: float, E_F: float) -> float:
    """Test count at which the Chebyshev bound becomes nontrivial:
    (1 - delta) * H / E_F."""
    if prior_H < 0.0:
        raise ValueError("prior entropy cannot be negative")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if E_F <= 0.0:
        raise InfeasibleBoundError(f"mean per-test information {E_F} <= 0")
    return (1.0 - delta) * prior_H / E_F


def chebyshev_curve(T: float, T_E: float, E_F: float, V_F: float) -> float:
    """Lower bound on P(entropy target met by test T), T >= T_E.

    Equals [(T - T_E) E_F]^2 / (T V_F + [(T - T_E) E_F]^2): zero at
    T = T_E, increasing toward 1, and exactly 1 for degenerate V_F = 0
    past T_E.
    """
    if T < T_E:
        raise ValueError(f"bound undefined below T_E: T={T} < T_E={T_E}")
    if V_F < 0.0:
        raise ValueError("variance cannot be negative")
    excess = (T - T_E) * E_F
    numer = excess * excess
    if numer == 0.0:
        return 0.0
    return numer / (T * V_F + numer)


def mismatch_alpha(
    true_params: TestParams,
    f_prime: float,
    f_star: float,
    nu_prime: float = 0.0,
    A: float = 4.0,
) -> float:
    """Relative extra tests needed when selection centers on f_prime
    instead of f_star.

    alpha = [A rho^2 f'^2 + B_A f' - A rho^2 f*^2 - B_A f*] / E_F', with
    the true parameters inside B_A and the moments, and the mismatched
    center f' only as the Gaussian location. Zero when f' = f*.
    """
    moments = minorant_moments(f_prime, nu_prime, true_params, A)
    if moments.E_F <= 0.0:
        raise InfeasibleBoundError(f"mean per-test information {moments.E_F} <= 0 at f'={f_prime}")
    rho2 = true_params.rho * true_params.rho
    numer = (
        A * rho2 * f_prime * f_prime
        + moments.B_A * f_prime
        - A * rho2 * f_star * f_star
        - moments.B_A * f_star
    )
    return numer / moments.E_F


def estimate_nu(f_traces: Sequence[Sequence[float]], window: Tuple[int, int] = (5, 15)) -> GaussianFit:
    """Pooled Gaussian fit of achieved f values inside an iteration window.

    window is 1-based inclusive; the default discards the first four
    iterations, where selection is still dominated by the prior. Traces
    shorter than the window contribute what they have.
    """
    lo, hi = window
    if lo < 1 or hi < lo:
        raise ValueError(f"window must satisfy 1 <= lo <= hi, got {window}")
    pooled = [f for trace in f_traces for f in trace[lo - 1 : hi]]
    if len(pooled) < 2:
        raise InsufficientDataError(
            f"need at least 2 samples in iterations {lo}..{hi}, got {len(pooled)}"
        )
    arr = np.asarray(pooled, dtype=float)
    return GaussianFit(mean=float(arr.mean()), nu=float(arr.std(ddof=1)), window=(lo, hi))


def complexity_report(
    prior_H: float,
    delta: float,
    true_params: TestParams,
    assumed_params: Optional[TestParams] = None,
    nu: float = 0.0,
    nu_prime: float = 0.0,
    A: float = 4.0,
    curve_points: Optional[Iterable[int]] = None,
) -> ComplexityReport:
    """Assemble the full bound report for one configuration.

    Matched case (assumed_params absent or equal): moments centered on
    f_star with spread nu. Mismatched: selection centers on the assumed
    model's target f_prime (spread nu_prime), and alpha prices the
    mismatch. E_F <= 0 yields a report marked infeasible instead of an
    exception.
    """
    f_star = optimal_f(true_params).f_star
    mismatched = assumed_params is not None and assumed_params != true_params
    if mismatched:
        f_center: float = optimal_f(assumed_params).f_star
        spread = nu_prime
    else:
        f_center = f_star
        spread = nu
    moments = minorant_moments(f_center, spread, true_params, A)
    if moments.E_F <= 0.0:
        return ComplexityReport(
            A=A, B_A=moments.B_A, E_F=moments.E_F, V_F=moments.V_F,
            T_E=math.inf, feasible=False, f_star=f_star,
            f_prime=f_center if mismatched else None,
        )
    t_e = sample_complexity(prior_H, delta, moments.E_F)
    alpha = mismatch_alpha(true_params, f_center, f_star, spread, A) if mismatched else None
    if curve_points is None:
        start = math.ceil(t_e) if t_e > 0 else 1
        curve_points = range(start, start + 25)
    curve = {int(t): chebyshev_curve(t, t_e, moments.E_F, moments.V_F) for t in curve_points if t >= t_e}
    return ComplexityReport(
        A=A, B_A=moments.B_A, E_F=moments.E_F, V_F=moments.V_F,
        T_E=t_e, feasible=True, f_star=f_star, alpha=alpha,
        f_prime=f_center if mismatched else None, probability_curve=curve,
    )
