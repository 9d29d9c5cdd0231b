"""Closed-form error analysis for compressive binary search.

Three amplitude thresholds (the uniform-SNR requirement, the sharper
decaying-error requirement, and the universal impossibility level), the
exact per-step and total error probabilities, and the union-of-tails upper
bound that the decaying-error threshold is derived from.

Log conventions: every log here is natural except log2(n), which counts
bisection steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .allocation import Schedule, validate_schedule
from .model import is_power_of_two

__all__ = [
    "BoundReport",
    "bound_report",
    "exact_error_probability",
    "mu_lower_bound",
    "mu_threshold_modified",
    "mu_threshold_original",
    "per_step_error",
    "q_function",
    "union_bound_error",
]

_SQRT2 = math.sqrt(2.0)


def q_function(x: float) -> float:
    """Standard normal tail probability P(Z > x).

    Computed as erfc(x / sqrt(2)) / 2, which keeps full relative accuracy
    deep into the tail (unlike 1 - cdf(x), which cancels past x ~ 8).
    """
    return 0.5 * math.erfc(x / _SQRT2)


def _check_delta(delta: float) -> None:
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta must be in (0, 1/2], got {delta}")


def _check_budget(m: int) -> None:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")


def _num_steps(n: int, minimum: int = 2) -> int:
    if not is_power_of_two(n) or n < minimum:
        raise ValueError(f"n must be a power of two >= {minimum}, got {n}")
    return n.bit_length() - 1


def mu_threshold_original(n: int, m: int, delta: float) -> float:
    """Amplitude at which the uniform-SNR allocation achieves total error <= delta.

    sqrt((8n/m) * (ln(1/(2 delta)) + ln(log2 n))). The ln(log2 n) term is
    the price of giving each of the log2(n) steps an equal share,
    delta / log2(n), of the error budget. Requires n >= 4 so that
    ln(log2 n) is positive.
    """
    _check_delta(delta)
    _check_budget(m)
    num_steps = _num_steps(n, minimum=4)
    return math.sqrt(8.0 * n / m * (math.log(1.0 / (2.0 * delta)) + math.log(num_steps)))


def mu_threshold_modified(n: int, m: int, delta: float) -> float:
    """Amplitude at which the decaying-error allocation achieves total error <= delta.

    sqrt((16n/m) * ln(1/(2 delta) + 1)), with the +1 inside the logarithm.
    There is no residual dependence on n beyond the n/m ratio. The guarantee
    holds for m >= 2 * log2(n); the value is computed regardless and callers
    flag the regime (see bound_report).
    """
    _check_delta(delta)
    _check_budget(m)
    _num_steps(n)
    return math.sqrt(16.0 * n / m * math.log(1.0 / (2.0 * delta) + 1.0))


def mu_lower_bound(n: int, m: int) -> float:
    """Amplitude below which no procedure locates the spike with probability > 1/2.

    sqrt(n/m). The decaying-error threshold at delta = 1/2 sits a factor
    sqrt(16 ln 2) ~ 3.33 above this, so the allocation is optimal up to a
    small constant.
    """
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be >= 1, got n={n}, m={m}")
    return math.sqrt(n / m)


def per_step_error(n: int, mu: float, step: int, count: int) -> float:
    """Exact probability that one step's statistic has the wrong sign.

    Conditional on the spike being inside the current support: the statistic
    is normal with mean +-count * mu * w and variance count, where w is the
    sensing weight sqrt(2**step / (2n)), so the wrong-sign probability is
    Q(mu * sqrt(count * 2**step / (2n))). The step geometry is fixed by n
    (log2(n) steps); only the count varies with the schedule.
    """
    num_steps = _num_steps(n)
    if not 1 <= step <= num_steps:
        raise ValueError(f"step must be in [1, {num_steps}], got {step}")
    if count < 1:
        raise ValueError(f"measurement count must be >= 1, got {count}")
    if not mu >= 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    return q_function(mu * math.sqrt(count * 2.0**step / (2.0 * n)))


def _check_schedule(n: int, schedule: Schedule) -> None:
    problems = validate_schedule(schedule)
    if problems:
        raise ValueError(f"invalid schedule: {', '.join(problems)}")
    if schedule.n != n:
        raise ValueError(f"schedule is for n={schedule.n}, not n={n}")


def exact_error_probability(n: int, mu: float, schedule: Schedule) -> float:
    """Probability that the search returns the wrong index, exactly.

    The search succeeds iff every step decides correctly: the support only
    shrinks, so a spike lost at any step is never recovered. Hence
    P_err = 1 - prod_s (1 - q_s) with q_s = per_step_error. Accumulated in
    log space (log1p / expm1) so that sweeps can resolve error rates far
    below 1e-4 without catastrophic cancellation.
    """
    _check_schedule(n, schedule)
    log_success = 0.0
    for step, count in schedule.rows():
        log_success += math.log1p(-per_step_error(n, mu, step, count))
    return -math.expm1(log_success)


def union_bound_error(n: int, mu: float, schedule: Schedule) -> float:
    """Union-of-tails upper bound: (1/2) * sum_s exp(-m_s * mu^2 * 2**s / (4n)).

    Always >= exact_error_probability. Deliberately not clamped to 1, so a
    vacuous bound is visible as a value above 1.
    """
    _check_schedule(n, schedule)
    if not mu >= 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    return 0.5 * sum(
        math.exp(-count * mu**2 * 2.0**step / (4.0 * n))
        for step, count in schedule.rows()
    )


@dataclass(frozen=True)
class BoundReport:
    """The three amplitude thresholds for a given (n, m, delta).

    guarantee_applies records whether m >= 2 * log2(n), the budget regime
    in which the mu_modified threshold's error guarantee is proven.
    """

    n: int
    m: int
    delta: float
    mu_original: float
    mu_modified: float
    mu_lower: float
    guarantee_applies: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "delta": self.delta,
            "mu_original": self.mu_original,
            "mu_modified": self.mu_modified,
            "mu_lower": self.mu_lower,
            "guarantee_applies": self.guarantee_applies,
        }


def bound_report(n: int, m: int, delta: float) -> BoundReport:
    """Compute all three thresholds and flag the guaranteed-budget regime."""
    report = BoundReport(
        n=n,
        m=m,
        delta=delta,
        mu_original=mu_threshold_original(n, m, delta),
        mu_modified=mu_threshold_modified(n, m, delta),
        mu_lower=mu_lower_bound(n, m),
        guarantee_applies=m >= 2 * (n.bit_length() - 1),
    )
    return report
