"""Seeded Monte Carlo estimation of the search error rate across amplitudes.

Trial t at amplitude index j draws its noise from the stream
derive_seed(master_seed, j, t), so every trial is independently
reconstructible: results are identical whether trials run serially, split
across processes, or are recomputed one at a time. Failure counting is
commutative, which makes parallel and serial execution bit-equivalent.

The per-trial simulation here is a lean twin of engine.run_cbs (one batched
noise draw per trial, no per-step records); equivalence of the two paths is
enforced by the test suite, not assumed.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .allocation import (
    Schedule,
    ScheduleKind,
    custom_schedule,
    modified_schedule,
    original_schedule,
    validate_schedule,
)
from .analysis import exact_error_probability
from .model import NoiseSource, derive_seed, is_power_of_two, sensing_weight

__all__ = [
    "CSV_COLUMNS",
    "ErrorCurvePoint",
    "SweepConfig",
    "check_envelope",
    "run_sweep",
    "run_trials",
    "sweep_rows",
    "wilson_interval",
    "write_sweep_csv",
]

CSV_COLUMNS = (
    "mu",
    "trials",
    "failures",
    "p_hat",
    "ci_low",
    "ci_high",
    "p_exact",
    "schedule",
    "n",
    "m",
    "seed",
)

# Below this many trials a process pool costs more than it saves.
_MIN_TRIALS_TO_FORK = 4000


def wilson_interval(
    failures: int, trials: int, confidence: float = 0.95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Well-behaved at the boundaries: zero observed failures still yield a
    positive upper limit, and the interval never leaves [0, 1].
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= failures <= trials:
        raise ValueError(f"failures must be in [0, {trials}], got {failures}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p_hat = failures / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: fixed (n, m, schedule), a grid of amplitudes, trials per point.

    spike_index None means the spike is placed uniformly at random per trial
    (drawn from the trial's own stream); the error probability is placement
    independent, but randomizing exercises every code path. counts is only
    consulted for ScheduleKind.CUSTOM.
    """

    n: int
    m: int
    schedule_kind: ScheduleKind
    mu_values: tuple[float, ...]
    trials: int
    master_seed: int
    spike_index: int | None = None
    counts: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n) or self.n < 2:
            raise ValueError(f"n must be a power of two >= 2, got {self.n}")
        if self.m < self.n.bit_length() - 1:
            raise ValueError(
                f"budget m={self.m} is infeasible for n={self.n}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if len(self.mu_values) == 0:
            raise ValueError("mu_values must be non-empty")
        if any(not mu >= 0 for mu in self.mu_values):
            raise ValueError("mu_values must be nonnegative")
        if any(b <= a for a, b in zip(self.mu_values, self.mu_values[1:])):
            raise ValueError("mu_values must be strictly increasing")
        if self.spike_index is not None and not 0 <= self.spike_index < self.n:
            raise ValueError(
                f"spike_index must be in [0, {self.n}), got {self.spike_index}"
            )
        if self.schedule_kind is ScheduleKind.CUSTOM and self.counts is None:
            raise ValueError("custom schedule requires counts")

    def build_schedule(self) -> Schedule:
        if self.schedule_kind is ScheduleKind.ORIGINAL:
            return original_schedule(self.n, self.m)
        if self.schedule_kind is ScheduleKind.MODIFIED:
            return modified_schedule(self.n, self.m)
        return custom_schedule(self.counts, self.n, self.m)


@dataclass(frozen=True)
class ErrorCurvePoint:
    """Empirical error at one amplitude, with its Wilson CI and the exact value."""

    mu: float
    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    p_exact: float

    @property
    def deviation_sigmas(self) -> float:
        """|p_hat - p_exact| in units of the binomial sigma at p_exact."""
        var = self.p_exact * (1.0 - self.p_exact) / self.trials
        if var == 0.0:
            return 0.0 if self.p_hat == self.p_exact else math.inf
        return abs(self.p_hat - self.p_exact) / math.sqrt(var)


def _count_failures(
    n: int,
    mu: float,
    counts: tuple[int, ...],
    master_seed: int,
    mu_index: int,
    trial_start: int,
    trial_stop: int,
    spike_index: int | None,
) -> int:
    """Failures over trials [trial_start, trial_stop), one seeded stream each.

    Per trial: optionally draw the spike location, then draw all
    sum(counts) noise values in one call (stream-identical to per-step
    draws) and walk the bisection on the per-step block sums.
    """
    num_steps = len(counts)
    total = sum(counts)
    offsets = np.cumsum((0,) + counts[:-1])
    weights = [sensing_weight(s, num_steps) for s in range(1, num_steps + 1)]
    failures = 0
    for t in range(trial_start, trial_stop):
        noise = NoiseSource(derive_seed(master_seed, mu_index, t))
        if spike_index is None:
            spike = noise.uniform_index(n)
        else:
            spike = spike_index
        block_sums = np.add.reduceat(noise.standard_normal(total), offsets)
        start, length = 0, n
        for i in range(num_steps):
            half = length >> 1
            mid = start + half
            if start <= spike < mid:
                signal = mu * weights[i]
            elif mid <= spike < start + length:
                signal = -mu * weights[i]
            else:
                signal = 0.0
            if counts[i] * signal + block_sums[i] > 0.0:
                length = half
            else:
                start, length = mid, half
        failures += start != spike
    return failures


def _count_failures_task(args) -> int:
    return _count_failures(*args)


def run_trials(
    n: int,
    mu: float,
    schedule: Schedule,
    trials: int,
    master_seed: int,
    *,
    mu_index: int = 0,
    spike_index: int | None = None,
    workers: int = 1,
) -> int:
    """Count failures over `trials` independent seeded runs at one amplitude.

    With workers > 1 the trial range is split into contiguous chunks summed
    across processes; per-trial seeding makes the result identical to the
    serial count.
    """
    problems = validate_schedule(schedule)
    if problems:
        raise ValueError(f"invalid schedule: {', '.join(problems)}")
    if schedule.n != n:
        raise ValueError(f"schedule is for n={schedule.n}, not n={n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not mu >= 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    if spike_index is not None and not 0 <= spike_index < n:
        raise ValueError(f"spike_index must be in [0, {n}), got {spike_index}")

    if workers <= 1 or trials < _MIN_TRIALS_TO_FORK:
        return _count_failures(
            n, mu, schedule.counts, master_seed, mu_index, 0, trials, spike_index
        )

    bounds = np.linspace(0, trials, workers + 1, dtype=int)
    tasks = [
        (n, mu, schedule.counts, master_seed, mu_index, int(lo), int(hi), spike_index)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
        return sum(pool.map(_count_failures_task, tasks))


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[ErrorCurvePoint]:
    """Empirical error rate at every amplitude in cfg, in grid order.

    Each point gets `cfg.trials` runs, a 95% Wilson interval, and the exact
    error probability from the closed-form oracle.
    """
    schedule = cfg.build_schedule()
    points = []
    for j, mu in enumerate(cfg.mu_values):
        failures = run_trials(
            cfg.n,
            mu,
            schedule,
            cfg.trials,
            cfg.master_seed,
            mu_index=j,
            spike_index=cfg.spike_index,
            workers=workers,
        )
        ci_low, ci_high = wilson_interval(failures, cfg.trials)
        points.append(
            ErrorCurvePoint(
                mu=mu,
                trials=cfg.trials,
                failures=failures,
                p_hat=failures / cfg.trials,
                ci_low=ci_low,
                ci_high=ci_high,
                p_exact=exact_error_probability(cfg.n, mu, schedule),
            )
        )
    return points


def check_envelope(
    points: list[ErrorCurvePoint], sigmas: float = 3.0
) -> list[ErrorCurvePoint]:
    """Points whose empirical rate sits more than `sigmas` binomial sigmas
    from the exact value. Empty list means the simulation agrees with the
    oracle everywhere."""
    return [p for p in points if p.deviation_sigmas > sigmas]


def _format_float(x: float) -> str:
    return format(float(x), ".10g")


def sweep_rows(
    points: list[ErrorCurvePoint],
    schedule_kind: ScheduleKind,
    n: int,
    m: int,
    master_seed: int,
) -> list[dict]:
    """CSV-ready dict rows, one per point, in point order."""
    return [
        {
            "mu": _format_float(p.mu),
            "trials": str(p.trials),
            "failures": str(p.failures),
            "p_hat": _format_float(p.p_hat),
            "ci_low": _format_float(p.ci_low),
            "ci_high": _format_float(p.ci_high),
            "p_exact": _format_float(p.p_exact),
            "schedule": schedule_kind.value,
            "n": str(n),
            "m": str(m),
            "seed": str(master_seed),
        }
        for p in points
    ]


def write_sweep_csv(fileobj, rows: list[dict]) -> None:
    """Write rows with the fixed column order and newline convention.

    Formatting is pinned (10 significant digit floats, LF endings) so that
    identical configurations produce byte-identical files.
    """
    fileobj.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        fileobj.write(",".join(row[col] for col in CSV_COLUMNS) + "\n")
