"""Signal model and measurement primitive for compressive binary search.

The target is an n-dimensional vector (n a power of two) with a single
non-zero entry of amplitude mu at spike_index. The vector is never
materialized: every sensing vector is constant on the left half of a
dyadic interval, negated on the right half, and zero elsewhere, so each
inner product collapses to a sign times a scalar weight. Memory per
measurement is O(1) regardless of n.

All indices are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProblemInstance",
    "DyadicInterval",
    "NoiseSource",
    "ZeroNoise",
    "derive_seed",
    "is_power_of_two",
    "sensing_weight",
    "measure_step",
]

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


@dataclass(frozen=True)
class ProblemInstance:
    """One-sparse ground truth: dimension, spike location, amplitude.

    mu = 0 is permitted; it turns every measurement into pure noise and is
    useful for calibration runs (success rate is then exactly 1/n).
    """

    n: int
    spike_index: int
    mu: float

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n) or self.n < 2:
            raise ValueError(f"n must be a power of two >= 2, got {self.n}")
        if not 0 <= self.spike_index < self.n:
            raise ValueError(
                f"spike_index must be in [0, {self.n}), got {self.spike_index}"
            )
        if not self.mu >= 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")

    @property
    def num_steps(self) -> int:
        """Number of bisection steps, log2(n)."""
        return self.n.bit_length() - 1


@dataclass(frozen=True)
class DyadicInterval:
    """Half-open index interval [start, start + length) with dyadic alignment.

    length is a power of two and start is a multiple of length, so repeated
    halving always produces valid dyadic intervals down to singletons.
    """

    start: int
    length: int

    def __post_init__(self) -> None:
        if not is_power_of_two(self.length):
            raise ValueError(f"length must be a power of two, got {self.length}")
        if self.start < 0 or self.start % self.length != 0:
            raise ValueError(
                f"start must be a nonnegative multiple of length, got "
                f"start={self.start}, length={self.length}"
            )

    @property
    def end(self) -> int:
        return self.start + self.length

    def contains(self, index: int) -> bool:
        return self.start <= index < self.end

    def halves(self) -> tuple[DyadicInterval, DyadicInterval]:
        """Split into (left, right) subintervals of equal length."""
        if self.length < 2:
            raise ValueError("cannot split a singleton interval")
        half = self.length // 2
        return (
            DyadicInterval(self.start, half),
            DyadicInterval(self.start + half, half),
        )


class NoiseSource:
    """Seeded stream of i.i.d. standard normal measurement noise.

    A given seed reproduces the stream bit-for-bit within one release of
    this package (the backing generator is numpy's PCG64; stability across
    numpy upgrades is not promised). Each concurrent simulation must own
    its NoiseSource; see derive_seed for building independent ones.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _SEED_MASK
        self._rng = np.random.default_rng(self.seed)

    def standard_normal(self, count: int) -> np.ndarray:
        return self._rng.standard_normal(count)

    def uniform_index(self, n: int) -> int:
        """Uniform draw from range(n), used for random spike placement."""
        return int(self._rng.integers(n))

    def __repr__(self) -> str:
        return f"NoiseSource(seed={self.seed})"


class ZeroNoise:
    """Noise stub returning all zeros, for deterministic noiseless runs."""

    def standard_normal(self, count: int) -> np.ndarray:
        return np.zeros(count)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive an independent 64-bit seed from a master seed plus indices.

    Splittable construction: (master_seed, *indices) feeds numpy's
    SeedSequence entropy pool, so distinct index tuples yield statistically
    independent streams, and the mapping is reproducible across machines
    and processes within a release.
    """
    if any(i < 0 for i in indices):
        raise ValueError(f"indices must be nonnegative, got {indices}")
    entropy = [int(master_seed) & _SEED_MASK, *map(int, indices)]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def sensing_weight(step: int, num_steps: int) -> float:
    """Magnitude of the non-zero entries of the sensing vector at a step.

    Equals 2**(-(num_steps - step + 1) / 2). The vector is supported on
    2**(num_steps - step + 1) indices, so its norm is exactly 1. The weight
    grows with the step: finer intervals are measured at higher SNR.
    """
    if not 1 <= step <= num_steps:
        raise ValueError(f"step must be in [1, {num_steps}], got {step}")
    return 2.0 ** (-(num_steps - step + 1) / 2)


def measure_step(
    inst: ProblemInstance,
    interval: DyadicInterval,
    step: int,
    count: int,
    noise: NoiseSource | ZeroNoise,
) -> float:
    """Test statistic for one step: the sum of `count` noisy projections.

    The sensing vector is +w on the left half of `interval`, -w on the
    right half, and zero elsewhere (w = sensing_weight). Each projection is
    the signal term plus a fresh standard normal draw, so the statistic is
    count * signal + sum of `count` draws; the signal term is +mu*w, -mu*w,
    or 0 according to where the spike sits relative to the interval.
    """
    if count < 1:
        raise ValueError(f"measurement count must be >= 1, got {count}")
    if interval.length < 2:
        raise ValueError("interval must contain at least two indices")
    left, right = interval.halves()
    weight = sensing_weight(step, inst.num_steps)
    if left.contains(inst.spike_index):
        signal = inst.mu * weight
    elif right.contains(inst.spike_index):
        signal = -inst.mu * weight
    else:
        signal = 0.0
    return count * signal + float(noise.standard_normal(count).sum())
