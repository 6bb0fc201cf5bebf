"""Plurality rule for single-minded voters and its sampling approximation.

A single-minded voter gives utility 1 to exactly one candidate and 0 to the
rest, so the social welfare of a candidate is simply her vote count and the
plurality winner maximizes welfare.  Sampling approximates the welfare, not
the winner: on near-tied profiles the sampled winner may differ from the
true one while losing almost no welfare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mechsample.seeding import run_rng


@dataclass(frozen=True)
class SingleMindedProfile:
    """Per-voter choices; candidates are indexed 1..m."""

    m: int
    choices: tuple

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(int(c) for c in self.choices))
        if self.m < 1 or len(self.choices) < 1:
            raise ValueError("need at least one candidate and one voter")
        if any(not (1 <= c <= self.m) for c in self.choices):
            raise ValueError("choice out of candidate range")

    @property
    def n(self) -> int:
        return len(self.choices)

    @staticmethod
    def uniform(n: int, m: int, seed: int = 0) -> "SingleMindedProfile":
        rng = run_rng(seed)
        return SingleMindedProfile(m, rng.integers(1, m + 1, size=n))

    @staticmethod
    def near_tie(n: int, m: int = 2) -> "SingleMindedProfile":
        """Two front-runners split the electorate at 50% plus/minus one vote."""
        if m < 2 or n < 2:
            raise ValueError("need m >= 2 and n >= 2")
        a = n // 2 + 1
        return SingleMindedProfile(m, [1] * a + [2] * (n - a))


def _counts(profile: SingleMindedProfile) -> np.ndarray:
    return np.bincount(profile.choices, minlength=profile.m + 1)[1:]


def plurality(profile: SingleMindedProfile) -> int:
    """Candidate with the most votes; ties go to the smallest index."""
    return int(np.argmax(_counts(profile))) + 1


def social_welfare(profile: SingleMindedProfile, candidate: int) -> int:
    """Number of voters whose choice is the candidate."""
    if not (1 <= candidate <= profile.m):
        raise ValueError("candidate out of range")
    return int((_counts(profile))[candidate - 1])


def sample_size(m: int, epsilon: float, delta: float) -> int:
    """Sample size 2*m^2*ln(2m/delta)/epsilon^2 (natural log), truncated."""
    if epsilon <= 0 or not (0 < delta < 1):
        raise ValueError("need epsilon > 0 and delta in (0, 1)")
    return int(2.0 * m * m * math.log(2.0 * m / delta) / epsilon**2)


def approx_plurality(
    profile: SingleMindedProfile,
    epsilon: float,
    delta: float,
    seed: int = 0,
    c: int | None = None,
    replace: bool = True,
) -> int:
    """Plurality of a random sample of c voters (with replacement by default).

    With c at least sample_size(m, epsilon, delta), the winner's welfare is
    within a (1 - epsilon) factor of optimal with probability >= 1 - delta.
    Without replacement, c is capped at n, so c >= n reproduces the full
    rule exactly.
    """
    if c is None:
        c = sample_size(profile.m, epsilon, delta)
    if c < 1:
        raise ValueError("sample size must be positive")
    rng = run_rng(seed)
    choices = np.asarray(profile.choices)
    if replace:
        sampled = choices[rng.integers(0, profile.n, size=c)]
    else:
        c = min(c, profile.n)
        sampled = choices[rng.choice(profile.n, size=c, replace=False)]
    counts = np.bincount(sampled, minlength=profile.m + 1)[1:]
    return int(np.argmax(counts)) + 1
