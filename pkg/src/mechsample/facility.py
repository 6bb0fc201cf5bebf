"""Full-information and sampling mechanisms for single- and multi-facility location.

All randomness is drawn from an explicit seed, so every operation is pure and
trial batches can safely run concurrently with per-trial sub-seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from mechsample.seeding import run_rng
from mechsample.spaces import Curve, Instance, L1Space, Line, StarTree, median, social_cost


@dataclass(frozen=True)
class FacilityOutcome:
    """Allocated facilities plus the social cost they induce.

    ``ratio_vs_optimal`` compares against the relevant full-information
    optimum (the median, the star hub, or the full-information percentile
    allocation) and is None when no optimum oracle exists.
    """

    facilities: tuple
    social_cost: float
    ratio_vs_optimal: Optional[float] = None

    def __post_init__(self):
        if self.social_cost < 0:
            raise ValueError("social cost must be nonnegative")
        if self.ratio_vs_optimal is not None and self.ratio_vs_optimal < 1.0 - 1e-12:
            raise ValueError("approximation ratio below 1")


@dataclass(frozen=True)
class SampleSpec:
    """Sampling parameters for the approximate median.

    The derived sample size is the smallest odd integer covering
    ceil(1/(epsilon*delta)^2), capped at the population size (the cap may
    produce an even c = n, in which case the sample is the whole population
    and the lower median applies).  An explicit ``c`` overrides the rule.
    """

    epsilon: float
    delta: float = 1.0
    seed: int = 0
    c: Optional[int] = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.delta <= 1):
            raise ValueError("delta must be in (0, 1]")
        if self.c is not None and self.c < 1:
            raise ValueError("sample size must be at least 1")

    def sample_size(self, n: int) -> int:
        if self.c is not None:
            if self.c > n:
                raise ValueError("sample exceeds population")
            return self.c
        c = math.ceil(1.0 / (self.epsilon * self.delta) ** 2)
        if c % 2 == 0:
            c += 1
        return min(c, n)


def _optimum_facility(instance: Instance):
    """Facility position minimizing social cost (median; hub for the star)."""
    if isinstance(instance.space, StarTree):
        return 0
    return median(instance)


def _ratio(sc: float, sc_opt: float) -> float:
    if sc_opt == 0.0:
        return 1.0 if sc == 0.0 else math.inf
    return sc / sc_opt


def _sample_median(instance: Instance, idx: np.ndarray):
    """Median of the sampled sub-instance.

    On a star graph whose sample misses the hub, the induced subgraph is
    edgeless and has no median; the smallest sampled node id is used as the
    (arbitrary but deterministic) output.
    """
    sub_points = [instance.points[i] for i in idx]
    if isinstance(instance.space, StarTree):
        ids = sorted(int(p) for p in sub_points)
        return 0 if ids[0] == 0 else ids[0]
    sub = Instance(instance.space, sub_points)
    return median(sub)


def approx_median(instance: Instance, spec: SampleSpec) -> FacilityOutcome:
    """Allocate one facility at the median of a uniform without-replacement sample."""
    n = instance.n
    c = spec.sample_size(n)
    rng = run_rng(spec.seed)
    idx = rng.choice(n, size=c, replace=False)
    facility = _sample_median(instance, idx)
    sc = social_cost(instance, [facility])
    sc_opt = social_cost(instance, [_optimum_facility(instance)])
    return FacilityOutcome((facility,), sc, _ratio(sc, sc_opt))


def sensitivity_bound(n: int, eps_frac: float) -> float:
    """Multiplicative social-cost bound for a facility separated from the median
    by at most eps_frac*n agents: 1 + 2*eps_frac*n / (floor(n/2) - eps_frac*n).

    Returns inf when the denominator is nonpositive (the bound is vacuous).
    """
    if not (0 <= eps_frac < 0.5):
        raise ValueError("bound undefined")
    denom = n // 2 - eps_frac * n
    if denom <= 0:
        return math.inf
    return 1.0 + (2.0 * eps_frac * n) / denom


def _order_statistics(points: Sequence[float], ranks: Sequence[int]) -> tuple:
    order = sorted(range(len(points)), key=lambda i: (points[i], i))
    return tuple(points[order[r - 1]] for r in ranks)


def percentile_mechanism(instance: Instance, ranks: Sequence[int]) -> FacilityOutcome:
    """Allocate facilities on the given ranks of the sorted line instance.

    Ranks are 1-based, strictly increasing; (1, n) is the two-extremes rule
    and (ceil(n/2),) recovers the median.  No optimum oracle is attached for
    two or more facilities.
    """
    if not isinstance(instance.space, Line):
        raise ValueError("space mismatch")
    ranks = list(ranks)
    n = instance.n
    if not ranks or any(int(r) != r for r in ranks):
        raise ValueError("ranks must be integers")
    if any(not (1 <= r <= n) for r in ranks):
        raise ValueError(f"rank out of [1, {n}]")
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        raise ValueError("ranks must be strictly increasing")
    facilities = _order_statistics(list(instance.points), ranks)
    sc = social_cost(instance, facilities)
    if len(ranks) == 1 and ranks[0] == (n + 1) // 2:
        ratio = _ratio(sc, social_cost(instance, [median(instance)]))
    else:
        ratio = None
    return FacilityOutcome(facilities, sc, ratio)


def _map_ranks(ranks: Sequence[int], n: int, c: int) -> list:
    """Proportional rank mapping onto a sample: r -> max(1, round(r*c/n)),
    duplicates collapsed."""
    mapped = sorted({max(1, round(r * c / n)) for r in ranks})
    return mapped


def sampling_percentile(
    instance: Instance, ranks: Sequence[int], c: int, seed: int = 0
) -> FacilityOutcome:
    """Percentile mechanism run on a uniform without-replacement sample.

    ``ratio_vs_optimal`` compares against the full-information percentile
    allocation on the same ranks.
    """
    if not isinstance(instance.space, Line):
        raise ValueError("space mismatch")
    n = instance.n
    if c > n:
        raise ValueError("sample exceeds population")
    full = percentile_mechanism(instance, ranks)  # validates the ranks
    rng = run_rng(seed)
    idx = rng.choice(n, size=c, replace=False)
    sample_points = [instance.points[i] for i in idx]
    facilities = _order_statistics(sample_points, _map_ranks(ranks, n, c))
    sc = social_cost(instance, facilities)
    return FacilityOutcome(facilities, sc, _ratio(sc, full.social_cost))


def make_counterexample(n: int, alpha: float, l: float, inner: float = 0.0) -> Instance:
    """Two separated clusters on the line: ceil((1-alpha)*n) agents evenly
    spread over [0, inner] and the rest over [l, l+inner]."""
    if not (0 < alpha < 1):
        raise ValueError("alpha must be in (0, 1)")
    if l <= 0 or inner < 0:
        raise ValueError("need separation l > 0 and inner >= 0")
    n_left = math.ceil((1.0 - alpha) * n)
    n_right = n - n_left
    left = np.linspace(0.0, inner, n_left) if n_left else np.empty(0)
    right = l + np.linspace(0.0, inner, n_right) if n_right else np.empty(0)
    return Instance(Line(), tuple(np.concatenate([left, right]).tolist()))


def random_dictator(instance: Instance, seed: int = 0) -> FacilityOutcome:
    """Place the facility on a uniformly random agent's position."""
    rng = run_rng(seed)
    facility = instance.points[int(rng.integers(instance.n))]
    sc = social_cost(instance, [facility])
    sc_opt = social_cost(instance, [_optimum_facility(instance)])
    return FacilityOutcome((facility,), sc, _ratio(sc, sc_opt))
