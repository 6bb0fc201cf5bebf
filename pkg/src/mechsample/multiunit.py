"""Two-price multi-unit auction for unit-demand bidders.

Each round announces a high and a low price.  Agents above the high price are
locked in as winners (they pay the common final price, not the round price),
agents below the low price leave, and the auction recurses on the middle
band.  The prices come from a stochastic binary search over the k-bit value
tree: at every level a small sample of agents answers one threshold bit, and
the search branches on the sampled fraction at or below the threshold
relative to the target quantile.  When a sampled fraction lands within
epsilon/2 of the target the junction is ambiguous: the high estimator takes
the upper subtree, the low estimator the lower one, and from then on each
draws its own per-level samples.

Estimates can fail (probability ~delta per round), so acceptance of a round
is gated on counts the auctioneer already knows from the responses:

* new winners cannot exceed the remaining units;
* locked winners plus the middle band must keep at least m+1 agents alive,
  which keeps the price-setting agent in the pool;
* equal prices terminate only with exactly m locked winners and a nonempty
  middle (those agents sit exactly at the price).

Any survivor of an accepted round is worth at least that round's low price,
so the final price, the (m+1)-highest of the surviving pool, dominates every
removed agent's value.  Rejected estimates are retried, and after a retry
cap, a stalled round, or a small middle band, the endgame elicits the
middle agents' full k-bit values and prices exactly.  The returned outcome
therefore equals the VCG oracle on every run, ties included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mechsample.kernel import AuctionOutcome, vcg_oracle
from mechsample.ledger import BitLedger, ensure_ledger
from mechsample.seeding import run_rng
from mechsample.valuations import ValuationProfile


def estimator_sample_size(k: int, epsilon: float, delta: float) -> int:
    """Per-level sample size ceil(8*ln(4k/delta)/epsilon^2) (natural log)."""
    if epsilon <= 0 or not (0 < delta < 1):
        raise ValueError("need epsilon > 0 and delta in (0, 1)")
    return math.ceil(8.0 * math.log(4.0 * k / delta) / epsilon**2)


def theorem_bit_budget(k: int, epsilon: float, delta: float) -> float:
    """The stated estimator input budget 4k*ln(4k/delta)/epsilon^2."""
    return 4.0 * k * math.log(4.0 * k / delta) / epsilon**2


def threshold_query(
    profile: ValuationProfile,
    agent: int,
    threshold: int,
    ledger: BitLedger,
    round_index: int = 0,
) -> int:
    """One-bit query [value <= threshold]; charges the agent a single bit."""
    if not (0 <= threshold < 2**profile.k):
        raise ValueError("threshold out of range")
    ledger.charge(agent, 1, round_index, "threshold")
    return int(profile.item_values()[agent] <= threshold)


@dataclass
class EstimatorState:
    """Progress of the paired high/low prefix search."""

    prefix_high: str
    prefix_low: str
    gamma: float
    epsilon: float
    delta: float
    c: int
    separated: bool


def estimate_bounds(
    profile: ValuationProfile,
    active,
    m: int,
    epsilon: float,
    delta: float,
    rng=None,
    seed: int = 0,
    ledger: BitLedger | None = None,
    c: int | None = None,
    replace: bool = True,
    round_index: int = 0,
) -> tuple[int, int, EstimatorState]:
    """Estimate prices bracketing the (m+1)-highest value of the active set.

    Returns (p_h, p_l, state).  The search target is the smallest value with
    at least a gamma = 1 - m/|active| fraction of agents at or below it,
    i.e. the (m+1)-highest value when values are distinct.  With probability
    at least 1 - delta, p_l <= that value <= p_h, and both prices are within
    about epsilon*|active| ranks of it.  Bit cost is at most 2*c*k.

    Sampling is with replacement by default; ``replace=False`` caps c at the
    active-set size.  ``epsilon=0`` disables the ambiguity rule (then c must
    be given explicitly).
    """
    active = np.asarray(active, dtype=np.int64)
    n_a = len(active)
    if not (1 <= m < n_a):
        raise ValueError("need 1 <= m < len(active)")
    if c is None:
        c = estimator_sample_size(profile.k, epsilon, delta)
    if not replace:
        c = min(c, n_a)
    if rng is None:
        rng = run_rng(seed)
    ledger = ensure_ledger(ledger, profile.n)

    k = profile.k
    values = profile.item_values()
    gamma = 1.0 - m / n_a
    state = EstimatorState("", "", gamma, epsilon, delta, c, separated=False)

    def sampled_fraction(prefix: str) -> float:
        depth = len(prefix)
        threshold = (int(prefix, 2) if prefix else 0) << (k - depth)
        threshold |= (1 << (k - depth - 1)) - 1  # prefix + 0 + all ones
        chosen = rng.choice(active, size=c, replace=replace)
        ledger.charge_many(chosen, 1, round_index, "threshold")
        return float((values[chosen] <= threshold).mean())

    for _ in range(k):
        if not state.separated:
            x = sampled_fraction(state.prefix_high)
            if abs(x - gamma) < epsilon / 2.0:
                state.separated = True
                state.prefix_high += "1"
                state.prefix_low += "0"
            else:
                bit = "1" if x < gamma else "0"
                state.prefix_high += bit
                state.prefix_low += bit
        else:
            x_h = sampled_fraction(state.prefix_high)
            state.prefix_high += "1" if x_h < gamma + epsilon / 2.0 else "0"
            x_l = sampled_fraction(state.prefix_low)
            state.prefix_low += "1" if x_l < gamma - epsilon / 2.0 else "0"

    return int(state.prefix_high, 2), int(state.prefix_low, 2), state


def multi_unit_auction(
    profile: ValuationProfile,
    m: int,
    epsilon: float = 0.1,
    delta: float = 0.1,
    seed: int = 0,
    ledger: BitLedger | None = None,
    c: int | None = None,
    replace: bool = True,
    retry_cap: int = 64,
) -> AuctionOutcome:
    """Sell m identical units to unit-demand bidders at a common price.

    Per round: estimate (p_h, p_l), announce both, and elicit the three-way
    response (1 above p_h, 0 below p_l, a fixed 2-bit code in between; ties
    at either price count as middle).  Incongruous estimates are re-drawn.
    The outcome equals vcg_oracle(profile, m) on every run.
    """
    n = profile.n
    if profile.values.ndim != 1:
        raise ValueError("multi-unit auction needs a single-item profile")
    if not (1 <= m <= n):
        raise ValueError("need 1 <= m <= n")
    values = profile.item_values()
    ledger = ensure_ledger(ledger, n)

    if m == n:  # every agent wins; no pivotal agent, price 0
        return AuctionOutcome(
            winners=tuple(range(n)),
            payment=0,
            rounds=0,
            total_bits=0,
            bits_per_agent=0.0,
            stats={"retries": 0, "estimator_bits": 0, "vcg_match": True},
        )

    if c is None:
        c = estimator_sample_size(profile.k, epsilon, delta)
    fallback_below = max(16, 2 * c)
    rng = run_rng(seed)

    active = np.arange(n, dtype=np.int64)
    winners: list[int] = []
    m_rem = m
    rounds = 0
    retries_total = 0
    estimator_bits = 0
    force_fallback = False
    payment: int | None = None

    while payment is None:
        rounds += 1
        if force_fallback or m_rem == 0 or len(active) <= fallback_below:
            # endgame: elicit the middle agents' full values and price exactly
            ledger.charge_many(active, profile.k, rounds, "elicit")
            order = active[np.lexsort((active, -values[active]))]
            winners.extend(int(a) for a in order[:m_rem])
            payment = int(values[order[m_rem]])
            break

        retries = 0
        while True:
            before = ledger.total
            p_h, p_l, _ = estimate_bounds(
                profile, active, m_rem, epsilon, delta,
                rng=rng, ledger=ledger, c=c, replace=replace, round_index=rounds,
            )
            estimator_bits += ledger.total - before

            act_values = values[active]
            above = active[act_values > p_h]
            below = active[act_values < p_l]
            middle = active[(act_values >= p_l) & (act_values <= p_h)]
            ledger.charge_many(above, 1, rounds, "response")
            ledger.charge_many(below, 1, rounds, "response")
            ledger.charge_many(middle, 2, rounds, "response")

            pool = len(winners) + len(above) + len(middle)
            if p_h == p_l:
                if len(winners) + len(above) == m and len(middle) >= 1:
                    winners.extend(int(a) for a in above)
                    payment = int(p_h)
                    break
            elif len(above) <= m_rem and pool >= m + 1:
                if len(middle) == len(active):
                    force_fallback = True  # stalled round; settle exactly next
                winners.extend(int(a) for a in above)
                m_rem -= len(above)
                active = middle
                break

            retries += 1
            retries_total += 1
            if retries > retry_cap:
                force_fallback = True
                break

    oracle_w, oracle_p = vcg_oracle(profile, m)
    total = ledger.total
    return AuctionOutcome(
        winners=tuple(sorted(winners)),
        payment=payment,
        rounds=rounds,
        total_bits=total,
        bits_per_agent=total / n,
        stats={
            "c": c,
            "retries": retries_total,
            "estimator_bits": estimator_bits,
            "vcg_match": bool(tuple(sorted(winners)) == oracle_w and payment == oracle_p),
        },
    )


def multi_unit_constant_m(
    profile: ValuationProfile,
    m: int,
    epsilon: float = 0.2,
    seed: int = 0,
    ledger: BitLedger | None = None,
    c: int | None = None,
) -> AuctionOutcome:
    """Ascending-style multi-unit auction for a small constant number of units.

    Each round's sub-auction reveals the sample's top-m agents and its
    (m+1)-highest value as the announced price; survivors are those sample
    winners plus every non-sampled agent strictly above the price.  Winners'
    values and the common price match the VCG oracle (winner identities can
    differ from the oracle's lexicographic tie-break when values repeat).
    """
    n = profile.n
    if profile.values.ndim != 1:
        raise ValueError("multi-unit auction needs a single-item profile")
    if not (1 <= m <= n):
        raise ValueError("need 1 <= m <= n")
    values = profile.item_values()
    ledger = ensure_ledger(ledger, n)

    if m == n:
        return AuctionOutcome(
            winners=tuple(range(n)), payment=0, rounds=0, total_bits=0,
            bits_per_agent=0.0, stats={"vcg_match": True},
        )

    if c is None:
        c = max(m + 1, math.ceil(1.0 / epsilon**2))
    if c <= m:
        raise ValueError("sample cannot price m units")
    c = min(c, n)
    rng = run_rng(seed)

    def top_and_price(agents: np.ndarray) -> tuple[np.ndarray, int]:
        order = agents[np.lexsort((agents, -values[agents]))]
        return order[:m], int(values[order[m]])

    active = np.arange(n, dtype=np.int64)
    rounds = 0
    price = 0
    while len(active) > c:
        rounds += 1
        sample = rng.choice(active, size=c, replace=False)
        ledger.charge_many(sample, profile.k, rounds, "sample")
        sample_top, p = top_and_price(sample)
        in_sample = np.zeros(n, dtype=bool)
        in_sample[sample] = True
        outside = active[~in_sample[active]]
        ledger.charge_many(outside, 1, rounds, "response")
        stay = outside[values[outside] > p]
        active = np.concatenate([sample_top, stay])
        price = p

    if len(active) == m:
        winners, payment = active, price
    else:
        rounds += 1
        ledger.charge_many(active, profile.k, rounds, "sample")
        winners, payment = top_and_price(active)

    oracle_w, oracle_p = vcg_oracle(profile, m)
    total = ledger.total
    winners = tuple(sorted(int(a) for a in winners))
    return AuctionOutcome(
        winners=winners,
        payment=int(payment),
        rounds=rounds,
        total_bits=total,
        bits_per_agent=total / n,
        stats={
            "c": c,
            "vcg_match": bool(
                payment == oracle_p
                and sorted(values[list(winners)]) == sorted(values[list(oracle_w)])
            ),
        },
    )
