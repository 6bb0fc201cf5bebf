"""Adaptive ascending auctions driven by sampled sub-auctions.

The single-item format repeatedly simulates a second-price sub-auction on a
random sample of the active agents, announces the sample's clearing price,
and keeps only the sample winner plus the non-sampled agents whose value
strictly exceeds the price.  Sample non-winners are out regardless: the
sample's second price already tops their values.  Prices are therefore
nondecreasing under sincere play, and the final outcome is always a VCG
outcome (a maximum-value winner at the second-highest value).

The simultaneous multi-item variant runs one such auction per item in global
lockstep and compresses the per-round stay/quit traffic: an agent active in
m_i auctions sends a single 0 when withdrawing from all of them and an
m_i-bit membership vector otherwise.  The auctioneer knows each agent's
active set, so the code is decodable without prefix-freeness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mechsample.kernel import AuctionOutcome, english_sim, sealed_bid_sim, vcg_oracle
from mechsample.ledger import BitLedger, ensure_ledger
from mechsample.seeding import run_rng, trial_rng
from mechsample.valuations import ValuationProfile

SUB_AUCTIONS = ("sealed", "english")


def sample_size_single(epsilon: float) -> int:
    """Sample-size rule for the single-item auction: max(2, ceil(1/eps^2))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return max(2, math.ceil(1.0 / epsilon**2))


def sample_size_multi(m: int, delta: float) -> int:
    """Sample-size rule for m parallel auctions: max(2, ceil(m^2/delta))."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return max(2, math.ceil(m**2 / delta))


def _run_sub(sub, sample, profile, ledger, round_index, start, item=None):
    if sub == "sealed":
        return sealed_bid_sim(sample, profile, ledger, round_index, item=item)
    if sub == "english":
        return english_sim(sample, profile, ledger, round_index, start=start, item=item)
    raise ValueError(f"unknown sub-auction {sub!r}")


def ascending_auction(
    profile: ValuationProfile,
    sub: str = "sealed",
    epsilon: float | None = None,
    c: int | None = None,
    seed: int = 0,
    ledger: BitLedger | None = None,
    reserve_price: bool = False,
) -> AuctionOutcome:
    """Single-item ascending auction with adaptively sampled price updates.

    While more than c agents remain: sample c of them, run the sub-auction
    (charging its bits), announce its price p, then charge every non-sampled
    active agent one stay/quit bit and keep {v > p} plus the sample winner.
    Ends with the last announced price when one agent remains, otherwise
    with a final sub-auction on the leftovers.

    ``reserve_price`` forces announced prices to be nondecreasing even under
    misreports (they already are under sincere play); off by default.
    """
    n = profile.n
    if profile.values.ndim != 1:
        raise ValueError("single-item auction needs a single-item profile")
    if n < 2:
        raise ValueError("need at least 2 agents")
    if c is None:
        c = sample_size_single(epsilon if epsilon is not None else 0.25)
    if c < 2:
        raise ValueError("sample too small for second price")
    c = min(c, n)

    values = profile.values
    ledger = ensure_ledger(ledger, n)
    rng = run_rng(seed)
    active = np.arange(n, dtype=np.int64)
    rounds = 0
    price = 0
    winner = -1

    while len(active) > c:
        rounds += 1
        sample = rng.choice(active, size=c, replace=False)
        w, p = _run_sub(sub, sample, profile, ledger, rounds, price)
        if reserve_price:
            p = max(p, price)
        in_sample = np.zeros(n, dtype=bool)
        in_sample[sample] = True
        outside = active[~in_sample[active]]
        ledger.charge_many(outside, 1, rounds, "response")
        stay = outside[values[outside] > p]
        active = np.concatenate([stay, [w]])
        winner, price = w, p

    if len(active) == 1:
        winner, payment = int(active[0]), price
    else:
        rounds += 1
        winner, payment = _run_sub(sub, active, profile, ledger, rounds, price)

    oracle_w, oracle_p = vcg_oracle(profile, 1)
    total = ledger.total
    return AuctionOutcome(
        winners=(winner,),
        payment=int(payment),
        rounds=rounds,
        total_bits=total,
        bits_per_agent=total / n,
        stats={
            "c": c,
            "sub": sub,
            "vcg_match": bool(
                payment == oracle_p and values[winner] == values[oracle_w[0]]
            ),
        },
    )


def inclusion_rate_experiment(n: int, c: int, trials: int, seed: int = 0) -> dict:
    """Fraction of agents surviving one round, on distinct-valued profiles.

    With pairwise-distinct values the survivor fraction is (n - R)/n where R
    is the population rank of the sample's second-highest value, so a trial
    only needs the sampled ranks.  Reports the empirical mean and variance
    next to their large-n predictions 2/(c+1) and 2(c-1)/((c+2)(c+1)^2).
    """
    if not (2 <= c <= n):
        raise ValueError("need 2 <= c <= n")
    xs = np.empty(trials)
    for t in range(trials):
        rng = trial_rng(seed, t)
        ranks = rng.choice(n, size=c, replace=False) + 1
        second = np.partition(ranks, -2)[-2]
        xs[t] = (n - second) / n
    return {
        "mean": float(xs.mean()),
        "variance": float(xs.var(ddof=1)),
        "predicted_mean": 2.0 / (c + 1),
        "predicted_variance": 2.0 * (c - 1) / ((c + 2) * (c + 1) ** 2),
        "trials": trials,
    }


@dataclass(frozen=True)
class MultiItemOutcome:
    """Per-item outcomes plus the shared-round encoding statistics."""

    items: tuple
    rounds: int
    message_bits_per_round: tuple
    total_bits: int
    bits_per_agent: float
    stats: dict = field(default_factory=dict)


def simultaneous_additive(
    profile: ValuationProfile,
    delta: float = 0.1,
    seed: int = 0,
    c: int | None = None,
    ledger: BitLedger | None = None,
    sub: str = "sealed",
) -> MultiItemOutcome:
    """Run one ascending auction per item, all advancing one round per global round.

    Per global round each agent active in at least one still-sampling auction
    sends one bit if she withdraws everywhere and an m_i-bit membership
    vector otherwise (m_i = her number of such auctions).  Sub-auction bits
    are charged separately by the simulators.  Resolved auctions stop
    charging their agents.
    """
    n, m = profile.n, profile.m
    if profile.values.ndim != 2:
        raise ValueError("multi-item auction needs an (n, m) profile")
    if n < 2:
        raise ValueError("need at least 2 agents")
    if c is None:
        c = sample_size_multi(m, delta)
    c = max(2, min(c, n))

    ledger = ensure_ledger(ledger, n)
    rng = run_rng(seed)
    active = [np.arange(n, dtype=np.int64) for _ in range(m)]
    resolved: list[tuple[int, int] | None] = [None] * m
    prev_price = [0] * m
    item_rounds = [0] * m
    message_bits = []
    rounds = 0

    while any(r is None for r in resolved):
        rounds += 1
        sampling_items = []
        stays = np.zeros((n, m), dtype=bool)
        active_now = np.zeros((n, m), dtype=bool)
        for j in range(m):
            if resolved[j] is not None:
                continue
            item_rounds[j] = rounds
            act = active[j]
            if len(act) == 1:
                resolved[j] = (int(act[0]), prev_price[j])
                continue
            if len(act) <= c:
                w, p = _run_sub(sub, act, profile, ledger, rounds, prev_price[j], item=j)
                resolved[j] = (w, p)
                continue
            sampling_items.append(j)
            active_now[act, j] = True
            sample = rng.choice(act, size=c, replace=False)
            w, p = _run_sub(sub, sample, profile, ledger, rounds, prev_price[j], item=j)
            prev_price[j] = p
            in_sample = np.zeros(n, dtype=bool)
            in_sample[sample] = True
            outside = act[~in_sample[act]]
            stay = outside[profile.values[outside, j] > p]
            stays[stay, j] = True
            stays[w, j] = True
            active[j] = np.flatnonzero(stays[:, j]).astype(np.int64)

        if sampling_items:
            m_i = active_now.sum(axis=1)
            stays_any = stays.any(axis=1)
            msg = np.where(stays_any, m_i, np.minimum(m_i, 1))
            participants = np.flatnonzero(m_i > 0)
            ledger.charge_many(participants, msg[participants], rounds, "membership")
            message_bits.append(int(msg.sum()))
        else:
            message_bits.append(0)

    outcomes = []
    all_match = True
    for j in range(m):
        w, p = resolved[j]
        ow, op = vcg_oracle(profile, 1, item=j)
        match = bool(p == op and profile.values[w, j] == profile.values[ow[0], j])
        all_match &= match
        outcomes.append(
            AuctionOutcome(
                winners=(w,),
                payment=int(p),
                rounds=item_rounds[j],
                total_bits=0,
                bits_per_agent=0.0,
                stats={"item": j, "vcg_match": match},
            )
        )

    total = ledger.total
    return MultiItemOutcome(
        items=tuple(outcomes),
        rounds=rounds,
        message_bits_per_round=tuple(message_bits),
        total_bits=total,
        bits_per_agent=total / n,
        stats={"c": c, "vcg_match": all_match},
    )


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of an exhaustive unilateral-misreport search."""

    runs: int
    profitable: tuple

    @property
    def clean(self) -> bool:
        return not self.profitable


def _utility(outcome, profile: ValuationProfile, agent: int) -> int:
    """Deviator utility under her true values (value minus payment if winning)."""
    if isinstance(outcome, MultiItemOutcome):
        u = 0
        for j, item in enumerate(outcome.items):
            if agent in item.winners:
                u += int(profile.values[agent, j]) - item.payment
        return u
    if agent in outcome.winners:
        return int(profile.item_values()[agent]) - outcome.payment
    return 0


def truthfulness_probe(
    profile: ValuationProfile,
    mechanism,
    deviations=None,
    seeds=range(50),
) -> ProbeReport:
    """Compare each agent's utility under truth vs every unilateral misreport.

    ``mechanism`` maps (profile, seed) to an outcome; each seed fixes all of
    the mechanism's randomness, so the comparison is ex post.  Deviations
    default to the full k-bit value range (the full grid of per-item vectors
    for multi-item profiles).  Intended for small instances.
    """
    if deviations is None:
        levels = range(2**profile.k)
        if profile.m == 1:
            deviations = list(levels)
        else:
            from itertools import product

            deviations = [list(v) for v in product(levels, repeat=profile.m)]

    profitable = []
    runs = 0
    for seed in seeds:
        truthful = mechanism(profile, seed)
        runs += 1
        for agent in range(profile.n):
            u_truth = _utility(truthful, profile, agent)
            for report in deviations:
                deviated = mechanism(profile.with_report(agent, report), seed)
                runs += 1
                gain = _utility(deviated, profile, agent) - u_truth
                if gain > 0:
                    profitable.append(
                        {"agent": agent, "seed": seed, "report": report, "gain": gain}
                    )
    return ProbeReport(runs=runs, profitable=tuple(profitable))
