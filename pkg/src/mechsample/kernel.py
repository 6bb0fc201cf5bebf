"""Second-price sub-auction simulators and the brute-force VCG oracle.

Both simulators return the same (winner, price) pair on any input: the
highest-value agent (ties to the smallest index) paying the second-highest
value.  They differ only in how many bits they elicit:

* sealed bid: every participant reveals her full k-bit value, so c*k bits;
* English: unit price ticks, one stay/quit bit per active participant per
  tick, worst case c*2^k bits.  An agent withdraws when the price reaches
  her value, and the auction clears when at most one agent remains active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mechsample.ledger import BitLedger
from mechsample.valuations import ValuationProfile


@dataclass(frozen=True)
class AuctionOutcome:
    winners: tuple
    payment: int
    rounds: int
    total_bits: int
    bits_per_agent: float
    stats: dict = field(default_factory=dict)


def _argmax_lex(agents: np.ndarray, values: np.ndarray) -> int:
    """Agent with the highest value; ties go to the smallest agent index."""
    best = values.max()
    return int(agents[values == best].min())


def sealed_bid_sim(
    agents,
    profile: ValuationProfile,
    ledger: BitLedger,
    round_index: int = 0,
    item: int | None = None,
) -> tuple[int, int]:
    """Simulate a sealed-bid second-price auction on a set of agents."""
    agents = np.asarray(agents, dtype=np.int64)
    if len(agents) < 2:
        raise ValueError("second price undefined")
    values = profile.item_values(item)[agents]
    winner = _argmax_lex(agents, values)
    price = int(np.partition(values, -2)[-2])
    ledger.charge_many(agents, profile.k, round_index, "sealed")
    return winner, price


def english_sim(
    agents,
    profile: ValuationProfile,
    ledger: BitLedger,
    round_index: int = 0,
    start: int = 0,
    item: int | None = None,
) -> tuple[int, int]:
    """Simulate an ascending (English) auction with unit price ticks.

    Ticks run start, start+1, ...; at each tick every still-active agent is
    charged one stay/quit bit, agents whose value the price has reached
    withdraw, and the auction clears once at most one agent remains.  The
    closed form below charges exactly what that tick loop would.

    Callers chaining sub-auctions pass the previous clearing price as
    ``start``; all participants except possibly the previous winner are then
    strictly above it, which keeps the outcome identical to sealed_bid_sim.
    """
    agents = np.asarray(agents, dtype=np.int64)
    if len(agents) < 2:
        raise ValueError("second price undefined")
    values = profile.item_values(item)[agents]
    second = int(np.partition(values, -2)[-2])
    clearing = max(start, second)

    above = agents[values > clearing]
    if len(above) == 1:
        winner = int(above[0])
    elif start < clearing:
        winner = int(agents[values == clearing].min())
    else:
        winner = int(agents.min())

    # quit tick of each non-winner, clipped into [start, clearing]
    quit_tick = np.minimum(np.maximum(values, start), clearing)
    bits = quit_tick - start + 1
    bits[agents == winner] = clearing - start + 1
    ledger.charge_many(agents, bits, round_index, "english")
    return winner, int(clearing)


def vcg_oracle(
    profile: ValuationProfile, m: int = 1, item: int | None = None
) -> tuple[tuple, int]:
    """Ground-truth VCG outcome: top-m agents win at the (m+1)-highest value.

    Ties resolve to smaller agent indices.  With m == n there is no pivotal
    agent and the price is 0.
    """
    values = profile.item_values(item)
    n = len(values)
    if not (1 <= m <= n):
        raise ValueError("need 1 <= m <= n")
    order = np.lexsort((np.arange(n), -values))
    winners = tuple(sorted(int(a) for a in order[:m]))
    price = int(values[order[m]]) if m < n else 0
    return winners, price
