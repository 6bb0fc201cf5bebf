"""Append-only accounting of agent-to-auctioneer bits.

Only bits elicited from the agents count; auctioneer broadcasts are free.
Message boundaries are framed by the round structure, so codes need not be
prefix-free.  A ledger is single-writer within one auction run; concurrent
runs use separate ledgers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class LedgerEvent:
    round: int
    agent: int
    bits: int
    tag: str


class BitLedger:
    """Per-agent and per-round bit counters with an optional event log.

    Event recording is off by default: large experiments charge millions of
    bits and only need the aggregate counters.
    """

    def __init__(self, n: int, record_events: bool = False):
        if n < 1:
            raise ValueError("ledger needs at least one agent")
        self.n = n
        self.per_agent = np.zeros(n, dtype=np.int64)
        self.per_round: dict[int, int] = {}
        self.record_events = record_events
        self.events: list[LedgerEvent] = []

    @property
    def total(self) -> int:
        return int(self.per_agent.sum())

    def charge(self, agent: int, bits: int, round_index: int = 0, tag: str = "") -> None:
        if bits < 0:
            raise ValueError("bits must be nonnegative")
        self.per_agent[agent] += bits
        self.per_round[round_index] = self.per_round.get(round_index, 0) + bits
        if self.record_events:
            self.events.append(LedgerEvent(round_index, int(agent), int(bits), tag))

    def charge_many(self, agents, bits, round_index: int = 0, tag: str = "") -> None:
        """Charge an array of agents; ``bits`` is a scalar or a matching array."""
        agents = np.asarray(agents, dtype=np.int64)
        if agents.size == 0:
            return
        bits_arr = np.broadcast_to(np.asarray(bits, dtype=np.int64), agents.shape)
        if (bits_arr < 0).any():
            raise ValueError("bits must be nonnegative")
        np.add.at(self.per_agent, agents, bits_arr)
        self.per_round[round_index] = self.per_round.get(round_index, 0) + int(bits_arr.sum())
        if self.record_events:
            for a, b in zip(agents.tolist(), bits_arr.tolist()):
                self.events.append(LedgerEvent(round_index, a, b, tag))

    def round_total(self, round_index: int) -> int:
        return self.per_round.get(round_index, 0)

    def snapshot(self) -> dict:
        return {
            "total": self.total,
            "per_agent": self.per_agent.tolist(),
            "per_round": dict(sorted(self.per_round.items())),
        }

    def to_jsonl(self) -> str:
        """Transcript export, one JSON object per event."""
        import json

        return "\n".join(
            json.dumps({"round": e.round, "agent": e.agent, "bits": e.bits, "tag": e.tag})
            for e in self.events
        )


def ensure_ledger(ledger: Optional[BitLedger], n: int) -> BitLedger:
    return ledger if ledger is not None else BitLedger(n)
