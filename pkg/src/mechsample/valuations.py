"""Agent valuation profiles: k-bit unsigned integers, per item for multi-item."""

from __future__ import annotations

import json

import numpy as np

from mechsample.seeding import run_rng


class ValuationProfile:
    """Valuations of n agents for m items, each an integer in [0, 2^k - 1].

    ``values`` has shape (n,) for a single item and (n, m) otherwise; the
    array is frozen after construction.
    """

    def __init__(self, k: int, values):
        if k < 1:
            raise ValueError("need at least 1 bit per value")
        arr = np.asarray(values, dtype=np.int64)
        if arr.ndim not in (1, 2) or arr.shape[0] < 1:
            raise ValueError("values must be (n,) or (n, m) with n >= 1")
        if arr.min() < 0 or arr.max() >= 2**k:
            raise ValueError(f"values must lie in [0, 2^{k} - 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        self.k = k
        self.values = arr

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def item_values(self, item: int | None = None) -> np.ndarray:
        if self.values.ndim == 1:
            if item not in (None, 0):
                raise ValueError("single-item profile")
            return self.values
        if item is None:
            raise ValueError("item index required for multi-item profile")
        return self.values[:, item]

    def with_report(self, agent: int, report) -> "ValuationProfile":
        """Copy of the profile with one agent's report replaced (for probes)."""
        vals = self.values.copy()
        vals[agent] = report
        return ValuationProfile(self.k, vals)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "values": self.values.tolist()})

    @staticmethod
    def from_json(text: str) -> "ValuationProfile":
        obj = json.loads(text)
        return ValuationProfile(obj["k"], obj["values"])

    @staticmethod
    def uniform(n: int, k: int, seed: int = 0, m: int = 1) -> "ValuationProfile":
        rng = run_rng(seed)
        shape = (n,) if m == 1 else (n, m)
        return ValuationProfile(k, rng.integers(0, 2**k, size=shape))

    @staticmethod
    def zipf(n: int, k: int, seed: int = 0, a: float = 2.0, m: int = 1) -> "ValuationProfile":
        """Heavy-tailed values: Zipf(a) draws clipped into [0, 2^k - 1]."""
        rng = run_rng(seed)
        shape = (n,) if m == 1 else (n, m)
        vals = np.minimum(rng.zipf(a, size=shape) - 1, 2**k - 1)
        return ValuationProfile(k, vals)

    @staticmethod
    def distinct(n: int, k: int | None = None, seed: int = 0) -> "ValuationProfile":
        """A random permutation of {0..n-1}: pairwise-distinct values."""
        if k is None:
            k = max(1, int(n - 1).bit_length())
        if 2**k < n:
            raise ValueError("k too small for n distinct values")
        rng = run_rng(seed)
        return ValuationProfile(k, rng.permutation(n))
