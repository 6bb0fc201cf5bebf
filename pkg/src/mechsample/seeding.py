"""Deterministic seed derivation for Monte-Carlo trial batches.

A master seed expands to per-trial sub-seeds through a counter-based
SeedSequence, so serial and parallel executions of the same experiment
consume identical randomness per trial.
"""

import numpy as np


def trial_rng(master_seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Generator for one trial of an experiment keyed by (master_seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, trial, stream)))


def run_rng(seed: int) -> np.random.Generator:
    """Generator for a single seeded run."""
    return np.random.default_rng(np.random.SeedSequence(seed))
