"""Deterministic seed streams for all randomized operations.

Every randomized routine in this package takes a seed argument and is a pure
function of (inputs, seed): the same master seed and the same configuration
always reproduce the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASTER_MAX = 2**64


@dataclass(frozen=True)
class RunSeed:
    """Master seed plus a documented stream-derivation rule.

    Child streams are derived as ``SeedSequence(master, spawn_key=key)`` where
    ``key`` is a tuple of small integers identifying (experiment, set, trial,
    ...).  Distinct keys give statistically independent generators, so trials
    can be produced in any order (or in parallel) with identical results.
    """

    master: int

    def __post_init__(self):
        if not (0 <= int(self.master) < _MASTER_MAX):
            raise ValueError(f"master seed must be a 64-bit unsigned integer, got {self.master}")

    def stream(self, *key: int) -> np.random.Generator:
        """Generator for the derivation path ``key`` under this master seed."""
        seq = np.random.SeedSequence(int(self.master), spawn_key=tuple(int(k) for k in key))
        return np.random.default_rng(seq)


def as_generator(seed, *key: int) -> np.random.Generator:
    """Coerce a RunSeed, integer, or Generator into a Generator.

    RunSeed and plain integers are routed through the stream-derivation rule;
    an existing Generator is returned as-is (caller manages its state).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RunSeed):
        return seed.stream(*key)
    if isinstance(seed, (int, np.integer)):
        return RunSeed(int(seed)).stream(*key)
    raise TypeError(f"seed must be RunSeed, int, or numpy Generator, got {type(seed).__name__}")
