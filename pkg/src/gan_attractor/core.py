"""Shared data layer: network assembly, pattern sampling, perturbation, distance.

States are (N, Q) uint8 arrays of {0,1}: N neurons, each with Q internal bit
variables.  Weights are a (Q, N, N) tensor (one N x N coupling matrix per
internal variable), intra-neuron couplings an (N, Q, Q) tensor.  All
constructed objects are immutable (arrays are frozen) and safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .characteristic import CharacteristicSpec, EXHAUSTIVE_MAX_Q, value_table
from .seeding import as_generator


@dataclass(frozen=True)
class GanSpec:
    """Shape and wiring of one network of multi-bit neurons."""

    n_neurons: int
    q_vars: int
    characteristic: CharacteristicSpec
    interacting: bool = False

    def __post_init__(self):
        if self.n_neurons < 2:
            raise ValueError(f"n_neurons must be >= 2, got {self.n_neurons}")
        if self.q_vars < 1:
            raise ValueError(f"q_vars must be >= 1, got {self.q_vars}")
        self.characteristic.validate(self.q_vars)


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PatternSet:
    """P network states sampled with bit bias rho = P(bit = 0)."""

    bits: np.ndarray  # (P, N, Q) uint8
    rho: float

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 3 or bits.shape[0] < 1:
            raise ValueError(f"patterns must be a (P, N, Q) array with P >= 1, got shape {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("pattern entries must be bits")
        object.__setattr__(self, "bits", _frozen(bits, np.uint8))

    @property
    def n_patterns(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable network handle: spec, weights, couplings, thresholds.

    ``f_table`` caches the characteristic function over all 2^Q neuron codes
    so the dynamics can evaluate it with a single gather (None when Q is too
    large to tabulate; the dynamics then evaluates per neuron).
    """

    spec: GanSpec
    weights: np.ndarray               # (Q, N, N)
    couplings: Optional[np.ndarray]   # (N, Q, Q) or None
    thresholds: np.ndarray            # (N, Q)
    f_table: Optional[np.ndarray]     # (2^Q,) or None

    @property
    def n_neurons(self) -> int:
        return self.spec.n_neurons

    @property
    def q_vars(self) -> int:
        return self.spec.q_vars


def build_network(spec: GanSpec, weights: np.ndarray,
                  couplings: Optional[np.ndarray] = None,
                  thresholds: Optional[np.ndarray] = None) -> Network:
    """Assemble and validate a network.

    Raises ValueError on shape mismatches, nonzero self-weights (sums in the
    dynamics run over j != i and b != a, so the diagonals must be zero), or
    couplings that disagree with spec.interacting.
    """
    n, q = spec.n_neurons, spec.q_vars
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (q, n, n):
        raise ValueError(f"weights must have shape (Q, N, N) = {(q, n, n)}, got {w.shape}")
    if any(np.diagonal(w[a]).any() for a in range(q)):
        raise ValueError("weight diagonal must be zero (no self-coupling)")

    if spec.interacting and couplings is None:
        raise ValueError("interacting spec requires internal couplings")
    if not spec.interacting and couplings is not None:
        raise ValueError("couplings supplied for a non-interacting spec")
    l = None
    if couplings is not None:
        l = np.asarray(couplings, dtype=np.float64)
        if l.shape != (n, q, q):
            raise ValueError(f"couplings must have shape (N, Q, Q) = {(n, q, q)}, got {l.shape}")
        if np.einsum("iaa->ia", l).any():
            raise ValueError("coupling diagonal must be zero (no self-coupling)")
        l = _frozen(l, np.float64)

    if thresholds is None:
        theta = np.zeros((n, q))
    else:
        theta = np.asarray(thresholds, dtype=np.float64)
        if theta.shape != (n, q):
            raise ValueError(f"thresholds must have shape (N, Q) = {(n, q)}, got {theta.shape}")

    table = None
    if q <= EXHAUSTIVE_MAX_Q:
        table = _frozen(value_table(spec.characteristic, q), np.float64)
    return Network(spec, _frozen(w, np.float64), l, _frozen(theta, np.float64), table)


def random_pattern_set(n_neurons: int, q_vars: int, n_patterns: int, rho: float, seed) -> PatternSet:
    """Sample P patterns, each bit independently 0 with probability rho."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly inside (0, 1), got {rho}")
    if n_patterns < 1:
        raise ValueError(f"n_patterns must be >= 1, got {n_patterns}")
    rng = as_generator(seed)
    bits = (rng.random((n_patterns, n_neurons, q_vars)) >= rho).astype(np.uint8)
    return PatternSet(bits, rho)


def perturb_state(pattern: np.ndarray, d0: float, seed) -> np.ndarray:
    """Flip exactly round(d0 * N * Q) distinct bits, chosen uniformly.

    The exact flip count (rather than i.i.d. per-bit flips) makes the initial
    distance of every trial exactly round(d0*N*Q)/(N*Q).
    """
    if not 0.0 <= d0 <= 1.0:
        raise ValueError(f"d0 must lie in [0, 1], got {d0}")
    pattern = np.asarray(pattern, dtype=np.uint8)
    total = pattern.size
    k = int(round(d0 * total))
    out = pattern.copy().reshape(-1)
    if k:
        rng = as_generator(seed)
        out[rng.choice(total, size=k, replace=False)] ^= 1
    return out.reshape(pattern.shape)


def hamming_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of the N*Q internal bits on which two states differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"state shapes differ: {a.shape} vs {b.shape}")
    return np.count_nonzero(a != b) / a.size
