"""Four-state Hopfield baseline: states {-3,-1,1,3}, thresholds {-2,0,2}.

Synchronous dynamics: h_i = sum_{j!=i} W_ij s_j, then the state quantizes as

    s_i <- -3 if h_i < -2;  -1 if -2 <= h_i < 0;  1 if 0 <= h_i < 2;  3 if h_i >= 2

(each boundary belongs to the upper bin, matching the H(0) = 1 convention of
the bit dynamics).  Distance is the fraction of neurons whose state differs
from the reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import AttractorResult
from .seeding import as_generator

STATES = (-3.0, -1.0, 1.0, 3.0)
THRESHOLDS = (-2.0, 0.0, 2.0)

#: mean square of the state alphabet; the Hebb sum is divided by N times this
#: so that fields at a stored pattern sit on the states' own scale, which is
#: what the fixed absolute thresholds assume
_ALPHABET_MEAN_SQ = float(np.mean(np.square(STATES)))  # 5.0


@dataclass(frozen=True, eq=False)
class MultiStateNetwork:
    """Symmetric zero-diagonal couplings over the four-state alphabet."""

    weights: np.ndarray  # (N, N)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if np.diagonal(w).any():
            raise ValueError("weight diagonal must be zero")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_neurons(self) -> int:
        return self.weights.shape[0]


def multistate_hebb(patterns: np.ndarray) -> MultiStateNetwork:
    """Hebb couplings W_ij = sum_mu xi_i xi_j / (N * <xi^2>), zero diagonal."""
    patterns = np.asarray(patterns, dtype=np.float64)
    if patterns.ndim != 2 or patterns.shape[0] < 1:
        raise ValueError(f"patterns must be a (P, N) array with P >= 1, got {patterns.shape}")
    if not np.isin(patterns, STATES).all():
        raise ValueError(f"pattern values must come from {STATES}")
    n = patterns.shape[1]
    w = patterns.T @ patterns / (n * _ALPHABET_MEAN_SQ)
    np.fill_diagonal(w, 0.0)
    return MultiStateNetwork(w)


_STATE_ARR = np.asarray(STATES)
_THRESH_ARR = np.asarray(THRESHOLDS)


def quantize(fields: np.ndarray) -> np.ndarray:
    """Map fields to states through the three thresholds (upper bin on ties)."""
    return _STATE_ARR[np.digitize(np.asarray(fields, dtype=np.float64), _THRESH_ARR, right=False)]


def multistate_step(network: MultiStateNetwork, state: np.ndarray) -> np.ndarray:
    """One synchronous update of all neurons."""
    state = np.asarray(state, dtype=np.float64)
    if not np.isin(state, STATES).all():
        raise ValueError(f"state values must come from {STATES}")
    return quantize(network.weights @ state)


def multistate_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of neurons whose states differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"state shapes differ: {a.shape} vs {b.shape}")
    return np.count_nonzero(a != b) / a.size


def multistate_run(network: MultiStateNetwork, state: np.ndarray, reference: np.ndarray,
                   max_iters: int = 1000) -> AttractorResult:
    """Relax to a fixed point or two-cycle; mirrors the bit-network runner."""
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    reference = np.asarray(reference, dtype=np.float64)
    cur = np.asarray(state, dtype=np.float64)
    prev = None
    for it in range(1, max_iters + 1):
        nxt = multistate_step(network, cur)
        if np.array_equal(nxt, cur):
            d = multistate_distance(nxt, reference)
            return AttractorResult(nxt, 1, it, d, d)
        if prev is not None and np.array_equal(nxt, prev):
            d = multistate_distance(nxt, reference)
            return AttractorResult(nxt, 2, it, d, min(d, multistate_distance(cur, reference)))
        prev = cur
        cur = nxt
    d = multistate_distance(cur, reference)
    return AttractorResult(cur, 0, max_iters, d, d)


def random_state_patterns(n_patterns: int, n_neurons: int, seed) -> np.ndarray:
    """P patterns with neurons drawn uniformly from the four-state alphabet."""
    if n_patterns < 1:
        raise ValueError(f"n_patterns must be >= 1, got {n_patterns}")
    rng = as_generator(seed)
    return _STATE_ARR[rng.integers(0, 4, size=(n_patterns, n_neurons))]


def perturb_states(pattern: np.ndarray, d0: float, seed) -> np.ndarray:
    """Reassign exactly round(d0*N) neurons to uniformly chosen different states."""
    if not 0.0 <= d0 <= 1.0:
        raise ValueError(f"d0 must lie in [0, 1], got {d0}")
    pattern = np.asarray(pattern, dtype=np.float64)
    n = pattern.size
    k = int(round(d0 * n))
    out = pattern.copy()
    if k:
        rng = as_generator(seed)
        idx = rng.choice(n, size=k, replace=False)
        # shift each chosen neuron by 1..3 alphabet slots: uniform over the
        # three values different from the current one
        cur = np.searchsorted(_STATE_ARR, out[idx])
        out[idx] = _STATE_ARR[(cur + rng.integers(1, 4, size=k)) % 4]
    return out
