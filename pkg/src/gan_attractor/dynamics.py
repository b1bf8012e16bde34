"""Synchronous recall dynamics, attractor detection, and stability margins.

Update rule, all bits in parallel:

    s_i^a(t+1) = H( sum_{j!=i} W_ij^a f_j(t) + sum_{b!=a} L_i^ab s_i^b(t) - theta_i^a )

with H(x) = 1 iff x >= 0, and f_j the characteristic value of neuron j's
current bits.  Trajectories are invariant under any positive rescaling of
(W, L, theta) since only field signs matter.

Two steppers are provided.  ``step_sync`` is the production path: it packs
each neuron's Q bits into one integer code, evaluates f for the whole network
with a single table gather, and computes all fields with BLAS.  ``step_reference``
is a deliberately naive per-bit translation of the update rule used to
cross-check the packed path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .characteristic import eval_characteristic
from .core import Network, PatternSet, hamming_distance


def pack_state(bits: np.ndarray) -> np.ndarray:
    """(N, Q) bit matrix -> (N,) integer codes, variable a at bit a."""
    bits = np.asarray(bits)
    q = bits.shape[1]
    return bits.astype(np.int64) @ (1 << np.arange(q, dtype=np.int64))


def unpack_state(codes: np.ndarray, q_vars: int) -> np.ndarray:
    """(N,) integer codes -> (N, Q) bit matrix."""
    return ((np.asarray(codes)[:, None] >> np.arange(q_vars)) & 1).astype(np.uint8)


def characteristic_values(network: Network, bits: np.ndarray) -> np.ndarray:
    """f_j for every neuron j of the given state."""
    if network.f_table is not None:
        return network.f_table[pack_state(bits)]
    return np.array([eval_characteristic(network.spec.characteristic, row) for row in bits])


def local_field(network: Network, bits: np.ndarray, i: int, a: int) -> float:
    """Field on bit (i, a): direct translation of the update rule's argument."""
    spec = network.spec
    f = [eval_characteristic(spec.characteristic, bits[j]) for j in range(spec.n_neurons)]
    h = 0.0
    for j in range(spec.n_neurons):
        if j != i:
            h += network.weights[a, i, j] * f[j]
    if spec.interacting:
        for b in range(spec.q_vars):
            if b != a:
                h += network.couplings[i, a, b] * bits[i, b]
    return h - network.thresholds[i, a]


def _fields_packed(network: Network, codes: np.ndarray, bits: np.ndarray) -> np.ndarray:
    f = network.f_table[codes] if network.f_table is not None else \
        np.array([eval_characteristic(network.spec.characteristic, row) for row in bits])
    fields = np.einsum("aij,j->ia", network.weights, f)
    if network.spec.interacting:
        fields = fields + np.einsum("iab,ib->ia", network.couplings, bits.astype(np.float64))
    return fields - network.thresholds


def step_sync(network: Network, bits: np.ndarray) -> np.ndarray:
    """One parallel update of every bit (packed fast path)."""
    bits = np.asarray(bits, dtype=np.uint8)
    fields = _fields_packed(network, pack_state(bits), bits)
    return (fields >= 0.0).astype(np.uint8)


def step_reference(network: Network, bits: np.ndarray) -> np.ndarray:
    """One parallel update via explicit per-bit loops (verification path).

    All characteristic values are read from the input state first, then every
    bit thresholds its own field; no vectorization, no code packing.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    spec = network.spec
    n, q = spec.n_neurons, spec.q_vars
    f = [eval_characteristic(spec.characteristic, bits[j]) for j in range(n)]
    new = np.zeros((n, q), dtype=np.uint8)
    for i in range(n):
        for a in range(q):
            h = 0.0
            for j in range(n):
                if j != i:
                    h += float(network.weights[a, i, j]) * f[j]
            if spec.interacting:
                for b in range(q):
                    if b != a:
                        h += float(network.couplings[i, a, b]) * float(bits[i, b])
            h -= float(network.thresholds[i, a])
            new[i, a] = 1 if h >= 0.0 else 0
    return new


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def step_continuous(network: Network, state: np.ndarray) -> np.ndarray:
    """One parallel update with real-valued variables in [0, 1].

    Fields are squashed by the logistic sigmoid instead of thresholded; only
    defined for the linear characteristic (the one family defined on the unit
    cube) and non-interacting networks.
    """
    if network.spec.characteristic.kind != "linear":
        raise ValueError("continuous dynamics require the linear characteristic kind")
    if network.spec.interacting:
        raise ValueError("continuous dynamics are defined for non-interacting networks")
    state = np.asarray(state, dtype=np.float64)
    coeffs = np.asarray(network.spec.characteristic.coefficients, dtype=np.float64)
    f = state @ coeffs
    fields = np.einsum("aij,j->ia", network.weights, f) - network.thresholds
    return sigmoid(fields)


@dataclass(frozen=True, eq=False)
class AttractorResult:
    """Outcome of one relaxation run.

    cycle_length is 1 for a fixed point, 2 for a two-cycle (possible under
    parallel updates), 0 if max_iters was exhausted.  d_f is the distance of
    the last visited state to the reference pattern; for a two-cycle,
    d_f_cycle_min additionally reports the nearer of the two cycle states.
    """

    final_state: np.ndarray
    cycle_length: int
    iterations: int
    d_f: float
    d_f_cycle_min: float


def run_to_attractor(network: Network, state: np.ndarray, reference: np.ndarray,
                     max_iters: int = 1000) -> AttractorResult:
    """Iterate the parallel dynamics until a fixed point or two-cycle repeats.

    Non-convergence within max_iters is a reported outcome (cycle_length 0),
    not an error.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    reference = np.asarray(reference, dtype=np.uint8)
    cur = np.asarray(state, dtype=np.uint8)
    if cur.shape != reference.shape:
        raise ValueError(f"state shape {cur.shape} does not match reference {reference.shape}")
    prev: Optional[np.ndarray] = None
    for it in range(1, max_iters + 1):
        nxt = step_sync(network, cur)
        if np.array_equal(nxt, cur):
            d = hamming_distance(nxt, reference)
            return AttractorResult(nxt, 1, it, d, d)
        if prev is not None and np.array_equal(nxt, prev):
            d = hamming_distance(nxt, reference)
            d_other = hamming_distance(cur, reference)
            return AttractorResult(nxt, 2, it, d, min(d, d_other))
        prev = cur
        cur = nxt
    d = hamming_distance(cur, reference)
    return AttractorResult(cur, 0, max_iters, d, d)


@dataclass(frozen=True, eq=False)
class MarginReport:
    """Per-bit stability margins of stored patterns.

    margin[mu, i, a] = (2*s_i^a(mu) - 1) * field_i^a(mu): positive means the
    bit reproduces itself under one update with room to spare.  With the
    H(0) = 1 convention a pattern is a true fixed point iff every target-1
    bit has field >= 0 and every target-0 bit has field strictly < 0;
    zero-field bits sit exactly on that boundary and are counted separately.
    """

    margins: np.ndarray     # (P, N, Q)
    thresholds: np.ndarray  # (N, Q)
    min_margin: float
    kappa: float
    meets_demand: bool      # min_margin >= kappa
    n_zero_fields: int
    fixed_point_mask: np.ndarray  # (P,) bool, exact fixed-point test per pattern


def stability_margins(network: Network, patterns: PatternSet, kappa: float = 0.0) -> MarginReport:
    """Margins of every (pattern, neuron, variable) triple under one update."""
    spec = network.spec
    bits = patterns.bits
    if bits.shape[1:] != (spec.n_neurons, spec.q_vars):
        raise ValueError(f"pattern shape {bits.shape[1:]} does not match network "
                         f"{(spec.n_neurons, spec.q_vars)}")
    fvals = np.stack([characteristic_values(network, p) for p in bits])   # (P, N)
    fields = np.einsum("aij,pj->pia", network.weights, fvals)
    s = bits.astype(np.float64)
    if spec.interacting:
        fields = fields + np.einsum("iab,pib->pia", network.couplings, s)
    fields = fields - network.thresholds
    margins = (2.0 * s - 1.0) * fields
    fixed = np.all((s == 1.0) & (fields >= 0.0) | (s == 0.0) & (fields < 0.0), axis=(1, 2))
    return MarginReport(
        margins=margins,
        thresholds=network.thresholds.copy(),
        min_margin=float(margins.min()),
        kappa=float(kappa),
        meets_demand=bool(margins.min() >= kappa),
        n_zero_fields=int(np.count_nonzero(fields == 0.0)),
        fixed_point_mask=fixed,
    )
