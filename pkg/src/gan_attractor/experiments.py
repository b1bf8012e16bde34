"""Experiment harness: basin-of-attraction curves and the feed-forward check.

Basin protocol: draw a pattern set, train, then for every stored pattern and
every initial distance d0 perturb the pattern, relax to an attractor, and
record the final distance d_f back to that pattern; average over all patterns
and over n_sets independent sets.

Initial states for one (set, pattern) share a single random permutation of
bit positions: the state at distance d0 flips the first round(d0*N*Q)
positions, and the state at distance 1-d0 flips the complementary positions,
so it is exactly the bitwise anti-state of the former.  Each flip set is
still uniform at the given size, so every grid point's statistics are
unbiased; the mirrored coupling removes sampling noise from the d0 <-> 1-d0
comparison (antithetic pairing).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .characteristic import CharacteristicSpec
from .core import GanSpec, build_network, random_pattern_set
from .dynamics import run_to_attractor, sigmoid, step_continuous
from .learning import LearnConfig, hebb_weights, perceptron_train
from .multistate import multistate_hebb, multistate_run, perturb_states, random_state_patterns
from .seeding import RunSeed

MODELS = ("gan", "multistate")

# stream-derivation tags (first spawn-key component)
_KEY_PATTERNS = 1
_KEY_PERTURB = 2
_KEY_FF = 3

GAN_D0_GRID = tuple(round(0.05 * i, 2) for i in range(21))         # full hat
MULTISTATE_D0_GRID = tuple(round(0.05 * i, 2) for i in range(11))  # 0 .. 0.5


@dataclass(frozen=True)
class BasinConfig:
    """Full description of one basin experiment (P = round(alpha * N))."""

    n_neurons: int
    seed: RunSeed
    q_vars: int = 2
    alpha: float = 0.05
    d0_grid: Optional[tuple] = None     # default depends on model
    n_sets: int = 100
    model: str = "gan"
    learn: LearnConfig = field(default_factory=LearnConfig)
    characteristic: CharacteristicSpec = field(default_factory=CharacteristicSpec.parity)
    max_iters: int = 100
    rho: float = 0.5

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if round(self.alpha * self.n_neurons) < 1:
            raise ValueError(f"alpha = {self.alpha} stores no patterns at N = {self.n_neurons}")
        if self.n_sets < 1:
            raise ValueError(f"n_sets must be >= 1, got {self.n_sets}")
        grid = self.d0_grid
        if grid is None:
            grid = GAN_D0_GRID if self.model == "gan" else MULTISTATE_D0_GRID
        grid = tuple(float(d) for d in grid)
        if any(not 0.0 <= d <= 1.0 for d in grid):
            raise ValueError("d0_grid values must lie in [0, 1]")
        object.__setattr__(self, "d0_grid", grid)

    @property
    def n_patterns(self) -> int:
        return int(round(self.alpha * self.n_neurons))


@dataclass(frozen=True)
class BasinRow:
    d0: float
    mean_df: float
    stderr_df: float
    n_trials: int


@dataclass(frozen=True)
class BasinCurve:
    """Aggregated (d0, <d_f>) table plus everything needed to reproduce it."""

    rows: tuple
    config: BasinConfig
    excluded_sets: int              # training failures (perceptron mode only)
    cycle_counts: tuple             # (fixed points, two-cycles, unconverged)

    def mean_df(self, d0: float) -> float:
        for row in self.rows:
            if row.d0 == d0:
                return row.mean_df
        raise KeyError(f"no row for d0 = {d0}")

    def stderr_df(self, d0: float) -> float:
        for row in self.rows:
            if row.d0 == d0:
                return row.stderr_df
        raise KeyError(f"no row for d0 = {d0}")


def _antithetic_flip_mask(perm: np.ndarray, d0: float, total: int) -> np.ndarray:
    k = int(round(d0 * total))
    mask = np.zeros(total, dtype=bool)
    if d0 <= 0.5:
        mask[perm[:k]] = True
    else:
        mask[:] = True
        mask[perm[:total - k]] = False
    return mask


def _gan_set(config: BasinConfig, set_idx: int):
    """Train on one pattern set and run all its trials.

    Returns (per-d0 list of d_f, cycle counts, excluded flag).
    """
    n, q, p = config.n_neurons, config.q_vars, config.n_patterns
    spec = GanSpec(n, q, config.characteristic, interacting=False)
    patterns = random_pattern_set(n, q, p, config.rho,
                                  config.seed.stream(_KEY_PATTERNS, set_idx))
    if config.learn.mode == "perceptron":
        trained = perceptron_train(patterns, spec, config.learn)
        if not trained.converged:
            return None, (0, 0, 0), True
        weights = trained.weights
    else:
        weights = hebb_weights(patterns, spec, config.learn)
    net = build_network(spec, weights)

    total = n * q
    per_d0 = {d0: [] for d0 in config.d0_grid}
    cycles = [0, 0, 0]
    for mu in range(p):
        perm = config.seed.stream(_KEY_PERTURB, set_idx, mu).permutation(total)
        base = patterns.bits[mu]
        flat = base.reshape(-1)
        for d0 in config.d0_grid:
            start = flat.copy()
            start[_antithetic_flip_mask(perm, d0, total)] ^= 1
            res = run_to_attractor(net, start.reshape(n, q), base, config.max_iters)
            per_d0[d0].append(res.d_f)
            if res.cycle_length == 1:
                cycles[0] += 1
            elif res.cycle_length == 2:
                cycles[1] += 1
            else:
                cycles[2] += 1
    return per_d0, tuple(cycles), False


def _multistate_set(config: BasinConfig, set_idx: int):
    n, p = config.n_neurons, config.n_patterns
    patterns = random_state_patterns(p, n, config.seed.stream(_KEY_PATTERNS, set_idx))
    net = multistate_hebb(patterns)
    per_d0 = {d0: [] for d0 in config.d0_grid}
    cycles = [0, 0, 0]
    for mu in range(p):
        for k, d0 in enumerate(config.d0_grid):
            start = perturb_states(patterns[mu], d0,
                                   config.seed.stream(_KEY_PERTURB, set_idx, mu, k))
            res = multistate_run(net, start, patterns[mu], config.max_iters)
            per_d0[d0].append(res.d_f)
            if res.cycle_length == 1:
                cycles[0] += 1
            elif res.cycle_length == 2:
                cycles[1] += 1
            else:
                cycles[2] += 1
    return per_d0, tuple(cycles), False


def basin_curve(config: BasinConfig, workers: int = 1) -> BasinCurve:
    """Run the full experiment; output is identical for any worker count.

    Sets whose training fails to converge (perceptron mode) are excluded and
    counted.  Raises RuntimeError if no set trains successfully.
    """
    run_set = _gan_set if config.model == "gan" else _multistate_set
    indices = range(config.n_sets)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: run_set(config, i), indices))
    else:
        results = [run_set(config, i) for i in indices]

    excluded = sum(1 for _, _, bad in results if bad)
    if excluded == config.n_sets:
        raise RuntimeError("no pattern set trained to convergence; tighten the "
                           "load or raise max_epochs")
    cycles = np.sum([c for _, c, bad in results if not bad], axis=0)
    rows = []
    for d0 in config.d0_grid:
        vals = np.concatenate([np.asarray(per[d0]) for per, _, bad in results if not bad])
        n_trials = len(vals)
        stderr = float(vals.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
        rows.append(BasinRow(d0, float(vals.mean()), stderr, n_trials))
    return BasinCurve(tuple(rows), config, excluded, tuple(int(c) for c in cycles))


@dataclass(frozen=True, eq=False)
class FfNet:
    """Three-layer net equivalent to one neuron's continuous update.

    N-1 linear inputs (the other neurons' characteristic values), Q sigmoidal
    hidden units (weights = that neuron's incoming couplings, bias = minus
    its thresholds), one linear output (the characteristic coefficients).
    """

    input_weights: np.ndarray   # (Q, N-1)
    hidden_bias: np.ndarray     # (Q,)
    output_coeffs: np.ndarray   # (Q,)

    def evaluate(self, inputs: np.ndarray) -> float:
        hidden = sigmoid(self.input_weights @ np.asarray(inputs, dtype=np.float64)
                         + self.hidden_bias)
        return float(self.output_coeffs @ hidden)


def build_ff_equivalent(network, neuron_index: int) -> FfNet:
    """Extract the three-layer net computing f_i(t) from (f_j(t-1))_{j != i}."""
    spec = network.spec
    if spec.characteristic.kind != "linear":
        raise ValueError("feed-forward equivalence requires the linear characteristic kind")
    i = int(neuron_index)
    keep = [j for j in range(spec.n_neurons) if j != i]
    return FfNet(
        input_weights=network.weights[:, i, keep],
        hidden_bias=-network.thresholds[i],
        output_coeffs=np.asarray(spec.characteristic.coefficients, dtype=np.float64),
    )


def verify_ff_equivalence(network, n_trials: int, seed) -> float:
    """Max |f_i from the layered nets - f_i from one network step|.

    Both paths are evaluated on random continuous states; agreement is exact
    up to float summation order.
    """
    spec = network.spec
    if spec.characteristic.kind != "linear":
        raise ValueError("feed-forward equivalence requires the linear characteristic kind")
    coeffs = np.asarray(spec.characteristic.coefficients, dtype=np.float64)
    nets = [build_ff_equivalent(network, i) for i in range(spec.n_neurons)]
    rng = seed.stream(_KEY_FF) if isinstance(seed, RunSeed) else RunSeed(int(seed)).stream(_KEY_FF)
    worst = 0.0
    for _ in range(int(n_trials)):
        state = rng.random((spec.n_neurons, spec.q_vars))
        f_in = state @ coeffs
        f_step = step_continuous(network, state) @ coeffs
        for i, ff in enumerate(nets):
            f_ff = ff.evaluate(np.delete(f_in, i))
            worst = max(worst, abs(f_ff - f_step[i]))
    return worst
