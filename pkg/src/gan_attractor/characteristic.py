"""Characteristic functions: the only externally visible quantity of a neuron.

A characteristic function maps a neuron's Q internal bit variables to a real
number.  This module holds the declarative spec for the supported families,
an evaluator, Bernoulli-measure moment estimation, and the admissibility
check used by the capacity formulas (bounded mean and second moment, and
non-degenerate variance).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .seeding import as_generator

KINDS = ("parity", "linear", "correlation", "grandmother", "boolean-table", "io-code")

#: above this Q, moment estimation switches from exhaustive enumeration
#: (2^Q states, sub-second up to here) to Monte Carlo sampling
EXHAUSTIVE_MAX_Q = 20

#: variance below this is treated as zero for the non-degeneracy condition
VARIANCE_FLOOR = 1e-12

_MC_DEFAULT_SAMPLES = 200_000


@dataclass(frozen=True)
class CharacteristicSpec:
    """Declarative description of one characteristic function.

    Payloads by kind (bit a of a neuron code is its a-th internal variable,
    least significant bit first):

    - parity:        XOR of all Q bits; no payload.
    - linear:        sum_a coefficients[a] * s_a; accepts continuous s in [0,1].
    - correlation:   (1/Q) * sum_a template[a] * s_a.
    - grandmother:   1 iff the bits equal the template exactly, else 0.
    - boolean-table: table[code], table has 2^Q entries.
    - io-code:       sum_a 2^a * s_a, the neuron code itself (reserved for
                     input/output, not recall dynamics).
    """

    kind: str
    coefficients: Optional[tuple] = None
    template: Optional[tuple] = None
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown characteristic kind {self.kind!r}; expected one of {KINDS}")
        if self.coefficients is not None:
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.template is not None:
            object.__setattr__(self, "template", tuple(int(t) for t in self.template))
        if self.table is not None:
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))

    @classmethod
    def parity(cls) -> "CharacteristicSpec":
        return cls("parity")

    @classmethod
    def linear(cls, coefficients: Sequence[float]) -> "CharacteristicSpec":
        return cls("linear", coefficients=tuple(coefficients))

    @classmethod
    def correlation(cls, template: Sequence[int]) -> "CharacteristicSpec":
        return cls("correlation", template=tuple(template))

    @classmethod
    def grandmother(cls, template: Sequence[int]) -> "CharacteristicSpec":
        return cls("grandmother", template=tuple(template))

    @classmethod
    def boolean_table(cls, table: Sequence[float]) -> "CharacteristicSpec":
        return cls("boolean-table", table=tuple(table))

    @classmethod
    def io_code(cls) -> "CharacteristicSpec":
        return cls("io-code")

    def validate(self, q_vars: int) -> None:
        """Check that the payload required by this kind is present and sized for Q."""
        if self.kind == "linear":
            if self.coefficients is None:
                raise ValueError("linear characteristic requires coefficients")
            if len(self.coefficients) != q_vars:
                raise ValueError(f"need {q_vars} coefficients, got {len(self.coefficients)}")
        elif self.kind in ("correlation", "grandmother"):
            if self.template is None:
                raise ValueError(f"{self.kind} characteristic requires a template")
            if len(self.template) != q_vars:
                raise ValueError(f"need a {q_vars}-bit template, got {len(self.template)}")
            if any(t not in (0, 1) for t in self.template):
                raise ValueError("template entries must be bits")
        elif self.kind == "boolean-table":
            if self.table is None:
                raise ValueError("boolean-table characteristic requires a table")
            if len(self.table) != 2**q_vars:
                raise ValueError(f"table must have 2**Q = {2**q_vars} entries, got {len(self.table)}")


def eval_characteristic(spec: CharacteristicSpec, bits, continuous=None) -> float:
    """Evaluate one characteristic function on a single neuron's variables.

    ``bits`` is a length-Q sequence of {0,1}.  ``continuous`` (length-Q reals
    in [0,1]) is accepted only for the linear kind, which is the one family
    defined on the whole unit cube.
    """
    bits = np.asarray(bits)
    q = bits.shape[-1] if bits.ndim else len(bits)
    if continuous is not None and spec.kind != "linear":
        raise ValueError(f"continuous inputs are only valid for the linear kind, not {spec.kind!r}")
    spec.validate(q)
    if spec.kind == "parity":
        return float(int(bits.sum()) & 1)
    if spec.kind == "linear":
        s = np.asarray(continuous, dtype=float) if continuous is not None else bits.astype(float)
        return float(np.dot(spec.coefficients, s))
    if spec.kind == "correlation":
        return float(np.dot(spec.template, bits)) / q
    if spec.kind == "grandmother":
        return 1.0 if all(int(b) == t for b, t in zip(bits, spec.template)) else 0.0
    if spec.kind == "boolean-table":
        code = int(np.dot(bits.astype(np.int64), 1 << np.arange(q)))
        return float(spec.table[code])
    # io-code
    return float(np.dot(bits.astype(np.int64), 1 << np.arange(q)))


def value_table(spec: CharacteristicSpec, q_vars: int) -> np.ndarray:
    """All 2^Q values of the function, indexed by neuron code.

    The code packs a neuron's bits into one integer (variable a at bit a), so
    a single table gather evaluates the function for a whole network state.
    """
    spec.validate(q_vars)
    codes = np.arange(2**q_vars, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(q_vars)) & 1).astype(np.float64)
    if spec.kind == "parity":
        return (bits.sum(axis=1) % 2.0).astype(np.float64)
    if spec.kind == "linear":
        return bits @ np.asarray(spec.coefficients, dtype=float)
    if spec.kind == "correlation":
        return bits @ np.asarray(spec.template, dtype=float) / q_vars
    if spec.kind == "grandmother":
        target = int(np.dot(spec.template, 1 << np.arange(q_vars)))
        return (codes == target).astype(np.float64)
    if spec.kind == "boolean-table":
        return np.asarray(spec.table, dtype=float)
    return codes.astype(np.float64)  # io-code


def _popcounts(n_codes: int, q_vars: int) -> np.ndarray:
    codes = np.arange(n_codes, dtype=np.int64)
    counts = np.zeros(n_codes, dtype=np.int64)
    for a in range(q_vars):
        counts += (codes >> a) & 1
    return counts


@dataclass(frozen=True)
class MomentEstimate:
    """First and second moments of f under the Bernoulli(rho) product measure.

    rho is the probability that a single internal bit is 0.  Variance is
    clamped at zero against floating-point cancellation.
    """

    mean: float
    second_moment: float
    variance: float
    method: str

    def __post_init__(self):
        var = self.second_moment - self.mean**2
        if var < -1e-9:
            raise ValueError(f"inconsistent moments: second - mean^2 = {var}")
        object.__setattr__(self, "variance", max(var, 0.0))


def _monte_carlo_moments(spec: CharacteristicSpec, q_vars: int, rho: float,
                         rng: np.random.Generator, n: int) -> MomentEstimate:
    vals = np.empty(n)
    for i in range(n):
        bits = (rng.random(q_vars) >= rho).astype(np.uint8)
        vals[i] = eval_characteristic(spec, bits)
    return MomentEstimate(float(vals.mean()), float(np.mean(vals * vals)), 0.0,
                          f"monte-carlo({n})")


def estimate_moments(spec: CharacteristicSpec, q_vars: int, rho: float,
                     seed=0, samples: Optional[int] = None) -> MomentEstimate:
    """Mean and second moment of f when each bit is 0 with probability rho.

    Exhaustive enumeration over all 2^Q states for Q <= 20, weighted by the
    product measure rho^(#zeros) * (1-rho)^(#ones); Monte Carlo beyond that.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly inside (0, 1), got {rho}")
    spec.validate(q_vars)
    if q_vars <= EXHAUSTIVE_MAX_Q:
        vals = value_table(spec, q_vars)
        ones = _popcounts(len(vals), q_vars)
        weights = (1.0 - rho) ** ones * rho ** (q_vars - ones)
        mean = float(weights @ vals)
        second = float(weights @ (vals * vals))
        return MomentEstimate(mean, second, 0.0, "exhaustive")
    n = int(samples) if samples else _MC_DEFAULT_SAMPLES
    return _monte_carlo_moments(spec, q_vars, rho, as_generator(seed), n)


@dataclass(frozen=True)
class ConditionReport:
    """Admissibility report: is f usable as a coupling function at size N?

    cond1: |<f>| <= c*sqrt(N)   (mean small against the field scale)
    cond2: <f^2> <= c*N         (second moment small against the field scale)
    cond3: var f  > floor       (f is not constant)

    c operationalizes "much smaller than"; there is no canonical constant, so
    it is a configurable tolerance factor.
    """

    cond1: bool
    cond2: bool
    cond3: bool
    mean: float
    second_moment: float
    variance: float
    mean_bound: float
    second_moment_bound: float

    @property
    def all_pass(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3


def check_conditions(moments: MomentEstimate, n_neurons: int, c: float = 0.1) -> ConditionReport:
    """Evaluate the three admissibility conditions for a size-N network."""
    if n_neurons < 2:
        raise ValueError(f"n_neurons must be >= 2, got {n_neurons}")
    mean_bound = c * float(np.sqrt(n_neurons))
    second_bound = c * float(n_neurons)
    return ConditionReport(
        cond1=abs(moments.mean) <= mean_bound,
        cond2=moments.second_moment <= second_bound,
        cond3=moments.variance > VARIANCE_FLOOR,
        mean=moments.mean,
        second_moment=moments.second_moment,
        variance=moments.variance,
        mean_bound=mean_bound,
        second_moment_bound=second_bound,
    )
