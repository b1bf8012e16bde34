"""Weight construction: Hebbian rules and a margin perceptron.

The plain (literal) Hebb rule for this architecture is

    W_ij^a = sum_mu s_i^a(mu) * f_j(mu),

with f_j(mu) the characteristic value of pattern mu at neuron j.  Taken
literally with s, f in {0,1} it produces nonnegative fields, and under
H(0) = 1 the all-ones state absorbs everything, so the default mode centers
both factors:

    W_ij^a = sum_mu (2 s_i^a(mu) - 1) * (f_j(mu) - fbar),

which restores a signed, pattern-storing rule of the same structure.  The
literal rule stays available behind a flag.

The perceptron trainer enforces the pattern-stability constraint with margin
kappa measured against the row norm, and rescales rows onto the spheres
|W_i^a|^2 = N (and |L_i^a|^2 = Q) after convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .characteristic import value_table
from .core import GanSpec, PatternSet
from .dynamics import pack_state

MODES = ("literal-hebb", "centered-hebb", "perceptron")


@dataclass(frozen=True)
class LearnConfig:
    """Training mode and its knobs.

    kappa is the scale-free margin demand of the perceptron (violation when
    margin < kappa * |row| / sqrt(N)); f_mean optionally overrides the
    empirical characteristic mean used by centered-hebb.
    """

    mode: str = "centered-hebb"
    kappa: float = 0.0
    max_epochs: int = 200
    f_mean: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown learn mode {self.mode!r}; expected one of {MODES}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")


def _pattern_characteristics(patterns: PatternSet, spec: GanSpec) -> np.ndarray:
    """(P, N) characteristic values of every pattern at every neuron."""
    table = value_table(spec.characteristic, spec.q_vars)
    return np.stack([table[pack_state(p)] for p in patterns.bits])


def _zero_diagonals(w: np.ndarray) -> np.ndarray:
    for a in range(w.shape[0]):
        np.fill_diagonal(w[a], 0.0)
    return w


def hebb_weights(patterns: PatternSet, spec: GanSpec, config: LearnConfig) -> np.ndarray:
    """One-shot Hebbian weights, literal or centered (see module docstring).

    No normalization constant is applied: the threshold dynamics are
    invariant under positive rescaling, so 1/N factors are cosmetic.
    """
    if config.mode not in ("literal-hebb", "centered-hebb"):
        raise ValueError(f"hebb_weights requires a hebb mode, got {config.mode!r}")
    if patterns.n_patterns < 1:
        raise ValueError("empty pattern set")
    fvals = _pattern_characteristics(patterns, spec)          # (P, N)
    s = patterns.bits.astype(np.float64)                      # (P, N, Q)
    if config.mode == "literal-hebb":
        w = np.einsum("pia,pj->aij", s, fvals)
    else:
        fbar = config.f_mean if config.f_mean is not None else float(fvals.mean())
        w = np.einsum("pia,pj->aij", 2.0 * s - 1.0, fvals - fbar)
    return _zero_diagonals(w)


def hebb_internal(patterns: PatternSet, spec: GanSpec) -> np.ndarray:
    """Sign-agreement Hebb rule for the intra-neuron couplings.

    L_i^ab = sum_mu (2 s_i^a - 1)(2 s_i^b - 1) for b != a; symmetric in
    (a, b) with zero diagonal.
    """
    if not spec.interacting:
        raise ValueError("internal couplings require an interacting spec")
    if patterns.n_patterns < 1:
        raise ValueError("empty pattern set")
    sgn = 2.0 * patterns.bits.astype(np.float64) - 1.0
    l = np.einsum("pia,pib->iab", sgn, sgn)
    diag = np.arange(spec.q_vars)
    l[:, diag, diag] = 0.0
    return l


@dataclass(frozen=True, eq=False)
class TrainResult:
    weights: np.ndarray                 # (Q, N, N)
    couplings: Optional[np.ndarray]     # (N, Q, Q) or None
    converged: bool
    epochs: int


def perceptron_train(patterns: PatternSet, spec: GanSpec, config: LearnConfig) -> TrainResult:
    """Margin perceptron over each (neuron, variable) row independently.

    Patterns are visited cyclically in a fixed order.  A pattern violates row
    (i, a) when its margin (2s-1)*field fails the demand kappa*|W_i^a|/sqrt(N);
    a margin of exactly zero always counts as a violation, so the zero-weight
    start is never a vacuous solution and converged rows give strict fixed
    points.  On violation the row takes the Hebb step

        W_ij^a += (2 s_i^a - 1) * f_j      (and L_i^ab += (2 s_i^a - 1) * s_i^b).

    Rows are independent, so they are updated as one batch per pattern visit;
    the result equals per-row sequential training.  After a clean epoch, rows
    are rescaled onto |W_i^a|^2 = N (and |L_i^a|^2 = Q).  For interacting
    networks the two parts rescale by different factors, which can break a
    margin, so training resumes until the rescaled weights verify clean (or
    max_epochs is hit); the non-interacting rescale is exactly margin-safe.
    """
    if config.mode != "perceptron":
        raise ValueError(f"perceptron_train requires mode='perceptron', got {config.mode!r}")
    n, q = spec.n_neurons, spec.q_vars
    p = patterns.n_patterns
    fvals = _pattern_characteristics(patterns, spec)   # (P, N)
    s = patterns.bits.astype(np.float64)               # (P, N, Q)
    sgn = 2.0 * s - 1.0
    w = np.zeros((q, n, n))
    l = np.zeros((n, q, q)) if spec.interacting else None
    sqrt_n = float(np.sqrt(n))

    def margins_for(mu: int) -> np.ndarray:
        fields = np.einsum("aij,j->ia", w, fvals[mu])
        if l is not None:
            fields = fields + np.einsum("iab,ib->ia", l, s[mu])
        return sgn[mu] * fields

    def demand() -> np.ndarray:
        if config.kappa == 0.0:
            return np.zeros((n, q))
        norms = np.sqrt(np.einsum("aij,aij->ia", w, w))
        return config.kappa * norms / sqrt_n

    def run_epoch() -> bool:
        """One full pass; returns True if any row was updated."""
        any_viol = False
        for mu in range(p):
            m = margins_for(mu)
            viol = (m <= 0.0) | (m < demand())
            if viol.any():
                any_viol = True
                ii, aa = np.nonzero(viol)
                w[aa, ii, :] += sgn[mu][ii, aa][:, None] * fvals[mu][None, :]
                w[aa, ii, ii] = 0.0
                if l is not None:
                    l[ii, aa, :] += sgn[mu][ii, aa][:, None] * s[mu][ii, :]
                    l[ii, aa, aa] = 0.0
        return any_viol

    def rescale() -> None:
        wn = np.sqrt(np.einsum("aij,aij->ai", w, w))   # (Q, N) row norms
        nz = wn > 0.0
        scale = np.ones_like(wn)
        scale[nz] = sqrt_n / wn[nz]
        w[...] *= scale[:, :, None]
        if l is not None:
            ln = np.sqrt(np.einsum("iab,iab->ia", l, l))
            nzl = ln > 0.0
            ls = np.ones_like(ln)
            ls[nzl] = float(np.sqrt(q)) / ln[nzl]
            l[...] *= ls[:, :, None]

    def all_clean() -> bool:
        for mu in range(p):
            m = margins_for(mu)
            if ((m <= 0.0) | (m < demand())).any():
                return False
        return True

    epochs = 0
    converged = False
    while epochs < config.max_epochs:
        epochs += 1
        if not run_epoch():
            rescale()
            if l is None or all_clean():
                converged = True
                break
            # interacting rescale broke a margin: keep training
    return TrainResult(w.copy(), l.copy() if l is not None else None, converged, epochs)
