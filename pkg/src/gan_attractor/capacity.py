"""Closed-form storage-capacity equations and their numerical solution.

Information capacity E is measured in bits per weight.  For bit bias rho
(probability that an internal bit is 0) the simple case reads

    E = [-rho*log2(rho) - (1-rho)*log2(1-rho)]
        / [1 - rho + (1/2)(2 rho - 1) erfc(x/sqrt(2))]

with x the unique root of

    (2 rho - 1) [exp(-x^2/2)/sqrt(2 pi) - (x/2) erfc(x/sqrt(2))] = (1 - rho) x.

E peaks at exactly 2 bits per weight at rho = 1/2 and never exceeds it.

The general case adds a scale-free margin demand K = kappa / (var_phi +
rho(1-rho)), the internal-variable load lambda = Q/N, and the characteristic
variance var_phi; it reduces to the simple case at K = lambda = 0.  The
interacting-variable correction in closed form is

    E = E0 * (1 + lambda*u)^2 / [(1 + lambda)(1 + lambda*u^2)],
    u = sqrt(rho(1-rho)/var_phi),

which equals E0 exactly iff the characteristic fluctuations match the bit
fluctuations (u = 1) and is strictly smaller otherwise for lambda > 0.

All transcendental evaluation is self-contained: erfc uses Cody's rational
Chebyshev approximations (relative error < 1e-12 over the needed range), and
the solvers are bracketed bisection with a Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_INV_SQRTPI = 0.5641895835477562869

# Cody's coefficients: erf on [0, 0.46875], erfc on (0.46875, 4], and the
# asymptotic-style rational for erfc beyond 4.
_ERF_A = (3.16112374387056560e0, 1.13864154151050156e2, 3.77485237685302021e2,
          3.20937758913846947e3, 1.85777706184603153e-1)
_ERF_B = (2.36012909523441209e1, 2.44024637934444173e2, 1.28261652607737228e3,
          2.84423683343917062e3)
_ERFC_C = (5.64188496988670089e-1, 8.88314979438837594e0, 6.61191906371416295e1,
           2.98635138197400131e2, 8.81952221241769090e2, 1.71204761263407058e3,
           2.05107837782607147e3, 1.23033935479799725e3, 2.15311535474403846e-8)
_ERFC_D = (1.57449261107098347e1, 1.17693950891312499e2, 5.37181101862009858e2,
           1.62138957456669019e3, 3.29079923573345963e3, 4.36261909014324716e3,
           3.43936767414372164e3, 1.23033935480374942e3)
_ERFC_P = (3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
           1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2)
_ERFC_Q = (2.56852019228982242e0, 1.87295284992346047e0, 5.27905102951428412e-1,
           6.05183413124413191e-2, 2.33520497626869185e-3)

_ERFC_UNDERFLOW_X = 26.62  # erfc underflows to 0.0 in double beyond here


def _exp_minus_sq(y: float) -> float:
    # exp(-y^2) split to limit the argument-rounding error of y*y
    ysq = math.floor(y * 16.0) / 16.0
    d = (y - ysq) * (y + ysq)
    return math.exp(-ysq * ysq) * math.exp(-d)


def erfc(x: float) -> float:
    """Complementary error function (2/sqrt(pi)) * integral_x^inf exp(-y^2) dy."""
    x = float(x)
    y = abs(x)
    if y <= 0.46875:
        z = y * y if y > 1.11e-16 else 0.0
        num = _ERF_A[4] * z
        den = z
        for i in range(3):
            num = (num + _ERF_A[i]) * z
            den = (den + _ERF_B[i]) * z
        return 1.0 - x * (num + _ERF_A[3]) / (den + _ERF_B[3])
    if y <= 4.0:
        num = _ERFC_C[8] * y
        den = y
        for i in range(7):
            num = (num + _ERFC_C[i]) * y
            den = (den + _ERFC_D[i]) * y
        result = _exp_minus_sq(y) * (num + _ERFC_C[7]) / (den + _ERFC_D[7])
    elif y < _ERFC_UNDERFLOW_X:
        z = 1.0 / (y * y)
        num = _ERFC_P[5] * z
        den = z
        for i in range(4):
            num = (num + _ERFC_P[i]) * z
            den = (den + _ERFC_Q[i]) * z
        r = z * (num + _ERFC_P[4]) / (den + _ERFC_Q[4])
        result = _exp_minus_sq(y) * (_INV_SQRTPI - r) / y
    else:
        result = 0.0
    return 2.0 - result if x < 0.0 else result


def entropy_bits(rho: float) -> float:
    """Shannon entropy of one bit with P(0) = rho, in bits."""
    return -(rho * math.log2(rho) + (1.0 - rho) * math.log2(1.0 - rho))


def _gauss(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _decay(x: float) -> float:
    # exp(-x^2/2)/sqrt(2 pi) - (x/2) erfc(x/sqrt(2)): positive, strictly
    # decreasing, -> 0 as x -> +inf and -> -x as x -> -inf
    return _gauss(x) - 0.5 * x * erfc(x / _SQRT2)


def _ramp(u: float) -> float:
    # exp(-u^2/2)/sqrt(2 pi) + (u/2) erfc(-u/sqrt(2)): positive, strictly
    # increasing, -> 0 as u -> -inf and -> u as u -> +inf
    return _gauss(u) + 0.5 * u * erfc(-u / _SQRT2)


def _hardness(u: float) -> float:
    # u*exp(-u^2/2)/sqrt(2 pi) + (1/2)(1+u^2) erfc(-u/sqrt(2)); d/du = 2*_ramp
    return u * _gauss(u) + 0.5 * (1.0 + u * u) * erfc(-u / _SQRT2)


class BracketError(RuntimeError):
    """A root bracket could not be established or maintained."""


def _expand_bracket(f, lo: float, hi: float):
    """Grow [lo, hi] geometrically until f(lo) > 0 > f(hi) (f decreasing)."""
    flo, fhi = f(lo), f(hi)
    for _ in range(200):
        if flo > 0.0 and fhi < 0.0:
            return lo, hi
        span = max(hi - lo, 1.0)
        if flo <= 0.0:
            lo -= span
            flo = f(lo)
        if fhi >= 0.0:
            hi += span
            fhi = f(hi)
    raise BracketError(f"no sign change found in [{lo}, {hi}]")


def _bisect_newton(f, fprime, lo: float, hi: float, tol: float) -> float:
    """Root of a strictly decreasing f: bisection to 1e-6, Newton polish to tol.

    Newton steps that would leave the bracket fall back to bisection, so the
    bracket invariant f(lo) > 0 > f(hi) holds throughout.
    """
    lo, hi = _expand_bracket(f, lo, hi)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(100):
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if fx > 0.0:
            lo = x
        else:
            hi = x
        d = fprime(x)
        x_new = x - fx / d if d != 0.0 else x
        if not (lo <= x_new <= hi) or x_new == x:
            x_new = 0.5 * (lo + hi)
        x = x_new
    fx = f(x)
    if abs(fx) > tol:
        raise BracketError(f"residual {fx} above tolerance {tol} after polish")
    return x


def _check_rho(rho: float) -> float:
    # entropy vanishes at 0 and 1; reject outright rather than return 0
    # silently, which would mask caller bugs
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly inside (0, 1), got {rho}")
    return rho


@dataclass(frozen=True)
class CapacityParams:
    """Inputs of the general capacity formulas.

    K is derived exactly as kappa / (var_phi + rho(1-rho)); note the
    denominator is a sum of variances, not a standard deviation.
    """

    rho: float
    lam: float = 0.0
    kappa: float = 0.0
    var_phi: float = 0.25

    def __post_init__(self):
        _check_rho(self.rho)
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.var_phi <= 0:
            raise ValueError(f"var_phi must be > 0, got {self.var_phi}")

    @property
    def K(self) -> float:
        return self.kappa / (self.var_phi + self.rho * (1.0 - self.rho))


@dataclass(frozen=True)
class CapacitySolution:
    """Root, critical load alpha_c = P_c/N, and capacity in bits per weight."""

    root: float
    alpha_c: float
    e_bits: float
    e0_bits: float


def solve_aux(rho: float, tol: float = 1e-12) -> float:
    """Root x of the simple-case saddle equation (see module docstring).

    The residual is strictly decreasing in x, so the root is unique; it has
    the sign of (2 rho - 1) and vanishes at rho = 1/2.
    """
    rho = _check_rho(rho)
    two_rho_1 = 2.0 * rho - 1.0

    def f(x: float) -> float:
        return two_rho_1 * _decay(x) - (1.0 - rho) * x

    def fp(x: float) -> float:
        return -0.5 * two_rho_1 * erfc(x / _SQRT2) - (1.0 - rho)

    return _bisect_newton(f, fp, -1.0, 1.0, tol)


def capacity_simple(rho: float, tol: float = 1e-12) -> CapacitySolution:
    """Capacity at zero margin and zero internal load (E <= 2 bits/weight)."""
    rho = _check_rho(rho)
    x = solve_aux(rho, tol)
    denom = 1.0 - rho + 0.5 * (2.0 * rho - 1.0) * erfc(x / _SQRT2)
    e = entropy_bits(rho) / denom
    return CapacitySolution(root=x, alpha_c=1.0 / denom, e_bits=e, e0_bits=e)


def solve_gen_aux(params: CapacityParams, tol: float = 1e-12) -> float:
    """Root V of the general saddle equation

        rho * ramp(K - V) = (1 - rho) * ramp(K + V),

    with ramp(u) = exp(-u^2/2)/sqrt(2 pi) + (u/2) erfc(-u/sqrt(2)).  The
    residual is strictly decreasing in V; V = 0 at rho = 1/2 by symmetry,
    and at K = 0 the equation coincides with the simple-case one.
    """
    rho, k = params.rho, params.K

    def f(v: float) -> float:
        return rho * _ramp(k - v) - (1.0 - rho) * _ramp(k + v)

    def fp(v: float) -> float:
        return -0.5 * (rho * erfc((v - k) / _SQRT2) + (1.0 - rho) * erfc((-k - v) / _SQRT2))

    return _bisect_newton(f, fp, -(10.0 + k), 10.0 + k, tol)


def alpha_critical(params: CapacityParams, tol: float = 1e-12) -> CapacitySolution:
    """Critical load and capacity for general (rho, K, lambda, var_phi).

    alpha_c^-1 = [rho*g(K-V) + (1-rho)*g(K+V)] * (1 + lam*u^2) / (1 + lam*u)^2
    with g = _hardness, u^2 = rho(1-rho)/var_phi, and V the saddle root;
    E = entropy(rho) * alpha_c / (1 + lambda).
    """
    v = solve_gen_aux(params, tol)
    rho, k, lam = params.rho, params.K, params.lam
    base = rho * _hardness(k - v) + (1.0 - rho) * _hardness(k + v)
    u2 = rho * (1.0 - rho) / params.var_phi
    u = math.sqrt(u2)
    pref_num = 1.0 + lam * u
    inv_alpha = base * (1.0 + lam * u2) / (pref_num * pref_num)
    alpha_c = 1.0 / inv_alpha
    e = entropy_bits(rho) * alpha_c / (1.0 + lam)
    return CapacitySolution(root=v, alpha_c=alpha_c, e_bits=e,
                            e0_bits=capacity_simple(rho, tol).e_bits)


def capacity_interacting(rho: float, lam: float, var_phi: float) -> float:
    """Closed-form capacity with intra-neuron couplings active (bits/weight).

    Equals the simple-case E0 exactly when var_phi = rho(1-rho); strictly
    below E0 otherwise for lam > 0 (Cauchy-Schwarz on the prefactor).
    """
    rho = _check_rho(rho)
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if var_phi <= 0:
        raise ValueError(f"var_phi must be > 0, got {var_phi}")
    e0 = capacity_simple(rho).e_bits
    u2 = rho * (1.0 - rho) / var_phi
    u = math.sqrt(u2)
    num = 1.0 + lam * u
    num *= num
    # ratio first: it is exactly 1.0 when var_phi = rho(1-rho), so E == E0 bitwise
    return e0 * (num / ((1.0 + lam) * (1.0 + lam * u2)))
