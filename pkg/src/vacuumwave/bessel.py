"""Evaluation of the entire Bessel factor, its zeros, and the mode basis.

Everything downstream rests on the entire function

    E_nu(X) = sum_{k>=0} (-X)^k / (k! Gamma(nu+k+1)),

related to the usual Bessel function by J_nu(r) = (r/2)^nu E_nu(r^2/4).
The Dirichlet spectrum of the degenerate operator z y'' + (N/2) y' on
[0, 1] is lambda_n = (j_n / 2)^2 with j_n the n-th positive zero of J_nu,
nu = N/2 - 1, and the eigenfunctions are E_nu(lambda_n z) normalized in
the z^{N/2-1}-weighted space.

The series is alternating with terms peaking near k ~ sqrt(X) at magnitude
~ e^{2 sqrt(X)} times the final value, so float64 summation loses about
0.87 sqrt(X) decimal digits to cancellation.  eval_phi therefore switches
between two paths:

- X <= FLOAT_PATH_MAX: plain float64 with per-term factorials/Gammas from
  the local Lanczos implementation and a hard stopping rule;
- larger X: mpmath big floats at a working precision that grows like
  sqrt(X), with the term recurrence and a stop once terms sink below the
  roundoff floor of the largest term seen.

Zero finding walks up the axis in quarter-pi steps, brackets each sign
change, bisects, and polishes with Newton iterations driven by
E_nu' = -E_{nu+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .series import PowerSeries

__all__ = [
    "LANCZOS_COEFFS",
    "LANCZOS_G",
    "gamma_real",
    "eval_phi",
    "eval_phi_prime",
    "eval_bessel_j",
    "SeriesTruncationError",
    "DegreeInsufficientError",
    "FLOAT_PATH_MAX",
    "zero_offset",
    "zero_seed",
    "bessel_zero",
    "bessel_zeros",
    "eigenvalue",
    "EigenPair",
    "eigenfunction",
]


class SeriesTruncationError(RuntimeError):
    """The series stopping rule was not met within the term cap."""


class DegreeInsufficientError(ValueError):
    """A requested polynomial degree cannot carry the eigenfunction tail."""


# ---------------------------------------------------------------------------
# Gamma via the Lanczos approximation, g = 607/128, 15 terms.  The
# coefficients were generated by a high-precision least-squares fit of the
# Lanczos form (which is linear in them) against a 70-digit Gamma on
# [0.5, 200]; the float64 evaluation below reproduces Gamma to better than
# 9e-16 relative over [0.5, 171].  Module-level on purpose: tests corrupt
# an entry to demonstrate that zero locations downstream actually depend
# on this table, then restore it.

LANCZOS_G = 607.0 / 128.0
LANCZOS_COEFFS = [
    0.999999999999999986077,
    57.15623566586286430836,
    -59.59796035546520612249,
    14.13609797438784163733,
    -0.4919138121120984758367,
    0.00003398557371229957279703,
    0.00004637466923429477972376,
    -0.00009693896226755757293039,
    0.000151915389818990928188,
    -0.000194478764992932215307,
    0.0001916215594188227592061,
    -0.0001369800754730770378865,
    0.00006624514129420924060385,
    -0.00001928628802077345592432,
    0.000002544995340642934279474,
]

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def gamma_real(x: float) -> float:
    """Gamma function for real arguments, Lanczos approximation.

    Accurate to ~1e-15 relative on [0.5, 171]; arguments below 0.5 go
    through the reflection formula.  The t-power is split in half so the
    intermediate stays inside float64 range up to the overflow threshold
    of Gamma itself.
    """
    if x < 0.5:
        s = math.sin(math.pi * x)
        if s == 0.0:
            raise ValueError(f"gamma pole at x={x}")
        return math.pi / (s * gamma_real(1.0 - x))
    t = x + LANCZOS_G - 0.5
    series = LANCZOS_COEFFS[0]
    for i in range(1, len(LANCZOS_COEFFS)):
        series += LANCZOS_COEFFS[i] / (x - 1.0 + i)
    half = t ** ((x - 0.5) / 2.0)
    return _SQRT_TWO_PI * series * half * math.exp(-t) * half


# ---------------------------------------------------------------------------
# entire-factor evaluation

# Crossover chosen so the float path's cancellation noise (about
# e^{2 sqrt(x)} times machine epsilon in relative terms) stays below 1e-13;
# beyond it the big-float path is bit-faithful anyway.
FLOAT_PATH_MAX = 12.0
FLOAT_TERM_CAP = 500


def _phi_float(nu: float, x: float) -> float:
    """Literal float64 series with per-term denominators from gamma_real.

    Stops once k exceeds |x| and the last term is below 1e-16 of the
    running sum; raises if the cap is hit instead (which cannot happen for
    |x| <= FLOAT_PATH_MAX, but the guard stays explicit).
    """
    total = 0.0
    sign = 1.0
    xk = 1.0
    for k in range(FLOAT_TERM_CAP + 1):
        term = sign * xk / (gamma_real(k + 1.0) * gamma_real(nu + k + 1.0))
        total += term
        if k > abs(x) and abs(term) < 1e-16 * abs(total):
            return total
        sign = -sign
        xk *= x
    raise SeriesTruncationError(
        f"series for nu={nu}, x={x} not converged in {FLOAT_TERM_CAP} terms"
    )


def _big_dps(x: float) -> int:
    return 25 + int(math.ceil(0.8686 * math.sqrt(abs(x))))


def _phi_big(nu: float, x: float, extra_dps: int = 0):
    """mpmath evaluation with cancellation-compensating precision.

    Working precision grows like sqrt(x) to absorb the alternating-series
    cancellation; terms follow the two-term recurrence and summation stops
    when they fall below the roundoff floor of the largest term seen.
    Returns an mpf.
    """
    dps = _big_dps(x) + extra_dps
    cap = max(FLOAT_TERM_CAP, int(6.0 * math.sqrt(abs(x))) + 60)
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        num = mpmath.mpf(nu)
        term = 1 / mpmath.gamma(num + 1)
        total = term
        max_mag = abs(term)
        floor_scale = mpmath.mpf(10) ** (-dps - 2)
        for k in range(cap):
            term = term * (-xm) / ((k + 1) * (num + k + 1))
            total += term
            mag = abs(term)
            if mag > max_mag:
                max_mag = mag
            # terms decrease once (k+1)(nu+k+1) > x; stop when they sink
            # below the roundoff floor of the peak term
            if (k + 1) * (nu + k + 1) > abs(x) and mag < max_mag * floor_scale:
                return total
        raise SeriesTruncationError(
            f"big-float series for nu={nu}, x={x} not converged in {cap} terms"
        )


def eval_phi(nu: float, x: float) -> float:
    """Entire factor E_nu(x), choosing the evaluation path by |x|."""
    if abs(x) <= FLOAT_PATH_MAX:
        return _phi_float(nu, x)
    return float(_phi_big(nu, x))


def eval_phi_prime(nu: float, x: float) -> float:
    """d/dx E_nu(x) = -E_{nu+1}(x)."""
    return -eval_phi(nu + 1.0, x)


def eval_bessel_j(nu: float, r: float) -> float:
    """J_nu(r) through the entire factor: (r/2)^nu E_nu(r^2/4)."""
    if r == 0.0:
        return 0.0 if nu > 0 else eval_phi(nu, 0.0)
    return (r / 2.0) ** nu * eval_phi(nu, r * r / 4.0)


# ---------------------------------------------------------------------------
# zeros of J_nu


def _phi_at_r(nu: float, r: float) -> float:
    return eval_phi(nu, r * r / 4.0)


_SCAN_STEP = math.pi / 4.0
_zero_cache: dict[tuple[float, float], list[float]] = {}
_offset_cache: dict[float, int] = {}


def _first_zero_rough(nu: float) -> float:
    """Bracket and coarsely bisect the first positive zero."""
    lo = 0.05
    f_lo = _phi_at_r(nu, lo)
    for _ in range(2000):
        hi = lo + _SCAN_STEP
        f_hi = _phi_at_r(nu, hi)
        if f_lo * f_hi <= 0.0:
            break
        lo, f_lo = hi, f_hi
    else:
        raise RuntimeError(f"no sign change found scanning for first zero, nu={nu}")
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        f_mid = _phi_at_r(nu, mid)
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def zero_offset(nu: float) -> int:
    """Empirical integer offset aligning the asymptotic zero stripe.

    The large-n zeros sit near (n_off + n + nu/2 + 3/4) pi; the offset is
    fixed per nu by matching the stripe to the actual first zero.
    """
    key = float(nu)
    if key not in _offset_cache:
        j1 = _first_zero_rough(nu)
        _offset_cache[key] = round(j1 / math.pi - 1.0 - nu / 2.0 - 0.75)
    return _offset_cache[key]


def zero_seed(nu: float, n: int) -> float:
    """Asymptotic-stripe estimate of the n-th zero (diagnostic seed).

    Production zero finding brackets sequentially and does not depend on
    the seed being sharp; tests check the seed lands within half a stripe
    width of the true zero."""
    return (zero_offset(nu) + n + nu / 2.0 + 0.75) * math.pi


def _polish(nu: float, r0: float, tol: float) -> float:
    """Newton iterations in mpf arithmetic from a bisected starting point.

    Function values come from eval_phi (path chosen by magnitude), the
    iteration arithmetic is mpf so the update never adds rounding of its
    own.  The derivative uses d/dr E_nu(r^2/4) = -(r/2) E_{nu+1}(r^2/4).
    """
    r = mpmath.mpf(r0)
    for _ in range(30):
        x = float(r * r / 4)
        f = eval_phi(nu, x)
        fp = eval_phi(nu + 1.0, x)
        if fp == 0.0:
            break
        step = 2.0 * f / (float(r) * fp)
        r = r + step
        if abs(step) < 0.01 * tol:
            break
    if abs(float(r) - r0) > 0.5:
        raise RuntimeError(f"Newton polish left its bracket: {r0} -> {float(r)}")
    return float(r)


def bessel_zeros(nu: float, count: int, tol: float = 1e-12) -> np.ndarray:
    """First `count` positive zeros of J_nu, in order.

    Walks upward in quarter-pi steps from just past the previous zero
    (consecutive zeros are never closer than pi/2 for nu >= 0, so no zero
    can be skipped), verifies a sign change, bisects the bracket to 1e-6,
    then Newton-polishes to `tol`.  Results are cached per (nu, tol).
    """
    key = (float(nu), float(tol))
    zeros = _zero_cache.setdefault(key, [])
    while len(zeros) < count:
        lo = zeros[-1] + 0.25 if zeros else 0.05
        f_lo = _phi_at_r(nu, lo)
        for _ in range(50):
            hi = lo + _SCAN_STEP
            f_hi = _phi_at_r(nu, hi)
            if f_lo * f_hi <= 0.0:
                break
            lo, f_lo = hi, f_hi
        else:
            raise RuntimeError(
                f"no sign change scanning for zero {len(zeros) + 1} of nu={nu}"
            )
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            f_mid = _phi_at_r(nu, mid)
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        zeros.append(_polish(nu, 0.5 * (lo + hi), tol))
    return np.array(zeros[:count])


def bessel_zero(nu: float, n: int, tol: float = 1e-12) -> float:
    """n-th positive zero of J_nu (n is 1-based)."""
    if n < 1:
        raise ValueError(f"zero index must be >= 1, got {n}")
    return float(bessel_zeros(nu, n, tol)[n - 1])


# ---------------------------------------------------------------------------
# Dirichlet spectrum of the degenerate operator


def eigenvalue(params, n: int) -> float:
    """lambda_n = (j_{nu,n} / 2)^2 for the mode index n (1-based)."""
    return (bessel_zero(params.nu, n) / 2.0) ** 2


@dataclass(frozen=True)
class EigenPair:
    """One Dirichlet mode: index, eigenvalue, weighted norm of the raw
    entire-factor profile, and the normalized polynomial representation."""

    index: int
    lam: float
    norm_const: float
    series: PowerSeries


def _eigen_coeffs(nu: float, lam: float, degree: int | None):
    """Taylor coefficients of E_nu(lam z): c_k = (-lam)^k / (k! G(nu+k+1)).

    With degree=None the truncation point is chosen so the discarded tail
    is below 1e-14 of the leading coefficient; an explicit degree that
    cannot reach that tail raises DegreeInsufficientError.  Individual
    coefficients are well conditioned (the recurrence has no cancellation);
    it is only their *sum* at z ~ 1 for large lam that cancels, which is
    why node values elsewhere use eval_phi instead of this polynomial.
    """
    c0 = 1.0 / gamma_real(nu + 1.0)
    tail_tol = 1e-14 * abs(c0)
    coeffs = [c0]
    term = c0
    k = 0
    cap = degree if degree is not None else 1000
    converged = False
    while k < cap:
        term = term * (-lam) / ((k + 1.0) * (nu + k + 1.0))
        coeffs.append(term)
        k += 1
        if k > math.sqrt(abs(lam)) and abs(term) < tail_tol:
            converged = True
            break
    if not converged:
        raise DegreeInsufficientError(
            f"degree {cap} cannot hold the mode tail for lambda={lam:.6g} "
            f"(last kept coefficient {term:.3e}, tolerance {tail_tol:.3e})"
        )
    return np.array(coeffs)


def eigenfunction(params, n: int, degree: int | None = None, rule=None) -> EigenPair:
    """Normalized n-th Dirichlet mode as a PowerSeries.

    Normalization integrates the squared profile against the z^{N/2-1}
    weight with the supplied quadrature rule (a 128-point rule is built if
    none is given), evaluating through eval_phi so large-lambda
    cancellation never contaminates the norm.
    """
    nu = params.nu
    lam = eigenvalue(params, n)
    coeffs = _eigen_coeffs(nu, lam, degree)
    if rule is None:
        from .space import make_rule

        rule = make_rule(params, 128)
    vals = np.array([eval_phi(nu, lam * z) for z in rule.nodes])
    norm_const = math.sqrt(float(np.dot(rule.weights, vals * vals)))
    return EigenPair(
        index=n,
        lam=lam,
        norm_const=norm_const,
        series=PowerSeries(coeffs / norm_const),
    )
