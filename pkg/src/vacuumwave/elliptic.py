"""Solvers for the resolvent problem (-lam - laplace) y = f, y(1) = 0.

Three routes, kept deliberately separate so they can cross-check each other:

- solve_series: the two-term coefficient recurrence valid for any lam away
  from the Dirichlet spectrum, closing the boundary condition with the
  entire homogeneous solution;
- solve_green_zero / solve_dirichlet_zero: two independently assembled
  integral formulas for lam = 0 (they must agree to roundoff);
- solve_resonant: the Fredholm route at lam = lambda_q, solving with the
  projected right-hand side and fixing the kernel gauge.

All right-hand sides and solutions are integer-channel PowerSeries, so
residuals can be formed exactly in coefficient space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bessel
from .series import PowerSeries, apply_laplace
from .space import QuadratureRule, inner_product, make_rule, norm

__all__ = [
    "EllipticProblem",
    "EllipticSolution",
    "NearResonanceError",
    "solve_series",
    "solve_green_zero",
    "solve_dirichlet_zero",
    "solve_resonant",
    "residual_norm",
    "find_resonant_index",
]

RESONANCE_GUARD = 1e-8
AUTO_DEGREE_CAP = 400


class NearResonanceError(ValueError):
    """lam is too close to the Dirichlet spectrum for the generic solver."""

    def __init__(self, lam: float, h1: float):
        self.lam = lam
        self.h1 = h1
        super().__init__(
            f"lam={lam:.12g} is within the resonance guard (homogeneous "
            f"boundary value {h1:.3e}); solve through the projected "
            "resonant route instead"
        )


@dataclass(frozen=True)
class EllipticProblem:
    params: object
    lam: float
    f: PowerSeries

    def __post_init__(self) -> None:
        if self.f.offset != 0.0:
            raise ValueError("right-hand side must be an integer-channel series")


@dataclass
class EllipticSolution:
    """Solution record: the series, how it was produced, and the scalars
    that closed the boundary condition or fixed the gauge."""

    y: PowerSeries
    lam: float
    method: str
    homogeneous_const: float = 0.0
    removed_component: float = 0.0
    resonant_index: int | None = None


def _particular_recurrence(
    lam: float, f: PowerSeries, n_dim: float, degree: int | None
) -> np.ndarray:
    """Coefficients of the particular solution with a_0 = 0.

    (k+1)(k + N/2) a_{k+1} = -(lam a_k + c_k), driven until both the input
    polynomial is exhausted and the coefficient tail has died down.
    """
    c = f.coeffs
    cap = AUTO_DEGREE_CAP if degree is None else degree
    a = [0.0]
    scale = max(1.0, float(np.max(np.abs(c))))
    k = 0
    while k < cap:
        ck = c[k] if k < len(c) else 0.0
        nxt = -(lam * a[k] + ck) / ((k + 1.0) * (k + n_dim / 2.0))
        a.append(nxt)
        scale = max(scale, abs(nxt))
        k += 1
        if k >= len(c) and k * k > abs(lam) and abs(nxt) < 1e-16 * scale:
            break
    else:
        raise bessel.DegreeInsufficientError(
            f"particular series not converged at degree {cap} "
            f"(lam={lam:.6g}, |f| tail {abs(a[-1]):.3e})"
        )
    return np.array(a)


def _homogeneous_coeffs(lam: float, n_dim: float, length: int) -> np.ndarray:
    """Entire homogeneous solution normalized to h(0) = 1, same recurrence
    with zero forcing."""
    h = np.zeros(length)
    h[0] = 1.0
    for k in range(length - 1):
        h[k + 1] = -lam * h[k] / ((k + 1.0) * (k + n_dim / 2.0))
    return h


def solve_series(problem: EllipticProblem, degree: int | None = None) -> EllipticSolution:
    """Coefficient-recurrence solve, valid away from the spectrum.

    The boundary value of the homogeneous solution is computed through the
    adaptive-precision evaluator (h(1) = Gamma(nu+1) E_nu(lam)), so the
    resonance guard stays reliable at any lam.
    """
    params = problem.params
    lam = problem.lam
    nu = params.nu
    h1 = bessel.gamma_real(nu + 1.0) * bessel.eval_phi(nu, lam)
    if abs(bessel.eval_phi(nu, lam)) < RESONANCE_GUARD:
        raise NearResonanceError(lam, h1)
    a = _particular_recurrence(lam, problem.f, params.n_dim, degree)
    h = _homogeneous_coeffs(lam, params.n_dim, len(a))
    y_p1 = float(np.sum(a))
    # close the boundary with the truncated series' own value at 1, so the
    # cancellation is exact at the coefficient level; coefficients peak
    # like e^{2 sqrt(lam)}, which keeps this float64-clean for lam up to a
    # few hundred (all uses here stay far below that)
    const = -y_p1 / float(np.sum(h))
    y = PowerSeries(a + const * h)
    return EllipticSolution(y=y, lam=lam, method="series", homogeneous_const=const)


def _zero_mode_profile(f: PowerSeries, n_dim: float) -> tuple[np.ndarray, np.ndarray]:
    """Shared exact ingredients for the lam = 0 integral formulas."""
    c = f.coeffs
    k = np.arange(len(c), dtype=float)
    inv1 = 1.0 / (k + 1.0)
    invh = 1.0 / (k + n_dim / 2.0)
    return c, (inv1, invh)


def solve_green_zero(problem: EllipticProblem) -> EllipticSolution:
    """lam = 0 solve by the three-piece kernel formula.

    y = (2/(N-2)) [ int_z^1 f dz
                    + z^{-(N/2-1)} int_0^z f s^{N/2-1} ds
                    - int_0^1 f s^{N/2-1} ds ],
    assembled term by term; exact for polynomial f.
    """
    if problem.lam != 0.0:
        raise ValueError("kernel formula requires lam = 0")
    n_dim = problem.params.n_dim
    c, (inv1, invh) = _zero_mode_profile(problem.f, n_dim)
    pref = 2.0 / (n_dim - 2.0)
    n = len(c)
    out = np.zeros(n + 1)
    # int_z^1 f: sum c_k (1 - z^{k+1})/(k+1)
    out[0] += float(np.sum(c * inv1))
    out[1:] -= c * inv1
    # z^{-(N/2-1)} int_0^z f s^{N/2-1} ds: sum c_k z^{k+1}/(k+N/2)
    out[1:] += c * invh
    # boundary constant: - int_0^1 f s^{N/2-1} ds
    out[0] -= float(np.sum(c * invh))
    return EllipticSolution(
        y=PowerSeries(pref * out), lam=0.0, method="green_zero"
    )


def solve_dirichlet_zero(problem: EllipticProblem) -> EllipticSolution:
    """lam = 0 solve by the complementary two-piece formula.

    y = -(2/(N-2)) int_0^z (1 - (s/z)^{N/2-1}) f ds
        + (2/(N-2)) int_0^1 (1 - s^{N/2-1}) f ds.
    Algebraically equivalent to the kernel formula; assembled through a
    different grouping so the agreement is an implementation check, not a
    tautology.
    """
    if problem.lam != 0.0:
        raise ValueError("kernel formula requires lam = 0")
    n_dim = problem.params.n_dim
    c, (inv1, invh) = _zero_mode_profile(problem.f, n_dim)
    pref = 2.0 / (n_dim - 2.0)
    n = len(c)
    out = np.zeros(n + 1)
    # -(int_0^z f ds - z^{-(N/2-1)} int_0^z f s^{N/2-1} ds)
    out[1:] -= c * inv1
    out[1:] += c * invh
    # + int_0^1 (1 - s^{N/2-1}) f ds  (a constant)
    out[0] += float(np.sum(c * (inv1 - invh)))
    return EllipticSolution(
        y=PowerSeries(pref * out), lam=0.0, method="dirichlet_zero"
    )


def find_resonant_index(params, lam: float, tol: float = 1e-8) -> int | None:
    """Index q with |lam - lambda_q| <= tol * max(1, lambda_q), or None."""
    n = 1
    while True:
        lam_n = bessel.eigenvalue(params, n)
        if abs(lam - lam_n) <= tol * max(1.0, lam_n):
            return n
        if lam_n > lam + 1.0:
            return None
        n += 1


def solve_resonant(
    problem: EllipticProblem,
    q: int | None = None,
    rule: QuadratureRule | None = None,
    degree: int | None = None,
) -> EllipticSolution:
    """Fredholm solve at (or next to) an eigenvalue.

    The forcing is first stripped of its phi_q component (that component
    is exactly what the operator cannot produce); the recurrence then runs
    at the snapped eigenvalue, and the kernel gauge removes the phi_q
    content of the result.  The removed forcing component is recorded: for
    an unprojected f, it equals the weighted norm of the equation residual.
    """
    params = problem.params
    if q is None:
        q = find_resonant_index(params, problem.lam)
        if q is None:
            raise ValueError(
                f"lam={problem.lam:.12g} is not within the resonance "
                "tolerance of any eigenvalue; use the generic solver"
            )
    if rule is None:
        rule = make_rule(params, 128)
    pair = bessel.eigenfunction(params, q, rule=rule)
    lam_q = pair.lam
    phi = pair.series
    # inner products against the mode go through the adaptive evaluator
    # rather than the mode polynomial, so they stay clean at any lam_q
    nu = params.nu
    phi_vals = np.array(
        [bessel.eval_phi(nu, lam_q * z) for z in rule.nodes]
    ) / pair.norm_const
    removed = inner_product(problem.f, phi_vals, rule)
    f_proj = problem.f - removed * phi
    a = _particular_recurrence(lam_q, f_proj, params.n_dim, degree)
    y = PowerSeries(a)
    gauge = inner_product(y, phi_vals, rule)
    y = y - gauge * phi
    return EllipticSolution(
        y=y,
        lam=lam_q,
        method="resonant",
        homogeneous_const=-gauge,
        removed_component=removed,
        resonant_index=q,
    )


def residual_norm(
    problem: EllipticProblem, y: PowerSeries, rule: QuadratureRule, lam: float | None = None
) -> float:
    """Relative weighted norm of f - (-lam - laplace) y."""
    if lam is None:
        lam = problem.lam
    r = problem.f - (-lam * y - apply_laplace(y, problem.params.n_dim))
    nf = norm(problem.f, rule)
    return norm(r, rule) / max(nf, 1e-300)
