"""Weighted quadrature, inner products, and the Dirichlet mode basis.

The natural space for the column problem carries the measure z^{N/2-1} dz
on [0, 1].  A Gauss-Jacobi rule (alpha=0, beta=N/2-1) mapped to [0, 1]
integrates polynomials of degree 2n-1 exactly against that weight, which
is what every inner product, norm, and Galerkin projection here uses.

Mode-basis matrices (values and z-derivatives of the normalized
eigenfunctions at the quadrature nodes) are built once per
(N, mode count, node count) and cached: their entries go through the
adaptive-precision entire-factor evaluator because a float64 polynomial
evaluation of high modes near z = 1 would be cancelled away entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from . import bessel
from .series import PowerSeries, apply_dot_d, apply_laplace_power

__all__ = [
    "QuadratureRule",
    "make_rule",
    "make_legendre_rule",
    "inner_product",
    "norm",
    "seminorm",
    "iterated_norm",
    "sup_norm_estimate",
    "Basis",
    "build_basis",
    "expand",
    "GradedNormReport",
    "graded_norms",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in (0,1) and weights that already absorb z^{N/2-1} dz."""

    nodes: np.ndarray
    weights: np.ndarray
    n_dim: float
    exactness: int


def make_rule(params, count: int = 128) -> QuadratureRule:
    """Gauss-Jacobi rule for the z^{N/2-1}-weighted integral on [0, 1]."""
    beta = params.nu  # = N/2 - 1
    x, w = roots_jacobi(count, 0.0, beta)
    nodes = (x + 1.0) / 2.0
    weights = w / 2.0 ** (beta + 1.0)
    return QuadratureRule(
        nodes=nodes, weights=weights, n_dim=params.n_dim, exactness=2 * count - 1
    )


def make_legendre_rule(count: int = 128, a: float = 0.0, b: float = 1.0):
    """Plain Gauss-Legendre nodes/weights on [a, b] (no weight factor)."""
    x, w = np.polynomial.legendre.leggauss(count)
    half = (b - a) / 2.0
    return (a + b) / 2.0 + half * x, half * w


def _values_at(f, nodes: np.ndarray) -> np.ndarray:
    if isinstance(f, PowerSeries):
        return f(nodes)
    if isinstance(f, np.ndarray):
        if f.shape != nodes.shape:
            raise ValueError(
                f"value array of shape {f.shape} does not match the rule "
                f"({nodes.shape})"
            )
        return f
    if callable(f):
        return np.asarray(f(nodes), dtype=float)
    raise TypeError(f"cannot evaluate object of type {type(f)!r} at quadrature nodes")


def inner_product(f, g, rule: QuadratureRule) -> float:
    """Weighted inner product (f|g) = int_0^1 f g z^{N/2-1} dz.

    Arguments may be PowerSeries, callables of z, or node-value arrays.
    """
    fv = _values_at(f, rule.nodes)
    gv = _values_at(g, rule.nodes)
    return float(np.dot(rule.weights, fv * gv))


def norm(f, rule: QuadratureRule) -> float:
    return math.sqrt(max(inner_product(f, f, rule), 0.0))


def seminorm(y: PowerSeries, ell: int, params, rule: QuadratureRule) -> float:
    """Graded seminorm of order ell.

    Even ell = 2m measures the weighted norm of laplace^m y; odd
    ell = 2m+1 measures the weighted norm of sqrt(z) d/dz laplace^m y.
    """
    m, rem = divmod(ell, 2)
    s = apply_laplace_power(y, m, params.n_dim)
    if rem:
        s = apply_dot_d(s)
    return norm(s, rule)


def iterated_norm(y: PowerSeries, n: int, params, rule: QuadratureRule) -> float:
    """Euclidean combination of the graded seminorms up to order n."""
    return math.sqrt(sum(seminorm(y, ell, params, rule) ** 2 for ell in range(n + 1)))


def sup_norm_estimate(y: PowerSeries, samples: int = 257) -> float:
    """Max of |y| over a uniform z sample including both endpoints."""
    z = np.linspace(0.0, 1.0, samples)
    return float(np.max(np.abs(y(z))))


# ---------------------------------------------------------------------------
# mode basis


@dataclass(frozen=True)
class Basis:
    """Normalized Dirichlet modes tabulated on a quadrature rule.

    values[i, j] and dvalues[i, j] hold mode i+1 and its z-derivative at
    node j; lams[i] is its eigenvalue.  The generator acts diagonally:
    applying it to mode i multiplies by -lams[i].
    """

    params: object
    rule: QuadratureRule
    pairs: tuple
    lams: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    dvalues: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.pairs)

    def boundary_values(self) -> np.ndarray:
        """Mode values at z = 0 (the vacuum end), where z^{N/2-1} degenerates."""
        nu = self.params.nu
        g0 = bessel.gamma_real(nu + 1.0)
        return np.array([1.0 / (g0 * p.norm_const) for p in self.pairs])


_basis_cache: dict = {}


def build_basis(params, count: int, node_count: int = 128) -> Basis:
    """Build (or fetch) the mode basis on a Gauss-Jacobi rule.

    Node values use the adaptive-precision evaluator; the z-derivative of
    a mode with eigenvalue lam is -lam E_{nu+1}(lam z) / norm_const.
    """
    key = (float(params.n_dim), int(count), int(node_count))
    if key in _basis_cache:
        return _basis_cache[key]
    rule = make_rule(params, node_count)
    nu = params.nu
    pairs = []
    values = np.empty((count, node_count))
    dvalues = np.empty((count, node_count))
    for i in range(count):
        pair = bessel.eigenfunction(params, i + 1, rule=rule)
        pairs.append(pair)
        lam = pair.lam
        nc = pair.norm_const
        for j, z in enumerate(rule.nodes):
            values[i, j] = bessel.eval_phi(nu, lam * z) / nc
            dvalues[i, j] = -lam * bessel.eval_phi(nu + 1.0, lam * z) / nc
    basis = Basis(
        params=params,
        rule=rule,
        pairs=tuple(pairs),
        lams=np.array([p.lam for p in pairs]),
        values=values,
        dvalues=dvalues,
    )
    _basis_cache[key] = basis
    return basis


def expand(f, basis: Basis) -> tuple[np.ndarray, float]:
    """Project onto the basis; return (coefficients, relative residual).

    The residual is the weighted norm of f minus its projection, divided
    by the weighted norm of f (zero norm gives zero residual).
    """
    rule = basis.rule
    fv = _values_at(f, rule.nodes)
    coeffs = basis.values @ (rule.weights * fv)
    recon = coeffs @ basis.values
    nf = math.sqrt(max(float(np.dot(rule.weights, fv * fv)), 0.0))
    if nf == 0.0:
        return coeffs, 0.0
    dr = fv - recon
    return coeffs, math.sqrt(max(float(np.dot(rule.weights, dr * dr)), 0.0)) / nf


# ---------------------------------------------------------------------------
# space-time graded norms


@dataclass
class GradedNormReport:
    """Sup and L2 entries of the mixed space-time derivative family.

    entries[(j, k)] holds the pair for (-d^2/dt^2)^j (laplace)^k applied to
    the field; sup_total is the max over all entries with j+k <= n, and
    l2_total combines the squared time-integrated weighted norms.
    """

    order: int
    t_span: tuple
    entries: dict
    sup_total: float
    l2_total: float


def graded_norms(
    y,
    n: int,
    params,
    rule: QuadratureRule,
    t_span: tuple = (0.0, 1.0),
    time_points: int = 48,
) -> GradedNormReport:
    """Evaluate the graded space-time norms of a trigonometric field.

    y must provide time_second_derivative(), laplacian(params), and
    eval(t, z).  The L2 part integrates with Gauss-Legendre in t and the
    weighted rule in z; the sup part samples the same t nodes plus the
    interval ends, and z at the rule nodes plus both endpoints.
    """
    tq, tw = make_legendre_rule(time_points, *t_span)
    t_sup = np.concatenate([[t_span[0]], tq, [t_span[1]]])
    z_sup = np.concatenate([[0.0], rule.nodes, [1.0]])

    entries = {}
    sup_total = 0.0
    l2_sq = 0.0
    row = y
    for j in range(n + 1):
        col = row
        for k in range(n + 1 - j):
            sup_val = 0.0
            for t in t_sup:
                sup_val = max(sup_val, float(np.max(np.abs(col.eval(t, z_sup)))))
            sq = 0.0
            for t, w in zip(tq, tw):
                vals = col.eval(t, rule.nodes)
                sq += w * float(np.dot(rule.weights, vals * vals))
            entries[(j, k)] = {"sup": sup_val, "l2": math.sqrt(max(sq, 0.0))}
            sup_total = max(sup_total, sup_val)
            l2_sq += sq
            if k < n - j:
                col = col.laplacian(params) * (-1.0)
        if j < n:
            row = row.time_second_derivative() * (-1.0)
    return GradedNormReport(
        order=n,
        t_span=tuple(t_span),
        entries=entries,
        sup_total=sup_total,
        l2_total=math.sqrt(max(l2_sq, 0.0)),
    )
