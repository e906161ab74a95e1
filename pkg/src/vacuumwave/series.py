"""Polynomial calculus on [0, 1] for the degenerate wave operator.

Series here are finite sums  z^offset * sum_k a_k z^k  with offset in
{0, 0.5}.  The half-power channel exists because the square-root derivative
sqrt(z) d/dz maps integer powers to half powers and back; everything else
stays in the integer channel.

Operators provided, all exact on the coefficient level:

- apply_laplace:  z y'' + (N/2) y'           (the weighted-space generator)
- apply_d:        y'
- apply_check_d:  z y'
- apply_dot_d:    sqrt(z) y'
- integral_scaling:  z^{-p} int_0^z y(s) s^{p-1} ds

The gas-dynamics nonlinearities enter through `flux` and its derivatives
(closed forms) and through their Taylor coefficient tables
(`build_nonlinearity`), which the perturbation hierarchy consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PowerSeries",
    "apply_laplace",
    "apply_d",
    "apply_check_d",
    "apply_dot_d",
    "apply_laplace_power",
    "integral_scaling",
    "definite_integral",
    "flux",
    "flux_deriv",
    "flux_second_deriv",
    "elastic_factor",
    "source_term",
    "source_term_deriv",
    "NonlinearitySeries",
    "build_nonlinearity",
    "general_binomial",
    "compose",
    "monomial_chain",
    "IdentityReport",
    "verify_identities",
]


@dataclass
class PowerSeries:
    """Finite power series z^offset * (a_0 + a_1 z + ... + a_d z^d)."""

    coeffs: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if self.offset not in (0.0, 0.5):
            raise ValueError(f"offset must be 0 or 0.5, got {self.offset}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def exponents(self) -> np.ndarray:
        """Exponent of z carried by each stored coefficient."""
        return np.arange(len(self.coeffs)) + self.offset

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        val = np.polynomial.polynomial.polyval(z, self.coeffs)
        if self.offset:
            val = val * np.power(z, self.offset)
        return val

    def truncated(self, degree: int) -> "PowerSeries":
        if degree >= self.degree:
            return PowerSeries(self.coeffs.copy(), self.offset)
        return PowerSeries(self.coeffs[: degree + 1].copy(), self.offset)

    def trimmed(self, tol: float = 0.0) -> "PowerSeries":
        """Drop trailing coefficients with |a_k| <= tol."""
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        last = nz[-1] if len(nz) else 0
        return PowerSeries(self.coeffs[: last + 1].copy(), self.offset)

    def copy(self) -> "PowerSeries":
        return PowerSeries(self.coeffs.copy(), self.offset)

    def _require_same_offset(self, other: "PowerSeries") -> None:
        if self.offset != other.offset:
            raise ValueError(
                "cannot add series from different power channels "
                f"(offsets {self.offset} and {other.offset})"
            )

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        self._require_same_offset(other)
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return PowerSeries(out, self.offset)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            out = np.convolve(self.coeffs, other.coeffs)
            off = self.offset + other.offset
            if off == 1.0:
                # two half powers make z^1: fold into the integer channel
                out = np.concatenate([[0.0], out])
                off = 0.0
            return PowerSeries(out, off)
        return PowerSeries(self.coeffs * float(other), self.offset)

    __rmul__ = __mul__

    def __neg__(self) -> "PowerSeries":
        return self * -1.0

    def shift_up(self, k: int = 1) -> "PowerSeries":
        """Multiply by z^k (integer k >= 0)."""
        return PowerSeries(np.concatenate([np.zeros(k), self.coeffs]), self.offset)

    @staticmethod
    def zero(offset: float = 0.0) -> "PowerSeries":
        return PowerSeries(np.zeros(1), offset)

    @staticmethod
    def monomial(k: int, coeff: float = 1.0, offset: float = 0.0) -> "PowerSeries":
        c = np.zeros(k + 1)
        c[k] = coeff
        return PowerSeries(c, offset)


def _check_regular_at_zero(y: PowerSeries, op: str) -> None:
    if y.offset == 0.5 and y.coeffs[0] != 0.0:
        raise ValueError(
            f"{op} of a half-power series with nonzero leading coefficient "
            "leaves the representable channels (exponent would drop below 0)"
        )


def apply_laplace(y: PowerSeries, n_dim: float) -> PowerSeries:
    """z y'' + (N/2) y'.  Sends z^e to e (e - 1 + N/2) z^{e-1}."""
    _check_regular_at_zero(y, "laplace")
    e = y.exponents()
    scaled = e * (e - 1.0 + n_dim / 2.0) * y.coeffs
    if len(scaled) == 1:
        return PowerSeries(np.zeros(1), y.offset)
    return PowerSeries(scaled[1:].copy(), y.offset)


def apply_d(y: PowerSeries) -> PowerSeries:
    """Plain derivative d/dz.  Sends z^e to e z^{e-1}."""
    _check_regular_at_zero(y, "d/dz")
    scaled = y.exponents() * y.coeffs
    if len(scaled) == 1:
        return PowerSeries(np.zeros(1), y.offset)
    return PowerSeries(scaled[1:].copy(), y.offset)


def apply_check_d(y: PowerSeries) -> PowerSeries:
    """z d/dz.  Sends z^e to e z^e; stays in the same channel."""
    return PowerSeries(y.exponents() * y.coeffs, y.offset)


def apply_dot_d(y: PowerSeries) -> PowerSeries:
    """sqrt(z) d/dz.  Sends z^e to e z^{e-1/2}, toggling the channel."""
    scaled = y.exponents() * y.coeffs
    if y.offset == 0.0:
        # z^k -> k z^{k-1/2}: half channel, index k-1
        if len(scaled) == 1:
            return PowerSeries(np.zeros(1), 0.5)
        return PowerSeries(scaled[1:].copy(), 0.5)
    # z^{k+1/2} -> (k+1/2) z^k: integer channel, index k
    return PowerSeries(scaled.copy(), 0.0)


def apply_laplace_power(y: PowerSeries, m: int, n_dim: float) -> PowerSeries:
    out = y
    for _ in range(m):
        out = apply_laplace(out, n_dim)
    return out


def integral_scaling(y: PowerSeries, p: float) -> PowerSeries:
    """z^{-p} int_0^z y(s) s^{p-1} ds, exact per coefficient.

    Sends z^e to z^e / (e + p).  Requires e + p > 0 for every stored
    exponent, which holds for all uses here (p >= N/2 >= 2).
    """
    denom = y.exponents() + p
    if np.any(denom <= 0.0):
        raise ValueError(f"integral scaling with p={p} hits a nonpositive exponent sum")
    return PowerSeries(y.coeffs / denom, y.offset)


def definite_integral(y: PowerSeries, a: float = 0.0, b: float = 1.0) -> float:
    """Exact int_a^b y(z) dz with the plain measure."""
    e1 = y.exponents() + 1.0
    anti = y.coeffs / e1
    return float(np.sum(anti * (b**e1 - a**e1)))


# ---------------------------------------------------------------------------
# gas nonlinearities


def flux(v, gamma: float):
    """Normalized pressure-flux increment (1/gamma)(1 - (1+v)^{-gamma})."""
    v = np.asarray(v, dtype=float)
    return (1.0 - (1.0 + v) ** (-gamma)) / gamma


def flux_deriv(v, gamma: float):
    v = np.asarray(v, dtype=float)
    return (1.0 + v) ** (-gamma - 1.0)


def flux_second_deriv(v, gamma: float):
    v = np.asarray(v, dtype=float)
    return -(gamma + 1.0) * (1.0 + v) ** (-gamma - 2.0)


def elastic_factor(v, gamma: float):
    """Multiplier of the wave operator: flux_deriv(v) - 1.  Vanishes at v=0."""
    return flux_deriv(v, gamma) - 1.0


def source_term(v, gamma: float, n_dim: float):
    """Zeroth-order source (N/2)(v flux_deriv(v) - flux(v)).  O(v^2) small."""
    v = np.asarray(v, dtype=float)
    return (n_dim / 2.0) * (v * flux_deriv(v, gamma) - flux(v, gamma))


def source_term_deriv(v, gamma: float, n_dim: float):
    """d/dv of source_term: (N/2) v flux_second_deriv(v)."""
    v = np.asarray(v, dtype=float)
    return (n_dim / 2.0) * v * flux_second_deriv(v, gamma)


def general_binomial(a: float, ell: int) -> float:
    """Binomial coefficient a (a-1) ... (a-ell+1) / ell! for real a."""
    out = 1.0
    for i in range(ell):
        out *= (a - i) / (i + 1)
    return out


@dataclass
class NonlinearitySeries:
    """Taylor tables of the two nonlinearities about v = 0.

    elastic[ell] and source[ell] multiply v^ell; elastic[0] = 0 and
    source[0] = source[1] = 0 by construction (there is no linear source
    correction, which the builder asserts rather than assumes).
    """

    gamma: float
    n_dim: float
    order: int
    elastic: np.ndarray = field(repr=False)
    source: np.ndarray = field(repr=False)


def build_nonlinearity(params, order: int) -> NonlinearitySeries:
    """Tabulate Taylor coefficients of both nonlinearities up to v^order."""
    gamma = params.gamma
    n_dim = params.n_dim
    elastic = np.zeros(order + 1)
    source = np.zeros(order + 1)
    for ell in range(1, order + 1):
        elastic[ell] = general_binomial(-gamma - 1.0, ell)
        source[ell] = (n_dim / 2.0) * (
            general_binomial(-gamma - 1.0, ell - 1)
            + general_binomial(-gamma, ell) / gamma
        )
    if abs(source[1]) > 1e-12:
        raise AssertionError(
            f"linear source coefficient should vanish, got {source[1]:.3e}"
        )
    source[1] = 0.0
    return NonlinearitySeries(
        gamma=gamma, n_dim=n_dim, order=order, elastic=elastic, source=source
    )


def compose(table: np.ndarray, v: PowerSeries, degree: int) -> PowerSeries:
    """sum_ell table[ell] v^ell truncated at the given polynomial degree.

    v must live in the integer channel.  A coarse convergence check samples
    |v| on [0, 1]; the Taylor tables all have radius 1 in v.
    """
    if v.offset != 0.0:
        raise ValueError("compose requires an integer-channel series")
    sample = np.max(np.abs(v(np.linspace(0.0, 1.0, 65))))
    if sample >= 0.9:
        raise ValueError(
            f"composition argument reaches |v| = {sample:.3f}, too close to "
            "the unit convergence radius"
        )
    out = PowerSeries(np.array([float(table[-1])]))
    for ell in range(len(table) - 2, -1, -1):
        out = (out * v).truncated(degree)
        out = out + PowerSeries(np.array([float(table[ell])]))
    return out.truncated(degree)


# ---------------------------------------------------------------------------
# operator identity verification


def monomial_chain(n_dim: float, count: int) -> list[PowerSeries]:
    """u_0 = 1 and u_j = z^j / prod_{i<=j} i(i-1+N/2), so that
    laplace(u_{j+1}) = u_j exactly.  This chain saturates the
    iterated-derivative sup-norm bounds, making their constants sharp."""
    chain = [PowerSeries(np.array([1.0]))]
    denom = 1.0
    for j in range(1, count + 1):
        denom *= j * (j - 1.0 + n_dim / 2.0)
        chain.append(PowerSeries.monomial(j, 1.0 / denom))
    return chain


@dataclass
class IdentityReport:
    """Defect sizes from verify_identities.

    defects holds max coefficient discrepancies for identities that must
    hold; printed_variant holds the discrepancy of the deliberately wrong
    exponent choice in the iterated-integral identity, which must NOT be
    small (it documents why the corrected exponent is the right one).
    """

    n_dim: float
    degree: int
    defects: dict
    printed_variant: dict

    def max_defect(self) -> float:
        return max(self.defects.values())

    def passes(self, tol: float = 1e-12) -> bool:
        return self.max_defect() <= tol


def _coeff_defect(a: PowerSeries, b: PowerSeries) -> float:
    """Coefficient discrepancy relative to the size of the operands.

    Operator chains blow raw coefficients up to ~1e12 at degree 30, so an
    absolute measure would only ever see their roundoff; the scaled one
    stays near machine epsilon when the identity holds.
    """
    if a.offset != b.offset:
        return float("inf")
    n = max(len(a.coeffs), len(b.coeffs))
    ca = np.zeros(n)
    cb = np.zeros(n)
    ca[: len(a.coeffs)] = a.coeffs
    cb[: len(b.coeffs)] = b.coeffs
    scale = max(1.0, float(np.max(np.abs(ca))), float(np.max(np.abs(cb))))
    return float(np.max(np.abs(ca - cb))) / scale


def verify_identities(params, degree: int = 30, seed: int = 7, trials: int = 4) -> IdentityReport:
    """Exercise the operator calculus on random polynomials.

    Identities checked (exact at the coefficient level, defects near
    machine epsilon): the z-weighted chain rule for check_d^2, the
    commutators of laplace with check_d and d, the square-root-derivative
    factorization of laplace, both product rules, the integral
    representation of laplace^m(dy/dz) through laplace^{m+1}y with the
    corrected exponent pair, its half-derivative analogue, and sharpness
    of the iterated-derivative comparison constants on the monomial chain.

    The misprinted exponent variant of the integral representation is
    evaluated too and reported separately; it is expected to fail.
    """
    n_dim = params.n_dim
    rng = np.random.default_rng(seed)
    defects: dict[str, float] = {}
    printed: dict[str, float] = {}

    def lap(s: PowerSeries) -> PowerSeries:
        return apply_laplace(s, n_dim)

    def note(book: dict, name: str, a: PowerSeries, b: PowerSeries) -> None:
        book[name] = max(book.get(name, 0.0), _coeff_defect(a, b))

    for _ in range(trials):
        p = PowerSeries(rng.uniform(-1.0, 1.0, degree + 1))
        q = PowerSeries(rng.uniform(-1.0, 1.0, degree + 1))

        note(
            defects,
            "checkd_squared",
            apply_check_d(apply_check_d(p)),
            lap(p).shift_up(1) - (n_dim / 2.0 - 1.0) * apply_check_d(p),
        )
        note(
            defects,
            "laplace_checkd_commutator",
            lap(apply_check_d(p)) - apply_check_d(lap(p)),
            lap(p),
        )
        note(
            defects,
            "d_laplace_commutator",
            apply_d(lap(p)) - lap(apply_d(p)),
            apply_d(apply_d(p)),
        )
        note(
            defects,
            "dotd_factorization",
            lap(p),
            apply_dot_d(apply_dot_d(p)) + ((n_dim - 1.0) / 2.0) * apply_d(p),
        )
        note(
            defects,
            "product_rule",
            lap(q * p),
            q * lap(p) + 2.0 * (apply_d(q) * apply_check_d(p)) + lap(q) * p,
        )
        cdp = apply_check_d(p)
        note(
            defects,
            "weighted_product_rule",
            lap(q * cdp),
            q * apply_check_d(lap(p))
            + (q + 2.0 * apply_check_d(q)) * lap(p)
            + (lap(q) - (n_dim - 2.0) * apply_d(q)) * cdp,
        )

        for m in range(4):
            lm_dy = apply_laplace_power(apply_d(p), m, n_dim)
            lm1_y = apply_laplace_power(p, m + 1, n_dim)
            note(
                defects,
                f"iterated_integral_m{m}",
                lm_dy,
                integral_scaling(lm1_y, n_dim / 2.0 + m),
            )
            note(
                printed,
                f"iterated_integral_misprint_m{m}",
                lm_dy,
                integral_scaling(lm1_y, n_dim / 2.0 + m + 1.0),
            )

        for k in range(5):
            lhs = apply_d(p)
            rhs = lap(p)
            for _i in range(k):
                lhs = apply_dot_d(lhs)
                rhs = apply_dot_d(rhs)
            note(
                defects,
                f"half_derivative_integral_k{k}",
                lhs,
                integral_scaling(rhs, (n_dim + k) / 2.0),
            )

    # sharpness of the comparison constants on the monomial chain: the
    # ratio of sup norms equals the constant exactly (both sides constant
    # functions there, so evaluating anywhere gives the sup)
    chain = monomial_chain(n_dim, 3)
    for m, k in ((0, 1), (1, 1), (0, 2)):
        u = chain[m + k]
        lhs = u
        for _i in range(k):
            lhs = apply_d(lhs)
        lhs = apply_laplace_power(lhs, m, n_dim)
        bound = 1.0
        for j in range(k):
            bound /= n_dim / 2.0 + m + j
        ratio = abs(float(lhs(1.0)))  # laplace^{m+k} u = u_0 = 1
        defects[f"sharp_constant_m{m}_k{k}"] = abs(ratio / bound - 1.0)

    return IdentityReport(
        n_dim=n_dim, degree=degree, defects=defects, printed_variant=printed
    )
