"""Closed-form CIR/CIR2 bond prices and independent pricing oracles.

The two-factor short rate is r = x + y with independent square-root (CIR)
factors.  Zero-coupon bond prices therefore factor into two one-dimensional
affine prices A(T) * exp(-B(T) * x0), each available in closed form.  A
Riccati ODE integrator and a squared-Gaussian semigroup provide independent
cross-checks; they deliberately share no code with the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class Cir2Params:
    """Model constants for the two-factor CIR short rate.

    ``theta_*`` are mean-reversion speeds (1/time), ``mu_*`` reversion
    levels, ``sigma_*`` volatilities with the diffusion multiplier ``eps``
    already applied (sigma_x = 0.2 * eps for the benchmark set).
    ``horizon`` is the terminal time of the pricing problem.

    The constructor enforces 4*theta*mu >= sigma**2 per factor, which makes
    the origin an outflow boundary for the corrected drift (weaker than the
    Feller condition 2*theta*mu >= sigma**2).
    """

    theta_x: float
    mu_x: float
    sigma_x: float
    theta_y: float
    mu_y: float
    sigma_y: float
    eps: float = 1.0
    horizon: float = 1.0

    def __post_init__(self):
        for name in ("theta_x", "mu_x", "theta_y", "mu_y"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("sigma_x", "sigma_y"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.horizon < 0.0:
            raise ValueError("horizon must be nonnegative")
        if 4.0 * self.theta_x * self.mu_x < self.sigma_x**2:
            raise ValueError("outflow condition violated: 4*theta_x*mu_x < sigma_x^2")
        if 4.0 * self.theta_y * self.mu_y < self.sigma_y**2:
            raise ValueError("outflow condition violated: 4*theta_y*mu_y < sigma_y^2")

    @classmethod
    def benchmark(cls, eps: float = 1.0, horizon: float = 1.0) -> "Cir2Params":
        """Benchmark constant set: theta=(15.5, 20.5), mu=0.025, sigma=(0.2, 0.3)*eps."""
        return cls(
            theta_x=15.5,
            mu_x=0.025,
            sigma_x=0.2 * eps,
            theta_y=20.5,
            mu_y=0.025,
            sigma_y=0.3 * eps,
            eps=eps,
            horizon=horizon,
        )

    def factors(self):
        """(theta, mu, sigma) triples for the x and y factor."""
        return (
            (self.theta_x, self.mu_x, self.sigma_x),
            (self.theta_y, self.mu_y, self.sigma_y),
        )


@dataclass(frozen=True)
class AffineBondCoeffs:
    """One-factor affine bond coefficients: price = a * exp(-b * x0)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b < 0.0:
            raise ValueError("require a > 0 and b >= 0")


def cir_bond_coeffs(theta: float, mu: float, sigma: float, maturity: float) -> AffineBondCoeffs:
    """Closed-form affine coefficients for one CIR factor.

    With g = sqrt(theta^2 + 2*sigma^2),

        b(T) = 2*(exp(g*T) - 1) / ((theta + g)*(exp(g*T) - 1) + 2*g),
        a(T) = (2*g*exp((theta + g)*T/2) / (same denominator))^(2*theta*mu/sigma^2).

    a is evaluated in log space so large g*T does not overflow.  sigma = 0
    uses the analytic limit log(a) = mu*(b - T) (the deterministic-rate
    case), where b keeps its generic value (1 - exp(-theta*T))/theta.
    """
    if maturity < 0.0:
        raise ValueError("maturity must be nonnegative")
    if maturity == 0.0:
        return AffineBondCoeffs(1.0, 0.0)
    g = math.sqrt(theta * theta + 2.0 * sigma * sigma)
    # e^{gT}-1 and the denominator, both scaled by e^{-gT} for stability.
    em = -math.expm1(-g * maturity)  # 1 - e^{-gT}
    den_scaled = (theta + g) * em + 2.0 * g * math.exp(-g * maturity)
    b = 2.0 * em / den_scaled
    if sigma == 0.0:
        log_a = mu * (b - maturity)
    else:
        log_den = g * maturity + math.log(den_scaled)
        log_a = (2.0 * theta * mu / (sigma * sigma)) * (
            math.log(2.0 * g) + 0.5 * (theta + g) * maturity - log_den
        )
    return AffineBondCoeffs(math.exp(log_a), b)


def bond_price_cir2(params: Cir2Params, x0, y0):
    """Closed-form CIR2 zero-coupon bond price E[exp(-int_0^T (x_t+y_t) dt)].

    The factors are independent, so the price is the product of the two
    one-factor affine prices.  ``x0`` and ``y0`` may be scalars or arrays
    (broadcast), all componentwise >= 0.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if np.any(x0 < 0.0) or np.any(y0 < 0.0):
        raise ValueError("initial factor values must be nonnegative")
    cx = cir_bond_coeffs(params.theta_x, params.mu_x, params.sigma_x, params.horizon)
    cy = cir_bond_coeffs(params.theta_y, params.mu_y, params.sigma_y, params.horizon)
    price = cx.a * np.exp(-cx.b * x0) * cy.a * np.exp(-cy.b * y0)
    return float(price) if price.ndim == 0 else price


def _riccati_factor(theta: float, mu: float, sigma: float, maturity: float):
    """Integrate the one-factor Riccati system for (b, log a).

    b' = 1 - theta*b - sigma^2*b^2/2 with b(0) = 0, and (log a)' = -theta*mu*b.
    Kept free of any closed-form shortcut so it is a genuinely independent
    oracle for :func:`cir_bond_coeffs`.
    """
    if maturity == 0.0:
        return 0.0, 0.0

    def rhs(_t, z):
        b = z[0]
        return [1.0 - theta * b - 0.5 * sigma * sigma * b * b, -theta * mu * b]

    sol = solve_ivp(
        rhs,
        (0.0, maturity),
        [0.0, 0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"Riccati integration failed: {sol.message}")
    b, log_a = sol.y[0, -1], sol.y[1, -1]
    return b, log_a


def riccati_bond_price(params: Cir2Params, x0, y0):
    """CIR2 bond price from numerically integrated Riccati ODEs.

    Independent oracle for :func:`bond_price_cir2`; accepts scalars or arrays.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if np.any(x0 < 0.0) or np.any(y0 < 0.0):
        raise ValueError("initial factor values must be nonnegative")
    bx, log_ax = _riccati_factor(params.theta_x, params.mu_x, params.sigma_x, params.horizon)
    by, log_ay = _riccati_factor(params.theta_y, params.mu_y, params.sigma_y, params.horizon)
    price = np.exp(log_ax - bx * x0 + log_ay - by * y0)
    return float(price) if price.ndim == 0 else price


def _double_factorial_odd(m: int) -> int:
    # (2m-1)!! = E[Y^{2m}] for standard Gaussian Y; (-1)!! = 1.
    out = 1
    for j in range(1, m + 1):
        out *= 2 * j - 1
    return out


@lru_cache(maxsize=None)
def squared_gaussian_moment_table(n: int):
    """Exact integer expansion of E[((sqrt(x) + s*Y)^2)^n], Y ~ N(0,1).

    Returns a tuple of (x_power, t_power, coefficient) triples such that the
    expectation equals sum coeff * (s^2)^t_power * x^x_power, with s = sigma
    * sqrt(t).  Derived by expanding (x + 2*s*sqrt(x)*Y + s^2*Y^2)^n with the
    multinomial theorem and replacing Y^{2m} by (2m-1)!!; odd powers of Y
    vanish, so only integer powers of x survive.
    """
    if n < 0:
        raise ValueError("monomial degree must be nonnegative")
    terms: dict[tuple[int, int], int] = {}
    for i in range(n + 1):
        for a in range(0, (n - i) // 2 + 1):
            k = n - i - 2 * a
            multinom = (
                math.factorial(n)
                // (math.factorial(i) * math.factorial(2 * a) * math.factorial(k))
            )
            coeff = multinom * 4**a * _double_factorial_odd(a + k)
            key = (i + a, a + k)
            terms[key] = terms.get(key, 0) + coeff
    return tuple(sorted((xp, tp, c) for (xp, tp), c in terms.items()))


def cir_semigroup_apply(sigma: float, t, coeffs):
    """Apply the squared-Gaussian semigroup to a polynomial, exactly.

    The semigroup P_t f(x) = E[f((sqrt(x) + sigma*sqrt(t)*Y)^2)] solves
    u_t = 2*sigma^2*x*u_xx + sigma^2*u_x.  For polynomial f the action is
    polynomial in both x and t, so complex t (the analytic continuation) is
    evaluated directly.  ``coeffs[k]`` is the coefficient of x^k; the result
    has the same length (degree is preserved).
    """
    coeffs = np.asarray(coeffs)
    st = sigma * sigma * t
    complex_result = np.iscomplexobj(coeffs) or (isinstance(t, complex) and t.imag != 0.0)
    out = np.zeros(len(coeffs), dtype=complex if complex_result else float)
    for m, c in enumerate(coeffs):
        if c == 0:
            continue
        for xp, tp, w in squared_gaussian_moment_table(m):
            out[xp] += c * w * st**tp
    return out


def cir_semigroup_quadrature(sigma: float, t: float, f, x: float, order: int = 64) -> float:
    """Gauss-Hermite evaluation of E[f((sqrt(x) + sigma*sqrt(t)*Y)^2)].

    Exact for polynomial f whenever the quadrature order exceeds the
    polynomial degree of the integrand in Y (order >= 64 covers degree 63
    in x, far beyond anything used here).  ``f`` must accept numpy arrays.
    """
    if t < 0.0 or x < 0.0:
        raise ValueError("require t >= 0 and x >= 0")
    if order < 1:
        raise ValueError("quadrature order must be positive")
    nodes, weights = hermgauss(order)
    # hermgauss integrates against e^{-y^2}; substitute y = sqrt(2)*z.
    pts = (math.sqrt(x) + sigma * math.sqrt(t) * math.sqrt(2.0) * nodes) ** 2
    vals = np.asarray(f(pts), dtype=float)
    return float(weights @ vals / math.sqrt(math.pi))
