"""Analytic gaussian Wigner functions with exact partial derivatives.

One two-exponent type covers both gaussian families used here:

    W(x,k) = (√(ab)/π) exp(-a x² - b k²)

  * a = b = α²            — isotropic ensemble of width 1/α,
  * a = e^{+2ζ}, b = e^{-2ζ} — squeezed ensemble with squeeze parameter ζ.

Centering at the phase-space origin is deliberate; displaced or rotated
gaussians are out of scope.  Mixed partials factorize per axis through the
Hermite identity  ∂_u^n e^{-a u²} = (-1)^n a^{n/2} H_n(√a u) e^{-a u²}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import UnitsMap, to_dimensionless
from .hermite import MAX_HERMITE_ORDER, hermite_eval


@dataclass(frozen=True)
class GaussianEnsemble:
    """Normalized centered gaussian with x-exponent `a` and k-exponent `b`."""

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"exponent {name} must be strictly positive, got {value!r}")

    @classmethod
    def isotropic(cls, alpha: float) -> "GaussianEnsemble":
        """(α²/π) exp[-α²(x²+k²)]."""
        if not (math.isfinite(alpha) and alpha != 0.0):
            raise ValueError(f"alpha must be finite and nonzero, got {alpha!r}")
        return cls(a=alpha * alpha, b=alpha * alpha)

    @classmethod
    def squeezed(cls, zeta: float) -> "GaussianEnsemble":
        """(1/π) exp[-(e^{+2ζ} x² + e^{-2ζ} k²)]."""
        if not math.isfinite(zeta):
            raise ValueError(f"squeeze parameter must be finite, got {zeta!r}")
        return cls(a=math.exp(2.0 * zeta), b=math.exp(-2.0 * zeta))

    @property
    def normalization(self) -> float:
        return math.sqrt(self.a * self.b) / math.pi

    @property
    def peak_value(self) -> float:
        """Maximum of W, attained at the origin."""
        return self.normalization

    def eval(self, x, k):
        x = np.asarray(x, dtype=float)
        k = np.asarray(k, dtype=float)
        value = self.normalization * np.exp(-self.a * x * x - self.b * k * k)
        return float(value) if value.ndim == 0 else value

    def partial(self, order_x: int, order_k: int, x, k):
        """Exact mixed partial ∂_x^{m} ∂_k^{n} W via per-axis Hermite factors."""
        if order_x < 0 or order_k < 0:
            raise ValueError("derivative orders must be nonnegative")
        if order_x + order_k > MAX_HERMITE_ORDER:
            raise ValueError(
                f"total derivative order {order_x + order_k} exceeds "
                f"supported maximum {MAX_HERMITE_ORDER}"
            )
        x = np.asarray(x, dtype=float)
        k = np.asarray(k, dtype=float)
        value = self.eval(x, k)
        if order_x:
            ra = math.sqrt(self.a)
            value = value * ((-ra) ** order_x * hermite_eval(order_x, ra * x))
        if order_k:
            rb = math.sqrt(self.b)
            value = value * ((-rb) ** order_k * hermite_eval(order_k, rb * k))
        return float(value) if np.ndim(value) == 0 else value


def ensemble_eval(ensemble: GaussianEnsemble, x, k):
    """Normalized gaussian value at (x, k)."""
    return ensemble.eval(x, k)


def ensemble_partial(ensemble: GaussianEnsemble, order_x: int, order_k: int, x, k):
    """Exact mixed partial derivative of the ensemble at (x, k)."""
    return ensemble.partial(order_x, order_k, x, k)


@dataclass(frozen=True)
class GaussianMarginal:
    """One-axis density √(c/π) e^{-c u²}; integrates to 1."""

    inverse_sq_width: float

    def __call__(self, u):
        c = self.inverse_sq_width
        value = math.sqrt(c / math.pi) * np.exp(-c * np.asarray(u, dtype=float) ** 2)
        return float(value) if value.ndim == 0 else value

    @property
    def variance(self) -> float:
        return 0.5 / self.inverse_sq_width


def marginals(ensemble: GaussianEnsemble):
    """(|ψ(x)|², |φ(k)|²) position and momentum densities of the ensemble."""
    return GaussianMarginal(ensemble.a), GaussianMarginal(ensemble.b)


@dataclass(frozen=True)
class PhysicalGaussian:
    """The ensemble mapped to physical (q, p); satisfies 𝒲(x,k) = ℏ·G(q,p).

    Exponent coefficients are exposed for inspection: the density is
    prefactor · exp(-coeff_q q² - coeff_p p²).
    """

    ensemble: GaussianEnsemble
    units: UnitsMap

    @property
    def coeff_q(self) -> float:
        u = self.units
        return self.ensemble.a * u.mass * u.angular_frequency / u.planck

    @property
    def coeff_p(self) -> float:
        u = self.units
        return self.ensemble.b / (u.mass * u.angular_frequency * u.planck)

    @property
    def prefactor(self) -> float:
        return self.ensemble.normalization / self.units.planck

    def eval(self, q, p):
        x, k = to_dimensionless(q, p, self.units)
        value = np.asarray(self.ensemble.eval(x, k)) / self.units.planck
        return float(value) if value.ndim == 0 else value


def physical_form(ensemble: GaussianEnsemble, units: UnitsMap) -> PhysicalGaussian:
    """Gaussian over physical (q, p) whose dimensionless image is `ensemble`."""
    return PhysicalGaussian(ensemble=ensemble, units=units)
