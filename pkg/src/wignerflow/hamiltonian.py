"""Separable Hamiltonians H(x,k) = K(k) + V(x) with exact odd derivatives.

The term vocabulary is deliberately small — cosh, cos and monomial terms —
because every Hamiltonian this engine handles is built from them, and each
kind has odd derivatives in the factorized form  scale^{2η+1} × carrier(u):

    A cosh(μu):  ∂_u^{2η+1} = A μ^{2η+1} sinh(μu)
    A cos(νu):   ∂_u^{2η+1} = (-1)^{η+1} A ν^{2η+1} sin(νu)
    c u^m:       falling-factorial coefficients, identically zero past order m

That factorization is what lets the flow series resum in closed form.
Dimensionless coordinates are canonical internally; `UnitsMap` converts at
the boundary via  x = (mω/ℏ)^{1/2} q  and  k = (mωℏ)^{-1/2} p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_MONOMIAL_POWER = 8


def _require_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CoshTerm:
    """A·cosh(μu) with amplitude A and frequency μ ≠ 0."""

    amplitude: float
    frequency: float

    def __post_init__(self):
        _require_finite(self.amplitude, "amplitude")
        if _require_finite(self.frequency, "frequency") == 0.0:
            raise ValueError("cosh term frequency must be nonzero")

    def value(self, u):
        return self.amplitude * np.cosh(self.frequency * u)

    def odd_derivative(self, order: int, u):
        _check_odd(order)
        return self.amplitude * self.frequency**order * np.sinh(self.frequency * u)

    # infinite series: never exhausts
    max_odd_order = None


@dataclass(frozen=True)
class CosTerm:
    """A·cos(νu) with amplitude A and frequency ν ≠ 0."""

    amplitude: float
    frequency: float

    def __post_init__(self):
        _require_finite(self.amplitude, "amplitude")
        if _require_finite(self.frequency, "frequency") == 0.0:
            raise ValueError("cos term frequency must be nonzero")

    def value(self, u):
        return self.amplitude * np.cos(self.frequency * u)

    def odd_derivative(self, order: int, u):
        _check_odd(order)
        eta = (order - 1) // 2
        sign = -1.0 if eta % 2 == 0 else 1.0  # (-1)^{η+1}
        return sign * self.amplitude * self.frequency**order * np.sin(self.frequency * u)

    max_odd_order = None


@dataclass(frozen=True)
class MonomialTerm:
    """c·u^m with nonnegative integer power m <= 8."""

    coefficient: float
    power: int

    def __post_init__(self):
        _require_finite(self.coefficient, "coefficient")
        if not isinstance(self.power, (int, np.integer)) or self.power < 0:
            raise ValueError(f"monomial power must be a nonnegative integer, got {self.power!r}")
        if self.power > MAX_MONOMIAL_POWER:
            raise ValueError(f"monomial power {self.power} exceeds maximum {MAX_MONOMIAL_POWER}")

    def value(self, u):
        return self.coefficient * np.asarray(u, dtype=float) ** self.power

    def odd_derivative(self, order: int, u):
        _check_odd(order)
        if order > self.power:
            return np.zeros_like(np.asarray(u, dtype=float)) + 0.0
        coeff = self.coefficient * math.perm(self.power, order)
        return coeff * np.asarray(u, dtype=float) ** (self.power - order)

    @property
    def max_odd_order(self):
        # largest odd n with a nonvanishing derivative; -1 when there is none
        if self.power == 0:
            return -1
        return self.power if self.power % 2 == 1 else self.power - 1


Term = CoshTerm | CosTerm | MonomialTerm


def _check_odd(order: int):
    if order % 2 == 0 or order < 1:
        raise ValueError(f"odd derivative order required, got {order}")


def term_odd_derivative(term: Term, order: int, u):
    """Exact analytic odd derivative of a single term at u."""
    return term.odd_derivative(order, u)


def _terms_value(terms, u):
    total = np.zeros_like(np.asarray(u, dtype=float)) + 0.0
    for term in terms:
        total = total + term.value(u)
    return total


def _terms_odd_derivative(terms, order, u):
    total = np.zeros_like(np.asarray(u, dtype=float)) + 0.0
    for term in terms:
        total = total + term.odd_derivative(order, u)
    return total


def _terms_max_odd_order(terms):
    """Largest odd derivative order that can be nonzero, None if unbounded."""
    best = -1
    for term in terms:
        if term.max_odd_order is None:
            return None
        best = max(best, term.max_odd_order)
    return best


@dataclass(frozen=True)
class SeparableHamiltonian:
    """K(k) + V(x) as immutable term lists; ∂²H/∂x∂k = 0 by construction."""

    kinetic_terms: tuple = field(default_factory=tuple)
    potential_terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kinetic_terms", tuple(self.kinetic_terms))
        object.__setattr__(self, "potential_terms", tuple(self.potential_terms))

    def kinetic_value(self, k):
        return _terms_value(self.kinetic_terms, k)

    def potential_value(self, x):
        return _terms_value(self.potential_terms, x)

    def kinetic_odd_derivative(self, order, k):
        return _terms_odd_derivative(self.kinetic_terms, order, k)

    def potential_odd_derivative(self, order, x):
        return _terms_odd_derivative(self.potential_terms, order, x)

    @property
    def kinetic_max_odd_order(self):
        return _terms_max_odd_order(self.kinetic_terms)

    @property
    def potential_max_odd_order(self):
        return _terms_max_odd_order(self.potential_terms)

    def all_terms_resummable(self) -> bool:
        """True when every term is cosh/cos (closed-form divergence applies)."""
        return all(
            isinstance(t, (CoshTerm, CosTerm))
            for t in self.kinetic_terms + self.potential_terms
        )


def hamiltonian_eval(hamiltonian: SeparableHamiltonian, x, k):
    """K(k) + V(x) summed over all terms."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))):
        raise ValueError("phase-space coordinates must be finite")
    value = hamiltonian.kinetic_value(k) + hamiltonian.potential_value(x)
    return float(value) if np.ndim(value) == 0 else value


def classical_velocity(hamiltonian: SeparableHamiltonian, x, k):
    """Classical phase-space velocity (ẋ, k̇) = (∂_k K, -∂_x V)."""
    vx = hamiltonian.kinetic_odd_derivative(1, k)
    vk = -hamiltonian.potential_odd_derivative(1, x)
    if np.ndim(vx) == 0 and np.ndim(vk) == 0:
        return float(vx), float(vk)
    return vx, vk


def harmonic_oscillator(mass: float = 1.0, angular_frequency: float = 1.0) -> SeparableHamiltonian:
    """k²/(2m) + mω²x²/2 — the quadratic reference system."""
    return SeparableHamiltonian(
        kinetic_terms=(MonomialTerm(0.5 / mass, 2),),
        potential_terms=(MonomialTerm(0.5 * mass * angular_frequency**2, 2),),
    )


@dataclass(frozen=True)
class UnitsMap:
    """Strictly positive (m, ω, ℏ) defining the dimensionless coordinate maps."""

    mass: float = 1.0
    angular_frequency: float = 1.0
    planck: float = 1.0

    def __post_init__(self):
        for name in ("mass", "angular_frequency", "planck"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def _x_scale(self) -> float:
        # x = sqrt(mω/ℏ) q
        return math.sqrt(self.mass * self.angular_frequency / self.planck)

    @property
    def _k_scale(self) -> float:
        # k = p / sqrt(mωℏ)
        return 1.0 / math.sqrt(self.mass * self.angular_frequency * self.planck)


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def to_dimensionless(q, p, units: UnitsMap):
    """(q, p) → (x, k) = ((mω/ℏ)^{1/2} q, (mωℏ)^{-1/2} p)."""
    x = units._x_scale * np.asarray(q, dtype=float)
    k = units._k_scale * np.asarray(p, dtype=float)
    return _scalar_or_array(x), _scalar_or_array(k)


def from_dimensionless(x, k, units: UnitsMap):
    """Inverse of `to_dimensionless`; round-trips to 1e-14 relative."""
    q = np.asarray(x, dtype=float) / units._x_scale
    p = np.asarray(k, dtype=float) / units._k_scale
    return _scalar_or_array(q), _scalar_or_array(p)
