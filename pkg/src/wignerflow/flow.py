"""Wigner flow engine: quantum currents, stationarity and Liouvillianity.

For a separable H(x,k) = K(k) + V(x) and a Wigner function W the currents
carry an infinite quantum-correction series (dimensionless units, ℏ → 1):

    J_x = +Σ_η (i/2)^{2η} (2η+1)!^{-1} [∂_k^{2η+1}K] ∂_x^{2η} W
    J_k = -Σ_η (i/2)^{2η} (2η+1)!^{-1} [∂_x^{2η+1}V] ∂_k^{2η} W

The η = 0 truncation is the classical Liouville flow; (i/2)^{2η} = (-1)^η/4^η
is carried as a real sign throughout, never as complex arithmetic.  The
stationarity quantifier is ∇·J = ∂_x J_x + ∂_k J_k = -∂_t W, evaluated here
term by term from exact gaussian partials, or resummed in closed form through
the odd Hermite generating function when every Hamiltonian term is cosh/cos.

The Liouvillianity quantifier ∇·w, with w = J/W, starts at η = 1 and captures
only the quantum distortion of the flow velocity; for gaussian W the inner
factors ∂_u[(1/W)∂_u^{2η}W] are exact Hermite polynomials, so no division by
W ever happens.  Points in the deep tail (W below a relative floor) are
reported as masked rather than computed.

All operations accept scalar or ndarray coordinates; diagnostics then
describe the batch (worst point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import GaussianEnsemble
from .hamiltonian import (
    CoshTerm,
    CosTerm,
    MonomialTerm,
    SeparableHamiltonian,
)
from .hermite import hermite_eval, odd_hermite_generating

# w = J/W is meaningless where W is tail noise; such points are masked.
MASK_RELATIVE_FLOOR = 1e-12


class MaskedPointError(Exception):
    """Raised when a 1/W-weighted quantity is requested in the masked tail."""


class UnsupportedTermError(ValueError):
    """Raised when the closed-form path meets a non-resummable term."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Series truncation control: hard η cap plus per-term tolerances."""

    eta_max: int = 30
    term_rel_tol: float = 1e-14
    term_abs_tol: float = 1e-300

    def __post_init__(self):
        if self.eta_max < 1:
            raise ValueError(f"eta_max must be >= 1, got {self.eta_max}")
        if self.term_rel_tol <= 0.0 or self.term_abs_tol <= 0.0:
            raise ValueError("truncation tolerances must be positive")


@dataclass(frozen=True)
class FlowDiagnostics:
    """What the series evaluation actually did (worst point of the batch)."""

    terms_used: int
    last_term_magnitude: float
    converged: bool


def _w_value(W, x, k):
    if hasattr(W, "eval"):
        return W.eval(x, k)
    return W(x, k)


# ---------------------------------------------------------------------------
# Series engine
# ---------------------------------------------------------------------------

# (side, derivative order offset on W): the four series ops share one loop.
_KINDS = {
    "current_x": ("kinetic", 0, +1.0),
    "current_k": ("potential", 0, -1.0),
    "div_jx": ("kinetic", 1, +1.0),
    "div_jk": ("potential", 1, -1.0),
}


def _series_engine(W, H, x, k, policy, kind):
    """Shared accumulation loop for currents and divergence contributions.

    Returns (values, FlowDiagnostics, converged_mask).  A point counts as
    converged once two consecutive terms fall below tolerance (consecutive
    Hermite polynomials share no zeros, so a single small term can be a node
    coincidence); exhausting an identically-zero tail converges exactly.
    """
    side, w_offset, sign = _KINDS[kind]
    x, k = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(k, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    k = np.atleast_1d(k)

    if side == "kinetic":
        max_odd = H.kinetic_max_odd_order
        h_deriv = lambda order: H.kinetic_odd_derivative(order, k)
        w_partial = lambda order: W.partial(order, 0, x, k)
    else:
        max_odd = H.potential_max_odd_order
        h_deriv = lambda order: H.potential_odd_derivative(order, x)
        w_partial = lambda order: W.partial(0, order, x, k)

    acc = np.zeros(x.shape)
    scale = np.zeros(x.shape)
    small_prev = np.zeros(x.shape, dtype=bool)
    converged_mask = np.ones(x.shape, dtype=bool)
    terms_used = 0
    last_mag = 0.0
    exhausted = True

    coeff = 1.0  # (-1)^η / (4^η (2η+1)!)
    for eta in range(policy.eta_max + 1):
        order = 2 * eta + 1
        if max_odd is not None and order > max_odd:
            break  # remaining terms identically zero: exact truncation
        term = sign * coeff * h_deriv(order) * w_partial(2 * eta + w_offset)
        acc = acc + term
        terms_used = eta + 1
        abs_term = np.abs(term)
        last_mag = float(np.max(abs_term))
        scale = np.maximum(scale, np.maximum(np.abs(acc), abs_term))
        small = abs_term <= np.maximum(policy.term_abs_tol, policy.term_rel_tol * scale)
        converged_mask = small & small_prev
        if eta >= 1 and bool(np.all(converged_mask)):
            break
        small_prev = small
        coeff *= -1.0 / (4.0 * (order + 1) * (order + 2))
    else:
        exhausted = False

    if exhausted and not bool(np.all(converged_mask)):
        # loop ended by structural exhaustion or tolerance; either is exact
        converged_mask = np.ones(x.shape, dtype=bool)

    diag = FlowDiagnostics(
        terms_used=terms_used,
        last_term_magnitude=last_mag,
        converged=bool(np.all(converged_mask)),
    )
    if scalar:
        return float(acc[0]), diag, converged_mask
    return acc, diag, converged_mask


def _series_term(W, H, eta, x, k, kind):
    """Single η-term of a series op (the η = 0 term is the classical piece)."""
    side, w_offset, sign = _KINDS[kind]
    coeff = 1.0
    for j in range(eta):
        coeff *= -1.0 / (4.0 * (2 * j + 2) * (2 * j + 3))
    order = 2 * eta + 1
    if side == "kinetic":
        return sign * coeff * H.kinetic_odd_derivative(order, k) * W.partial(2 * eta + w_offset, 0, x, k)
    return sign * coeff * H.potential_odd_derivative(order, x) * W.partial(0, 2 * eta + w_offset, x, k)


def current_x_series(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """x-current J_x at (x, k), truncated per policy.  Returns (value, diagnostics)."""
    value, diag, _ = _series_engine(W, H, x, k, policy, "current_x")
    return value, diag


def current_k_series(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """k-current J_k at (x, k), truncated per policy.  Returns (value, diagnostics)."""
    value, diag, _ = _series_engine(W, H, x, k, policy, "current_k")
    return value, diag


def div_jx_series(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """x-divergence contribution ∂_x J_x (odd W-derivatives).  Returns (value, diagnostics)."""
    value, diag, _ = _series_engine(W, H, x, k, policy, "div_jx")
    return value, diag


def div_jk_series(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """k-divergence contribution ∂_k J_k.  Returns (value, diagnostics)."""
    value, diag, _ = _series_engine(W, H, x, k, policy, "div_jk")
    return value, diag


def stationarity_quantifier(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """∇·J = ∂_x J_x + ∂_k J_k = -∂_t W; zero marks a stationary point.

    Use the underlying div_jx_series/div_jk_series when the truncation
    diagnostics are needed alongside the value.
    """
    dx_val, _, _ = _series_engine(W, H, x, k, policy, "div_jx")
    dk_val, _, _ = _series_engine(W, H, x, k, policy, "div_jk")
    return dx_val + dk_val


def classical_currents(W, H, x, k):
    """Liouville currents (J_x, J_k) = ((∂_k K) W, -(∂_x V) W).

    Identical to the η = 0 truncation of the series currents for every H.
    `W` may be a GaussianEnsemble or any point-evaluable callable.
    """
    w = _w_value(W, x, k)
    jx = H.kinetic_odd_derivative(1, k) * w
    jk = -H.potential_odd_derivative(1, x) * w
    if np.ndim(jx) == 0 and np.ndim(jk) == 0:
        return float(jx), float(jk)
    return jx, jk


# ---------------------------------------------------------------------------
# Closed-form divergence (cosh/cos Hamiltonians only)
# ---------------------------------------------------------------------------


def _term_closed_contribution(term, carrier_u, gauss_exp, gauss_u):
    """One term's resummed divergence factor, via the odd generating function.

    For ∂_u^{2η+1}(term) = scaleᵘ·carrier(u) the series over η collapses to
    2i·carrier(u)·S(i·scale·√g/2, √g·u') with S the odd Hermite generating
    function, g the gaussian exponent along u' and carrier evaluated on the
    conjugate axis.  cos terms enter with imaginary scale and carrier, which
    keeps every product exactly real.
    """
    root_g = math.sqrt(gauss_exp)
    if isinstance(term, CoshTerm):
        carrier = term.amplitude * np.sinh(term.frequency * carrier_u)
        t = 1j * term.frequency * root_g / 2.0
    elif isinstance(term, CosTerm):
        carrier = 1j * term.amplitude * np.sin(term.frequency * carrier_u)
        t = -term.frequency * root_g / 2.0
    else:
        raise UnsupportedTermError(
            f"closed-form divergence supports cosh/cos terms only, got {type(term).__name__}; "
            "use the series path for monomials"
        )
    return 2j * carrier * odd_hermite_generating(t, root_g * gauss_u)


def div_j_closed_form(W: GaussianEnsemble, H: SeparableHamiltonian, x, k):
    """Exact resummed ∇·J for Hamiltonians built solely from cosh/cos terms.

    No truncation error; raises UnsupportedTermError on monomial terms and
    OverflowError when a term/ensemble pairing pushes e^{s²} out of range.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    total = np.zeros(np.broadcast_shapes(x.shape, k.shape), dtype=complex)
    for term in H.kinetic_terms:
        total = total + _term_closed_contribution(term, carrier_u=k, gauss_exp=W.a, gauss_u=x)
    for term in H.potential_terms:
        total = total - _term_closed_contribution(term, carrier_u=x, gauss_exp=W.b, gauss_u=k)
    value = total.real * W.eval(x, k)
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# Liouvillianity
# ---------------------------------------------------------------------------


def is_masked(W: GaussianEnsemble, x, k):
    """True where W is below the relative floor for 1/W-weighted quantities."""
    w = W.eval(x, k)
    return w < MASK_RELATIVE_FLOOR * W.peak_value


def _liouvillianity_raw(W, H, x, k, policy):
    """∇·w series from exact gaussian identities; no masking, no division.

    The inner factors are ∂_u[(1/W)∂_u^{2η}W] = 4η g^{η+1/2} H_{2η-1}(√g u)
    per axis, so the quotient of the defining identity never appears.
    """
    x, k = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(k, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    k = np.atleast_1d(k)

    kin_max = H.kinetic_max_odd_order
    pot_max = H.potential_max_odd_order
    ra, rb = math.sqrt(W.a), math.sqrt(W.b)

    acc = np.zeros(x.shape)
    scale = np.zeros(x.shape)
    small_prev = np.zeros(x.shape, dtype=bool)
    converged_mask = np.ones(x.shape, dtype=bool)
    terms_used = 0
    last_mag = 0.0
    exhausted = True

    coeff = -1.0 / (4.0 * 6.0)  # (-1)^η/(4^η (2η+1)!) at η = 1
    for eta in range(1, policy.eta_max + 1):
        order = 2 * eta + 1
        kin_dead = kin_max is not None and order > kin_max
        pot_dead = pot_max is not None and order > pot_max
        if kin_dead and pot_dead:
            break
        term = np.zeros(x.shape)
        if not kin_dead:
            p_x = 4.0 * eta * W.a**eta * ra * hermite_eval(order - 2, ra * x)
            term = term + H.kinetic_odd_derivative(order, k) * p_x
        if not pot_dead:
            p_k = 4.0 * eta * W.b**eta * rb * hermite_eval(order - 2, rb * k)
            term = term - H.potential_odd_derivative(order, x) * p_k
        term = coeff * term
        acc = acc + term
        terms_used += 1
        abs_term = np.abs(term)
        last_mag = float(np.max(abs_term))
        scale = np.maximum(scale, np.maximum(np.abs(acc), abs_term))
        small = abs_term <= np.maximum(policy.term_abs_tol, policy.term_rel_tol * scale)
        converged_mask = small & small_prev
        if eta >= 2 and bool(np.all(converged_mask)):
            break
        small_prev = small
        coeff *= -1.0 / (4.0 * (order + 1) * (order + 2))
    else:
        exhausted = False

    if exhausted and not bool(np.all(converged_mask)):
        converged_mask = np.ones(x.shape, dtype=bool)

    diag = FlowDiagnostics(
        terms_used=terms_used,
        last_term_magnitude=last_mag,
        converged=bool(np.all(converged_mask)),
    )
    if scalar:
        return float(acc[0]), diag
    return acc, diag


def liouvillianity_series(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """∇·w with truncation diagnostics; raises MaskedPointError in the tail."""
    if np.any(is_masked(W, x, k)):
        raise MaskedPointError(
            f"W below {MASK_RELATIVE_FLOOR:g} of its peak at the requested point(s); "
            "the phase-space velocity is tail noise there"
        )
    return _liouvillianity_raw(W, H, x, k, policy)


def liouvillianity_quantifier(W, H, x, k, policy: TruncationPolicy = TruncationPolicy()):
    """∇·w, the quantum (non-Liouvillian) distortion of the flow velocity.

    Identically zero for quadratic Hamiltonians (the η ≥ 1 series is empty).
    """
    value, _ = liouvillianity_series(W, H, x, k, policy)
    return value


def matched_classical_hamiltonian(W: GaussianEnsemble) -> SeparableHamiltonian:
    """Quadratic Hamiltonian whose classical Liouville flow leaves W stationary.

    K = b k²/2, V = a x²/2 gives {H, W} = 0 pointwise: the ensemble is
    indistinguishable, by stationarity alone, from a classical ensemble of
    this oscillator.
    """
    return SeparableHamiltonian(
        kinetic_terms=(MonomialTerm(0.5 * W.b, 2),),
        potential_terms=(MonomialTerm(0.5 * W.a, 2),),
    )
