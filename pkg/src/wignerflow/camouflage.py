"""Stationary squeezed-gaussian construction for cosh/cos Hamiltonians.

The Hamiltonian family

    V(x) = λ₁ cosh(ν₁ x) + λ₂ cos(ν₂ x)
    K(k) = γ₁ cosh(μ₁ k) + γ₂ cos(μ₂ k)

admits, under the frequency locking  μ₁ = e^{-2ζ} ν₂  and  μ₂ = e^{-2ζ} ν₁,
a closed-form Wigner-flow divergence against the squeezed gaussian G_ζ:

    ∇·J = +2 [ sin(μ₂k) sinh(ν₁x) (γ₂ e^{-ν₁μ₂/4} + λ₁ e^{+ν₁μ₂/4})
             - sinh(μ₁k) sin(ν₂x) (γ₁ e^{+ν₂μ₁/4} + λ₂ e^{-ν₂μ₁/4}) ] G_ζ(x,k)

Solving both bracket coefficients to zero,

    λ₂ = -γ₁ e^{+ν₂μ₁/2},    λ₁ = -γ₂ e^{-ν₁μ₂/2},

makes the quantum flow exactly stationary: every ℏ²η correction conspires to
cancel, and the gaussian is indistinguishable — by stationarity alone — from
a classical equilibrium ensemble of its matched quadratic oscillator.  The
certificate below verifies that claim three independent ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ensembles import GaussianEnsemble
from .flow import (
    TruncationPolicy,
    _series_engine,
    div_j_closed_form,
    matched_classical_hamiltonian,
)
from .hamiltonian import CoshTerm, CosTerm, SeparableHamiltonian

# Beyond |ζ| = 1.5 the default grids under-resolve the e^{2|ζ|} oscillations;
# callers supplying adequately fine grids may lift the guard explicitly.
SQUEEZE_BOUND = 1.5

_CONSTRAINT_RTOL = 1e-12


@dataclass(frozen=True)
class CamouflageParams:
    """(ζ, γ₁, γ₂, ν₁, ν₂) with the derived (μ₁, μ₂, λ₁, λ₂)."""

    zeta: float
    gamma1: float
    gamma2: float
    nu1: float
    nu2: float
    mu1: float
    mu2: float
    lambda1: float
    lambda2: float

    def ensemble(self) -> GaussianEnsemble:
        """The squeezed gaussian this parameter set is built around."""
        return GaussianEnsemble.squeezed(self.zeta)

    def frequency_constraint_holds(self) -> bool:
        s = math.exp(-2.0 * self.zeta)
        return math.isclose(
            self.mu1, s * self.nu2, rel_tol=_CONSTRAINT_RTOL
        ) and math.isclose(self.mu2, s * self.nu1, rel_tol=_CONSTRAINT_RTOL)

    def amplitude_constraint_holds(self) -> bool:
        l2 = -self.gamma1 * math.exp(+0.5 * self.nu2 * self.mu1)
        l1 = -self.gamma2 * math.exp(-0.5 * self.nu1 * self.mu2)
        return math.isclose(self.lambda2, l2, rel_tol=_CONSTRAINT_RTOL) and math.isclose(
            self.lambda1, l1, rel_tol=_CONSTRAINT_RTOL
        )


def solve_constraints(
    zeta: float,
    gamma1: float,
    gamma2: float,
    nu1: float,
    nu2: float,
    *,
    enforce_squeeze_bound: bool = True,
) -> CamouflageParams:
    """Derive (μ₁, μ₂, λ₁, λ₂) so the flow divergence vanishes identically."""
    for name, value in (("nu1", nu1), ("nu2", nu2)):
        if not (math.isfinite(value) and value > 0.0):
            raise ValueError(f"{name} must be a positive frequency, got {value!r}")
    if not math.isfinite(zeta):
        raise ValueError(f"zeta must be finite, got {zeta!r}")
    if enforce_squeeze_bound and abs(zeta) > SQUEEZE_BOUND:
        raise ValueError(
            f"|zeta| = {abs(zeta):g} exceeds the resolvability bound {SQUEEZE_BOUND:g}; "
            "supply a finer grid and lift the bound explicitly"
        )
    s = math.exp(-2.0 * zeta)
    mu1 = s * nu2
    mu2 = s * nu1
    return CamouflageParams(
        zeta=zeta,
        gamma1=float(gamma1),
        gamma2=float(gamma2),
        nu1=float(nu1),
        nu2=float(nu2),
        mu1=mu1,
        mu2=mu2,
        lambda1=-gamma2 * math.exp(-0.5 * nu1 * mu2),
        lambda2=-gamma1 * math.exp(+0.5 * nu2 * mu1),
    )


def simplified_params(zeta: float, gamma: float, **kwargs) -> CamouflageParams:
    """One-knob family: V = -e^{-e^{-2ζ}/2} cosh(x) - γ cos(e^{2ζ}x),
    K = +γ e^{-e^{2ζ}/2} cosh(k) + cos(e^{-2ζ}k)."""
    return solve_constraints(
        zeta,
        gamma1=gamma * math.exp(-0.5 * math.exp(2.0 * zeta)),
        gamma2=1.0,
        nu1=1.0,
        nu2=math.exp(2.0 * zeta),
        **kwargs,
    )


def replace_lambdas(params: CamouflageParams, lambda1=None, lambda2=None) -> CamouflageParams:
    """Copy with overridden potential amplitudes (the μ locking stays intact)."""
    changes = {}
    if lambda1 is not None:
        changes["lambda1"] = float(lambda1)
    if lambda2 is not None:
        changes["lambda2"] = float(lambda2)
    return replace(params, **changes)


def build_hamiltonian(params: CamouflageParams) -> SeparableHamiltonian:
    """The four-term cosh/cos Hamiltonian for a parameter set."""
    return SeparableHamiltonian(
        kinetic_terms=(
            CoshTerm(params.gamma1, params.mu1),
            CosTerm(params.gamma2, params.mu2),
        ),
        potential_terms=(
            CoshTerm(params.lambda1, params.nu1),
            CosTerm(params.lambda2, params.nu2),
        ),
    )


def camouflage_divergence(params: CamouflageParams, x, k, *, lambda1=None, lambda2=None):
    """∇·J from the literal two-bracket closed form.

    The frequency locking μ = e^{-2ζ}ν is a precondition (the form is derived
    under it); λ overrides are accepted because breaking only the amplitude
    solution is exactly what the necessity checks do.
    """
    if not params.frequency_constraint_holds():
        raise ValueError(
            "frequency constraint mu = exp(-2 zeta) nu violated; the closed-form "
            "divergence does not apply (use the series path)"
        )
    l1 = params.lambda1 if lambda1 is None else float(lambda1)
    l2 = params.lambda2 if lambda2 is None else float(lambda2)
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    coeff1 = params.gamma2 * math.exp(-0.25 * params.nu1 * params.mu2) + l1 * math.exp(
        +0.25 * params.nu1 * params.mu2
    )
    coeff2 = params.gamma1 * math.exp(+0.25 * params.nu2 * params.mu1) + l2 * math.exp(
        -0.25 * params.nu2 * params.mu1
    )
    bracket = np.sin(params.mu2 * k) * np.sinh(params.nu1 * x) * coeff1 - np.sinh(
        params.mu1 * k
    ) * np.sin(params.nu2 * x) * coeff2
    value = 2.0 * bracket * params.ensemble().eval(x, k)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class CamouflageCertificate:
    """Three-way stationarity verdict over a grid, with the classical contrast."""

    certified: bool
    tolerance: float
    bracket_max: float
    bracket_argmax: tuple
    closed_form_max: float
    closed_form_argmax: tuple
    series_max: float
    series_argmax: tuple
    series_terms_used: int
    series_converged: bool
    series_nonconverged_fraction: float
    matched_classical_max: float
    hamiltonian_classical_max: float

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "tolerance": self.tolerance,
            "bracket_max": self.bracket_max,
            "bracket_argmax_x": self.bracket_argmax[0],
            "bracket_argmax_k": self.bracket_argmax[1],
            "closed_form_max": self.closed_form_max,
            "closed_form_argmax_x": self.closed_form_argmax[0],
            "closed_form_argmax_k": self.closed_form_argmax[1],
            "series_max": self.series_max,
            "series_argmax_x": self.series_argmax[0],
            "series_argmax_k": self.series_argmax[1],
            "series_terms_used": self.series_terms_used,
            "series_converged": self.series_converged,
            "series_nonconverged_fraction": self.series_nonconverged_fraction,
            "matched_classical_max": self.matched_classical_max,
            "hamiltonian_classical_max": self.hamiltonian_classical_max,
        }


def _grid_max(values, X, K):
    idx = int(np.argmax(np.abs(values)))
    flat_x = np.ravel(X)[idx]
    flat_k = np.ravel(K)[idx]
    return float(np.abs(np.ravel(values)[idx])), (float(flat_x), float(flat_k))


def stationarity_certificate(
    params: CamouflageParams,
    grid,
    policy: TruncationPolicy = TruncationPolicy(),
    tolerance: float = 1e-10,
) -> CamouflageCertificate:
    """Verify ∇·J = 0 over a grid by three independent evaluation paths.

    (i) the literal bracket form, (ii) the generating-function resummation on
    the built Hamiltonian, (iii) the truncated series.  The report also
    carries the classical divergences: the matched quadratic oscillator's
    (which stationarity camouflages the ensemble as) and the cosh/cos
    Hamiltonian's own Liouville divergence, whose non-vanishing shows the
    stationarity is a genuinely quantum cancellation.  Certification requires
    the three quantum maxima and the matched classical maximum at or below
    tolerance with a converged series.
    """
    violation = grid_density_violation(params, grid)
    if violation is not None:
        raise ValueError(violation)
    X, K = grid.meshgrid()
    W = params.ensemble()
    H = build_hamiltonian(params)

    bracket = camouflage_divergence(params, X, K)
    closed = div_j_closed_form(W, H, X, K)

    djx, diag_x, mask_x = _series_engine(W, H, X, K, policy, "div_jx")
    djk, diag_k, mask_k = _series_engine(W, H, X, K, policy, "div_jk")
    series = djx + djk
    series_converged = diag_x.converged and diag_k.converged
    nonconverged = float(np.mean(~(mask_x & mask_k)))

    classical = matched_classical_hamiltonian(W)
    cl_x, _, _ = _series_engine(W, classical, X, K, policy, "div_jx")
    cl_k, _, _ = _series_engine(W, classical, X, K, policy, "div_jk")
    matched_max = float(np.max(np.abs(cl_x + cl_k)))

    # the Hamiltonian's own classical (η=0) divergence, for contrast
    h_cl = _classical_divergence(W, H, X, K)

    bracket_max, bracket_arg = _grid_max(bracket, X, K)
    closed_max, closed_arg = _grid_max(closed, X, K)
    series_max, series_arg = _grid_max(series, X, K)

    certified = (
        bracket_max <= tolerance
        and closed_max <= tolerance
        and series_max <= tolerance
        and matched_max <= tolerance
        and series_converged
    )
    return CamouflageCertificate(
        certified=certified,
        tolerance=tolerance,
        bracket_max=bracket_max,
        bracket_argmax=bracket_arg,
        closed_form_max=closed_max,
        closed_form_argmax=closed_arg,
        series_max=series_max,
        series_argmax=series_arg,
        series_terms_used=max(diag_x.terms_used, diag_k.terms_used),
        series_converged=series_converged,
        series_nonconverged_fraction=nonconverged,
        matched_classical_max=matched_max,
        hamiltonian_classical_max=float(np.max(np.abs(h_cl))),
    )


def _classical_divergence(W, H, x, k):
    """η = 0 divergence  (∂_k K) ∂_x W - (∂_x V) ∂_k W."""
    return H.kinetic_odd_derivative(1, k) * W.partial(1, 0, x, k) - H.potential_odd_derivative(
        1, x
    ) * W.partial(0, 1, x, k)


MIN_POINTS_PER_OSCILLATION = 8


def grid_density_violation(params: CamouflageParams, grid) -> str | None:
    """Message naming the violated sampling bound, or None when resolved.

    The cos/cosh frequencies scale like e^{±2ζ}; each axis must sample the
    fastest oscillation with at least MIN_POINTS_PER_OSCILLATION points.
    """
    nu_max = max(abs(params.nu1), abs(params.nu2))
    mu_max = max(abs(params.mu1), abs(params.mu2))
    dx_required = 2.0 * math.pi / (MIN_POINTS_PER_OSCILLATION * nu_max)
    dk_required = 2.0 * math.pi / (MIN_POINTS_PER_OSCILLATION * mu_max)
    if grid.dx > dx_required:
        return (
            f"grid dx = {grid.dx:.4g} under-resolves the potential frequency "
            f"{nu_max:.4g} (zeta = {params.zeta:g}): need dx <= {dx_required:.4g} "
            f"for {MIN_POINTS_PER_OSCILLATION} points per oscillation"
        )
    if grid.dk > dk_required:
        return (
            f"grid dk = {grid.dk:.4g} under-resolves the kinetic frequency "
            f"{mu_max:.4g} (zeta = {params.zeta:g}): need dk <= {dk_required:.4g} "
            f"for {MIN_POINTS_PER_OSCILLATION} points per oscillation"
        )
    return None
