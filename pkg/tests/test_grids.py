"""Grid numerics: transforms against direct-quadrature oracles, operator
shift identities, zero-mode residuals and sweeps."""

import math

import numpy as np
import pytest

from wignerflow.camouflage import replace_lambdas, simplified_params
from wignerflow.ensembles import GaussianEnsemble
from wignerflow.flow import (
    MaskedPointError,
    TruncationPolicy,
    is_masked,
    liouvillianity_quantifier,
    stationarity_quantifier,
)
from wignerflow.grids import (
    GridTooSmallError,
    PhaseSpaceGrid,
    PrecisionWarning,
    ResolutionError,
    Wavefunction,
    apply_kinetic,
    apply_operator_function,
    apply_potential,
    discrete_norm,
    field_sweep,
    squeezed_vacuum_wavefunction,
    wigner_transform,
    zero_mode_residual,
)
from wignerflow.hamiltonian import CoshTerm, CosTerm, SeparableHamiltonian, harmonic_oscillator

POLICY = TruncationPolicy()
SPECTRAL = PhaseSpaceGrid.spectral_default()


def test_grid_axes():
    grid = PhaseSpaceGrid(-8.0, 8.0, -4.0, 4.0, 32, 16)
    x = grid.x_axis()
    assert x[0] == -8.0 and len(x) == 32
    assert grid.dx == pytest.approx(0.5)
    X, K = grid.meshgrid()
    assert X.shape == (32, 16)
    with pytest.raises(ValueError):
        PhaseSpaceGrid(-8.0, 8.0, -8.0, 8.0, 8, 32)
    with pytest.raises(ValueError):
        PhaseSpaceGrid(8.0, -8.0, -8.0, 8.0, 32, 32)


def test_wavefunction_validation():
    grid = PhaseSpaceGrid(-12.0, 12.0, -12.0, 12.0, 64, 16)
    x = grid.x_axis()
    good = np.exp(-0.5 * x * x).astype(complex)
    good /= discrete_norm(good, grid.dx)
    Wavefunction(samples=good, grid=grid)
    with pytest.raises(ValueError, match="norm"):
        Wavefunction(samples=2.0 * good, grid=grid)


def test_squeezed_wavefunction_values():
    psi = squeezed_vacuum_wavefunction(0.0, SPECTRAL)
    x = SPECTRAL.x_axis()
    expected = math.pi**-0.25 * np.exp(-0.5 * x * x)
    np.testing.assert_allclose(psi.samples.real, expected, atol=1e-12)
    assert discrete_norm(psi.samples, SPECTRAL.dx) == pytest.approx(1.0, abs=1e-12)


def test_squeezed_wavefunction_variance():
    psi = squeezed_vacuum_wavefunction(0.5, SPECTRAL)
    x = SPECTRAL.x_axis()
    variance = float(np.sum(x * x * np.abs(psi.samples) ** 2) * SPECTRAL.dx)
    assert variance == pytest.approx(0.5 / math.e, abs=1e-8)


def test_wide_state_needs_wide_grid():
    with pytest.raises(GridTooSmallError):
        squeezed_vacuum_wavefunction(-0.8, SPECTRAL)
    wide = PhaseSpaceGrid(-20.0, 20.0, -6.0, 6.0, 2048, 16)
    squeezed_vacuum_wavefunction(-0.8, wide)


def test_position_momentum_round_trip():
    psi = squeezed_vacuum_wavefunction(0.3, SPECTRAL)
    back = np.fft.ifft(np.fft.fft(psi.samples))
    np.testing.assert_allclose(back, psi.samples, atol=1e-12)


# -- Wigner transform --------------------------------------------------------


def _direct_wigner_row(psi, grid, j):
    """Brute-force shift quadrature for one position row."""
    n, dx, half = psi.grid.nx, psi.grid.dx, psi.grid.nx // 2
    pad = np.zeros(3 * n, dtype=complex)
    pad[n : 2 * n] = psi.samples
    offs = np.arange(n) - half
    g = pad[n + j - offs] * np.conj(pad[n + j + offs])
    s = offs * dx
    ks = grid.k_axis()
    return (dx / math.pi) * (g[None, :] * np.exp(2j * ks[:, None] * s[None, :])).sum(axis=1)


def test_wigner_matches_direct_quadrature():
    grid = PhaseSpaceGrid(-10.0, 10.0, -5.0, 5.0, 64, 48)
    psi = squeezed_vacuum_wavefunction(0.0, grid)
    field = wigner_transform(psi, grid)
    for j in (0, 13, 32, 63):
        direct = _direct_wigner_row(psi, grid, j)
        np.testing.assert_allclose(field.values[j], direct.real, atol=1e-13)
        assert np.max(np.abs(direct.imag)) <= 1e-12


def test_wigner_matches_analytic_gaussian():
    for zeta in (-0.8, 0.0, 0.8):
        half_x = max(math.sqrt(60.0 / math.exp(2 * zeta)), 6.0)
        half_k = max(math.sqrt(60.0 / math.exp(-2 * zeta)), 6.0)
        grid = PhaseSpaceGrid(-half_x, half_x, -half_k, half_k, 1024, 256)
        psi = squeezed_vacuum_wavefunction(zeta, grid)
        field = wigner_transform(psi, grid)
        X, K = grid.meshgrid()
        target = GaussianEnsemble.squeezed(zeta).eval(X, K)
        assert np.max(np.abs(field.values - target)) <= 1e-8


def test_wigner_marginals_and_normalization():
    grid = PhaseSpaceGrid(-10.0, 10.0, -10.0, 10.0, 256, 256)
    psi = squeezed_vacuum_wavefunction(0.0, grid)
    field = wigner_transform(psi, grid)
    position = field.values.sum(axis=1) * grid.dk
    np.testing.assert_allclose(position, np.abs(psi.samples) ** 2, atol=1e-8)
    momentum = field.values.sum(axis=0) * grid.dx
    analytic = math.sqrt(1.0 / math.pi) * np.exp(-grid.k_axis() ** 2)
    np.testing.assert_allclose(momentum, analytic, atol=1e-8)
    assert field.values.sum() * grid.dx * grid.dk == pytest.approx(1.0, abs=1e-8)


def test_wigner_rejects_short_momentum_axis():
    grid = PhaseSpaceGrid(-10.0, 10.0, -1.0, 1.0, 128, 16)
    psi = squeezed_vacuum_wavefunction(0.0, grid)
    with pytest.raises(ResolutionError):
        wigner_transform(psi, grid)


def test_wigner_requires_shared_position_axis():
    psi = squeezed_vacuum_wavefunction(0.0, PhaseSpaceGrid(-10.0, 10.0, -5.0, 5.0, 128, 64))
    other = PhaseSpaceGrid(-9.0, 9.0, -5.0, 5.0, 128, 64)
    with pytest.raises(ValueError, match="position axis"):
        wigner_transform(psi, other)


# -- pseudospectral operators -------------------------------------------------


def test_harmonic_ground_state_eigenrelation():
    psi = squeezed_vacuum_wavefunction(0.0, SPECTRAL)
    out = apply_operator_function(harmonic_oscillator(), psi)
    residual = discrete_norm(out - 0.5 * psi.samples, SPECTRAL.dx)
    assert residual <= 1e-10


def test_cosh_momentum_shift_identity():
    # cosh(p̂)ψ₀ = [ψ₀(x-i) + ψ₀(x+i)]/2 = e^{1/2} cos(x) ψ₀(x)
    psi = squeezed_vacuum_wavefunction(0.0, SPECTRAL)
    H = SeparableHamiltonian(kinetic_terms=(CoshTerm(1.0, 1.0),))
    out = apply_kinetic(H, psi)
    expected = math.exp(0.5) * np.cos(SPECTRAL.x_axis()) * psi.samples
    assert np.max(np.abs(out - expected)) <= 1e-8


def test_cos_momentum_shift_identity():
    # cos(p̂)ψ₀ = [ψ₀(x+1) + ψ₀(x-1)]/2 = e^{-1/2} cosh(x) ψ₀(x)
    psi = squeezed_vacuum_wavefunction(0.0, SPECTRAL)
    H = SeparableHamiltonian(kinetic_terms=(CosTerm(1.0, 1.0),))
    out = apply_kinetic(H, psi)
    expected = math.exp(-0.5) * np.cosh(SPECTRAL.x_axis()) * psi.samples
    assert np.max(np.abs(out - expected)) <= 1e-8


def test_noise_amplification_warning():
    # cosh(3 p̂) on a momentum-broad state amplifies the spectral noise floor
    psi = squeezed_vacuum_wavefunction(0.9, SPECTRAL)
    H = SeparableHamiltonian(kinetic_terms=(CoshTerm(1.0, 3.0),))
    with pytest.warns(PrecisionWarning):
        apply_kinetic(H, psi)


def test_apply_potential_is_pointwise():
    psi = squeezed_vacuum_wavefunction(0.0, SPECTRAL)
    H = SeparableHamiltonian(potential_terms=(CosTerm(2.0, 1.5),))
    out = apply_potential(H, psi)
    np.testing.assert_allclose(out, 2.0 * np.cos(1.5 * SPECTRAL.x_axis()) * psi.samples)


# -- zero mode ----------------------------------------------------------------


def test_zero_mode_constrained():
    assert zero_mode_residual(simplified_params(0.0, 1.0), SPECTRAL) <= 1e-8


def test_zero_mode_perturbed():
    p = simplified_params(0.0, 1.0)
    perturbed = replace_lambdas(p, lambda2=p.lambda2 + 0.1)
    assert zero_mode_residual(perturbed, SPECTRAL) >= 1e-3


def test_zero_mode_nonzero_squeeze():
    grid = PhaseSpaceGrid(-12.0, 12.0, -12.0, 12.0, 2048, 16)
    assert zero_mode_residual(simplified_params(0.6, 2.0), grid) <= 1e-7


def test_zero_mode_resolution_convergence():
    # doubling the resolution drops the residual at least tenfold until the
    # 1e-8 floor (spectral states converge much faster than that in practice)
    params = simplified_params(0.0, 1.0)
    residuals = [
        zero_mode_residual(params, PhaseSpaceGrid(-12.0, 12.0, -12.0, 12.0, n, 16))
        for n in (32, 64, 128)
    ]
    for coarse, fine in zip(residuals, residuals[1:]):
        assert fine <= 1e-8 or coarse / fine >= 10.0
    assert residuals[-1] <= 1e-8


# -- sweeps -------------------------------------------------------------------


def test_field_sweep_constant():
    grid = PhaseSpaceGrid(-2.0, 2.0, -2.0, 2.0, 16, 16)
    field = field_sweep(lambda x, k: 3.5, grid)
    assert field.mask is None
    np.testing.assert_allclose(field.values, 3.5)


def test_field_sweep_stationarity():
    params = simplified_params(0.0, 1.0)
    W = params.ensemble()
    from wignerflow.camouflage import build_hamiltonian

    H = build_hamiltonian(params)
    grid = PhaseSpaceGrid(-5.0, 5.0, -5.0, 5.0, 16, 16)
    field = field_sweep(lambda x, k: stationarity_quantifier(W, H, x, k, POLICY), grid)
    assert field.max_abs() <= 1e-10


def test_field_sweep_masks_liouvillianity_tail():
    W = GaussianEnsemble.isotropic(1.0)
    H = SeparableHamiltonian(kinetic_terms=(CoshTerm(1.0, 1.0),))
    grid = PhaseSpaceGrid(-8.0, 8.0, -8.0, 8.0, 16, 16)
    field = field_sweep(lambda x, k: liouvillianity_quantifier(W, H, x, k, POLICY), grid)
    assert field.mask is not None
    expected_mask = is_masked(W, *grid.meshgrid())
    np.testing.assert_array_equal(field.mask, expected_mask)
    assert np.all(np.isnan(field.values[field.mask]))
    assert np.all(np.isfinite(field.values[~field.mask]))


def test_field_sweep_zero_for_quadratic():
    W = GaussianEnsemble.isotropic(1.0)
    H = harmonic_oscillator()
    grid = PhaseSpaceGrid(-4.0, 4.0, -4.0, 4.0, 16, 16)
    field = field_sweep(lambda x, k: liouvillianity_quantifier(W, H, x, k, POLICY), grid)
    assert field.max_abs() == 0.0
