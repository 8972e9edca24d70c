"""Grid numerics: wavefunction sampling, Wigner transform, spectral operators.

Conventions (dimensionless, ℏ = 1):

  * uniform grids sample cell left edges, x_j = x_min + j·dx with
    dx = (x_max - x_min)/nx, so discrete sums ·dx are the periodic trapezoid
    rule — spectrally accurate for tail-contained gaussians;
  * the momentum operator is p̂ = -i d/dx, applied pseudospectrally with the
    angular FFT frequencies;
  * the Wigner function of a pure state is
        W(x,k) = (1/π) ∫ds e^{2iks} ψ(x-s) ψ*(x+s),
    evaluated by quadrature over the shift s on the position grid, with the
    chirp-z form of the FFT along s so the output lands exactly on the
    requested k axis.

Functions of the momentum operator are applied only on the measured spectral
band of ψ: multipliers like cosh(k) grow exponentially toward the grid edge
where the true spectrum has underflowed and only FFT roundoff remains, and
amplifying that noise (≈1e-16 relative, times cosh of the Nyquist frequency)
would obliterate the result.  Band-limiting at the noise floor is therefore
not an optimization but a correctness requirement; the precision warning
reports whatever amplified noise survives inside the band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .flow import MaskedPointError
from .hamiltonian import SeparableHamiltonian

# relative wavefunction magnitude allowed at the grid edge
TAIL_CONTAINMENT_REL = 1e-10
# spectral coefficients below this (relative to peak) are FFT roundoff
SPECTRAL_FLOOR_REL = 1e-15
# amplified in-band noise above this fraction of the output norm is reported
NOISE_WARN_REL = 1e-8


class GridTooSmallError(ValueError):
    """The grid does not contain the wavefunction's tails."""


class ResolutionError(RuntimeError):
    """Aliasing detected: transform marginals disagree with the state."""


class PrecisionWarning(UserWarning):
    """Momentum-space amplification of grid-edge noise is non-negligible."""


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform rectangular phase-space sampling (powers of two preferred)."""

    x_min: float
    x_max: float
    k_min: float
    k_max: float
    nx: int
    nk: int

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.k_max > self.k_min):
            raise ValueError("grid bounds must satisfy x_max > x_min and k_max > k_min")
        if self.nx < 16 or self.nk < 16:
            raise ValueError("grids need at least 16 points per axis")

    @classmethod
    def default(cls) -> "PhaseSpaceGrid":
        return cls(-8.0, 8.0, -8.0, 8.0, 256, 256)

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseSpaceGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @classmethod
    def spectral_default(cls) -> "PhaseSpaceGrid":
        """Wavefunction/operator work wants the finer 1-d position axis."""
        return cls(-12.0, 12.0, -12.0, 12.0, 2048, 16)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / self.nk

    def x_axis(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.nx)

    def k_axis(self) -> np.ndarray:
        return self.k_min + self.dk * np.arange(self.nk)

    def meshgrid(self):
        return np.meshgrid(self.x_axis(), self.k_axis(), indexing="ij")


@dataclass(frozen=True)
class ScalarField:
    """Real values on a grid; masked nodes are flagged, never zeroed."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.nk):
            raise ValueError("field dimensions must match the grid")
        if self.mask is not None and self.mask.shape != self.values.shape:
            raise ValueError("mask dimensions must match the values")

    def max_abs(self) -> float:
        if self.mask is not None and self.mask.any():
            values = np.where(self.mask, 0.0, self.values)
            return float(np.max(np.abs(values)))
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class VectorField:
    """Per-node (x, k) vector values on a grid."""

    grid: PhaseSpaceGrid
    x_values: np.ndarray
    k_values: np.ndarray

    def __post_init__(self):
        shape = (self.grid.nx, self.grid.nk)
        if self.x_values.shape != shape or self.k_values.shape != shape:
            raise ValueError("field dimensions must match the grid")


@dataclass(frozen=True)
class Wavefunction:
    """Complex samples on the position axis of a grid, unit discrete norm."""

    samples: np.ndarray
    grid: PhaseSpaceGrid

    def __post_init__(self):
        if self.samples.shape != (self.grid.nx,):
            raise ValueError("samples must live on the grid's position axis")
        norm = discrete_norm(self.samples, self.grid.dx)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"wavefunction norm {norm!r} is not 1 within 1e-10")
        peak = float(np.max(np.abs(self.samples)))
        edge = float(max(abs(self.samples[0]), abs(self.samples[-1])))
        if edge > TAIL_CONTAINMENT_REL * peak:
            raise GridTooSmallError(
                f"edge magnitude {edge:.3e} exceeds {TAIL_CONTAINMENT_REL:g} of the "
                f"peak {peak:.3e}: widen the position grid"
            )


def discrete_norm(samples: np.ndarray, dx: float) -> float:
    return math.sqrt(float(np.sum(np.abs(samples) ** 2)) * dx)


def squeezed_vacuum_wavefunction(zeta: float, grid: PhaseSpaceGrid) -> Wavefunction:
    """ψ_ζ(x) = (e^{2ζ}/π)^{1/4} exp(-e^{2ζ} x²/2), grid-normalized.

    Its Wigner transform is the squeezed gaussian ensemble with the same ζ —
    validated against the transform, not assumed.
    """
    if not math.isfinite(zeta):
        raise ValueError(f"squeeze parameter must be finite, got {zeta!r}")
    c = math.exp(2.0 * zeta)
    x = grid.x_axis()
    samples = (c / math.pi) ** 0.25 * np.exp(-0.5 * c * x * x)
    samples = samples.astype(complex) / discrete_norm(samples, grid.dx)
    return Wavefunction(samples=samples, grid=grid)


# ---------------------------------------------------------------------------
# Wigner transform
# ---------------------------------------------------------------------------


def wigner_transform(psi: Wavefunction, grid: PhaseSpaceGrid) -> ScalarField:
    """Wigner function of a pure state on the given phase-space grid.

    The output grid must share the state's position axis; its momentum axis
    is free (the chirp-z transform evaluates the shift quadrature at exactly
    those k values).  Raises ResolutionError when the transform's marginals
    no longer reproduce |ψ|² — the aliasing signature.
    """
    pg = psi.grid
    if (grid.x_min, grid.x_max, grid.nx) != (pg.x_min, pg.x_max, pg.nx):
        raise ValueError("output grid must share the wavefunction's position axis")
    n = pg.nx
    dx = pg.dx
    half = n // 2

    padded = np.zeros(3 * n, dtype=complex)
    padded[n : 2 * n] = psi.samples
    j = np.arange(n)[:, None]
    off = np.arange(n)[None, :] - half  # s = off·dx
    g = padded[n + j - off] * np.conj(padded[n + j + off])

    k_axis = grid.k_axis()
    w = np.exp(2j * grid.dk * dx)
    a = np.exp(-2j * grid.k_min * dx)
    spectrum = czt(g, m=grid.nk, w=w, a=a, axis=1)
    spectrum *= np.exp(-2j * k_axis * half * dx)[None, :]
    values = spectrum * (dx / math.pi)

    imag_residue = float(np.max(np.abs(values.imag)))
    real = np.ascontiguousarray(values.real)
    scale = float(np.max(np.abs(real)))
    if imag_residue > 1e-10 * max(scale, 1.0):
        raise ResolutionError(
            f"Wigner transform imaginary residue {imag_residue:.3e} is non-negligible"
        )

    marginal_x = real.sum(axis=1) * grid.dk
    target = np.abs(psi.samples) ** 2
    mismatch = float(np.max(np.abs(marginal_x - target)))
    if mismatch > 1e-6:
        raise ResolutionError(
            f"position marginal mismatch {mismatch:.3e}: momentum axis too short "
            "or too coarse for this state"
        )
    return ScalarField(grid=grid, values=real)


# ---------------------------------------------------------------------------
# Pseudospectral operator application
# ---------------------------------------------------------------------------


_BAND_BLOCKS = 64


def _spectral_band(phi: np.ndarray, k: np.ndarray, multiplier: np.ndarray):
    """Band limiting the multiplied spectrum at its optimal truncation point.

    Beyond the state's true bandwidth, |φ| carries only roundoff and
    tail-truncation ringing, which exponential multipliers blow up; inside
    it, cutting discards real content.  Both errors are controlled at once by
    cutting where the envelope of |multiplier|·|φ| is smallest.  The envelope
    is taken over coarse |k| blocks (so nulls of either factor cannot fake a
    minimum), with the multiplier replaced by its inside-out running maximum
    to keep it monotone.

    Returns (band mask, per-mode noise bound at the cut, cut is interior).
    """
    absk = np.abs(k)
    order = np.argsort(absk, kind="stable")
    abs_phi = np.abs(phi)[order]
    mult_env = np.maximum.accumulate(np.abs(multiplier)[order])

    n = len(k)
    blocks = np.array_split(np.arange(n), min(_BAND_BLOCKS, n))
    block_level = np.array([float(np.max(abs_phi[b])) for b in blocks])
    block_mult = np.array([float(mult_env[b[-1]]) for b in blocks])
    product = block_level * block_mult
    cut_block = int(np.argmin(product))

    k_cut = float(absk[order][blocks[cut_block][-1]])
    band = absk <= k_cut
    interior = cut_block < len(blocks) - 1
    return band, float(product[cut_block]), interior


def apply_kinetic(H: SeparableHamiltonian, psi: Wavefunction) -> np.ndarray:
    """K(p̂)ψ: multiply the spectrum by K(k) on the state's spectral band."""
    n = psi.grid.nx
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=psi.grid.dx)
    phi = np.fft.fft(psi.samples)
    full_multiplier = np.asarray(H.kinetic_value(k), dtype=float)
    band, noise_bound, interior = _spectral_band(phi, k, full_multiplier)
    out_spec = np.where(band, full_multiplier, 0.0) * phi
    out = np.fft.ifft(out_spec)

    out_norm = float(np.linalg.norm(out_spec))
    amplified_noise = noise_bound * math.sqrt(n)
    if amplified_noise > NOISE_WARN_REL * max(out_norm, 1e-300):
        warnings.warn(
            f"momentum multiplier amplifies grid-edge spectral noise to "
            f"{amplified_noise / max(out_norm, 1e-300):.2e} of the output norm",
            PrecisionWarning,
            stacklevel=2,
        )
    if not interior:
        warnings.warn(
            "multiplied spectrum is still decaying at the momentum range edge; "
            "the grid may not cover the state's bandwidth with headroom",
            PrecisionWarning,
            stacklevel=2,
        )
    return out


def apply_potential(H: SeparableHamiltonian, psi: Wavefunction) -> np.ndarray:
    """V(x̂)ψ: pointwise multiplication on the position grid."""
    return H.potential_value(psi.grid.x_axis()) * psi.samples


def apply_operator_function(H: SeparableHamiltonian, psi: Wavefunction) -> np.ndarray:
    """(K(p̂) + V(x̂))ψ as unnormalized complex samples."""
    return apply_kinetic(H, psi) + apply_potential(H, psi)


def zero_mode_residual(params, grid: PhaseSpaceGrid) -> float:
    """Relative L2 residual ‖Hψ_ζ‖ / (‖K(p̂)ψ_ζ‖ + ‖V(x̂)ψ_ζ‖).

    Constrained parameters drive this to numerical zero: the squeezed
    gaussian is annihilated by the cosh/cos Hamiltonian.
    """
    from .camouflage import build_hamiltonian  # local import avoids a cycle

    H = build_hamiltonian(params)
    psi = squeezed_vacuum_wavefunction(params.zeta, grid)
    dx = grid.dx
    k_part = apply_kinetic(H, psi)
    v_part = apply_potential(H, psi)
    denom = discrete_norm(k_part, dx) + discrete_norm(v_part, dx)
    if denom == 0.0:
        raise ValueError("degenerate Hamiltonian: both operator parts vanish on the state")
    return discrete_norm(k_part + v_part, dx) / denom


def field_sweep(evaluator, grid: PhaseSpaceGrid) -> ScalarField:
    """Dense field of a point evaluator; masked points flagged, never zeroed."""
    values = np.empty((grid.nx, grid.nk))
    mask = np.zeros((grid.nx, grid.nk), dtype=bool)
    xs = grid.x_axis()
    ks = grid.k_axis()
    for i, x in enumerate(xs):
        for j, k in enumerate(ks):
            try:
                values[i, j] = evaluator(x, k)
            except MaskedPointError:
                values[i, j] = np.nan
                mask[i, j] = True
    return ScalarField(grid=grid, values=values, mask=mask if mask.any() else None)
