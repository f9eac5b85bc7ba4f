"""Spectral representation of the parity block and its continuum limits.

Discrete Fourier transform of the phi pair, the one-step transfer matrix
and its exact eigenvalues, stroboscopic matrix powers, the continuum
rotation propagator, assembly of the two spin components, and the
position-space Fresnel kernels they converge to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice_walk import SQRT2, LatticeParams

__all__ = [
    "SpectralField",
    "TransferMatrix",
    "PSI_DENSITY_CALIBRATION",
    "momentum_grid",
    "to_spectral",
    "from_spectral",
    "spectral_step",
    "spectral_l2_norm",
    "transfer_matrix",
    "eigenvalues",
    "eigenvalue_leading_order",
    "stroboscopic_power",
    "continuum_propagator",
    "assemble_psi",
    "fresnel_kernel",
]

# Frozen lattice-to-continuum calibration for the assembled psi+ density.
# On the populated sublattice (every other site) the cell measure is
# 2*delta, and the p = 0 mode fixes the remaining constant once: the
# lattice sum of psi+ equals 1/sqrt(2) for the unit point source while the
# kernel integrates to 1, so density = psi+ * sqrt(2) / (2*delta).
PSI_DENSITY_CALIBRATION = SQRT2


@dataclass
class SpectralField:
    """Complex phi pair per momentum-grid point, ordered like momentum_grid."""

    p: np.ndarray
    values: np.ndarray
    step_index: int = 0


@dataclass(frozen=True)
class TransferMatrix:
    """One-step spectral evolution matrix at a single momentum."""

    matrix: np.ndarray
    p: float
    delta: float
    alpha: float


def momentum_grid(params: LatticeParams) -> np.ndarray:
    """Momentum values p_j = 2 pi j / (N delta) for j in [-N/2, N/2).

    Evenly spaced and containing p = 0.  Requires even N so the grid is
    symmetric apart from the lone Nyquist point.
    """
    n = params.site_count
    if n % 2 != 0:
        raise ValueError(f"momentum grid requires an even site count, got {n}")
    j = np.arange(-(n // 2), n // 2)
    return 2.0 * math.pi * j / (n * params.delta)


def to_spectral(phi: np.ndarray, params: LatticeParams, step_index: int = 0) -> SpectralField:
    """Generating function of the phi pair: phi_k(p_j) = sum_m phi_k(m) e^{-i p_j m delta}.

    Computed with the FFT and reordered to match momentum_grid; the
    inverse (from_spectral) round-trips to rounding.
    """
    phi = np.asarray(phi)
    if phi.shape != (2, params.site_count):
        raise ValueError(f"phi must have shape (2, {params.site_count}), got {phi.shape}")
    values = np.fft.fftshift(np.fft.fft(phi, axis=1), axes=1)
    return SpectralField(momentum_grid(params), values, step_index)


def from_spectral(sf: SpectralField, params: LatticeParams) -> np.ndarray:
    """Inverse transform back to the per-site complex phi pair."""
    return np.fft.ifft(np.fft.ifftshift(sf.values, axes=1), axis=1)


def spectral_step(values: np.ndarray, p: np.ndarray, delta: float, alpha: float) -> np.ndarray:
    """Apply the transfer matrix at every momentum at once.

    Identical to transforming, stepping per momentum, and transforming
    back; kept vectorized because evolution loops live on this.
    """
    a = 0.5 * alpha
    shift_r = np.exp(-1j * p * delta)
    shift_l = np.exp(1j * p * delta)
    f1 = shift_r * values[0]
    f2 = shift_l * values[1]
    return np.stack([a * (f1 - f2), a * (f1 + f2)])


def spectral_l2_norm(values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2)))


def transfer_matrix(p: float, delta: float, alpha: float) -> TransferMatrix:
    """One-step matrix (alpha/2) [[e^{-i p delta}, -e^{i p delta}], [e^{-i p delta}, e^{i p delta}]].

    Advancing the spectral pair with this matrix matches one position-space
    phi step exactly.
    """
    a = 0.5 * alpha
    er = np.exp(-1j * p * delta)
    el = np.exp(1j * p * delta)
    m = np.array([[a * er, -a * el], [a * er, a * el]])
    return TransferMatrix(m, float(p), float(delta), float(alpha))


def eigenvalues(tm: TransferMatrix) -> tuple[complex, complex]:
    """Exact closed-form eigenvalues (alpha/2) (cos u +/- i sqrt(1 + sin^2 u)), u = p delta.

    Both have modulus alpha/sqrt(2) for every momentum: the parity block
    rotates (alpha = sqrt(2)) or uniformly decays (alpha = 1), it never
    disperses in modulus.
    """
    u = tm.p * tm.delta
    re = math.cos(u)
    im = math.sqrt(1.0 + math.sin(u) ** 2)
    a = 0.5 * tm.alpha
    return complex(a * re, a * im), complex(a * re, -a * im)


def eigenvalue_leading_order(p: float, delta: float, alpha: float) -> complex:
    """Small-u expansion (alpha/sqrt(2)) e^{i pi/4} (1 + i p^2 delta^2 / 2).

    Test-only reference: the residual against the exact eigenvalue scales
    as delta^4 at fixed p.
    """
    u = p * delta
    return (alpha / SQRT2) * np.exp(1j * math.pi / 4.0) * (1.0 + 0.5j * u * u)


def stroboscopic_power(tm: TransferMatrix, s: int) -> np.ndarray:
    """T^s for stroboscopic step counts (s a multiple of 8).

    Binary exponentiation with a fixed multiply order, so repeated calls
    are bit-identical.
    """
    if not (isinstance(s, int) and s >= 0):
        raise ValueError(f"s must be a nonnegative integer, got {s}")
    if s % 8 != 0:
        raise ValueError(f"stroboscopic power requires s % 8 == 0, got {s}")
    result = np.eye(2, dtype=complex)
    base = tm.matrix.copy()
    k = s
    while k:
        if k & 1:
            result = result @ base
        base = base @ base
        k >>= 1
    return result


def continuum_propagator(p: float, D: float, t: float) -> np.ndarray:
    """Continuum-limit propagator of the phi pair: rotation by p^2 D t."""
    if not (t >= 0.0):
        raise ValueError(f"t must be >= 0, got {t}")
    th = p * p * D * t
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, -s], [s, c]])


def assemble_psi(phi1, phi2):
    """Spin components psi_+ = (i phi1 + phi2)/2, psi_- = (-i phi1 + phi2)/2.

    Invertible: phi2 = psi_+ + psi_-, phi1 = -i (psi_+ - psi_-).
    """
    phi1 = np.asarray(phi1)
    phi2 = np.asarray(phi2)
    return 0.5 * (1j * phi1 + phi2), 0.5 * (-1j * phi1 + phi2)


def fresnel_kernel(x, t: float, D: float, branch: str = "+"):
    """Free-particle kernel e^{i x^2 / 4Dt} / sqrt(4 pi i D t), or its conjugate.

    Principal branch sqrt(i) = e^{i pi/4}, which makes branch "-" the exact
    complex conjugate of branch "+".  Constant modulus 1/sqrt(4 pi D t).
    """
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    if not (t > 0.0):
        raise ValueError(f"t must be positive, got {t}")
    if not (D > 0.0):
        raise ValueError(f"D must be positive, got {D}")
    x = np.asarray(x, dtype=float)
    phase = x * x / (4.0 * D * t) - 0.25 * math.pi
    value = np.exp(1j * phase) / math.sqrt(4.0 * math.pi * D * t)
    return np.conj(value) if branch == "-" else value
