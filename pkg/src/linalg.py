# Dense Hermitian matrix engine: spectra, matrix functions on support, Schatten norms

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as sla

from utils.config import Config
from utils.exceptions import (
    NegativeEigenvalue,
    Nonfinite,
    NotHermitian,
    UnsupportedExponent,
)
from utils.validators import InputValidator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HermitianSpectrum:
    """
    Eigendecomposition of a Hermitian matrix, eigenvalues in descending order
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support_mask: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.support_mask.sum())

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        """V diag(lambda) V^dagger"""
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """
        Apply a scalar function to the support eigenvalues; kernel maps to 0

        Args:
            fn: Vectorized function of the positive support eigenvalues

        Returns:
            np.ndarray: V diag(f(lambda) on support, 0 elsewhere) V^dagger
        """
        values = np.zeros(self.dim, dtype=complex)
        if self.rank:
            values[self.support_mask] = fn(self.eigenvalues[self.support_mask])
        V = self.eigenvectors
        return (V * values) @ V.conj().T

    def support_projector(self) -> np.ndarray:
        V = self.eigenvectors[:, self.support_mask]
        return V @ V.conj().T


def as_cmatrix(matrix) -> np.ndarray:
    """
    Convert input to a finite complex128 2-D array

    Args:
        matrix: Array-like input

    Returns:
        np.ndarray: Complex copy of the input
    """
    M = np.array(matrix, dtype=complex)
    ok, message = InputValidator.validate_finite(M)
    if not ok:
        raise Nonfinite(message)
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_eig(matrix, support_tol: float = Config.SUPPORT_TOL) -> HermitianSpectrum:
    """
    Eigendecomposition of a Hermitian matrix

    The input is symmetrized before diagonalization. The support mask marks
    eigenvalues above support_tol times the largest eigenvalue.

    Args:
        matrix: Hermitian matrix (to HERMITIAN_TOL relative spectral norm)
        support_tol: Relative support threshold

    Returns:
        HermitianSpectrum: Descending eigenvalues, unitary eigenvectors, support mask
    """
    M = as_cmatrix(matrix)
    ok, message = InputValidator.validate_hermitian(M)
    if not ok:
        raise NotHermitian(message)

    M = (M + M.conj().T) / 2
    eigenvalues, eigenvectors = sla.eigh(M)
    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = eigenvectors[:, ::-1].copy()

    top = eigenvalues[0]
    mask = eigenvalues > support_tol * max(top, 0.0)
    return HermitianSpectrum(eigenvalues, eigenvectors, mask)


def psd_spectrum(matrix) -> HermitianSpectrum:
    """
    Spectrum of a PSD matrix with small negative eigenvalues clipped to zero

    Raises NegativeEigenvalue when an eigenvalue is below -CLIP_TOL * lambda_max.
    """
    spectrum = hermitian_eig(matrix)
    top = spectrum.eigenvalues[0]
    scale = top if top > 0 else 1.0
    low = spectrum.eigenvalues[-1]
    if low < -Config.CLIP_TOL * scale:
        raise NegativeEigenvalue(f"eigenvalue {low:.3e} below clipping window")
    clipped = np.clip(spectrum.eigenvalues, 0.0, None)
    return HermitianSpectrum(clipped, spectrum.eigenvectors, spectrum.support_mask)


def matrix_power_on_support(matrix, r: float) -> np.ndarray:
    """
    Real power of a PSD matrix taken on its support

    Kernel eigenvalues map to zero for every r, so negative powers are
    pseudo-inverses.

    Args:
        matrix: PSD matrix
        r: Exponent

    Returns:
        np.ndarray: M^r on supp(M)
    """
    return psd_spectrum(matrix).apply(lambda lam: lam ** r)


def complex_power_on_support(spectrum: HermitianSpectrum, exponent: complex) -> np.ndarray:
    """M^z on the support for complex z, computed as exp(z log lambda)"""
    return spectrum.apply(lambda lam: np.exp(exponent * np.log(lam)))


def matrix_log_on_support(matrix, base: float = 2.0) -> np.ndarray:
    """log_base(M) on the support of a PSD matrix (zero on the kernel)"""
    return psd_spectrum(matrix).apply(lambda lam: np.log(lam) / np.log(base))


def schatten_norm(matrix, p: float) -> float:
    """
    Schatten p-norm from singular values

    Args:
        matrix: Any complex matrix
        p: Exponent >= 1 or np.inf

    Returns:
        float: (sum sigma_i^p)^(1/p), or max sigma for p = inf
    """
    if not (p == np.inf or (np.isfinite(p) and p >= 1.0)):
        raise UnsupportedExponent(f"Schatten exponent must be >= 1 or inf, got {p}")
    sigma = sla.svdvals(as_cmatrix(matrix))
    top = sigma.max(initial=0.0)
    if top == 0.0:
        return 0.0
    if p == np.inf:
        return float(top)
    # scale by the largest singular value to keep large p stable
    return float(top * np.sum((sigma / top) ** p) ** (1.0 / p))


def trace_norm_hermitian(matrix) -> float:
    """||M||_1 of a Hermitian matrix as the sum of |eigenvalues|"""
    M = as_cmatrix(matrix)
    M = (M + M.conj().T) / 2
    return float(np.abs(np.linalg.eigvalsh(M)).sum())


def psd_sqrt(matrix) -> np.ndarray:
    return matrix_power_on_support(matrix, 0.5)
