# Input validation utilities for the locstab workbench

from typing import Iterable, Sequence, Tuple

import numpy as np

from .config import Config


class InputValidator:
    """
    Validation utilities for matrices, registers, states and parameters
    """

    @staticmethod
    def validate_finite(matrix: np.ndarray) -> Tuple[bool, str]:
        """
        Check that a matrix is two-dimensional with finite entries

        Args:
            matrix: Candidate matrix

        Returns:
            Tuple[bool, str]: (is_valid, error_message)
        """
        if matrix.ndim != 2:
            return False, f"expected a 2-D matrix, got shape {matrix.shape}"
        if matrix.size == 0:
            return False, "matrix is empty"
        if not np.all(np.isfinite(matrix)):
            return False, "matrix contains NaN or Inf entries"
        return True, ""

    @staticmethod
    def validate_hermitian(matrix: np.ndarray,
                           tol: float = Config.HERMITIAN_TOL) -> Tuple[bool, str]:
        """
        Check ||M - M^dagger||_2 <= tol * ||M||_2 (spectral norms)

        Args:
            matrix: Square complex matrix
            tol: Relative tolerance

        Returns:
            Tuple[bool, str]: (is_valid, error_message)
        """
        rows, cols = matrix.shape
        if rows != cols:
            return False, f"matrix is not square: {matrix.shape}"
        scale = np.linalg.norm(matrix, 2)
        defect = np.linalg.norm(matrix - matrix.conj().T, 2)
        if defect > tol * scale:
            return False, f"anti-Hermitian part {defect:.3e} exceeds {tol:.1e} x {scale:.3e}"
        return True, ""

    @staticmethod
    def validate_site_dims(site_dims: Sequence[int], cap: int) -> Tuple[bool, str]:
        """
        Check that every site dimension is >= 2 and the total stays under the cap

        Args:
            site_dims: Local dimensions
            cap: Maximum total dimension

        Returns:
            Tuple[bool, str]: (is_valid, error_message)
        """
        if len(site_dims) == 0:
            return False, "register needs at least one site"
        for d in site_dims:
            if int(d) != d or d < 2:
                return False, f"site dimension must be an integer >= 2, got {d}"
        total = int(np.prod(site_dims))
        if total > cap:
            return False, f"total dimension {total} exceeds cap {cap}"
        return True, ""

    @staticmethod
    def validate_density_spectrum(eigenvalues: np.ndarray,
                                  trace: float) -> Tuple[bool, str]:
        """
        Check positivity (to CLIP_TOL) and unit trace (to TRACE_TOL)

        Args:
            eigenvalues: Eigenvalues of the candidate density matrix
            trace: Its trace

        Returns:
            Tuple[bool, str]: (is_valid, error_message)
        """
        if eigenvalues.min() < -Config.CLIP_TOL:
            return False, f"negative eigenvalue {eigenvalues.min():.3e}"
        if abs(trace - 1.0) > Config.TRACE_TOL:
            return False, f"trace {trace:.12f} differs from 1"
        return True, ""

    @staticmethod
    def validate_kraus_completeness(kraus_ops: Iterable[np.ndarray],
                                    dim: int) -> Tuple[bool, bool, str]:
        """
        Check sum_k F_k^dagger F_k <= 1 and whether it equals 1

        Args:
            kraus_ops: Kraus operators on the support
            dim: Support dimension

        Returns:
            Tuple[bool, bool, str]: (is_valid, trace_preserving, error_message)
        """
        total = np.zeros((dim, dim), dtype=complex)
        for op in kraus_ops:
            if op.shape != (dim, dim):
                return False, False, f"Kraus operator shape {op.shape} != ({dim}, {dim})"
            total += op.conj().T @ op
        top = np.linalg.eigvalsh((total + total.conj().T) / 2).max()
        if top > 1.0 + Config.KRAUS_TOL:
            return False, False, f"sum F^dagger F has eigenvalue {top:.12f} > 1"
        trace_preserving = bool(np.abs(total - np.eye(dim)).max() <= Config.KRAUS_TOL)
        return True, trace_preserving, ""

    @staticmethod
    def validate_correlator_params(p: float, q: float) -> Tuple[bool, str]:
        """
        Check 0 < p, q <= 1

        Args:
            p: Left exponent
            q: Right exponent

        Returns:
            Tuple[bool, str]: (is_valid, error_message)
        """
        for name, value in (("p", p), ("q", q)):
            if not np.isfinite(value) or not 0.0 < value <= 1.0:
                return False, f"{name}={value} outside (0, 1]"
        return True, ""

    @staticmethod
    def validate_divergence_params(alpha: float, z: float) -> Tuple[bool, str]:
        """Check alpha in (0,1) U (1,inf) and z > 0"""
        if not np.isfinite(alpha) or alpha <= 0 or alpha == 1.0:
            return False, f"alpha={alpha} must lie in (0,1) or (1,inf)"
        if not np.isfinite(z) or z <= 0:
            return False, f"z={z} must be positive"
        return True, ""

    @staticmethod
    def validate_probability(value: float) -> bool:
        """
        Validate a probability

        Args:
            value: Candidate probability

        Returns:
            bool: True if 0 <= value <= 1
        """
        return isinstance(value, (int, float)) and 0.0 <= value <= 1.0

    @staticmethod
    def is_diagonal(matrix: np.ndarray, tol: float = Config.SUPPORT_TOL) -> bool:
        """True if every off-diagonal entry is below tol in magnitude"""
        off = matrix - np.diag(np.diag(matrix))
        return bool(np.abs(off).max(initial=0.0) <= tol)
