# Seeded random matrices, states, unitaries and instruments for fuzz campaigns

import logging
from typing import List, Optional

import numpy as np
from scipy.stats import unitary_group

from .config import Config

logger = logging.getLogger(__name__)


class QuantumDataGenerator:
    """
    Generate random test inputs from a single seeded numpy Generator

    Every draw comes from self.rng, so a generator built with the same seed
    replays the same sequence of matrices.
    """

    PAULI_LETTERS = "IXYZ"

    def __init__(self, seed: Optional[int] = None):
        """
        Initialize data generator

        Args:
            seed: Seed for numpy's default_rng, defaults to Config.DEFAULT_SEED
        """
        self.seed = Config.DEFAULT_SEED if seed is None else int(seed)
        self.rng = np.random.default_rng(self.seed)

    def ginibre(self, rows: int, cols: int) -> np.ndarray:
        """Matrix of i.i.d. standard complex Gaussian entries"""
        return (self.rng.standard_normal((rows, cols))
                + 1j * self.rng.standard_normal((rows, cols))) / np.sqrt(2.0)

    def random_density_matrix(self, dim: int, rank: Optional[int] = None) -> np.ndarray:
        """
        Random density matrix G G^dagger / Tr(G G^dagger) from a dim x rank Ginibre G

        Args:
            dim: Hilbert space dimension
            rank: Number of Ginibre columns (full rank by default)

        Returns:
            np.ndarray: PSD unit-trace matrix
        """
        G = self.ginibre(dim, rank or dim)
        M = G @ G.conj().T
        return M / np.trace(M).real

    def random_pure_vector(self, dim: int) -> np.ndarray:
        psi = self.ginibre(dim, 1).reshape(-1)
        return psi / np.linalg.norm(psi)

    def random_unitary(self, dim: int) -> np.ndarray:
        """Haar-random unitary"""
        return unitary_group.rvs(dim, random_state=self.rng)

    def random_hermitian(self, dim: int, unit_norm: bool = True) -> np.ndarray:
        """
        Random Hermitian matrix, rescaled to unit operator norm by default

        Args:
            dim: Matrix dimension
            unit_norm: Rescale so the largest |eigenvalue| is 1

        Returns:
            np.ndarray: Hermitian matrix
        """
        G = self.ginibre(dim, dim)
        H = (G + G.conj().T) / 2
        if unit_norm:
            H = H / np.abs(np.linalg.eigvalsh(H)).max()
        return H

    def random_operator(self, dim: int, unit_norm: bool = True) -> np.ndarray:
        G = self.ginibre(dim, dim)
        if unit_norm:
            G = G / np.linalg.norm(G, 2)
        return G

    def random_kraus(self, dim: int, n_ops: Optional[int] = None) -> List[np.ndarray]:
        """
        Kraus operators of a random channel from the QR isometry of stacked Ginibre blocks

        Args:
            dim: Support dimension
            n_ops: Number of Kraus operators (drawn from 1..4 when omitted)

        Returns:
            List[np.ndarray]: F_1..F_k with sum F^dagger F = 1
        """
        k = int(n_ops) if n_ops else int(self.rng.integers(1, 5))
        stacked = self.ginibre(k * dim, dim)
        Q, R = np.linalg.qr(stacked)
        # fix the column phases so Q is Haar distributed
        Q = Q * (np.diag(R) / np.abs(np.diag(R)))
        return [Q[i * dim:(i + 1) * dim, :] for i in range(k)]

    def random_probability_vector(self, size: int) -> np.ndarray:
        return self.rng.dirichlet(np.ones(size))

    def random_stabilizer_generators(self, n_qubits: int, n_generators: int,
                                     max_tries: int = 10000) -> List[str]:
        """
        Random independent, pairwise commuting Pauli strings

        Args:
            n_qubits: Number of qubits
            n_generators: Number of generators (at most n_qubits)

        Returns:
            List[str]: Pauli strings over 'IXYZ'
        """
        if n_generators > n_qubits:
            raise ValueError(f"cannot pick {n_generators} independent generators on {n_qubits} qubits")
        chosen: List[str] = []
        for _ in range(max_tries):
            if len(chosen) == n_generators:
                break
            letters = self.rng.integers(0, 4, size=n_qubits)
            if not letters.any():
                continue
            candidate = "".join(self.PAULI_LETTERS[i] for i in letters)
            if not all(pauli_strings_commute(candidate, g) for g in chosen):
                continue
            if binary_rank([symplectic_vector(g) for g in chosen + [candidate]]) <= len(chosen):
                continue
            chosen.append(candidate)
        if len(chosen) < n_generators:
            raise ValueError(f"no commuting set of {n_generators} generators found in {max_tries} tries")
        logger.debug("stabilizer generators %s", chosen)
        return chosen


def symplectic_vector(pauli: str) -> np.ndarray:
    """(x | z) bits of a Pauli string"""
    x = np.array([c in "XY" for c in pauli], dtype=np.uint8)
    z = np.array([c in "ZY" for c in pauli], dtype=np.uint8)
    return np.concatenate([x, z])


def pauli_strings_commute(a: str, b: str) -> bool:
    va, vb = symplectic_vector(a), symplectic_vector(b)
    n = len(a)
    form = int(va[:n] @ vb[n:] + va[n:] @ vb[:n])
    return form % 2 == 0


def binary_rank(vectors: List[np.ndarray]) -> int:
    """Rank over GF(2) by Gaussian elimination"""
    if not vectors:
        return 0
    M = np.array(vectors, dtype=np.uint8) % 2
    rank = 0
    rows, cols = M.shape
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if M[r, col]), None)
        if pivot is None:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        for r in range(rows):
            if r != rank and M[r, col]:
                M[r] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank
