# Pauli algebra, local spin-chain Hamiltonians and Gibbs states

import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg as sla

from src.linalg import as_cmatrix
from src.states import DensityMatrix, Register, embed_operator
from utils.exceptions import BadName

logger = logging.getLogger(__name__)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(pauli: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, leftmost letter on the first site"""
    try:
        factors = [PAULI[c] for c in pauli.upper()]
    except KeyError as e:
        raise BadName(f"not a Pauli letter: {e}")
    return reduce(np.kron, factors)


def pauli_on(register: Register, paulis: dict) -> np.ndarray:
    """
    Product of single-site Paulis embedded in a qubit register

    Args:
        register: Qubit register
        paulis: Mapping site label -> Pauli letter

    Returns:
        np.ndarray: Operator on the full register
    """
    sites = sorted(paulis)
    op = pauli_string_matrix("".join(paulis[s] for s in sites))
    return embed_operator(op, register, sites)


Term = Tuple[Tuple[int, ...], np.ndarray]


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    """
    Sum of local terms h_i acting on small sets of site labels

    Terms are kept separately so detailed-balance constructions can address
    the terms touching a site.
    """

    register: Register
    terms: Tuple[Term, ...]
    name: str = ""

    @cached_property
    def matrix(self) -> np.ndarray:
        H = np.zeros((self.register.dim, self.register.dim), dtype=complex)
        for sites, op in self.terms:
            H += embed_operator(op, self.register, sites)
        return H

    def terms_touching(self, site: int) -> Tuple[Term, ...]:
        return tuple(term for term in self.terms if site in term[0])

    def is_commuting(self, tol: float = 1e-10) -> bool:
        """True when every pair of overlapping terms commutes"""
        embedded = [embed_operator(op, self.register, sites) for sites, op in self.terms]
        for i, (sites_i, _) in enumerate(self.terms):
            for j in range(i + 1, len(self.terms)):
                if set(sites_i).isdisjoint(self.terms[j][0]):
                    continue
                comm = embedded[i] @ embedded[j] - embedded[j] @ embedded[i]
                if np.abs(comm).max() > tol:
                    return False
        return True


def ising_chain(n: int, J: float = 1.0, h: float = 0.0, periodic: bool = False) -> LocalHamiltonian:
    """
    Classical Ising chain H = -J sum Z_i Z_{i+1} - h sum Z_i

    Args:
        n: Number of qubits
        J: Coupling
        h: Longitudinal field
        periodic: Close the chain

    Returns:
        LocalHamiltonian: Diagonal, commuting terms
    """
    register = Register.chain(n)
    ZZ = np.kron(PAULI["Z"], PAULI["Z"])
    terms = [((i, i + 1), -J * ZZ) for i in range(n - 1)]
    if periodic and n > 2:
        terms.append(((0, n - 1), -J * ZZ))
    if h:
        terms.extend(((i,), -h * PAULI["Z"]) for i in range(n))
    return LocalHamiltonian(register, tuple(terms), f"ising(n={n}, J={J}, h={h})")


def transverse_field_ising(n: int, J: float = 1.0, g: float = 1.0) -> LocalHamiltonian:
    """Open-chain TFIM H = -J sum Z_i Z_{i+1} - g sum X_i"""
    register = Register.chain(n)
    ZZ = np.kron(PAULI["Z"], PAULI["Z"])
    terms = [((i, i + 1), -J * ZZ) for i in range(n - 1)]
    terms.extend(((i,), -g * PAULI["X"]) for i in range(n))
    return LocalHamiltonian(register, tuple(terms), f"tfim(n={n}, J={J}, g={g})")


def gibbs_state(H: Union[LocalHamiltonian, np.ndarray], beta: float,
                register: Optional[Register] = None) -> DensityMatrix:
    """
    Thermal state e^{-beta H} / Z

    Args:
        H: Hamiltonian (LocalHamiltonian or matrix)
        beta: Inverse temperature >= 0
        register: Register for a bare matrix (a qubit chain by default)

    Returns:
        DensityMatrix: Gibbs state
    """
    if isinstance(H, LocalHamiltonian):
        register, M = H.register, H.matrix
    else:
        M = as_cmatrix(H)
        if register is None:
            register = Register.chain(int(round(np.log2(M.shape[0]))))
    energies, vectors = sla.eigh((M + M.conj().T) / 2)
    weights = np.exp(-beta * (energies - energies.min()))
    weights /= weights.sum()
    rho = (vectors * weights) @ vectors.conj().T
    return DensityMatrix(register, rho, provenance=f"gibbs(beta={beta})")


def ising_partition_function_transfer(n: int, beta: float, J: float = 1.0, h: float = 0.0,
                                      periodic: bool = False) -> float:
    """
    Partition function of the classical Ising chain by transfer matrices

    Args:
        n: Number of spins
        beta: Inverse temperature
        J: Coupling
        h: Field

    Returns:
        float: Z = sum_s exp(-beta H(s))
    """
    spins = np.array([1.0, -1.0])
    T = np.exp(beta * J * np.outer(spins, spins) + beta * h * (spins[:, None] + spins[None, :]) / 2)
    if periodic:
        return float(np.trace(np.linalg.matrix_power(T, n)))
    edge = np.exp(beta * h * spins / 2)
    return float(edge @ np.linalg.matrix_power(T, n - 1) @ edge)


def ising_partition_function_exact(hamiltonian: LocalHamiltonian, beta: float) -> float:
    """Tr e^{-beta H} from the diagonal of a classical Hamiltonian"""
    return float(np.exp(-beta * np.real(np.diag(hamiltonian.matrix))).sum())
