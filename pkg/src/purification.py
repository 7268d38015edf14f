# Canonical purification |sqrt(rho)>, mirror-operator decomposition and purified-state identities

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.config import Config
from utils.exceptions import (
    BoundViolation,
    DimensionCap,
    NotClassical,
    NotStabilizerInput,
    ParamsOutOfRange,
    RegionsOverlap,
    UnpairedBlock,
)
from utils.validators import InputValidator

from .correlators import renyi1_correlator
from .fitting import ProportionalFit, fit_proportional
from .info import conditional_mutual_information, entropy_of_spectrum, mutual_information
from .linalg import as_cmatrix, matrix_power_on_support, psd_sqrt
from .states import (
    DensityMatrix,
    Register,
    RegionPartition,
    Sites,
    embed_matrix,
    mix,
    operator_trace_distance,
    ptrace_matrix,
    site_labels,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PurifiedState:
    """
    |sqrt(rho)> = sum_ij (sqrt rho)_ij |i>|j> on a doubled register

    Mirror site of label x is x + offset, with offset one past the largest
    base label, so every mirror label sorts after every base label.
    """

    base: Register
    register: Register
    vector: np.ndarray
    offset: int

    def mirror(self, sites: Sites) -> Tuple[int, ...]:
        return tuple(x + self.offset for x in self.base_sites(sites))

    def base_sites(self, sites: Sites) -> Tuple[int, ...]:
        labels = site_labels(sites)
        unknown = [x for x in labels if x not in self.base.labels]
        if unknown:
            raise UnpairedBlock(f"sites {unknown} are not base sites {self.base.labels}")
        return labels

    def block(self, sites: Sites) -> Tuple[int, ...]:
        """Base sites together with their mirrors, in register order"""
        return self.base_sites(sites) + self.mirror(sites)

    def _tensor(self) -> np.ndarray:
        return self.vector.reshape(self.register.site_dims)

    def reduced_matrix(self, labels: Sites) -> np.ndarray:
        """Reduced density matrix on the given labels of the doubled register"""
        keep = self.register.positions(labels)
        rest = [i for i in range(self.register.n_sites) if i not in keep]
        T = self._tensor().transpose(keep + rest)
        dK = int(np.prod([self.register.site_dims[i] for i in keep]))
        T = T.reshape(dK, -1)
        return T @ T.conj().T

    def reduced_state(self, labels: Sites) -> DensityMatrix:
        labels = site_labels(labels)
        return DensityMatrix(self.register.subregister(labels), self.reduced_matrix(labels))

    def entropy(self, labels: Sites) -> float:
        labels = site_labels(labels)
        if not labels or len(labels) == self.register.n_sites:
            return 0.0
        return entropy_of_spectrum(np.linalg.eigvalsh(self.reduced_matrix(labels)))

    def apply(self, op: np.ndarray, labels: Sites) -> np.ndarray:
        """(O on labels) |psi>, labels in register order"""
        labels = site_labels(labels)
        positions = self.register.positions(labels)
        dims = self.register.site_dims
        n = self.register.n_sites
        T = self._tensor()
        op_dims = [dims[i] for i in positions]
        O = as_cmatrix(op).reshape(op_dims * 2)
        k = len(positions)
        out = np.tensordot(O, T, axes=(list(range(k, 2 * k)), positions))
        # tensordot puts the operator's output legs first
        rest = [i for i in range(n) if i not in positions]
        order = positions + rest
        inverse = [order.index(i) for i in range(n)]
        return out.transpose(inverse).reshape(-1)

    def expectation(self, op: np.ndarray, labels: Sites) -> complex:
        return complex(np.vdot(self.vector, self.apply(op, labels)))


def canonical_purify(rho: DensityMatrix) -> PurifiedState:
    """
    Canonical purification (thermofield double) of a state

    Args:
        rho: State with dimension at most MAX_PURIFICATION_DIMENSION

    Returns:
        PurifiedState: Unit vector on the doubled register
    """
    if rho.dim > Config.MAX_PURIFICATION_DIMENSION:
        raise DimensionCap(
            f"purification of dimension {rho.dim} exceeds cap {Config.MAX_PURIFICATION_DIMENSION}"
        )
    base = rho.register
    offset = base.labels[-1] + 1
    doubled = Register(
        base.site_dims * 2,
        coords=base.coords * 2,
        labels=base.labels + tuple(x + offset for x in base.labels),
        cap=Config.MAX_PURIFICATION_DIMENSION ** 2,
    )
    vector = psd_sqrt(rho.matrix).reshape(-1)
    vector = vector / np.linalg.norm(vector)
    return PurifiedState(base, doubled, vector, offset)


# -- mirror operator decomposition -----------------------------------------------------


def weyl_basis(d: int) -> List[np.ndarray]:
    """Hilbert-Schmidt orthonormal generalized Paulis X^a Z^b / sqrt(d)"""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    basis = []
    for a in range(d):
        for b in range(d):
            basis.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) / np.sqrt(d))
    return basis


@dataclass(frozen=True, eq=False)
class MirrorOperator:
    """
    O on A (x) A-bar split as O = O1 - O2 + i O3 - i O4, each
    O_k = sum_i lambda_i S_i (x) S_i^* with lambda_i >= 0
    """

    operator: np.ndarray
    d: int
    terms: Dict[int, Tuple[Tuple[float, np.ndarray], ...]] = field(default_factory=dict)

    def part(self, k: int) -> np.ndarray:
        total = np.zeros((self.d ** 2, self.d ** 2), dtype=complex)
        for lam, S in self.terms.get(k, ()):
            total += lam * np.kron(S, S.conj())
        return total

    def reconstruct(self) -> np.ndarray:
        return self.part(1) - self.part(2) + 1j * self.part(3) - 1j * self.part(4)

    def part_norms(self) -> Tuple[float, float, float, float]:
        return tuple(float(np.linalg.norm(self.part(k))) for k in (1, 2, 3, 4))


def choi_decompose(O: np.ndarray, d: Optional[int] = None) -> MirrorOperator:
    """
    Decompose an operator on a mirror pair into four positive mirror-symmetric parts

    Coefficients M_ab = Tr((P_a (x) P_b^*)^dagger O) in the Weyl basis are split
    into Hermitian and anti-Hermitian matrices, each diagonalized; an
    eigenpair (lambda, u) gives the term |lambda| S (x) S^* with S = sum_a u_a P_a.

    Args:
        O: Operator on A (x) A-bar
        d: Dimension of A (inferred as the square root of O's dimension)

    Returns:
        MirrorOperator: Parts with their nonnegative weights
    """
    O = as_cmatrix(O)
    total = O.shape[0]
    if d is None:
        d = int(round(np.sqrt(total)))
    if O.shape != (d * d, d * d):
        raise UnpairedBlock(f"operator of dimension {total} is not a mirror pair of dimension {d}")

    basis = weyl_basis(d)
    n = len(basis)
    M = np.zeros((n, n), dtype=complex)
    for a, Pa in enumerate(basis):
        for b, Pb in enumerate(basis):
            M[a, b] = np.vdot(np.kron(Pa, Pb.conj()), O)

    H = (M + M.conj().T) / 2
    K = (M - M.conj().T) / 2j
    terms: Dict[int, list] = {1: [], 2: [], 3: [], 4: []}
    for (positive, negative), coeffs in (((1, 2), H), ((3, 4), K)):
        values, vectors = np.linalg.eigh(coeffs)
        for lam, u in zip(values, vectors.T):
            if abs(lam) <= Config.SUPPORT_TOL:
                continue
            S = sum(u[a] * basis[a] for a in range(n))
            terms[positive if lam > 0 else negative].append((float(abs(lam)), S))
    return MirrorOperator(O, d, {k: tuple(v) for k, v in terms.items()})


# -- purified-state locality ------------------------------------------------------------


def _block_marginal(rho: DensityMatrix, sites: Sites) -> np.ndarray:
    purified = canonical_purify(rho)
    return purified.reduced_matrix(purified.block(sites))


def tfd_local_computability_defect(rho: DensityMatrix, part: RegionPartition) -> float:
    """
    ||Tr_{BB-bar CC-bar}|sqrt(rho_ABC)><.| - Tr_{BB-bar}|sqrt(rho_AB)><.|||_2

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C

    Returns:
        float: Hilbert-Schmidt distance of the two A A-bar marginals
    """
    part.require("A", "B", "C")
    A = part["A"]
    full = _block_marginal(rho, A)
    reduced = _block_marginal(rho.marginal(part.union("A", "B")), A)
    return float(np.linalg.norm(full - reduced))


def marginal_trace_norm_defect(rho: DensityMatrix, part: RegionPartition) -> float:
    """Trace-norm version of tfd_local_computability_defect"""
    part.require("A", "B", "C")
    A = part["A"]
    diff = _block_marginal(rho, A) - _block_marginal(rho.marginal(part.union("A", "B")), A)
    return float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


@dataclass(frozen=True, eq=False)
class NearMarkovScan:
    """Marginal trace-norm defects of (1 - eps) sigma + eps noise around a chain sigma"""

    eps: Tuple[float, ...]
    distances: Tuple[float, ...]
    defects: Tuple[float, ...]
    fit: ProportionalFit
    max_ratio: float

    @property
    def holds(self) -> bool:
        return self.max_ratio <= Config.NEAR_MARKOV_CONSTANT + 1e-9


def near_markov_defect_scan(base: DensityMatrix, part: RegionPartition, noise: DensityMatrix,
                            eps: Sequence[float]) -> NearMarkovScan:
    """
    Marginal defect against sqrt of the trace distance to the base state

    Args:
        base: State expected to be an exact Markov chain on part
        part: Partition with regions A, B, C
        noise: Perturbing state on the same register
        eps: Mixing weights of the noise, each in (0, 1]

    Returns:
        NearMarkovScan: Distances, defects, fitted constant and the largest
        defect / sqrt(distance) ratio
    """
    eps = tuple(float(e) for e in eps)
    if not eps or min(eps) <= 0.0 or max(eps) > 1.0:
        raise ParamsOutOfRange(f"noise weights must lie in (0, 1], got {eps}")
    distances, defects = [], []
    for e in eps:
        rho = mix([base, noise], [1.0 - e, e])
        distances.append(operator_trace_distance(rho.matrix, base.matrix))
        defects.append(marginal_trace_norm_defect(rho, part))
    roots = np.sqrt(np.asarray(distances))
    positive = roots > Config.FIT_FLOOR
    ratios = np.asarray(defects)[positive] / roots[positive]
    max_ratio = float(ratios.max()) if positive.any() else 0.0
    fit = fit_proportional(roots, defects)
    logger.debug("near-Markov scan: constant=%.3e max ratio=%.3e", fit.constant, max_ratio)
    return NearMarkovScan(eps, tuple(distances), tuple(defects), fit, max_ratio)


def tfd_mutual_information(rho: DensityMatrix, A: Sites, C: Sites) -> float:
    """I(A A-bar : C C-bar) of the canonical purification"""
    a, c = site_labels(A), site_labels(C)
    if not set(a).isdisjoint(c):
        raise RegionsOverlap(f"regions {a} and {c} overlap")
    purified = canonical_purify(rho)
    block_a, block_c = purified.block(a), purified.block(c)
    return (purified.entropy(block_a) + purified.entropy(block_c)
            - purified.entropy(tuple(sorted(block_a + block_c))))


def tfd_connected_correlator(rho: DensityMatrix, O1: np.ndarray, A1: Sites,
                             O2: np.ndarray, A2: Sites) -> complex:
    """
    <O1 O2> - <O1><O2> in |sqrt(rho)> for operators on A1 A1-bar and A2 A2-bar

    Args:
        rho: State
        O1: Operator on the block A1 (x) A1-bar (base factor first)
        A1: Base sites of the first block
        O2: Operator on the block A2 (x) A2-bar
        A2: Base sites of the second block

    Returns:
        complex: Connected correlator
    """
    a1, a2 = site_labels(A1), site_labels(A2)
    if not set(a1).isdisjoint(a2):
        raise RegionsOverlap(f"blocks {a1} and {a2} overlap")
    purified = canonical_purify(rho)
    b1, b2 = purified.block(a1), purified.block(a2)
    for O, b in ((O1, b1), (O2, b2)):
        d = int(np.prod(purified.register.dims_of(b)))
        if np.shape(O) != (d, d):
            raise UnpairedBlock(f"operator shape {np.shape(O)} does not fit block {b}")
    first = purified.apply(O2, b2)
    joint = np.vdot(purified.vector, _apply_vector(purified, O1, b1, first))
    return complex(joint - purified.expectation(O1, b1) * purified.expectation(O2, b2))


def _apply_vector(purified: PurifiedState, op: np.ndarray, labels, vector: np.ndarray) -> np.ndarray:
    shadow = PurifiedState(purified.base, purified.register, vector, purified.offset)
    return shadow.apply(op, labels)


def purified_cpq_identity(rho: DensityMatrix, O: np.ndarray) -> Tuple[float, float]:
    """(<O (x) O^*>_{sqrt rho}, C_{1/2,1/2}(O, rho)^2), which coincide"""
    purified = canonical_purify(rho)
    O = as_cmatrix(O)
    value = purified.expectation(np.kron(O, O.conj()), purified.register.labels)
    return float(value.real), renyi1_correlator(O, rho) ** 2


# -- stabilizer and classical identities ---------------------------------------------------


def stabilizer_tfd_identity(rho: DensityMatrix, part: RegionPartition) -> Tuple[float, float]:
    """
    Entropy identities of stabilizer states and their purifications

    Two regions A, B: (I(A:B), S(A A-bar)).
    Three regions A, B, C: (I(A:C) + I(A:C|B), I(A A-bar : C C-bar)).

    Args:
        rho: State built by stabilizer_state
        part: Partition with regions A, B (and optionally C)

    Returns:
        Tuple[float, float]: (lhs, rhs)
    """
    if rho.provenance != "stabilizer":
        raise NotStabilizerInput(f"expected a stabilizer state, got provenance {rho.provenance!r}")
    part.require("A", "B")
    if "C" not in part:
        purified = canonical_purify(rho)
        lhs = mutual_information(rho, part["A"], part["B"])
        rhs = purified.entropy(purified.block(part["A"]))
        return lhs, rhs
    A, B, C = part["A"], part["B"], part["C"]
    lhs = mutual_information(rho, A, C) + conditional_mutual_information(rho, A, C, B)
    rhs = tfd_mutual_information(rho, A, C)
    return lhs, rhs


def classical_mie(rho: DensityMatrix, part: RegionPartition) -> float:
    """
    Measurement-induced entanglement of |sqrt(rho)> for a classical state

    Measuring B and B-bar in the computational basis leaves, for outcome b,
    the vector sum_{a,c} sqrt(p(a,c|b)) |a a>|c c>; its entanglement across
    A A-bar : C C-bar is averaged with weights p(b).

    Args:
        rho: Diagonal state
        part: Partition with regions A, B, C

    Returns:
        float: MIE in bits, checked against I(A:C|B)
    """
    if not InputValidator.is_diagonal(rho.matrix):
        raise NotClassical("state is not diagonal in the computational basis")
    part.require("A", "B", "C")
    register = rho.register
    A, B, C = part["A"], part["B"], part["C"]
    p = np.clip(np.real(np.diag(rho.matrix)), 0.0, None).reshape(register.site_dims)
    order = register.positions(A) + register.positions(B) + register.positions(C)
    p = p.transpose(order).reshape(A.dim, B.dim, C.dim)

    mie = 0.0
    for b in range(B.dim):
        p_b = float(p[:, b, :].sum())
        if p_b <= Config.OUTCOME_DROP_TOL:
            continue
        psi = np.sqrt(p[:, b, :] / p_b)
        schmidt = np.linalg.svd(psi, compute_uv=False) ** 2
        mie += p_b * entropy_of_spectrum(schmidt)

    cmi = conditional_mutual_information(rho, A, C, B)
    if cmi > mie + 1e-9:
        raise BoundViolation(f"CMI {cmi:.6f} exceeds MIE {mie:.6f}")
    return float(mie)


def qmc_factorization_residual(rho: DensityMatrix, part: RegionPartition) -> float:
    """||rho_ABC^{1/2} - rho_BC^{1/2} rho_B^{-1/2} rho_AB^{1/2}||_2, zero on exact Markov chains"""
    part.require("A", "B", "C")
    register = rho.register
    dims = register.site_dims

    def embedded_power(sites, r):
        positions = register.positions(sites)
        if not positions:
            return np.eye(register.dim, dtype=complex)
        marginal = ptrace_matrix(rho.matrix, dims, positions)
        return embed_matrix(matrix_power_on_support(marginal, r), dims, positions)

    lhs = psd_sqrt(rho.matrix)
    rhs = (embedded_power(part.union("B", "C"), 0.5)
           @ embedded_power(part["B"], -0.5)
           @ embedded_power(part.union("A", "B"), 0.5))
    return float(np.linalg.norm(lhs - rhs))
