# Nonlinear C_{p,q} correlators, the operator-correlation norm and local computability defects

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla

from utils.config import Config
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import BadRegion, ParamsOutOfRange, RegionsOverlap
from utils.validators import InputValidator

from .info import connected_part
from .linalg import as_cmatrix, psd_spectrum, schatten_norm, trace_norm_hermitian
from .states import (
    DensityMatrix,
    RegionPartition,
    Sites,
    _to_front,
    embed_operator,
    partial_trace,
    site_labels,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrelatorParams:
    """Exponents 0 < p, q <= 1 of C_{p,q}"""

    p: float
    q: float

    def __post_init__(self):
        ok, message = InputValidator.validate_correlator_params(self.p, self.q)
        if not ok:
            raise ParamsOutOfRange(message)

    @property
    def s(self) -> float:
        return 1.0 / (self.p + self.q)

    @property
    def schatten_exponent(self) -> float:
        """2s = 2 / (p + q) >= 1"""
        return 2.0 / (self.p + self.q)

    def swapped(self) -> "CorrelatorParams":
        return CorrelatorParams(self.q, self.p)


def _operator(O: np.ndarray, rho: DensityMatrix, sites: Optional[Sites]) -> np.ndarray:
    return embed_operator(O, rho.register, sites) if sites is not None else as_cmatrix(O)


def cpq(O: np.ndarray, rho: DensityMatrix, params: CorrelatorParams,
        sites: Optional[Sites] = None) -> float:
    """
    C_{p,q}(O, rho) = ||rho^{p/2} O rho^{q/2}||_{2/(p+q)}

    Args:
        O: Operator on rho's register, or on `sites` when given
        rho: State
        params: Exponents (p, q)
        sites: Optional site labels O acts on

    Returns:
        float: Correlator value in [|<O>|, ||O||_inf]
    """
    M = _operator(O, rho, sites)
    spectrum = psd_spectrum(rho.matrix)
    left = spectrum.apply(lambda lam: lam ** (params.p / 2.0))
    right = left if params.q == params.p else spectrum.apply(lambda lam: lam ** (params.q / 2.0))
    return schatten_norm(left @ M @ right, params.schatten_exponent)


def fidelity_correlator(O: np.ndarray, rho: DensityMatrix, sites: Optional[Sites] = None) -> float:
    """C_{1,1}; equals F(rho, O rho O^dagger) for unitary O"""
    return cpq(O, rho, CorrelatorParams(1.0, 1.0), sites)


def renyi1_correlator(O: np.ndarray, rho: DensityMatrix, sites: Optional[Sites] = None) -> float:
    """C_{1/2,1/2} = ||rho^{1/4} O rho^{1/4}||_2"""
    return cpq(O, rho, CorrelatorParams(0.5, 0.5), sites)


def renyi2_correlator(O: np.ndarray, rho: DensityMatrix, sites: Optional[Sites] = None) -> float:
    """Tr(O rho O^dagger rho) / Tr(rho^2)"""
    M = _operator(O, rho, sites)
    R = rho.matrix
    value = np.trace(M @ R @ M.conj().T @ R).real
    return float(value / rho.purity)


def renyi_sandwich_correlator(O: np.ndarray, rho: DensityMatrix, alpha: float,
                              sites: Optional[Sites] = None) -> float:
    """C_{(1-alpha)/alpha, 1}, the sandwiched-divergence point; alpha in [1/2, 1)"""
    if not 0.5 <= alpha < 1.0:
        raise ParamsOutOfRange(f"alpha={alpha} outside [1/2, 1)")
    return cpq(O, rho, CorrelatorParams((1.0 - alpha) / alpha, 1.0), sites)


def p_plus_q_one_form(O: np.ndarray, rho: DensityMatrix, q: float,
                      sites: Optional[Sites] = None) -> float:
    """[Tr(O^dagger rho^{1-q} O rho^q)]^{1/2}, equal to C_{1-q,q}"""
    if not 0.0 < q < 1.0:
        raise ParamsOutOfRange(f"q={q} outside (0, 1)")
    M = _operator(O, rho, sites)
    spectrum = psd_spectrum(rho.matrix)
    left = spectrum.apply(lambda lam: lam ** (1.0 - q))
    right = spectrum.apply(lambda lam: lam ** q)
    value = np.trace(M.conj().T @ left @ M @ right).real
    return float(np.sqrt(max(value, 0.0)))


# -- operator correlation norm -------------------------------------------------


@dataclass(frozen=True, eq=False)
class CorrelationEstimate:
    """Certified lower bound (with its witness pair) and the trace-norm envelope"""

    value: float
    witness: Tuple[np.ndarray, np.ndarray]
    upper_envelope: float
    restarts: int
    iterations: int


def _dual_unitary(M: np.ndarray) -> np.ndarray:
    """O with ||O||_inf = 1 maximizing |Tr(O M)|, namely V U^dagger for M = U S V^dagger"""
    U, _, Vh = sla.svd(M)
    return Vh.conj().T @ U.conj().T


def operator_correlation(rho: DensityMatrix, A: Sites, C: Sites,
                         restarts: int = Config.CORRELATION_RESTARTS,
                         seed: Optional[int] = None,
                         max_iter: int = Config.CORRELATION_MAX_ITER,
                         tol: float = Config.CORRELATION_TOL) -> CorrelationEstimate:
    """
    sup |<O_A O_C> - <O_A><O_C>| over unit-norm operators by alternating ascent

    With O_A fixed the best O_C is the trace-norm dual of
    M_C = Tr_A[(O_A x 1) Delta], Delta = rho_AC - rho_A x rho_C, and
    symmetrically for O_A. Each restart starts from a random Hermitian O_A.

    Args:
        rho: State
        A: First region
        C: Second region, disjoint from A
        restarts: Number of random starts
        seed: Seed for the starting points
        max_iter: Iteration cap per restart
        tol: Stop when the value changes by less than this

    Returns:
        CorrelationEstimate: Best value found, witness, ||Delta||_1 envelope
    """
    a, c = site_labels(A), site_labels(C)
    if not a or not c:
        raise BadRegion("operator correlation needs two nonempty regions")
    if not set(a).isdisjoint(c):
        raise RegionsOverlap(f"regions {a} and {c} overlap")

    delta = connected_part(rho, a, c)
    envelope = trace_norm_hermitian(delta)
    ac = tuple(sorted(a + c))
    sub_dims = rho.register.dims_of(ac)
    pos_a = [ac.index(x) for x in a]
    T = _to_front(delta, sub_dims, pos_a)  # T[a, c, a', c']
    dA, dC = T.shape[0], T.shape[1]

    generator = QuantumDataGenerator(seed)
    best_value, best_pair, total_iter = -1.0, (np.eye(dA), np.eye(dC)), 0
    for _ in range(max(1, restarts)):
        O_A = generator.random_hermitian(dA)
        value, previous = 0.0, -np.inf
        O_C = np.eye(dC, dtype=complex)
        for _ in range(max_iter):
            total_iter += 1
            M_C = np.einsum("ba,acbd->cd", O_A, T)
            O_C = _dual_unitary(M_C)
            M_A = np.einsum("dc,acbd->ab", O_C, T)
            O_A = _dual_unitary(M_A)
            value = float(sla.svdvals(M_A).sum())
            if abs(value - previous) < tol:
                break
            previous = value
        if value > best_value:
            best_value, best_pair = value, (O_A, O_C)

    logger.debug("operator correlation %s:%s value=%.3e envelope=%.3e", a, c, best_value, envelope)
    return CorrelationEstimate(min(best_value, envelope + 1e-12), best_pair, envelope, restarts, total_iter)


def connected_correlator(rho: DensityMatrix, O_A: np.ndarray, A: Sites,
                         O_C: np.ndarray, C: Sites) -> complex:
    """<O_A O_C> - <O_A><O_C>"""
    joint = embed_operator(O_A, rho.register, A) @ embed_operator(O_C, rho.register, C)
    return complex(np.trace(rho.matrix @ joint)
                   - rho.expectation(O_A, A) * rho.expectation(O_C, C))


# -- locality of C_{p,q} -------------------------------------------------------


def local_computability_defect(rho_ABC: DensityMatrix, O_A: np.ndarray,
                               part: RegionPartition, params: CorrelatorParams) -> float:
    """
    C_{p,q}(O_A, rho_AB) - C_{p,q}(O_A, rho_ABC)

    For p > q the symmetric form with (q, p) and O_A^dagger is evaluated.

    Args:
        rho_ABC: State on the full register
        O_A: Operator on region A
        part: Partition with regions A, B, C
        params: Correlator exponents

    Returns:
        float: Defect, nonnegative up to rounding
    """
    part.require("A", "B", "C")
    O = as_cmatrix(O_A)
    if params.p > params.q:
        params = params.swapped()
        O = O.conj().T
    A = part["A"]
    rho_AB = partial_trace(rho_ABC, part.union("A", "B"))
    reduced = cpq(O, rho_AB, params, sites=A.sites)
    full = cpq(O, rho_ABC, params, sites=A.sites)
    return reduced - full


def cpq_clustering_defect(rho: DensityMatrix, O1: np.ndarray, A1: Sites,
                          O2: np.ndarray, A2: Sites, params: CorrelatorParams) -> float:
    """
    |C_{p,q}(O1 O2, rho) - C_{p,q}(O1, rho) C_{p,q}(O2, rho)|

    Args:
        rho: State
        O1: Operator on A1
        A1: First region
        O2: Operator on A2
        A2: Second region, disjoint from A1
        params: Correlator exponents

    Returns:
        float: Connected C_{p,q} magnitude
    """
    a1, a2 = site_labels(A1), site_labels(A2)
    if not set(a1).isdisjoint(a2):
        raise RegionsOverlap(f"regions {a1} and {a2} overlap")
    E1 = embed_operator(O1, rho.register, a1)
    E2 = embed_operator(O2, rho.register, a2)
    joint = cpq(E1 @ E2, rho, params)
    return abs(joint - cpq(E1, rho, params) * cpq(E2, rho, params))
