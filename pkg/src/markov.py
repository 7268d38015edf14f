# Quantum Markov chain certification, averaged-CMI checks and local computability witnesses

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from utils.config import Config
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import Inconclusive, ParamsOutOfRange, SupportMismatch

from .channels import KrausInstrument, apply_instrument, petz_map, rotated_petz_family
from .correlators import CorrelatorParams, local_computability_defect
from .info import conditional_mutual_information, fact1_bures_bound, fact1_fidelity_bound
from .states import (
    DensityMatrix,
    RegionPartition,
    bures_distance,
    fidelity,
    maximally_mixed,
    mix,
    operator_trace_distance,
    partial_trace,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QMCReport:
    """Both Markov criteria and the verdict they agree on"""

    cmi: float
    petz_recovery_error: float
    is_qmc: bool
    tol: float
    witness_unitary: Optional[np.ndarray] = None


def petz_recovery_error(rho: DensityMatrix, part: RegionPartition) -> float:
    """
    ||P_{rho_BC, Tr_C}(rho_AB) - rho_ABC||_1

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C

    Returns:
        float: Trace distance of the Petz-recovered state
    """
    part.require("A", "B", "C")
    rho_BC = partial_trace(rho, part.union("B", "C"))
    channel = petz_map(rho_BC, part["C"])
    recovered = channel.apply_matrix(rho.register, rho.matrix)
    return operator_trace_distance(recovered, rho.matrix)


def certify_qmc(rho: DensityMatrix, part: RegionPartition,
                tol: float = Config.QMC_TOL) -> QMCReport:
    """
    Decide whether rho is a quantum Markov chain A - B - C

    Both I(A:C|B) and the Petz recovery error must fall below tol, or both
    above QMC_MARGIN * tol; anything in between raises Inconclusive.

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C
        tol: Acceptance tolerance

    Returns:
        QMCReport: Criteria values and verdict
    """
    part.require("A", "B", "C")
    cmi = conditional_mutual_information(rho, part["A"], part["C"], part["B"])
    error = petz_recovery_error(rho, part)
    if cmi < tol and error < tol:
        verdict = True
    elif cmi > Config.QMC_MARGIN * tol and error > Config.QMC_MARGIN * tol:
        verdict = False
    else:
        logger.warning("Markov criteria disagree: cmi=%.3e petz error=%.3e tol=%.1e", cmi, error, tol)
        raise Inconclusive(f"cmi={cmi:.3e} and petz error={error:.3e} disagree at tol={tol:.1e}")
    return QMCReport(cmi, error, verdict, tol)


def measurement_average_cmi(rho: DensityMatrix, inst: KrausInstrument,
                            part: RegionPartition) -> tuple:
    """
    (sum_k p_k I(A:C|B)_{sigma_k}, I(A:C|B)_rho) for an instrument on A

    Args:
        rho: State on the partitioned register
        inst: Instrument supported inside A
        part: Partition with regions A, B, C

    Returns:
        tuple: (lhs, rhs)
    """
    part.require("A", "B", "C")
    A, B, C = part["A"], part["B"], part["C"]
    if not set(inst.support.sites) <= set(A.sites):
        raise SupportMismatch(f"instrument support {inst.support.sites} is not inside A={A.sites}")
    ensemble = apply_instrument(rho, inst)
    lhs = sum(p * conditional_mutual_information(s, A, C, B) for p, s in ensemble)
    rhs = conditional_mutual_information(rho, A, C, B)
    return float(lhs), float(rhs)


@dataclass(frozen=True, eq=False)
class WitnessResult:
    """Outcome of a local computability witness search"""

    unitary: Optional[np.ndarray]
    defect: float
    raw_defect: float
    regularized: bool
    samples_tried: int


def regularize(rho: DensityMatrix, eps: float = Config.REGULARIZATION_EPS) -> DensityMatrix:
    """(1 - eps) rho + eps 1/d"""
    return mix([rho, maximally_mixed(rho.register)], [1.0 - eps, eps])


def local_computability_witness_search(rho: DensityMatrix, part: RegionPartition,
                                       params: CorrelatorParams,
                                       n_samples: int = Config.WITNESS_SAMPLES,
                                       seed: Optional[int] = None) -> WitnessResult:
    """
    Search Haar-random unitaries U_A whose C_{p,q} is not computable from rho_AB

    Rank-deficient states are first mixed with eps 1/d; the defect on the raw
    state is reported next to the regularized one.

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C
        params: Exponents with p q != 1
        n_samples: Number of unitaries to try
        seed: Sampling seed

    Returns:
        WitnessResult: First unitary with |defect| > WITNESS_THRESHOLD, or None
    """
    if abs(params.p * params.q - 1.0) < 1e-12:
        raise ParamsOutOfRange("the fidelity point p = q = 1 is excluded")
    part.require("A", "B", "C")

    target = rho
    regularized = False
    if rho.eigenvalues.min() < Config.SUPPORT_TOL:
        target = regularize(rho)
        regularized = True
        logger.debug("witness search regularized rank-deficient state with eps=%.1e",
                     Config.REGULARIZATION_EPS)

    generator = QuantumDataGenerator(seed)
    d_A = part["A"].dim
    for sample in range(1, n_samples + 1):
        U = generator.random_unitary(d_A)
        defect = local_computability_defect(target, U, part, params)
        if abs(defect) > Config.WITNESS_THRESHOLD:
            raw = local_computability_defect(rho, U, part, params)
            logger.debug("witness found after %d samples, defect %.3e", sample, defect)
            return WitnessResult(U, float(defect), float(raw), regularized, sample)
    return WitnessResult(None, 0.0, 0.0, regularized, n_samples)


@dataclass(frozen=True)
class Fact1Result:
    """Best rotated-Petz recovery over a t grid against the CMI-based guarantees"""

    cmi: float
    best_t: float
    best_fidelity: float
    best_bures: float
    fidelity_bound: float
    bures_bound: float

    @property
    def holds(self) -> bool:
        return self.best_fidelity >= self.fidelity_bound - 1e-9


def _universal_weight(t: np.ndarray) -> np.ndarray:
    """beta_0(t) = (pi / 2) / (cosh(pi t) + 1)"""
    return (np.pi / 2.0) / (np.cosh(np.pi * t) + 1.0)


def fact1_recovery_scan(rho: DensityMatrix, part: RegionPartition,
                        t_grid: Sequence[float] = tuple(np.linspace(-6.0, 6.0, 121))) -> Fact1Result:
    """
    Scan rotated Petz maps R_t and their beta_0-weighted average

    The averaged (universal) recovery is the one with the 2^{-cmi/2}
    fidelity guarantee; single rotations are kept when they do better.
    best_t is nan when the averaged map wins.

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C
        t_grid: Rotation parameters (also the quadrature nodes of the average)

    Returns:
        Fact1Result: Best fidelity and Bures distance with their bounds
    """
    part.require("A", "B", "C")
    cmi = conditional_mutual_information(rho, part["A"], part["C"], part["B"])
    rho_BC = partial_trace(rho, part.union("B", "C"))
    grid = np.asarray(t_grid, dtype=float)
    weights = _universal_weight(grid)
    weights = weights / weights.sum()

    best = (-1.0, 0.0, 2.0)
    averaged = np.zeros_like(rho.matrix)
    for t, w in zip(grid, weights):
        channel = rotated_petz_family(rho_BC, part["C"], float(t))
        output = channel.apply_matrix(rho.register, rho.matrix)
        averaged = averaged + w * output
        recovered = DensityMatrix.from_operator(rho.register, output)
        F = fidelity(recovered, rho)
        if F > best[0]:
            best = (F, float(t), bures_distance(recovered, rho))

    universal = DensityMatrix.from_operator(rho.register, averaged)
    F = fidelity(universal, rho)
    if F > best[0]:
        best = (F, float("nan"), bures_distance(universal, rho))
    return Fact1Result(cmi, best[1], best[0], best[2], fact1_fidelity_bound(cmi), fact1_bures_bound(cmi))
