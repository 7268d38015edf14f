# Entropic quantities (bits): entropies, MI, CMI, divergences and continuity bounds

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

import numpy as np

from utils.config import Config
from utils.exceptions import ParamsOutOfRange, RegionsOverlap
from utils.validators import InputValidator

from .linalg import as_cmatrix, psd_spectrum, trace_norm_hermitian
from .states import (
    DensityMatrix,
    RegionPartition,
    Sites,
    embed_matrix,
    ptrace_matrix,
    site_labels,
)

logger = logging.getLogger(__name__)

StateLike = Union[DensityMatrix, np.ndarray]


def _matrix(rho: StateLike) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else as_cmatrix(rho)


def entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    """-sum p log2 p with 0 log 0 = 0; tiny negative eigenvalues are clipped"""
    p = np.clip(np.real(eigenvalues), 0.0, None)
    p = p[p > Config.support_threshold(p.max(initial=0.0))]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def von_neumann_entropy(rho: StateLike) -> float:
    """
    Von Neumann entropy in bits

    Args:
        rho: State or PSD matrix

    Returns:
        float: S(rho) in [0, log2 dim]
    """
    M = _matrix(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh((M + M.conj().T) / 2))


def region_entropy(rho: DensityMatrix, sites: Sites) -> float:
    """S of the marginal on the given sites; the empty region has entropy 0"""
    labels = site_labels(sites)
    if not labels:
        return 0.0
    if labels == rho.register.labels:
        return von_neumann_entropy(rho)
    reduced = ptrace_matrix(rho.matrix, rho.register.site_dims, rho.register.positions(labels))
    return von_neumann_entropy(reduced)


def mutual_information(rho: DensityMatrix, A: Sites, C: Sites) -> float:
    """I(A:C) = S(A) + S(C) - S(AC)"""
    a, c = site_labels(A), site_labels(C)
    if not set(a).isdisjoint(c):
        raise RegionsOverlap(f"regions {a} and {c} overlap")
    return region_entropy(rho, a) + region_entropy(rho, c) - region_entropy(rho, a + c)


def conditional_mutual_information(rho: DensityMatrix, A: Sites, C: Sites, B: Sites) -> float:
    """
    I(A:C|B) = S(AB) + S(BC) - S(ABC) - S(B)

    Args:
        rho: State containing all three regions
        A: First region
        C: Second region
        B: Conditioning region (may be empty)

    Returns:
        float: CMI in bits
    """
    a, c, b = site_labels(A), site_labels(C), site_labels(B)
    if len(set(a) | set(b) | set(c)) != len(a) + len(b) + len(c):
        raise RegionsOverlap(f"regions {a}, {b}, {c} overlap")
    return (region_entropy(rho, a + b) + region_entropy(rho, b + c)
            - region_entropy(rho, a + b + c) - region_entropy(rho, b))


def relative_entropy(rho: StateLike, sigma: StateLike) -> float:
    """Umegaki D(rho||sigma) = Tr rho (log2 rho - log2 sigma); +inf when supp(rho) is not in supp(sigma)"""
    r, s = psd_spectrum(_matrix(rho)), psd_spectrum(_matrix(sigma))
    if _support_violated(r, s):
        return float(np.inf)
    log_r = r.apply(np.log2)
    log_s = s.apply(np.log2)
    R = r.reconstruct()
    return float(np.real(np.trace(R @ (log_r - log_s))))


def _support_violated(r, s) -> bool:
    """True when part of rho lies outside the support of sigma"""
    outside = np.eye(s.dim) - s.support_projector()
    leak = np.real(np.trace(outside @ r.reconstruct()))
    return leak > Config.TRACE_TOL


@dataclass(frozen=True)
class DivergenceParams:
    """(alpha, z) of the alpha-z Renyi divergence"""

    alpha: float
    z: float

    def __post_init__(self):
        ok, message = InputValidator.validate_divergence_params(self.alpha, self.z)
        if not ok:
            raise ParamsOutOfRange(message)

    @classmethod
    def petz(cls, alpha: float) -> "DivergenceParams":
        return cls(alpha, 1.0)

    @classmethod
    def sandwiched(cls, alpha: float) -> "DivergenceParams":
        return cls(alpha, alpha)

    @property
    def correlator_exponents(self) -> Tuple[float, float]:
        """(p, q) = ((1 - alpha)/z, alpha/z)"""
        return (1.0 - self.alpha) / self.z, self.alpha / self.z


def alpha_z_divergence(rho: StateLike, sigma: StateLike, params: DivergenceParams) -> float:
    """
    alpha-z Renyi divergence in bits

    D = 1/(alpha-1) log2 Tr[(sigma^{(1-alpha)/2z} rho^{alpha/z} sigma^{(1-alpha)/2z})^z].
    z = 1 is the Petz-Renyi divergence, z = alpha the sandwiched one. Returns
    +inf for alpha > 1 when supp(rho) is not in supp(sigma), and whenever the
    trace vanishes.

    Args:
        rho: First state
        sigma: Reference state
        params: (alpha, z)

    Returns:
        float: D_{alpha,z}(rho||sigma)
    """
    alpha, z = params.alpha, params.z
    r, s = psd_spectrum(_matrix(rho)), psd_spectrum(_matrix(sigma))
    if alpha > 1.0 and _support_violated(r, s):
        return float(np.inf)

    side = s.apply(lambda lam: lam ** ((1.0 - alpha) / (2.0 * z)))
    middle = r.apply(lambda lam: lam ** (alpha / z))
    inner = side @ middle @ side
    values = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
    total = float((values ** z).sum())
    if total <= 0.0:
        return float(np.inf)
    return float(np.log2(total) / (alpha - 1.0))


def correlation_trace_norm(rho: DensityMatrix, A: Sites, C: Sites) -> float:
    """||rho_AC - rho_A (x) rho_C||_1"""
    a, c = site_labels(A), site_labels(C)
    if not set(a).isdisjoint(c):
        raise RegionsOverlap(f"regions {a} and {c} overlap")
    delta = connected_part(rho, a, c)
    return trace_norm_hermitian(delta)


def connected_part(rho: DensityMatrix, A: Sites, C: Sites) -> np.ndarray:
    """rho_AC - rho_A (x) rho_C on the subregister of A and C (label order)"""
    a, c = site_labels(A), site_labels(C)
    register = rho.register
    ac = tuple(sorted(a + c))
    rho_ac = ptrace_matrix(rho.matrix, register.site_dims, register.positions(ac))
    sub_dims = register.dims_of(ac)
    pos_a = [ac.index(x) for x in a]
    pos_c = [ac.index(x) for x in c]
    rho_a = ptrace_matrix(rho_ac, sub_dims, pos_a)
    rho_c = ptrace_matrix(rho_ac, sub_dims, pos_c)
    product = embed_matrix(rho_a, sub_dims, pos_a) @ embed_matrix(rho_c, sub_dims, pos_c)
    return rho_ac - product


@dataclass
class EntropyReport:
    """Entropies of each named region and of the standard tripartite combinations"""

    entropies: Dict[str, float] = field(default_factory=dict)
    mutual_information: Dict[str, float] = field(default_factory=dict)
    conditional_mutual_information: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        return {
            "entropies": dict(self.entropies),
            "mutual_information": dict(self.mutual_information),
            "conditional_mutual_information": dict(self.conditional_mutual_information),
        }


def entropy_report(rho: DensityMatrix, part: RegionPartition) -> EntropyReport:
    """
    Entropies, pairwise MI and (for A/B/C partitions) I(A:C|B)

    Args:
        rho: State on the partitioned register
        part: Region partition

    Returns:
        EntropyReport: Values in bits
    """
    report = EntropyReport()
    names = part.names
    for name in names:
        report.entropies[name] = region_entropy(rho, part[name])
    report.entropies["".join(names)] = von_neumann_entropy(rho)
    for i, first in enumerate(names):
        for second in names[i + 1:]:
            if part[first].is_empty or part[second].is_empty:
                continue
            key = f"{first}:{second}"
            report.mutual_information[key] = mutual_information(rho, part[first], part[second])
    if {"A", "B", "C"} <= set(names):
        report.conditional_mutual_information["A:C|B"] = conditional_mutual_information(
            rho, part["A"], part["C"], part["B"]
        )
    for key, value in report.conditional_mutual_information.items():
        if value < -1e-9:
            logger.warning("negative CMI %s = %.3e", key, value)
    return report


# -- continuity bounds ---------------------------------------------------------


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def kappa(x: float) -> float:
    """(1 + x) h2(x / (1 + x))"""
    return (1.0 + x) * binary_entropy(x / (1.0 + x))


@dataclass(frozen=True)
class Fact2Bounds:
    """Upper bounds on I(A:C|B) from a recovery error delta"""

    bound1: float
    bound2: float
    envelope: float

    @property
    def best(self) -> float:
        return min(self.bound1, self.bound2)


def fact2_cmi_bounds(delta: float, d_AB: int, d_C: int, d_B: int) -> Fact2Bounds:
    """
    CMI bounds implied by a recovery channel with trace-norm error delta

    Args:
        delta: ||R(rho_AB) - rho_ABC||_1 in [0, 2]
        d_AB: Dimension of AB
        d_C: Dimension of C
        d_B: Dimension of B

    Returns:
        Fact2Bounds: delta log2 min(d_AB, d_C) + 2 kappa(delta/2), the d_B
        variant, and the 5 sqrt(delta) log2 d envelope
    """
    if not 0.0 <= delta <= 2.0 + 1e-12:
        raise ParamsOutOfRange(f"recovery error {delta} outside [0, 2]")
    delta = min(delta, 2.0)
    d1 = min(d_AB, d_C)
    d2 = min(max(d_B, 1), d_C)
    bound1 = delta * np.log2(d1) + 2.0 * kappa(delta / 2.0)
    bound2 = delta * np.log2(max(d2, 1)) + 2.0 * kappa(delta / 2.0)
    envelope = 5.0 * np.sqrt(delta) * np.log2(max(d1, 2))
    return Fact2Bounds(float(bound1), float(bound2), float(envelope))


def mi_from_trace_distance_bound(eps: float, d_A: int) -> float:
    """log2(d_A) eps + eps log2(1/eps), with 0 at eps = 0"""
    if eps <= 0.0:
        return 0.0
    return float(np.log2(d_A) * eps + eps * np.log2(1.0 / eps))


def pinsker_bound(mi: float) -> float:
    """Upper bound sqrt((ln2 / 2) I) on half the trace distance to the product of marginals"""
    return float(np.sqrt(max(mi, 0.0) * np.log(2.0) / 2.0))


def fact1_fidelity_bound(cmi: float) -> float:
    """Fidelity 2^{-cmi/2} reachable by the best rotated Petz recovery"""
    return float(2.0 ** (-max(cmi, 0.0) / 2.0))


def fact1_bures_bound(cmi: float) -> float:
    """sqrt(ln2 cmi), an upper bound on the Bures distance of that recovery"""
    return float(np.sqrt(np.log(2.0) * max(cmi, 0.0)))
