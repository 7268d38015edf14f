# Detailed-balance Lindbladians: Davies generators, gaps, convergence and detectability-lemma recovery

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from utils.config import Config
from utils.exceptions import (
    DimensionCap,
    NotCommuting,
    NotDetailedBalanced,
    NotLocallyBalanced,
    ParamsOutOfRange,
)

from .channels import KrausInstrument, Superoperator, apply_instrument, unvec, vec
from .fitting import DecayFit, fit_log_decay
from .info import DivergenceParams, alpha_z_divergence
from .linalg import as_cmatrix, psd_spectrum
from .states import DensityMatrix, Register, Sites, embed_operator, operator_trace_distance, site_labels

logger = logging.getLogger(__name__)

BALANCE_KINDS = ("GNS", "KMS")


def _check_kind(kind: str) -> str:
    kind = kind.upper()
    if kind not in BALANCE_KINDS:
        raise ParamsOutOfRange(f"balance kind {kind!r} is not one of {BALANCE_KINDS}")
    return kind


# -- superoperator building blocks -----------------------------------------------


def hamiltonian_part(H: np.ndarray) -> Superoperator:
    """X -> -i [H, X]"""
    H = as_cmatrix(H)
    eye = np.eye(H.shape[0])
    return Superoperator(-1j * (np.kron(eye, H) - np.kron(H.T, eye)), H.shape[0])


def dissipator(J: np.ndarray, rate: float = 1.0) -> Superoperator:
    """X -> rate (J X J^dagger - {J^dagger J, X} / 2)"""
    J = as_cmatrix(J)
    eye = np.eye(J.shape[0])
    JdJ = J.conj().T @ J
    matrix = np.kron(J.conj(), J) - 0.5 * np.kron(eye, JdJ) - 0.5 * np.kron(JdJ.T, eye)
    return Superoperator(rate * matrix, J.shape[0])


def gamma_superoperator(rho: np.ndarray, kind: str, power: float = 1.0) -> Superoperator:
    """
    Gamma^power for the GNS (X -> X rho) or KMS (X -> rho^{1/2} X rho^{1/2}) inner product

    Args:
        rho: Full-rank reference state
        kind: "GNS" or "KMS"
        power: Exponent of Gamma (negative powers need full rank)

    Returns:
        Superoperator: Gamma^power
    """
    kind = _check_kind(kind)
    spectrum = psd_spectrum(rho)
    if power < 0 and spectrum.eigenvalues.min() <= Config.SUPPORT_TOL:
        raise NotDetailedBalanced("inverse powers of Gamma need a full-rank reference state")
    d = spectrum.eigenvalues.shape[0]
    if kind == "GNS":
        right = spectrum.apply(lambda lam: lam ** power)
        return Superoperator.from_left_right(np.eye(d), right)
    half = spectrum.apply(lambda lam: lam ** (power / 2.0))
    return Superoperator.from_left_right(half, half)


def balance_residual(L: Superoperator, rho: np.ndarray, kind: str) -> float:
    """||L Gamma - Gamma L^dagger||_2 / ||L||_2"""
    G = gamma_superoperator(rho, kind).matrix
    M = L.matrix
    scale = np.linalg.norm(M) or 1.0
    return float(np.linalg.norm(M @ G - G @ M.conj().T) / scale)


def replacement_generator(rho: np.ndarray, rate: float = 1.0) -> Superoperator:
    """X -> rate (Tr(X) rho - X), depolarizing towards rho"""
    rho = as_cmatrix(rho)
    d = rho.shape[0]
    matrix = np.outer(vec(rho), vec(np.eye(d)).conj()) - np.eye(d * d)
    return Superoperator(rate * matrix, d)


def dephasing_generator(register: Register, sites: Sites, rate: float = 1.0) -> Superoperator:
    """X -> rate sum_s (Z_s X Z_s - X) on qubit sites"""
    Z = np.diag([1.0, -1.0]).astype(complex)
    d = register.dim
    total = np.zeros((d * d, d * d), dtype=complex)
    for s in site_labels(sites):
        Zs = embed_operator(Z, register, [s])
        total += np.kron(Zs.conj(), Zs) - np.eye(d * d)
    return Superoperator(rate * total, d)


# -- models -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """
    Generator L with the reference state it is detailed balanced against

    local_terms are the generators L_i whose sum is L (one per coupling for
    Davies models) and term_supports the sites each one acts on.
    """

    register: Register
    generator: Superoperator
    reference: DensityMatrix
    balance_kind: str = "GNS"
    beta: float = 0.0
    hamiltonian: Optional[np.ndarray] = None
    local_terms: Tuple[Superoperator, ...] = ()
    term_supports: Tuple[Tuple[int, ...], ...] = ()
    commuting: bool = False
    degenerate_frequencies: bool = False
    name: str = ""

    @property
    def dim(self) -> int:
        return self.register.dim

    @cached_property
    def _singular_values(self) -> Tuple[np.ndarray, np.ndarray]:
        _, s, Vh = sla.svd(self.generator.matrix)
        return s, Vh

    @cached_property
    def steady_state(self) -> DensityMatrix:
        """Kernel vector of L as a state"""
        _, Vh = self._singular_values
        X = unvec(Vh[-1].conj(), self.dim)
        X = (X + X.conj().T) / 2
        X = X / np.trace(X)
        return DensityMatrix.from_operator(self.register, X, provenance=f"steady({self.name})")

    @property
    def is_primitive(self) -> bool:
        """One-dimensional kernel: second-smallest singular value above 1e-8"""
        s, _ = self._singular_values
        return bool(s[-2] > 1e-8)

    @property
    def steady_residual(self) -> float:
        return float(np.linalg.norm(self.generator.apply(self.reference.matrix)))

    @property
    def balance_residual(self) -> float:
        return balance_residual(self.generator, self.reference.matrix, self.balance_kind)

    @cached_property
    def gap(self) -> float:
        return spectral_gap(self).gap

    def with_generator(self, extra: Superoperator, name: str = "") -> "LindbladModel":
        """The same model with another generator added (its steady state is recomputed)"""
        return replace(self, generator=self.generator + extra,
                       local_terms=(), term_supports=(),
                       name=name or f"{self.name}+extra")


def _cluster(values: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Labels grouping sorted values within tol, cluster means, and whether any cluster was blurred"""
    order = np.argsort(values, kind="stable")
    labels = np.empty(values.shape[0], dtype=int)
    centers: List[List[float]] = []
    blurred = False
    previous = None
    for idx in order:
        v = values[idx]
        if previous is None or v - previous > tol:
            centers.append([v])
        else:
            centers[-1].append(v)
        labels[idx] = len(centers) - 1
        previous = v
    means = np.array([np.mean(c) for c in centers])
    for c in centers:
        if max(c) - min(c) > 1e-12:
            blurred = True
    return labels, means, blurred


def _gibbs(energies: np.ndarray, vectors: np.ndarray, beta: float) -> np.ndarray:
    weights = np.exp(-beta * (energies - energies.min()))
    weights /= weights.sum()
    return (vectors * weights) @ vectors.conj().T


def davies_generator(H, couplings: Sequence[Tuple[Sites, np.ndarray]], beta: float,
                     register: Optional[Register] = None) -> LindbladModel:
    """
    Davies-type Gibbs sampler for H

    Each coupling S is split into Bohr-frequency components S(w) that raise
    the energy by w, with rates gamma(w) = exp(-beta w / 2). Without the
    coherent part the generator is GNS detailed balanced w.r.t. the Gibbs state.

    Args:
        H: Hamiltonian matrix, or a local Hamiltonian with matrix/register/terms
        couplings: (sites, operator) pairs
        beta: Inverse temperature
        register: Register for a bare matrix (a qubit chain by default)

    Returns:
        LindbladModel: GNS model with one local term per coupling
    """
    if beta < 0:
        raise ParamsOutOfRange(f"beta={beta} must be nonnegative")
    matrix = as_cmatrix(getattr(H, "matrix", H))
    register = getattr(H, "register", register)
    if register is None:
        register = Register.chain(int(round(np.log2(matrix.shape[0]))))
    d = register.dim
    if d > Config.MAX_SUPEROPERATOR_DIMENSION:
        raise DimensionCap(f"Davies generator of dimension {d} above {Config.MAX_SUPEROPERATOR_DIMENSION}")

    energies, V = sla.eigh((matrix + matrix.conj().T) / 2)
    gains = energies[:, None] - energies[None, :]  # [j, i]: energy gained going i -> j
    labels, omegas, blurred = _cluster(gains.ravel(), Config.FREQUENCY_TOL)
    labels = labels.reshape(d, d)
    if blurred:
        logger.warning("near-degenerate Bohr frequencies merged within %.1e", Config.FREQUENCY_TOL)
    logger.debug("davies generator: %d Bohr frequencies for dimension %d", len(omegas), d)

    terms, supports = [], []
    hamiltonian_terms = getattr(H, "terms", ())
    for sites, S in couplings:
        sites = site_labels(sites)
        S_eigen = V.conj().T @ embed_operator(S, register, sites) @ V
        term = np.zeros((d * d, d * d), dtype=complex)
        for c, omega in enumerate(omegas):
            mask = labels == c
            if not np.any(np.abs(S_eigen[mask]) > 0):
                continue
            A = V @ np.where(mask, S_eigen, 0.0) @ V.conj().T
            term += dissipator(A, float(np.exp(-beta * omega / 2.0))).matrix
        terms.append(Superoperator(term, d))
        reach = set(sites)
        for term_sites, _ in hamiltonian_terms:
            if not reach.isdisjoint(term_sites):
                reach.update(term_sites)
        supports.append(tuple(sorted(reach)) if hamiltonian_terms else tuple(register.labels))

    total = Superoperator(sum(t.matrix for t in terms), d)
    commuting = bool(hamiltonian_terms) and bool(getattr(H, "is_commuting", lambda: False)())
    reference = DensityMatrix(register, _gibbs(energies, V, beta), provenance=f"gibbs(beta={beta})")
    return LindbladModel(register, total, reference, "GNS", beta, matrix, tuple(terms),
                         tuple(supports), commuting, blurred, f"davies(beta={beta})")


def replacement_model(rho: DensityMatrix, rate: float = 1.0, kind: str = "GNS") -> LindbladModel:
    """Model of the depolarize-to-rho generator; every nonzero eigenvalue equals -rate"""
    return LindbladModel(rho.register, replacement_generator(rho.matrix, rate), rho,
                         _check_kind(kind), name=f"replacement(rate={rate})")


# -- gap ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    """Gap from the symmetrized generator and from the raw spectrum"""

    symmetrized: float
    raw: float
    hermiticity_residual: float

    @property
    def gap(self) -> float:
        return self.symmetrized

    @property
    def agree(self) -> bool:
        return abs(self.symmetrized - self.raw) <= 1e-7 * max(1.0, abs(self.symmetrized))


def symmetrized_generator(L: Superoperator, rho: np.ndarray, kind: str) -> np.ndarray:
    """-Gamma^{-1/2} L Gamma^{1/2}, Hermitian exactly when L is detailed balanced"""
    inv_half = gamma_superoperator(rho, kind, -0.5).matrix
    half = gamma_superoperator(rho, kind, 0.5).matrix
    return -inv_half @ L.matrix @ half


def spectral_gap(model: LindbladModel) -> GapReport:
    """
    Second-smallest eigenvalue of the symmetrized generator

    Args:
        model: Detailed-balanced model with a full-rank reference state

    Returns:
        GapReport: Symmetrized and raw-spectrum gaps
    """
    S = symmetrized_generator(model.generator, model.reference.matrix, model.balance_kind)
    scale = np.linalg.norm(S) or 1.0
    residual = float(np.linalg.norm(S - S.conj().T) / scale)
    if residual > Config.BALANCE_TOL:
        raise NotDetailedBalanced(f"symmetrized generator is not Hermitian: residual {residual:.3e}")
    values = np.sort(np.linalg.eigvalsh((S + S.conj().T) / 2))
    raw = np.sort(-np.linalg.eigvals(model.generator.matrix).real)
    report = GapReport(float(values[1]), float(raw[1]), residual)
    if not report.agree:
        logger.warning("gap estimates disagree: symmetrized %.6e raw %.6e", report.symmetrized, report.raw)
    return report


# -- evolution and convergence --------------------------------------------------------


def evolve(model: LindbladModel, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """e^{L t}(rho0) by a dense matrix exponential"""
    out = model.generator.expm(t).apply(rho0.matrix)
    return DensityMatrix(rho0.register, (out + out.conj().T) / 2, provenance=f"evolved(t={t})")


def variance(rho: DensityMatrix, O: np.ndarray, kind: str) -> float:
    """Var_rho(O) = Tr(O^dagger Gamma(O)) - |Tr(O rho)|^2"""
    O = as_cmatrix(O)
    G = gamma_superoperator(rho.matrix, kind)
    value = np.trace(O.conj().T @ G.apply(O)) - abs(np.trace(O @ rho.matrix)) ** 2
    return float(value.real)


def _renyi2(rho_tilde: DensityMatrix, rho: DensityMatrix, kind: str) -> float:
    params = DivergenceParams.petz(2.0) if _check_kind(kind) == "GNS" else DivergenceParams.sandwiched(2.0)
    return alpha_z_divergence(rho_tilde, rho, params)


@dataclass(frozen=True)
class PrefactorIdentity:
    """Three evaluations of Var_rho(Gamma^{-1}(rho~) - 1)"""

    variance_form: float
    trace_form: float
    divergence_form: float

    @property
    def spread(self) -> float:
        forms = (self.variance_form, self.trace_form, self.divergence_form)
        return float(max(forms) - min(forms))


def prefactor_identity(rho_tilde: DensityMatrix, rho: DensityMatrix, kind: str = "GNS") -> PrefactorIdentity:
    """
    Var_rho(Gamma^{-1}(rho~) - 1) directly, as Tr(rho~ Gamma^{-1}(rho~)) - 1, and as 2^{D_2} - 1

    Args:
        rho_tilde: Initial state
        rho: Full-rank reference state
        kind: "GNS" (Petz D_2) or "KMS" (sandwiched D_2)

    Returns:
        PrefactorIdentity: The three values
    """
    kind = _check_kind(kind)
    inverse = gamma_superoperator(rho.matrix, kind, -1.0).apply(rho_tilde.matrix)
    shifted = inverse - np.eye(rho.dim)
    direct = variance(rho, shifted, kind)
    trace_form = float(np.trace(rho_tilde.matrix @ inverse).real) - 1.0
    divergence_form = float(2.0 ** _renyi2(rho_tilde, rho, kind)) - 1.0
    return PrefactorIdentity(direct, trace_form, divergence_form)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Distance to the steady state along a time grid against the variance envelope"""

    times: Tuple[float, ...]
    errors: Tuple[float, ...]
    fit: DecayFit
    gap: float
    prefactor: float

    @property
    def envelope(self) -> Tuple[float, ...]:
        return tuple(self.prefactor * np.exp(-self.gap * t) for t in self.times)

    @property
    def bound_constant(self) -> float:
        """Smallest K with error <= K prefactor e^{-gap t} on the grid"""
        ratios = [e / b for e, b in zip(self.errors, self.envelope) if b > 0]
        return float(max(ratios)) if ratios else 0.0

    @property
    def rate_ok(self) -> bool:
        if self.fit.flag == "floor":
            return True
        return self.fit.flag == "ok" and self.fit.rate >= 0.9 * self.gap

    @property
    def holds(self) -> bool:
        return all(e <= b * (1 + 1e-6) + 1e-10 for e, b in zip(self.errors, self.envelope))


def convergence_check(model: LindbladModel, rho0: DensityMatrix,
                      t_grid: Sequence[float]) -> ConvergenceReport:
    """
    ||e^{Lt}(rho0) - rho||_1 on a time grid with its decay fit and envelope

    The envelope is sqrt(2^{D_2(rho0||rho)} - 1) e^{-gap t}, D_2 Petz for GNS
    models and sandwiched for KMS ones.

    Args:
        model: Detailed-balanced model
        rho0: Initial state
        t_grid: Times

    Returns:
        ConvergenceReport: Errors, fit, gap and prefactor
    """
    target = model.reference
    times = tuple(float(t) for t in t_grid)
    errors = tuple(operator_trace_distance(evolve(model, rho0, t).matrix, target.matrix) for t in times)
    fit = fit_log_decay(times, errors)
    gap = model.gap
    identity = prefactor_identity(rho0, target, model.balance_kind)
    prefactor = float(np.sqrt(max(identity.trace_form, 0.0)))
    logger.debug("convergence: fitted rate %.4f gap %.4f prefactor %.3e", fit.rate, gap, prefactor)
    return ConvergenceReport(times, errors, fit, gap, prefactor)


@dataclass(frozen=True)
class VarianceDecay:
    times: Tuple[float, ...]
    variances: Tuple[float, ...]
    bounds: Tuple[float, ...]

    @property
    def holds(self) -> bool:
        return all(v <= b * (1 + 1e-6) + 1e-12 for v, b in zip(self.variances, self.bounds))


def variance_decay_check(model: LindbladModel, O: np.ndarray, t_grid: Sequence[float]) -> VarianceDecay:
    """Var_rho(e^{L^dagger t} O) against Var_rho(O) e^{-2 gap t}"""
    rho, kind = model.reference, model.balance_kind
    adjoint = model.generator.adjoint()
    start = variance(rho, O, kind)
    times = tuple(float(t) for t in t_grid)
    variances = tuple(variance(rho, adjoint.expm(t).apply(O), kind) for t in times)
    bounds = tuple(start * np.exp(-2.0 * model.gap * t) for t in times)
    return VarianceDecay(times, variances, bounds)


# -- imaginary-time dressing -------------------------------------------------------------


def imaginary_time_dressing_norm(H, F: np.ndarray, beta: float, sites: Optional[Sites] = None,
                                 register: Optional[Register] = None) -> float:
    """
    ||e^{beta H/2} F e^{-beta H/2}||_inf

    Args:
        H: Hamiltonian matrix, or a local Hamiltonian with matrix/register
        F: Operator, on `sites` when given
        beta: Inverse temperature
        sites: Optional labels F acts on
        register: Register for a bare matrix

    Returns:
        float: Operator norm of the dressed operator
    """
    matrix = as_cmatrix(getattr(H, "matrix", H))
    register = getattr(H, "register", register)
    if sites is not None:
        if register is None:
            register = Register.chain(int(round(np.log2(matrix.shape[0]))))
        F = embed_operator(F, register, sites)
    energies, V = sla.eigh((matrix + matrix.conj().T) / 2)
    shift = energies - energies.mean()
    up = (V * np.exp(beta * shift / 2.0)) @ V.conj().T
    down = (V * np.exp(-beta * shift / 2.0)) @ V.conj().T
    return float(np.linalg.norm(up @ as_cmatrix(F) @ down, 2))


@dataclass(frozen=True)
class DressingScan:
    """Dressing norms over beta with the smallest c such that value <= ||F|| e^{c beta |A|}"""

    betas: Tuple[float, ...]
    values: Tuple[float, ...]
    operator_norm: float
    region_size: int

    @property
    def constant(self) -> float:
        rates = [np.log(v / self.operator_norm) / (b * self.region_size)
                 for b, v in zip(self.betas, self.values) if b > 0]
        return float(max(rates)) if rates else 0.0


def dressing_scan(H, F: np.ndarray, sites: Sites, betas: Sequence[float]) -> DressingScan:
    values = tuple(imaginary_time_dressing_norm(H, F, b, sites) for b in betas)
    return DressingScan(tuple(float(b) for b in betas), values,
                        float(np.linalg.norm(as_cmatrix(F), 2)), len(site_labels(sites)))


# -- detectability-lemma recovery ----------------------------------------------------------


def kernel_projector(term: Superoperator, rho: np.ndarray, kind: str = "GNS") -> Superoperator:
    """Spectral projector onto ker(L_i), the t -> inf limit of e^{L_i t}"""
    S = symmetrized_generator(term, rho, kind)
    S = (S + S.conj().T) / 2
    values, vectors = np.linalg.eigh(S)
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    kernel = vectors[:, np.abs(values) < Config.KERNEL_TOL * scale]
    Q = kernel @ kernel.conj().T
    half = gamma_superoperator(rho, kind, 0.5).matrix
    inv_half = gamma_superoperator(rho, kind, -0.5).matrix
    return Superoperator(half @ Q @ inv_half, term.dim)


def assign_layers(supports: Sequence[Tuple[int, ...]]) -> Tuple[Tuple[int, ...], ...]:
    """Greedy layering: each term joins the first layer it does not overlap"""
    layers: List[List[int]] = []
    occupied: List[set] = []
    for index, support in enumerate(supports):
        for layer, used in zip(layers, occupied):
            if used.isdisjoint(support):
                layer.append(index)
                used.update(support)
                break
        else:
            layers.append([index])
            occupied.append(set(support))
    return tuple(tuple(layer) for layer in layers)


@dataclass(frozen=True, eq=False)
class DLRecovery:
    """
    Tower of kernel projectors inside the light cone of A

    sequence lists term indices in application order; layers is the layer
    assignment the tower was stacked from.
    """

    projectors: Tuple[Superoperator, ...]
    layers: Tuple[Tuple[int, ...], ...]
    depth: int
    sequence: Tuple[int, ...]
    light_cone: Tuple[int, ...]

    def apply(self, M: np.ndarray) -> np.ndarray:
        d = M.shape[0]
        v = vec(M)
        for index in self.sequence:
            v = self.projectors[index].matrix @ v
        return unvec(v, d)


def build_dl_recovery(model: LindbladModel, A: Sites, m: int) -> DLRecovery:
    """
    m rounds of the layered kernel projectors, keeping those in the light cone of A

    Args:
        model: Davies-type model of a commuting Hamiltonian
        A: Region the instrument acts on
        m: Number of rounds

    Returns:
        DLRecovery: The truncated tower
    """
    if m < 0:
        raise ParamsOutOfRange(f"tower depth {m} must be nonnegative")
    if not model.local_terms:
        raise NotLocallyBalanced("model has no local terms")
    if not model.commuting:
        raise NotCommuting(f"{model.name} is not built from a commuting Hamiltonian")
    rho = model.reference.matrix
    for index, term in enumerate(model.local_terms):
        residual = balance_residual(term, rho, "GNS")
        if residual > Config.BALANCE_TOL:
            raise NotLocallyBalanced(f"local term {index} has GNS residual {residual:.3e}")

    projectors = tuple(kernel_projector(term, rho, "GNS") for term in model.local_terms)
    layers = assign_layers(model.term_supports)
    cone = set(site_labels(A))
    sequence = []
    for _ in range(m):
        for layer in layers:
            hit = [i for i in layer if not cone.isdisjoint(model.term_supports[i])]
            for i in hit:
                cone.update(model.term_supports[i])
            sequence.extend(hit)
    logger.debug("detectability tower: depth %d, %d projectors, cone %s", m, len(sequence), sorted(cone))
    return DLRecovery(projectors, layers, m, tuple(sequence), tuple(sorted(cone)))


def detectability_recovery(model: LindbladModel, A: Sites, m: int, inst: KrausInstrument) -> float:
    """
    sum_k p_k ||R_m(sigma_k) - rho||_1 for the detectability-lemma tower R_m

    Args:
        model: Davies-type model of a commuting Hamiltonian
        A: Region holding the instrument
        m: Tower depth (0 gives the unrecovered distance)
        inst: Instrument on A

    Returns:
        float: Trajectory-averaged recovery error
    """
    recovery = build_dl_recovery(model, A, m)
    rho = model.reference
    ensemble = apply_instrument(rho, inst)
    weights = np.asarray(ensemble.probabilities) / sum(ensemble.probabilities)
    return float(sum(w * operator_trace_distance(recovery.apply(sigma.matrix), rho.matrix)
                     for w, (_, sigma) in zip(weights, ensemble)))


def detectability_scan(model: LindbladModel, A: Sites, inst: KrausInstrument,
                       depths: Sequence[int]) -> Tuple[Tuple[float, ...], DecayFit]:
    """Errors over tower depths with the fit of log error against depth"""
    errors = tuple(detectability_recovery(model, A, int(m), inst) for m in depths)
    return errors, fit_log_decay(list(depths), errors)
