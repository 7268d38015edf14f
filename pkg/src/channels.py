# Kraus instruments, channel algebra and recovery maps (Petz, rotated Petz, stitching)

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from utils.config import Config
from utils.exceptions import (
    DimensionCap,
    InvalidState,
    NotCompletelyPositive,
    PartitionInvalid,
    SupportMismatch,
)
from utils.validators import InputValidator

from .linalg import as_cmatrix, complex_power_on_support, psd_spectrum
from .states import (
    DensityMatrix,
    Region,
    RegionPartition,
    Register,
    apply_local_kraus,
    embed_matrix,
    partial_trace,
    ptrace_matrix,
    site_labels,
)

logger = logging.getLogger(__name__)


# -- vectorization (column stacking: vec(A X B) = (B^T kron A) vec(X)) ---------


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """
    Linear map on d x d operators as a d^2 x d^2 matrix in the column-stacking basis
    """

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        M = as_cmatrix(self.matrix)
        if M.shape != (self.dim ** 2, self.dim ** 2):
            raise SupportMismatch(f"superoperator shape {M.shape} does not match dimension {self.dim}")
        object.__setattr__(self, "matrix", M)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(np.eye(dim * dim, dtype=complex), dim)

    @classmethod
    def from_kraus(cls, kraus_ops: Sequence[np.ndarray]) -> "Superoperator":
        dim = kraus_ops[0].shape[0]
        S = sum(np.kron(F.conj(), F) for F in kraus_ops)
        return cls(S, dim)

    @classmethod
    def from_left_right(cls, left: np.ndarray, right: np.ndarray) -> "Superoperator":
        """X -> left @ X @ right"""
        return cls(np.kron(right.T, left), left.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(X), self.dim)

    def compose(self, first: "Superoperator") -> "Superoperator":
        """self o first"""
        return Superoperator(self.matrix @ first.matrix, self.dim)

    def adjoint(self) -> "Superoperator":
        """Hilbert-Schmidt adjoint"""
        return Superoperator(self.matrix.conj().T, self.dim)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix + other.matrix, self.dim)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix - other.matrix, self.dim)

    def scaled(self, factor: complex) -> "Superoperator":
        return Superoperator(factor * self.matrix, self.dim)

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij |i><j| (x) Phi(|i><j|), input factor first"""
        d = self.dim
        S4 = self.matrix.reshape(d, d, d, d)
        return S4.transpose(3, 1, 2, 0).reshape(d * d, d * d)

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def expm(self, t: float) -> "Superoperator":
        return Superoperator(sla.expm(t * self.matrix), self.dim)


def kraus_from_choi(choi: np.ndarray, dim: int) -> List[np.ndarray]:
    """Kraus operators from a PSD Choi matrix; raises NotCompletelyPositive otherwise"""
    J = (choi + choi.conj().T) / 2
    values, vectors = np.linalg.eigh(J)
    scale = max(values.max(), 1.0)
    if values.min() < -Config.CHOI_TOL * scale:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {values.min():.3e}")
    kraus = []
    for lam, v in zip(values, vectors.T):
        if lam > Config.SUPPORT_TOL * scale:
            kraus.append(np.sqrt(lam) * v.reshape(dim, dim).T)
    if not kraus:
        kraus.append(np.zeros((dim, dim), dtype=complex))
    return kraus


# -- instruments and trajectories ----------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausInstrument:
    """
    Kraus operators on a support region; a channel when trace preserving,
    a measurement instrument with one trajectory per operator otherwise
    """

    support: Region
    kraus_ops: Tuple[np.ndarray, ...]
    scale: float = 1.0
    trace_preserving: bool = field(init=False, default=False)

    def __post_init__(self):
        ops = tuple(as_cmatrix(F) for F in self.kraus_ops)
        if not ops:
            raise SupportMismatch("an instrument needs at least one Kraus operator")
        ok, tp, message = InputValidator.validate_kraus_completeness(ops, self.support.dim)
        if not ok:
            raise SupportMismatch(message)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "trace_preserving", tp)

    def __len__(self) -> int:
        return len(self.kraus_ops)

    def as_channel(self) -> "ChannelMap":
        return ChannelMap(self.support, self.support, self.support, np.stack(self.kraus_ops))


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Outcomes (p_k, sigma_k) of an instrument; indices refer to the Kraus list"""

    probabilities: Tuple[float, ...]
    states: Tuple[DensityMatrix, ...]
    kraus_indices: Tuple[int, ...]
    total_probability: float

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.probabilities, self.states))

    def average(self) -> np.ndarray:
        """sum_k p_k sigma_k as an operator"""
        return sum(p * s.matrix for p, s in zip(self.probabilities, self.states))


def apply_instrument(rho: DensityMatrix, inst: KrausInstrument) -> TrajectoryEnsemble:
    """
    Per-outcome trajectories sigma_k = F_k rho F_k^dagger / p_k

    Outcomes with p_k below OUTCOME_DROP_TOL are dropped. Probabilities are
    renormalized only for trace-preserving instruments, so a postselection
    keeps its success probability.

    Args:
        rho: Input state
        inst: Instrument supported inside rho's register

    Returns:
        TrajectoryEnsemble: Surviving outcomes
    """
    positions = _support_positions(rho.register, inst.support)
    probabilities, states, indices = [], [], []
    for k, F in enumerate(inst.kraus_ops):
        M = apply_local_kraus(rho.matrix, rho.register.site_dims, positions, [F])
        p = float(np.trace(M).real)
        if p < Config.OUTCOME_DROP_TOL:
            continue
        probabilities.append(p)
        states.append(DensityMatrix.from_operator(rho.register, M))
        indices.append(k)
    if not states:
        raise InvalidState("every instrument outcome has zero probability on this state")

    total = float(sum(probabilities))
    if inst.trace_preserving:
        probabilities = [p / total for p in probabilities]
    return TrajectoryEnsemble(tuple(probabilities), tuple(states), tuple(indices), total)


def complete_to_channel(op: np.ndarray, support: Region) -> KrausInstrument:
    """
    Two-outcome instrument {op, sqrt(1 - op^dagger op)}

    Contractions are used as given; larger operators are rescaled by their
    operator norm and the scale recorded.

    Args:
        op: Operator on the support
        support: Region it acts on

    Returns:
        KrausInstrument: Trace-preserving completion
    """
    op = as_cmatrix(op)
    scale = float(np.linalg.norm(op, 2))
    if scale > 1.0:
        op = op / scale
    else:
        scale = 1.0
    residual = np.eye(op.shape[0]) - op.conj().T @ op
    residual = (residual + residual.conj().T) / 2
    values, vectors = np.linalg.eigh(residual)
    values = np.clip(values, 0.0, None)
    second = (vectors * np.sqrt(values)) @ vectors.conj().T
    return KrausInstrument(support, (op, second), scale=scale)


# -- channel maps ----------------------------------------------------------------


def _support_positions(register: Register, support: Region) -> List[int]:
    try:
        positions = register.positions(support.sites)
    except Exception as e:
        raise SupportMismatch(str(e))
    dims = tuple(register.site_dims[i] for i in positions)
    if dims != support.dims:
        raise SupportMismatch(f"support dims {support.dims} do not match register dims {dims}")
    return positions


def _union_register(*regions: Region) -> Register:
    """Register over the union of labels of several regions (dims and coords taken from them)"""
    table = {}
    for region in regions:
        reg = region.register
        for label in region.sites:
            i = reg.positions([label])[0]
            table[label] = (reg.site_dims[i], reg.coords[i])
    labels = tuple(sorted(table))
    return Register(
        tuple(table[x][0] for x in labels),
        coords=tuple(table[x][1] for x in labels),
        labels=labels,
    )


@dataclass(frozen=True, eq=False)
class ChannelMap:
    """
    Completely positive map in Kraus form on the union of its input and
    output regions

    Sites in output but not in input are overwritten: the map reads only the
    input region. Trace-non-increasing maps (Petz maps of rank-deficient
    marginals) are allowed and flagged.
    """

    input_region: Region
    output_region: Region
    support: Region
    kraus_ops: np.ndarray
    trace_preserving: bool = field(init=False, default=False)

    def __post_init__(self):
        ops = np.asarray(self.kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        d = self.support.dim
        if ops.shape[1:] != (d, d):
            raise SupportMismatch(f"Kraus shape {ops.shape[1:]} does not match support dimension {d}")
        ok, tp, message = InputValidator.validate_kraus_completeness(ops, d)
        if not ok:
            raise NotCompletelyPositive(message)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "trace_preserving", tp)

    @classmethod
    def from_superoperator(cls, support: Region, superop: Superoperator,
                           input_region: Optional[Region] = None,
                           output_region: Optional[Region] = None) -> "ChannelMap":
        if superop.dim != support.dim:
            raise SupportMismatch("superoperator dimension does not match support")
        kraus = kraus_from_choi(superop.choi(), superop.dim)
        return cls(input_region or support, output_region or support, support, np.stack(kraus))

    @property
    def n_kraus(self) -> int:
        return self.kraus_ops.shape[0]

    def apply_matrix(self, register: Register, M: np.ndarray) -> np.ndarray:
        """Apply (map on support) x identity to a raw operator on register"""
        positions = _support_positions(register, self.support)
        return apply_local_kraus(M, register.site_dims, positions, self.kraus_ops)

    def apply(self, rho: DensityMatrix, renormalize: bool = False) -> DensityMatrix:
        """
        Apply the map to a state

        Args:
            rho: State on a register containing the support
            renormalize: Divide by the output trace (trajectory contexts only)

        Returns:
            DensityMatrix: Output state
        """
        out = self.apply_matrix(rho.register, rho.matrix)
        if renormalize:
            return DensityMatrix.from_operator(rho.register, out)
        return DensityMatrix(rho.register, (out + out.conj().T) / 2)

    def superoperator(self) -> Superoperator:
        if self.support.dim > Config.MAX_SUPEROPERATOR_DIMENSION:
            raise DimensionCap(
                f"superoperator of a {self.support.dim}-dimensional support exceeds the cap "
                f"{Config.MAX_SUPEROPERATOR_DIMENSION}"
            )
        return Superoperator.from_kraus(list(self.kraus_ops))

    def choi_min_eigenvalue(self) -> float:
        J = self.superoperator().choi()
        return float(np.linalg.eigvalsh((J + J.conj().T) / 2).min())

    def embed(self, register: Register) -> "ChannelMap":
        """Same map addressed on a larger register holding the support labels"""
        _support_positions(register, self.support)
        return ChannelMap(
            Region(register, self.input_region.sites),
            Region(register, self.output_region.sites),
            Region(register, self.support.sites),
            self.kraus_ops,
        )


def _kraus_on(channel: ChannelMap, union: Register) -> List[np.ndarray]:
    positions = union.positions(channel.support.sites)
    return [embed_matrix(F, union.site_dims, positions) for F in channel.kraus_ops]


def compose(second: ChannelMap, first: ChannelMap) -> ChannelMap:
    """
    second o first on the union of both supports

    Args:
        second: Map applied last
        first: Map applied first

    Returns:
        ChannelMap: Composite with Kraus set {G_j F_i}
    """
    union = _union_register(second.support, first.support)
    outer = _kraus_on(second, union)
    inner = _kraus_on(first, union)
    kraus = np.stack([G @ F for G in outer for F in inner])
    region = union.all_sites()
    return ChannelMap(
        Region(union, first.input_region.sites + second.input_region.sites),
        Region(union, first.output_region.sites + second.output_region.sites),
        region,
        kraus,
    )


def embed(channel: ChannelMap, register: Register) -> ChannelMap:
    return channel.embed(register)


def superoperator_of(channel: ChannelMap) -> Superoperator:
    return channel.superoperator()


@dataclass(frozen=True, eq=False)
class ChannelSequence:
    """Local maps applied in order; used where composing Kraus sets would blow up"""

    channels: Tuple[ChannelMap, ...]

    def apply_matrix(self, register: Register, M: np.ndarray) -> np.ndarray:
        for channel in self.channels:
            M = channel.apply_matrix(register, M)
        return M

    def apply(self, rho: DensityMatrix, renormalize: bool = False) -> DensityMatrix:
        out = self.apply_matrix(rho.register, rho.matrix)
        if renormalize:
            return DensityMatrix.from_operator(rho.register, out)
        return DensityMatrix(rho.register, (out + out.conj().T) / 2)

    @property
    def support_sites(self) -> Tuple[int, ...]:
        labels = set()
        for channel in self.channels:
            labels.update(channel.support.sites)
        return tuple(sorted(labels))


def identity_channel(region: Region) -> ChannelMap:
    return ChannelMap(region, region, region, np.eye(region.dim, dtype=complex)[None])


def unitary_channel(U: np.ndarray, region: Region) -> ChannelMap:
    return ChannelMap(region, region, region, as_cmatrix(U)[None])


def depolarizing_channel(region: Region, p: float = 1.0) -> ChannelMap:
    """
    rho -> (1 - p) rho + p Tr_A(rho) (x) 1_A / d_A; p = 1 is full replacement

    Args:
        region: Sites A being depolarized
        p: Depolarizing weight in [0, 1]

    Returns:
        ChannelMap: The channel on A
    """
    if not InputValidator.validate_probability(p):
        raise SupportMismatch(f"depolarizing weight {p} outside [0, 1]")
    d = region.dim
    kraus = []
    if p < 1.0:
        kraus.append(np.sqrt(1.0 - p) * np.eye(d, dtype=complex))
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = np.sqrt(p / d)
            kraus.append(E)
    return ChannelMap(region, region, region, np.stack(kraus))


def replacement_channel(region: Region, tau: np.ndarray) -> ChannelMap:
    """X -> Tr(X) tau on the region"""
    spectrum = psd_spectrum(tau)
    d = region.dim
    kraus = []
    for lam, v in zip(spectrum.eigenvalues, spectrum.eigenvectors.T):
        if lam <= Config.SUPPORT_TOL:
            continue
        for j in range(d):
            K = np.zeros((d, d), dtype=complex)
            K[:, j] = np.sqrt(lam) * v
            kraus.append(K)
    return ChannelMap(region, region, region, np.stack(kraus))


# -- recovery maps -----------------------------------------------------------------


def rotated_petz_family(rho_BC: DensityMatrix, traced, t: float = 0.0) -> ChannelMap:
    """
    Rotated Petz map for rho_BC and the partial trace over C

    R_t = U_{rho_BC, -t} o P o U_{rho_B, t} with U_{s,t}(X) = s^{it} X s^{-it},
    and P(X_B) = rho_BC^{1/2} (rho_B^{-1/2} X_B rho_B^{-1/2} (x) 1_C) rho_BC^{1/2}.
    Inverses are taken on supports. The returned map acts on BC and reads
    only B.

    Args:
        rho_BC: State on the sites B and C
        traced: Sites C (Region or labels) regenerated by the map
        t: Rotation parameter, 0 for the plain Petz map

    Returns:
        ChannelMap: Input region B, output region BC
    """
    register = rho_BC.register
    c_sites = site_labels(traced)
    c_positions = register.positions(c_sites)
    b_sites = tuple(x for x in register.labels if x not in c_sites)
    b_positions = register.positions(b_sites)
    dims = register.site_dims

    spectrum_BC = psd_spectrum(rho_BC.matrix)
    left = complex_power_on_support(spectrum_BC, 0.5 - 1j * t)

    if b_sites:
        rho_B = ptrace_matrix(rho_BC.matrix, dims, b_positions)
        middle_B = complex_power_on_support(psd_spectrum(rho_B), -0.5 + 1j * t)
        middle = embed_matrix(middle_B, dims, b_positions)
    else:
        middle = np.eye(register.dim, dtype=complex)
    base = left @ middle

    dC = int(np.prod([dims[i] for i in c_positions])) if c_sites else 1
    kraus = []
    for c in range(dC):
        for c_prime in range(dC):
            E = np.zeros((dC, dC), dtype=complex)
            E[c, c_prime] = 1.0
            kraus.append(base @ embed_matrix(E, dims, c_positions) if c_sites else base)
    return ChannelMap(
        register.region(b_sites),
        register.all_sites(),
        register.all_sites(),
        np.stack(kraus),
    )


def petz_map(rho_BC: DensityMatrix, traced) -> ChannelMap:
    """Petz recovery map B -> BC for rho_BC and Tr_C"""
    return rotated_petz_family(rho_BC, traced, 0.0)


def stitch_then_recover(rho: DensityMatrix, part: RegionPartition, t: float = 0.0) -> ChannelMap:
    """
    Buffered recovery channel R = P o Tr_{AB1}

    P is the (rotated) Petz map B2 -> AB1B2 built from rho_{AB1B2}; the
    channel acts on AB1B2 and reads only B2.

    Args:
        rho: Reference state on the full register
        part: Partition with regions A, B1, B2, C
        t: Petz rotation parameter

    Returns:
        ChannelMap: Recovery channel supported on A B1 B2
    """
    part.require("A", "B1", "B2", "C")
    if part["A"].is_empty:
        raise PartitionInvalid("region A must be nonempty")
    support = part.union("A", "B1", "B2")
    marginal = partial_trace(rho, support)
    logger.debug("stitch recovery on sites %s reading %s", support.sites, part["B2"].sites)
    return rotated_petz_family(marginal, part.union("A", "B1").sites, t)
