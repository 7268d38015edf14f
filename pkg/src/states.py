# Qudit registers, regions, density matrices, partial traces and state distances

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.config import Config
from utils.exceptions import (
    BadRegion,
    DimensionCap,
    InvalidState,
    NotHermitian,
    PartitionInvalid,
    RegisterMismatch,
)
from utils.validators import InputValidator

from .linalg import as_cmatrix, psd_sqrt, trace_norm_hermitian

logger = logging.getLogger(__name__)

Sites = Union["Region", Iterable[int]]


@dataclass(frozen=True)
class Register:
    """
    Ordered qudit sites with persistent integer labels and lattice coordinates

    Labels are strictly increasing and survive partial traces, so a region
    named on the full register stays meaningful on any marginal. Coordinates
    default to a 1D chain at the label positions.
    """

    site_dims: Tuple[int, ...]
    coords: Optional[Tuple[Tuple[int, ...], ...]] = None
    labels: Optional[Tuple[int, ...]] = None
    cap: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        cap = self.cap if self.cap is not None else Config.MAX_DIMENSION
        ok, message = InputValidator.validate_site_dims(dims, cap)
        if not ok:
            if "exceeds cap" in message:
                raise DimensionCap(message)
            raise BadRegion(message)

        labels = tuple(range(len(dims))) if self.labels is None else tuple(int(x) for x in self.labels)
        if len(labels) != len(dims) or any(b <= a for a, b in zip(labels, labels[1:])):
            raise BadRegion(f"labels must be strictly increasing, one per site: {labels}")

        if self.coords is None:
            coords = tuple((label,) for label in labels)
        else:
            coords = tuple(tuple(int(c) for c in point) for point in self.coords)
            if len(coords) != len(dims) or len({len(c) for c in coords}) != 1:
                raise BadRegion("need one coordinate tuple of common length per site")

        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def chain(cls, n: int, d: int = 2) -> "Register":
        """n sites of dimension d on a line"""
        return cls(tuple([d] * n))

    @classmethod
    def grid(cls, rows: int, cols: int, d: int = 2) -> "Register":
        """rows x cols sites on a square lattice, row-major labels"""
        coords = tuple((r, c) for r in range(rows) for c in range(cols))
        return cls(tuple([d] * (rows * cols)), coords=coords)

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims))

    def positions(self, sites: Sites) -> List[int]:
        """Positional indices of the given site labels"""
        index = {label: i for i, label in enumerate(self.labels)}
        out = []
        for label in site_labels(sites):
            if label not in index:
                raise BadRegion(f"site {label} not in register {self.labels}")
            out.append(index[label])
        return out

    def dims_of(self, sites: Sites) -> Tuple[int, ...]:
        return tuple(self.site_dims[i] for i in self.positions(sites))

    def region(self, sites: Sites = ()) -> "Region":
        return Region(self, tuple(site_labels(sites)))

    def all_sites(self) -> "Region":
        return Region(self, self.labels)

    def subregister(self, sites: Sites) -> "Register":
        pos = self.positions(sites)
        return Register(
            tuple(self.site_dims[i] for i in pos),
            coords=tuple(self.coords[i] for i in pos),
            labels=tuple(self.labels[i] for i in pos),
            cap=self.cap,
        )

    def distance(self, a: int, b: int) -> int:
        """Chebyshev distance between two sites"""
        pa, pb = self.positions([a])[0], self.positions([b])[0]
        return int(max(abs(x - y) for x, y in zip(self.coords[pa], self.coords[pb])))

    def region_distance(self, a: Sites, b: Sites) -> int:
        """Minimum site distance between two nonempty site sets"""
        la, lb = site_labels(a), site_labels(b)
        if not la or not lb:
            raise BadRegion("distance needs two nonempty regions")
        return min(self.distance(x, y) for x in la for y in lb)

    def concat(self, other: "Register") -> "Register":
        """Append another register; its labels and first coordinate are shifted past ours"""
        label_shift = self.labels[-1] + 1 - other.labels[0]
        if len(self.coords[0]) != len(other.coords[0]):
            raise RegisterMismatch("cannot concatenate registers of different lattice dimension")
        coord_shift = max(c[0] for c in self.coords) + 1 - min(c[0] for c in other.coords)
        shifted = tuple((c[0] + coord_shift,) + tuple(c[1:]) for c in other.coords)
        return Register(
            self.site_dims + other.site_dims,
            coords=self.coords + shifted,
            labels=self.labels + tuple(x + label_shift for x in other.labels),
            cap=self.cap,
        )

    def same_layout(self, other: "Register") -> bool:
        return self.site_dims == other.site_dims and self.labels == other.labels


def site_labels(sites: Sites) -> Tuple[int, ...]:
    """Sorted duplicate-free labels of a Region or an iterable of ints"""
    if isinstance(sites, Region):
        return sites.sites
    return tuple(sorted({int(s) for s in sites}))


@dataclass(frozen=True)
class Region:
    """A sorted set of site labels of a register"""

    register: Register
    sites: Tuple[int, ...]

    def __post_init__(self):
        labels = tuple(sorted({int(s) for s in self.sites}))
        missing = [s for s in labels if s not in self.register.labels]
        if missing:
            raise BadRegion(f"sites {missing} not in register {self.register.labels}")
        object.__setattr__(self, "sites", labels)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, label) -> bool:
        return label in self.sites

    def __or__(self, other: Sites) -> "Region":
        return Region(self.register, self.sites + site_labels(other))

    def __sub__(self, other: Sites) -> "Region":
        drop = set(site_labels(other))
        return Region(self.register, tuple(s for s in self.sites if s not in drop))

    def __and__(self, other: Sites) -> "Region":
        keep = set(site_labels(other))
        return Region(self.register, tuple(s for s in self.sites if s in keep))

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.register.dims_of(self.sites)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if self.sites else 1

    @property
    def is_empty(self) -> bool:
        return not self.sites

    def isdisjoint(self, other: Sites) -> bool:
        return set(self.sites).isdisjoint(site_labels(other))

    def complement(self) -> "Region":
        return Region(self.register, tuple(s for s in self.register.labels if s not in self.sites))


@dataclass(frozen=True)
class RegionPartition:
    """Labeled disjoint regions covering a register, e.g. A, B, C or A, B1, B2, C"""

    register: Register
    regions: Tuple[Tuple[str, Region], ...]

    def __post_init__(self):
        seen = set()
        for name, region in self.regions:
            if not region.register.same_layout(self.register):
                raise PartitionInvalid(f"region {name} lives on a different register")
            overlap = seen.intersection(region.sites)
            if overlap:
                raise PartitionInvalid(f"region {name} overlaps earlier regions on {sorted(overlap)}")
            seen.update(region.sites)
        if seen != set(self.register.labels):
            raise PartitionInvalid(
                f"regions cover {sorted(seen)}, register has {list(self.register.labels)}"
            )

    @classmethod
    def from_sites(cls, register: Register, mapping: Dict[str, Sequence[int]]) -> "RegionPartition":
        """
        Build a partition from a name -> site labels mapping

        Args:
            register: Register to partition
            mapping: Ordered mapping of region names to labels

        Returns:
            RegionPartition: Validated partition
        """
        return cls(register, tuple((name, Region(register, tuple(sites))) for name, sites in mapping.items()))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.regions)

    def __getitem__(self, name: str) -> Region:
        for key, region in self.regions:
            if key == name:
                return region
        raise PartitionInvalid(f"partition has no region {name!r}; regions are {self.names}")

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def union(self, *names: str) -> Region:
        labels: Tuple[int, ...] = ()
        for name in names:
            labels += self[name].sites
        return Region(self.register, labels)

    def require(self, *names: str) -> None:
        missing = [n for n in names if n not in self.names]
        if missing:
            raise PartitionInvalid(f"partition needs regions {names}, missing {missing}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian PSD unit-trace matrix bound to a register

    Validated once on construction; the stored matrix is the symmetrized,
    read-only copy of the input.
    """

    register: Register
    matrix: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        M = as_cmatrix(self.matrix)
        if M.shape != (self.register.dim, self.register.dim):
            raise RegisterMismatch(f"matrix shape {M.shape} does not match register dimension {self.register.dim}")
        ok, message = InputValidator.validate_hermitian(M)
        if not ok:
            raise NotHermitian(message)
        M = (M + M.conj().T) / 2
        ok, message = InputValidator.validate_density_spectrum(np.linalg.eigvalsh(M), float(np.trace(M).real))
        if not ok:
            raise InvalidState(message)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_operator(cls, register: Register, matrix: np.ndarray, provenance: str = "") -> "DensityMatrix":
        """Symmetrize and normalize a PSD operator into a state"""
        M = as_cmatrix(matrix)
        M = (M + M.conj().T) / 2
        trace = float(np.trace(M).real)
        if trace <= 0:
            raise InvalidState(f"operator has non-positive trace {trace:.3e}")
        return cls(register, M / trace, provenance)

    @property
    def dim(self) -> int:
        return self.register.dim

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)[::-1]

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def expectation(self, op: np.ndarray, sites: Optional[Sites] = None) -> complex:
        """Tr(rho O), embedding O when sites are given"""
        O = embed_operator(op, self.register, sites) if sites is not None else as_cmatrix(op)
        return complex(np.trace(self.matrix @ O))

    def marginal(self, sites: Sites) -> "DensityMatrix":
        return partial_trace(self, sites)


# -- tensor index helpers -----------------------------------------------------


def _to_front(M: np.ndarray, dims: Sequence[int], positions: Sequence[int]) -> np.ndarray:
    """Reshape an operator to (dX, dR, dX, dR) with the given positions first"""
    n = len(dims)
    rest = [i for i in range(n) if i not in positions]
    order = list(positions) + rest
    dX = int(np.prod([dims[i] for i in positions])) if positions else 1
    dR = int(np.prod([dims[i] for i in rest])) if rest else 1
    T = M.reshape(tuple(dims) * 2).transpose(order + [n + i for i in order])
    return T.reshape(dX, dR, dX, dR)


def _from_front(T: np.ndarray, dims: Sequence[int], positions: Sequence[int]) -> np.ndarray:
    """Inverse of _to_front"""
    n = len(dims)
    rest = [i for i in range(n) if i not in positions]
    order = list(positions) + rest
    ordered_dims = [dims[i] for i in order]
    inverse = [order.index(i) for i in range(n)]
    D = int(np.prod(dims))
    full = T.reshape(tuple(ordered_dims) * 2).transpose(inverse + [n + i for i in inverse])
    return full.reshape(D, D)


def ptrace_matrix(M: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw operator keeping the given positions (in sorted order)"""
    T = _to_front(M, dims, sorted(keep))
    return np.einsum("arbr->ab", T)


def embed_matrix(op: np.ndarray, dims: Sequence[int], positions: Sequence[int]) -> np.ndarray:
    """Operator on the given positions (sorted order), identity elsewhere"""
    positions = sorted(positions)
    dX = int(np.prod([dims[i] for i in positions])) if positions else 1
    op = as_cmatrix(op)
    if op.shape != (dX, dX):
        raise RegisterMismatch(f"operator shape {op.shape} does not match support dimension {dX}")
    dR = int(np.prod(dims)) // dX
    T = np.kron(op, np.eye(dR)).reshape(dX, dR, dX, dR)
    return _from_front(T, dims, positions)


def embed_operator(op: np.ndarray, register: Register, sites: Optional[Sites]) -> np.ndarray:
    """
    Embed an operator on a set of sites into the full register

    Args:
        op: Operator on the sites, tensor factors in increasing label order
        register: Target register
        sites: Site labels the operator acts on (None means the whole register)

    Returns:
        np.ndarray: Operator on the full register
    """
    if sites is None:
        return as_cmatrix(op)
    return embed_matrix(op, register.site_dims, register.positions(sites))


def apply_local_kraus(M: np.ndarray, dims: Sequence[int], positions: Sequence[int],
                      kraus_ops: Sequence[np.ndarray]) -> np.ndarray:
    """sum_k (F_k x 1) M (F_k x 1)^dagger with F_k acting on the given positions"""
    positions = sorted(positions)
    T = _to_front(M, dims, positions)
    out = np.zeros_like(T)
    for F in kraus_ops:
        tmp = np.tensordot(F, T, axes=([1], [0]))
        out += np.tensordot(tmp, F.conj(), axes=([2], [1])).transpose(0, 1, 3, 2)
    return _from_front(out, dims, positions)


# -- state operations ---------------------------------------------------------


def maximally_mixed(register: Register) -> DensityMatrix:
    return DensityMatrix(register, np.eye(register.dim) / register.dim, "maximally-mixed")


def pure_state(register: Register, vector: Sequence[complex], provenance: str = "") -> DensityMatrix:
    psi = np.asarray(vector, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if psi.size != register.dim or norm == 0:
        raise InvalidState(f"state vector of size {psi.size} does not fit register dimension {register.dim}")
    psi = psi / norm
    return DensityMatrix(register, np.outer(psi, psi.conj()), provenance)


def basis_state(register: Register, digits: Sequence[int]) -> DensityMatrix:
    """Computational basis projector |digits><digits|"""
    index = int(np.ravel_multi_index(tuple(digits), register.site_dims))
    vector = np.zeros(register.dim, dtype=complex)
    vector[index] = 1.0
    return pure_state(register, vector)


def mix(states: Sequence[DensityMatrix], weights: Sequence[float]) -> DensityMatrix:
    """Convex combination of states on a common register"""
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights) or np.any(weights < 0):
        raise InvalidState("mixture needs one nonnegative weight per state")
    register = states[0].register
    total = np.zeros((register.dim, register.dim), dtype=complex)
    for state, w in zip(states, weights):
        _check_same_register(states[0], state)
        total += w * state.matrix
    return DensityMatrix.from_operator(register, total)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """
    Tensor product of two states

    Args:
        a: First factor
        b: Second factor (its register is appended after a's)

    Returns:
        DensityMatrix: a (x) b on the concatenated register
    """
    total = a.register.dim * b.register.dim
    cap = a.register.cap if a.register.cap is not None else Config.MAX_DIMENSION
    if total > cap:
        raise DimensionCap(f"combined dimension {total} exceeds cap {cap}")
    register = a.register.concat(b.register)
    return DensityMatrix(register, np.kron(a.matrix, b.matrix))


def partial_trace(rho: DensityMatrix, keep: Sites) -> DensityMatrix:
    """
    Reduced state on the kept sites

    Args:
        rho: Input state
        keep: Site labels (or Region) to keep

    Returns:
        DensityMatrix: Marginal on the subregister of kept sites, labels preserved
    """
    labels = site_labels(keep)
    positions = rho.register.positions(labels)
    if not labels:
        raise BadRegion("cannot keep an empty set of sites")
    reduced = ptrace_matrix(rho.matrix, rho.register.site_dims, positions)
    return DensityMatrix(rho.register.subregister(labels), (reduced + reduced.conj().T) / 2)


def apply_unitary(rho: DensityMatrix, U: np.ndarray, sites: Optional[Sites] = None) -> DensityMatrix:
    V = embed_operator(U, rho.register, sites)
    return DensityMatrix(rho.register, V @ rho.matrix @ V.conj().T)


def _check_same_register(a: DensityMatrix, b: DensityMatrix) -> None:
    if not a.register.same_layout(b.register):
        raise RegisterMismatch(
            f"states live on different registers: {a.register.labels}/{a.register.site_dims} "
            f"vs {b.register.labels}/{b.register.site_dims}"
        )


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """||a - b||_1, between 0 and 2 (not halved)"""
    _check_same_register(a, b)
    return trace_norm_hermitian(a.matrix - b.matrix)


def operator_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b||_1 of two Hermitian operators (possibly unnormalized)"""
    return trace_norm_hermitian(a - b)


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity ||sqrt(a) sqrt(b)||_1 in [0, 1]"""
    _check_same_register(a, b)
    product = psd_sqrt(a.matrix) @ psd_sqrt(b.matrix)
    value = float(np.linalg.svd(product, compute_uv=False).sum())
    return min(max(value, 0.0), 1.0)


def bures_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """sqrt(2 - 2F)"""
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * fidelity(a, b))))


def root_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """||sqrt(a) - sqrt(b)||_2"""
    _check_same_register(a, b)
    return float(np.linalg.norm(psd_sqrt(a.matrix) - psd_sqrt(b.matrix)))
