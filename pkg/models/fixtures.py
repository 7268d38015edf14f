# Named states: cat states, stabilizer states, counterexamples, Markov fixtures and the registry

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.channels import ChannelMap
from src.linalg import as_cmatrix, psd_spectrum
from src.states import (
    DensityMatrix,
    Register,
    RegionPartition,
    pure_state,
    tensor,
)
from utils.config import Config
from utils.data_generator import (
    QuantumDataGenerator,
    binary_rank,
    pauli_strings_commute,
    symplectic_vector,
)
from utils.exceptions import BadName, InvalidState, NonCommutingGenerators

from .hamiltonians import gibbs_state, ising_chain, pauli_string_matrix, transverse_field_ising

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixtureSpec:
    """Registry entry: name, default parameters and where the state comes from"""

    name: str
    parameters: Dict[str, object] = field(default_factory=dict)
    provenance: str = "random"
    description: str = ""


@dataclass(frozen=True, eq=False)
class Fixture:
    state: DensityMatrix
    partition: Optional[RegionPartition]
    spec: FixtureSpec


def _exact(register: Register, entries: Dict[int, Fraction], provenance: str) -> DensityMatrix:
    """Diagonal state from exact rational weights, converted once"""
    total = sum(entries.values(), Fraction(0))
    if total != 1:
        raise InvalidState(f"exact weights sum to {total}, not 1")
    diag = np.zeros(register.dim)
    for index, weight in entries.items():
        diag[index] = float(weight)
    return DensityMatrix(register, np.diag(diag).astype(complex), provenance)


# -- cat and stabilizer states --------------------------------------------------


def cat_states(n: int, coherent: bool) -> DensityMatrix:
    """
    (|0..0> + |1..1>)/sqrt2 if coherent, else (|0..0><0..0| + |1..1><1..1|)/2

    Args:
        n: Number of qubits
        coherent: Pure GHZ superposition or its dephased mixture

    Returns:
        DensityMatrix: Cat state
    """
    register = Register.chain(n)
    if coherent:
        vector = np.zeros(register.dim, dtype=complex)
        vector[0] = vector[-1] = 1.0
        return pure_state(register, vector, provenance="cat-coherent")
    return _exact(register, {0: Fraction(1, 2), register.dim - 1: Fraction(1, 2)}, "cat-incoherent")


def ghz(n: int) -> DensityMatrix:
    return cat_states(n, coherent=True)


def stabilizer_state(generators: Sequence[str]) -> DensityMatrix:
    """
    Maximally mixed state on the stabilizer subspace, prod_j (1 + g_j)/2 normalized

    Args:
        generators: Independent commuting Pauli strings of equal length

    Returns:
        DensityMatrix: Stabilizer state with provenance "stabilizer"
    """
    generators = [g.upper() for g in generators]
    if not generators or len({len(g) for g in generators}) != 1:
        raise NonCommutingGenerators("need at least one generator, all of the same length")
    n = len(generators[0])
    for i, a in enumerate(generators):
        for b in generators[i + 1:]:
            if not pauli_strings_commute(a, b):
                raise NonCommutingGenerators(f"generators {a} and {b} anticommute")
    if binary_rank([symplectic_vector(g) for g in generators]) < len(generators):
        raise NonCommutingGenerators(f"generators {generators} are not independent")

    register = Register.chain(n)
    projector = np.eye(register.dim, dtype=complex)
    for g in generators:
        projector = projector @ (np.eye(register.dim) + pauli_string_matrix(g)) / 2
    return DensityMatrix.from_operator(register, projector, provenance="stabilizer")


# -- counterexamples -----------------------------------------------------------------


def parity_state(n: int, odd: bool = False) -> DensityMatrix:
    """Uniform mixture of n-bit strings of fixed parity"""
    register = Register.chain(n)
    strings = [bits for bits in product((0, 1), repeat=n) if sum(bits) % 2 == int(odd)]
    weight = Fraction(1, len(strings))
    entries = {int(np.ravel_multi_index(bits, register.site_dims)): weight for bits in strings}
    return _exact(register, entries, "parity-odd" if odd else "parity")


def _e1(n: int) -> Tuple[DensityMatrix, RegionPartition]:
    register = Register.chain(n)
    half = 2 ** (n - 1)
    entries: Dict[int, Fraction] = {i: Fraction(1, 2 * half) for i in range(half)}
    even = [bits for bits in product((0, 1), repeat=n - 1) if sum(bits) % 2 == 0]
    for bits in even:
        index = int(np.ravel_multi_index((1,) + bits, register.site_dims))
        entries[index] = Fraction(1, 2 * len(even))
    state = _exact(register, entries, "E1")
    partition = RegionPartition.from_sites(register, {
        "A": [0], "B1": [1], "B2": list(range(2, n - 1)), "C": [n - 1],
    })
    return state, partition


def _e2(n: int) -> Tuple[DensityMatrix, RegionPartition]:
    state = parity_state(n)
    state = DensityMatrix(state.register, state.matrix, "E2")
    partition = RegionPartition.from_sites(state.register, {
        "A": [0], "B1": [], "B2": [1], "C": list(range(2, n)),
    })
    return state, partition


def _e3() -> Tuple[DensityMatrix, RegionPartition]:
    register = Register((2, 3, 2))
    bell = np.zeros(12, dtype=complex)
    bell[np.ravel_multi_index((0, 0, 0), (2, 3, 2))] = 1.0
    bell[np.ravel_multi_index((0, 1, 1), (2, 3, 2))] = 1.0
    M = np.outer(bell, bell.conj()) / 2
    # 1/2 * (|0_A><0_A| (x) Bell_BC) + 1/2 * (|1_A><1_A| (x) |2_B><2_B| (x) 1_C/2)
    M = M / 2
    for c in (0, 1):
        index = np.ravel_multi_index((1, 2, c), (2, 3, 2))
        M[index, index] += 0.25
    state = DensityMatrix(register, M, "E3")
    partition = RegionPartition.from_sites(register, {"A": [0], "B": [1], "C": [2]})
    return state, partition


def e4_family(t: float = 0.0) -> DensityMatrix:
    """
    (1/16)(1 + Z1Z2/2 + Z3Z4/2 + (1 - t) Z1Z2Z3Z4/4) on four qubits

    t = 0 is the Markov product rho_12 (x) rho_34, t = 1 the non-Markov
    counterexample with I(1:4|2,3) = 5/2 - (3/2) log2 3.
    """
    register = Register.chain(4)
    diag = np.zeros(16)
    for index, bits in enumerate(product((0, 1), repeat=4)):
        z = [1 - 2 * b for b in bits]
        diag[index] = (1 + z[0] * z[1] / 2 + z[2] * z[3] / 2 + (1 - t) * z[0] * z[1] * z[2] * z[3] / 4) / 16
    return DensityMatrix(register, np.diag(diag).astype(complex), f"E4(t={t})")


def _e4() -> Tuple[DensityMatrix, RegionPartition]:
    register = Register.chain(4)
    entries = {}
    for index, bits in enumerate(product((0, 1), repeat=4)):
        z = [1 - 2 * b for b in bits]
        weight = Fraction(1, 16) * (1 + Fraction(z[0] * z[1], 2) + Fraction(z[2] * z[3], 2))
        if weight:
            entries[index] = weight
    state = _exact(register, entries, "E4")
    partition = RegionPartition.from_sites(register, {"A": [0], "B": [1, 2], "C": [3]})
    return state, partition


def counterexample(name: str, n: int = 4) -> Tuple[DensityMatrix, RegionPartition]:
    """
    Exact counterexample states with their natural partitions

    E1: 1/2 |0><0| (x) 1/2^{n-1} + 1/2 |1><1| (x) parity, regions A, B1, B2, C.
    E2: n-qubit parity state, regions A = {0}, B2 = {1}, C = rest.
    E3: qubit-qutrit-qubit state with zero MI and CMI, regions A, B, C.
    E4: four-qubit classical state, A = {0}, B = {1, 2}, C = {3}.

    Args:
        name: One of E1, E2, E3, E4
        n: Qubit count for E1 and E2 (at least 4)

    Returns:
        Tuple[DensityMatrix, RegionPartition]: State and partition
    """
    key = name.upper()
    if key in ("E1", "E2") and n < 4:
        raise BadName(f"{key} needs n >= 4, got {n}")
    builders = {"E1": lambda: _e1(n), "E2": lambda: _e2(n), "E3": _e3, "E4": _e4}
    if key not in builders:
        raise BadName(f"unknown counterexample {name!r}; choose from {sorted(builders)}")
    return builders[key]()


def parity_replacement_channel(F: np.ndarray, register: Register,
                               sites: Sequence[int] = (0, 1)) -> ChannelMap:
    """
    Two-site channel reproducing a Kraus trajectory of the parity state

    Measures the parity x of the two sites and prepares
    tau_even = (|a0><a0| + |b1><b1|) / (a^2 + b^2) or
    tau_odd = (|a1><a1| + |b0><b0|) / (a^2 + b^2), with |a> = F|0>, |b> = F|1>.

    Args:
        F: Kraus operator on the first of the two sites
        register: Register holding the sites
        sites: The two site labels, F acting on the first

    Returns:
        ChannelMap: Channel on the two sites
    """
    F = as_cmatrix(F)
    alpha, beta = F[:, 0], F[:, 1]
    norm = float(np.vdot(alpha, alpha).real + np.vdot(beta, beta).real)
    if norm <= 0:
        raise InvalidState("Kraus operator annihilates the qubit")
    e0, e1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    tau = {
        0: (np.outer(np.kron(alpha, e0), np.kron(alpha, e0).conj())
            + np.outer(np.kron(beta, e1), np.kron(beta, e1).conj())) / norm,
        1: (np.outer(np.kron(alpha, e1), np.kron(alpha, e1).conj())
            + np.outer(np.kron(beta, e0), np.kron(beta, e0).conj())) / norm,
    }
    kraus = []
    for parity, inputs in ((0, (0, 3)), (1, (1, 2))):
        spectrum = psd_spectrum(tau[parity])
        for mu, v in zip(spectrum.eigenvalues, spectrum.eigenvectors.T):
            if mu <= Config.SUPPORT_TOL:
                continue
            for x in inputs:
                K = np.zeros((4, 4), dtype=complex)
                K[:, x] = np.sqrt(mu) * v
                kraus.append(K)
    region = register.region(sites)
    return ChannelMap(region, region, region, np.stack(kraus))


# -- Markov fixtures --------------------------------------------------------------


def qmc_fixture(kind: str, seed: Optional[int] = None,
                dims: Tuple[int, int, int] = (2, 2, 2)) -> Tuple[DensityMatrix, RegionPartition]:
    """
    Exact quantum Markov chains A - B - C

    "product": rho_A (x) rho_B (x) rho_C with random factors.
    "classical-conditional": sum_b p_b rho_A^b (x) |b><b| (x) rho_C^b.
    "classical-chain": diagonal p(a) p(b|a) p(c|b).

    Args:
        kind: Fixture kind
        seed: Random seed
        dims: (d_A, d_B, d_C)

    Returns:
        Tuple[DensityMatrix, RegionPartition]: State and partition
    """
    generator = QuantumDataGenerator(seed)
    dA, dB, dC = dims
    register = Register(dims)
    if kind == "product":
        factors = [DensityMatrix(Register((d,)), generator.random_density_matrix(d)) for d in dims]
        state = tensor(tensor(factors[0], factors[1]), factors[2])
        state = DensityMatrix(register, state.matrix, "qmc-product")
    elif kind == "classical-conditional":
        weights = generator.random_probability_vector(dB)
        M = np.zeros((register.dim, register.dim), dtype=complex)
        for b, p in enumerate(weights):
            proj = np.zeros((dB, dB))
            proj[b, b] = 1.0
            M += p * np.kron(np.kron(generator.random_density_matrix(dA), proj),
                             generator.random_density_matrix(dC))
        state = DensityMatrix.from_operator(register, M, "qmc-classical-conditional")
    elif kind == "classical-chain":
        pa = generator.random_probability_vector(dA)
        pba = np.array([generator.random_probability_vector(dB) for _ in range(dA)])
        pcb = np.array([generator.random_probability_vector(dC) for _ in range(dB)])
        joint = pa[:, None, None] * pba[:, :, None] * pcb[None, :, :]
        state = DensityMatrix(register, np.diag(joint.reshape(-1)).astype(complex), "qmc-classical-chain")
    else:
        raise BadName(f"unknown Markov fixture {kind!r}")
    partition = RegionPartition.from_sites(register, {"A": [0], "B": [1], "C": [2]})
    return state, partition


def random_state(register: Register, seed: Optional[int] = None, rank: Optional[int] = None) -> DensityMatrix:
    generator = QuantumDataGenerator(seed)
    return DensityMatrix(register, generator.random_density_matrix(register.dim, rank), "random")


def tripartition(register: Register, A: Sequence[int], B: Sequence[int], C: Sequence[int]) -> RegionPartition:
    return RegionPartition.from_sites(register, {"A": list(A), "B": list(B), "C": list(C)})


# -- registry -----------------------------------------------------------------------


def _chain_partition(state: DensityMatrix) -> RegionPartition:
    n = state.register.n_sites
    return tripartition(state.register, [0], list(range(1, n - 1)), [n - 1])


_REGISTRY: Dict[str, Tuple[FixtureSpec, Callable[..., Tuple[DensityMatrix, Optional[RegionPartition]]]]] = {}


def _register(spec: FixtureSpec, builder: Callable[..., Tuple[DensityMatrix, Optional[RegionPartition]]]):
    _REGISTRY[spec.name] = (spec, builder)


_register(FixtureSpec("cat-coherent", {"n": 3}, "cat states", "GHZ superposition"),
          lambda n=3, **_: (cat_states(n, True), None))
_register(FixtureSpec("cat-incoherent", {"n": 3}, "cat states", "dephased GHZ mixture"),
          lambda n=3, **_: (cat_states(n, False), None))
_register(FixtureSpec("ising-gibbs", {"n": 6, "beta": 0.3}, "Gibbs states", "classical Ising chain"),
          lambda n=6, beta=0.3, **_: (gibbs_state(ising_chain(n), beta), None))
_register(FixtureSpec("tfim-gibbs", {"n": 6, "beta": 0.3}, "Gibbs states", "transverse-field Ising chain"),
          lambda n=6, beta=0.3, **_: (gibbs_state(transverse_field_ising(n), beta), None))
_register(FixtureSpec("stabilizer-ghz", {}, "stabilizer states", "{ZZI, IZZ} mixed GHZ"),
          lambda **_: (stabilizer_state(["ZZI", "IZZ"]), None))
for _name, _description in (("E1", "zero MI, not locally implementable"),
                            ("E2", "nonzero CMI, locally implementable"),
                            ("E3", "zero MI and CMI, not recoverable on AB"),
                            ("E4", "non-Markov with factorized purification")):
    _register(FixtureSpec(_name, {"n": 4} if _name in ("E1", "E2") else {}, "counterexamples", _description),
              lambda n=4, _key=_name, **_: counterexample(_key, n))
for _kind in ("product", "classical-conditional", "classical-chain"):
    _register(FixtureSpec(f"qmc-{_kind}", {"seed": Config.DEFAULT_SEED}, "random", f"exact Markov chain ({_kind})"),
              lambda seed=Config.DEFAULT_SEED, _kind=_kind, **_: qmc_fixture(_kind, seed))


def list_fixtures() -> List[FixtureSpec]:
    return [spec for spec, _ in _REGISTRY.values()]


def build_fixture(name: str, **parameters) -> Fixture:
    """
    Build a registered fixture

    Args:
        name: Registry name (see list_fixtures)
        **parameters: Overrides of the default parameters

    Returns:
        Fixture: State, optional partition, spec
    """
    if name not in _REGISTRY:
        raise BadName(f"unknown fixture {name!r}; known: {sorted(_REGISTRY)}")
    spec, builder = _REGISTRY[name]
    merged = {**spec.parameters, **parameters}
    state, partition = builder(**merged)
    if partition is None and state.register.n_sites >= 3:
        partition = _chain_partition(state)
    logger.debug("built fixture %s with %s", name, merged)
    return Fixture(state, partition, FixtureSpec(name, merged, spec.provenance, spec.description))
