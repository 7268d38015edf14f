# Verification harness: named suites of exact values, inequality fuzz campaigns and decay checks

import logging
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.fixtures import (
    cat_states,
    counterexample,
    e4_family,
    ghz,
    parity_replacement_channel,
    qmc_fixture,
    random_state,
    stabilizer_state,
    tripartition,
)
from models.hamiltonians import gibbs_state, ising_chain, pauli_string_matrix, transverse_field_ising
from utils.config import Config, RunSettings
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import UnknownSuite
from utils.serialization import write_json

from .channels import ChannelMap, KrausInstrument, apply_instrument
from .correlators import CorrelatorParams, cpq, cpq_clustering_defect
from .fitting import fit_log_decay, fit_proportional
from .info import (
    DivergenceParams,
    alpha_z_divergence,
    conditional_mutual_information,
    correlation_trace_norm,
    mutual_information,
    pinsker_bound,
    region_entropy,
)
from .lindblad import (
    davies_generator,
    dephasing_generator,
    detectability_recovery,
    evolve,
    imaginary_time_dressing_norm,
    prefactor_identity,
    replacement_model,
    spectral_gap,
    variance_decay_check,
)
from .markov import (
    certify_qmc,
    fact1_recovery_scan,
    local_computability_witness_search,
    measurement_average_cmi,
    petz_recovery_error,
)
from .purification import (
    classical_mie,
    near_markov_defect_scan,
    purified_cpq_identity,
    qmc_factorization_residual,
    stabilizer_tfd_identity,
    tfd_local_computability_defect,
    tfd_mutual_information,
)
from .scans import (
    davies_chain,
    detectability_table,
    lindblad_scan,
    stability_scan,
    write_scan,
    z_measurement,
)
from .stability import (
    CircuitPair,
    buffer_partition,
    best_rotation_score,
    depolarize_recover_cmi_check,
    dressed_recovery,
    implement_postselection,
    recovery_correlation_bound,
    src_profile,
    stability_score,
)
from .states import (
    DensityMatrix,
    Register,
    RegionPartition,
    bures_distance,
    fidelity,
    maximally_mixed,
    mix,
    partial_trace,
    root_distance,
    tensor,
    trace_distance,
)

logger = logging.getLogger(__name__)

SUITE_NAMES = ("counterexamples", "cpq-properties", "markov", "stability-scan", "lindblad", "purification")
LOG2_3 = float(np.log2(3.0))


@dataclass(frozen=True)
class SuiteSizes:
    """Sample counts of the fuzz campaigns"""

    cpq_cases: int = 1000
    lemma1_cases: int = 10000
    distance_cases: int = 10000
    qmc_cases: int = 200
    equivalence_cases: int = 1000
    witness_samples: int = 500
    stabilizer_groups: int = 100
    e2_operations: int = 50
    fact_cases: int = 50

    @classmethod
    def quick(cls) -> "SuiteSizes":
        return cls(cpq_cases=20, lemma1_cases=30, distance_cases=50, qmc_cases=6,
                   equivalence_cases=10, witness_samples=60, stabilizer_groups=6,
                   e2_operations=5, fact_cases=4)


@dataclass(frozen=True, eq=False)
class Outcome:
    measured: float
    expected: float
    tol: float
    passed: bool
    table: Optional[pd.DataFrame] = None


def close(measured: float, expected: float, tol: float) -> Outcome:
    return Outcome(float(measured), float(expected), tol, bool(abs(measured - expected) < tol))


def at_most(measured: float, bound: float, slack: float) -> Outcome:
    return Outcome(float(measured), float(bound), slack, bool(measured <= bound + slack))


def at_least(measured: float, bound: float, slack: float = 0.0) -> Outcome:
    return Outcome(float(measured), float(bound), slack, bool(measured >= bound - slack))


@dataclass(frozen=True)
class Check:
    """One named check; run receives the check's own seed"""

    id: str
    ref: str
    run: Callable[[int], Outcome]


@dataclass(frozen=True)
class CheckRecord:
    id: str
    ref: str
    measured: float
    expected: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {"id": self.id, "ref": self.ref, "measured": self.measured,
                "expected": self.expected, "tol": self.tol, "pass": self.passed}


@dataclass(frozen=True, eq=False)
class SuiteResult:
    """Checks of one suite run; passes iff every check passes"""

    suite: str
    seed: int
    checks: Tuple[CheckRecord, ...]
    wall_time: float = 0.0
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckRecord]:
        return [check for check in self.checks if not check.passed]

    def as_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "pass": self.passed,
                "checks": [check.as_dict() for check in self.checks]}


def check_seed(seed: int, check_id: str) -> int:
    """Per-check seed, independent of scheduling"""
    return zlib.crc32(f"{seed}:{check_id}".encode("utf-8")) & 0x7FFFFFFF


# -- counterexamples ---------------------------------------------------------------------


def _counterexample_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    e4, e4_part = counterexample("E4")

    def e1_mutual_information(postselected: bool) -> Callable[[int], Outcome]:
        def run(_seed: int) -> Outcome:
            rho, _ = counterexample("E1", 4)
            target = rho
            if postselected:
                proj = np.diag([0.0, 1.0]).astype(complex)
                inst = KrausInstrument(rho.register.region((0,)), (proj,))
                target = apply_instrument(rho, inst).states[0]
            value = mutual_information(target, (0, 1, 2), (3,))
            return close(value, 1.0 if postselected else 0.5, 1e-9)
        return run

    def e1_marginals(_seed: int) -> Outcome:
        rho, _ = counterexample("E1", 4)
        worst = 0.0
        for k in (1, 2, 3):
            keep = tuple(x for x in rho.register.labels if x != k)
            marginal = partial_trace(rho, keep).matrix
            worst = max(worst, float(np.abs(marginal - np.eye(8) / 8).max()))
        return at_most(worst, 0.0, 1e-12)

    def e1_postselection(_seed: int) -> Outcome:
        rho, part = counterexample("E1", 4)
        P0, P1 = np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)
        inst = KrausInstrument(rho.register.region((0,)), (P0, P1))
        report = implement_postselection(rho, inst, part)
        outcome = dict(zip(report.kraus_indices, report.errors))
        return at_least(outcome[1], 0.5)

    def e2_implementation(seed: int) -> Outcome:
        rho, part = counterexample("E2", 4)
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(sizes.e2_operations):
            F = generator.random_operator(2)
            inst = KrausInstrument(rho.register.region((0,)), (F,))
            report = implement_postselection(
                rho, inst, part,
                channel_factory=lambda k, op, sigma: parity_replacement_channel(op, rho.register, (0, 1)),
            )
            worst = max(worst, max(report.errors))
        return at_most(worst, 0.0, 1e-8)

    def e3_information(_seed: int) -> Outcome:
        rho, part = counterexample("E3")
        values = (mutual_information(rho, part["A"], part["C"]),
                  conditional_mutual_information(rho, part["A"], part["C"], part["B"]))
        return at_most(max(abs(v) for v in values), 0.0, 1e-9)

    def e3_probability(_seed: int) -> Outcome:
        rho, _ = counterexample("E3")
        inst = KrausInstrument(rho.register.region((0,)), (np.diag([0.0, 1.0]).astype(complex),))
        return close(apply_instrument(rho, inst).total_probability, 0.5, 1e-12)

    def e3_recovery(_seed: int) -> Outcome:
        rho, part = counterexample("E3")
        buffered = RegionPartition.from_sites(rho.register, {"A": [0], "B1": [], "B2": [1], "C": [2]})
        inst = KrausInstrument(rho.register.region((0,)), (np.diag([0.0, 1.0]).astype(complex),))
        best = best_rotation_score(rho, inst, buffered)
        return at_least(best.trajectory_error, 0.1)

    def e4_qmc(_seed: int) -> Outcome:
        report = certify_qmc(e4, e4_part, settings.tol)
        return close(float(report.is_qmc), 0.0, 0.5)

    return [
        Check("e4.entropy_1234", "counterexample E4: S(1234)",
              lambda _s: close(region_entropy(e4, (0, 1, 2, 3)), 3.5, 1e-9)),
        Check("e4.entropy_23", "counterexample E4: S(23)",
              lambda _s: close(region_entropy(e4, (1, 2)), 2.0, 1e-9)),
        Check("e4.entropy_123", "counterexample E4: S(123)",
              lambda _s: close(region_entropy(e4, (0, 1, 2)), 4.0 - 0.75 * LOG2_3, 1e-9)),
        Check("e4.cmi", "counterexample E4: I(1:4|2,3)",
              lambda _s: close(conditional_mutual_information(e4, (0,), (3,), (1, 2)), 2.5 - 1.5 * LOG2_3, 1e-9)),
        Check("e4.tfd_mutual_information", "counterexample E4: purified I(AA':CC')",
              lambda _s: close(tfd_mutual_information(e4, (0,), (3,)), 0.0, 1e-9)),
        Check("e4.not_markov", "counterexample E4: Markov certification", e4_qmc),
        Check("e1.mutual_information", "counterexample E1: I(A1..A3:A4) of rho", e1_mutual_information(False)),
        Check("e1.mutual_information_postselected", "counterexample E1: I(A1..A3:A4) after postselection",
              e1_mutual_information(True)),
        Check("e1.marginals", "counterexample E1: single-site traces are maximally mixed", e1_marginals),
        Check("e1.postselection_obstruction", "counterexample E1: postselection not locally implementable",
              e1_postselection),
        Check("e2.parity_channel", "counterexample E2: two-site implementation of every Kraus operator",
              e2_implementation),
        Check("e3.zero_information", "counterexample E3: I(A:C) = I(A:C|B) = 0", e3_information),
        Check("e3.postselection_probability", "counterexample E3: success probability", e3_probability),
        Check("e3.recovery_obstruction", "counterexample E3: no recovery on AB", e3_recovery),
    ]


# -- C_{p,q} properties ----------------------------------------------------------------------


def _random_params(rng: np.random.Generator) -> CorrelatorParams:
    p, q = rng.uniform(0.05, 1.0, size=2)
    return CorrelatorParams(float(p), float(q))


def _random_pair_state(generator: QuantumDataGenerator, dims: Tuple[int, ...]) -> DensityMatrix:
    register = Register(dims)
    rank = int(generator.rng.integers(1, register.dim + 1))
    return DensityMatrix(register, generator.random_density_matrix(register.dim, rank))


def _fuzz(cases: int, sample: Callable[[QuantumDataGenerator], float]) -> Callable[[int], float]:
    """Largest violation over random cases"""
    def run(seed: int) -> float:
        generator = QuantumDataGenerator(seed)
        return max(sample(generator) for _ in range(cases))
    return run


def _cpq_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    slack = 1e-9
    n = sizes.cpq_cases

    def state(generator: QuantumDataGenerator) -> DensityMatrix:
        dims = ((2,), (3,), (2, 2), (2, 3), (2, 2, 2))[int(generator.rng.integers(0, 5))]
        return _random_pair_state(generator, dims)

    def positivity(generator):
        rho = state(generator)
        return -cpq(generator.random_operator(rho.dim, False), rho, _random_params(generator.rng))

    def monotonicity(generator):
        rho = state(generator)
        O = generator.random_operator(rho.dim)
        params = _random_params(generator.rng)
        p2 = float(generator.rng.uniform(params.p, 1.0))
        q2 = float(generator.rng.uniform(params.q, 1.0))
        base = cpq(O, rho, params)
        return max(cpq(O, rho, CorrelatorParams(p2, params.q)) - base,
                   cpq(O, rho, CorrelatorParams(params.p, q2)) - base)

    def value_range(generator):
        rho = state(generator)
        O = generator.random_operator(rho.dim, False)
        value = cpq(O, rho, _random_params(generator.rng))
        lower = abs(np.trace(rho.matrix @ O))
        upper = float(np.linalg.norm(O, 2))
        return max(lower - value, value - upper)

    def symmetry(generator):
        rho = state(generator)
        O = generator.random_operator(rho.dim)
        params = _random_params(generator.rng)
        return abs(cpq(O, rho, params) - cpq(O.conj().T, rho, params.swapped()))

    def multiplicativity(generator):
        a, b = _random_pair_state(generator, (2,)), _random_pair_state(generator, (2, 2))
        O1, O2 = generator.random_operator(2), generator.random_operator(4)
        params = _random_params(generator.rng)
        joint = cpq(np.kron(O1, O2), tensor(a, b), params)
        return abs(joint - cpq(O1, a, params) * cpq(O2, b, params))

    def log_convexity(generator):
        rho = state(generator)
        O = generator.random_operator(rho.dim)
        first, second = _random_params(generator.rng), _random_params(generator.rng)
        theta = float(generator.rng.uniform())
        middle = CorrelatorParams((1 - theta) * first.p + theta * second.p,
                                  (1 - theta) * first.q + theta * second.q)
        bound = cpq(O, rho, first) ** (1 - theta) * cpq(O, rho, second) ** theta
        return cpq(O, rho, middle) - bound * (1 + slack)

    def data_processing(generator):
        dims = ((2, 2), (2, 3), (2, 4))[int(generator.rng.integers(0, 3))]
        rho = _random_pair_state(generator, dims)
        O = generator.random_operator(2)
        params = _random_params(generator.rng)
        kraus = generator.random_kraus(dims[1])
        channel = ChannelMap(rho.register.region((1,)), rho.register.region((1,)),
                             rho.register.region((1,)), np.stack(kraus))
        processed = channel.apply(rho)
        return cpq(O, rho, params, sites=(0,)) - cpq(O, processed, params, sites=(0,))

    def unitary_identity(generator):
        rho = state(generator)
        U = generator.random_unitary(rho.dim)
        if generator.rng.uniform() < 0.5:
            div = DivergenceParams.petz(float(generator.rng.uniform(0.05, 0.95)))
        else:
            div = DivergenceParams.sandwiched(float(generator.rng.uniform(0.5, 0.95)))
        p, q = div.correlator_exponents
        rotated = DensityMatrix(rho.register, U.conj().T @ rho.matrix @ U)
        divergence = alpha_z_divergence(rho, rotated, div)
        expected = 2.0 ** ((div.alpha - 1.0) * divergence / (2.0 * div.z))
        return abs(cpq(U, rho, CorrelatorParams(p, q)) - expected)

    def as_check(sample, tol=slack):
        runner = _fuzz(n, sample)
        return lambda seed: at_most(runner(seed), 0.0, tol)

    def witness_absent(seed: int) -> Outcome:
        rho, part = qmc_fixture("classical-conditional", seed)
        result = local_computability_witness_search(rho, part, CorrelatorParams(0.5, 0.5),
                                                    n_samples=sizes.witness_samples, seed=seed)
        return close(float(result.unitary is not None), 0.0, 0.5)

    def witness_found(seed: int) -> Outcome:
        rho, part = counterexample("E4")
        result = local_computability_witness_search(rho, part, CorrelatorParams(0.5, 0.5),
                                                    n_samples=sizes.witness_samples, seed=seed)
        return close(float(result.unitary is not None), 1.0, 0.5)

    def clustering(_seed: int) -> Outcome:
        rho = gibbs_state(transverse_field_ising(8), 0.3)
        X = pauli_string_matrix("X")
        params = CorrelatorParams(0.5, 0.5)
        values = [cpq_clustering_defect(rho, X, (0,), X, (r,), params) for r in (2, 4, 7)]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        table = pd.DataFrame({"r": [2, 4, 7], "defect": values})
        return Outcome(values[-1], 1e-3, 0.0, bool(decreasing and values[-1] < 1e-3), table)

    return [
        Check("positivity", "C_pq is nonnegative", as_check(positivity)),
        Check("monotonicity", "C_pq non-increasing in p and in q", as_check(monotonicity)),
        Check("range", "|<O>| <= C_pq <= ||O||", as_check(value_range)),
        Check("symmetry", "C_pq(O) = C_qp(O^dagger)", as_check(symmetry)),
        Check("multiplicativity", "C_pq of tensor products", as_check(multiplicativity)),
        Check("log_convexity", "log-convexity along segments in (p, q)", as_check(log_convexity)),
        Check("data_processing", "channels on B do not decrease C_pq(O_A)", as_check(data_processing)),
        Check("unitary_divergence", "C_pq(U, rho) from the alpha-z divergence to the rotated state",
              as_check(unitary_identity, 1e-8)),
        Check("witness_absent_on_markov", "local computability on exact Markov chains", witness_absent),
        Check("witness_found_on_e4", "local computability fails off Markov chains", witness_found),
        Check("clustering_tfim", "C_1/2,1/2 connected correlator decays on a Gibbs chain", clustering),
    ]


# -- Markov ------------------------------------------------------------------------------------


def _random_qmc(generator: QuantumDataGenerator) -> Tuple[DensityMatrix, RegionPartition]:
    kind = ("product", "classical-conditional", "classical-chain")[int(generator.rng.integers(0, 3))]
    dims = ((2, 2, 2), (2, 3, 2), (3, 2, 2))[int(generator.rng.integers(0, 3))]
    return qmc_fixture(kind, int(generator.rng.integers(0, 2 ** 31)), dims)


def _markov_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    register = Register.chain(3)
    part = tripartition(register, [0], [1], [2])

    def petz_exactness(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(sizes.qmc_cases):
            rho, qmc_part = _random_qmc(generator)
            worst = max(worst, petz_recovery_error(rho, qmc_part))
        return at_most(worst, 0.0, 1e-8)

    def qmc_cmi(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(sizes.qmc_cases):
            rho, qmc_part = _random_qmc(generator)
            worst = max(worst, conditional_mutual_information(rho, qmc_part["A"], qmc_part["C"], qmc_part["B"]))
        return at_most(worst, 0.0, 1e-10)

    def equivalence(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        disagreements = 0
        for k in range(sizes.equivalence_cases):
            if k % 2:
                rho, qmc_part = _random_qmc(generator)
            else:
                rho, qmc_part = _random_pair_state(generator, (2, 2, 2)), part
            cmi = conditional_mutual_information(rho, qmc_part["A"], qmc_part["C"], qmc_part["B"])
            error = petz_recovery_error(rho, qmc_part)
            disagreements += int((cmi < 1e-10) != (error < 1e-7))
        return close(disagreements, 0, 0.5)

    def lemma1(generator):
        rho = DensityMatrix(register, generator.random_density_matrix(8))
        kraus = generator.random_kraus(2, int(generator.rng.integers(1, 5)))
        inst = KrausInstrument(register.region((0,)), tuple(kraus))
        lhs, rhs = measurement_average_cmi(rho, inst, part)
        return lhs - rhs

    def fact1(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = -np.inf
        for _ in range(sizes.fact_cases):
            qmc, _ = qmc_fixture("classical-conditional", int(generator.rng.integers(0, 2 ** 31)))
            noise = DensityMatrix(register, generator.random_density_matrix(8))
            rho = mix([DensityMatrix(register, qmc.matrix), noise], [0.9, 0.1])
            result = fact1_recovery_scan(rho, part)
            worst = max(worst, result.fidelity_bound - result.best_fidelity)
        return at_most(worst, 0.0, 1e-9)

    def fact2(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = -np.inf
        for _ in range(sizes.fact_cases):
            rho = DensityMatrix(register, generator.random_density_matrix(8))
            check = depolarize_recover_cmi_check(rho, part)
            worst = max(worst, check.cmi - check.bounds.bound1)
        return at_most(worst, 0.0, 1e-9)

    def distances(generator):
        a = _random_pair_state(generator, (2, 2))
        b = _random_pair_state(generator, (2, 2))
        T, F = trace_distance(a, b), fidelity(a, b)
        DB, root = bures_distance(a, b), root_distance(a, b)
        delta = correlation_trace_norm(a, (0,), (1,))
        return max(
            (1 - F) - T / 2,
            T / 2 - np.sqrt(max(1 - F ** 2, 0.0)),
            T / 2 - DB,
            DB - np.sqrt(T),
            DB - root,
            root - np.sqrt(2.0) * DB,
            delta / 2 - pinsker_bound(mutual_information(a, (0,), (1,))),
        )

    def certify(name: str, expected: bool) -> Callable[[int], Outcome]:
        def run(_seed: int) -> Outcome:
            rho, ce_part = counterexample(name)
            return close(float(certify_qmc(rho, ce_part, settings.tol).is_qmc), float(expected), 0.5)
        return run

    def ghz_measurement(_seed: int) -> Outcome:
        rho = ghz(3)
        P0, P1 = np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)
        inst = KrausInstrument(rho.register.region((0,)), (P0, P1))
        lhs, rhs = measurement_average_cmi(rho, inst, tripartition(rho.register, [0], [1], [2]))
        return Outcome(lhs, 0.0, 1e-9, bool(abs(lhs) < 1e-9 and abs(rhs - 1.0) < 1e-9))

    lemma1_runner = _fuzz(sizes.lemma1_cases, lemma1)
    distance_runner = _fuzz(sizes.distance_cases, distances)
    return [
        Check("petz_exactness", "Petz recovery is exact on Markov chains", petz_exactness),
        Check("qmc_cmi", "exact Markov chains have zero CMI", qmc_cmi),
        Check("cmi_petz_equivalence", "zero CMI iff exact Petz recovery", equivalence),
        Check("measurement_average_cmi", "measurement preserves CMI on average",
              lambda seed: at_most(lemma1_runner(seed), 0.0, 1e-9)),
        Check("ghz_measurement", "Z measurement of GHZ removes its CMI", ghz_measurement),
        Check("fact1_fidelity", "small CMI gives a high-fidelity recovery", fact1),
        Check("fact2_bounds", "recovery error bounds the CMI", fact2),
        Check("distance_inequalities", "trace distance, fidelity, Bures and Pinsker relations",
              lambda seed: at_most(distance_runner(seed), 0.0, 1e-10)),
        Check("certify_e3", "E3 is a Markov chain", certify("E3", True)),
        Check("certify_e4", "E4 is not a Markov chain", certify("E4", False)),
    ]


# -- stability -------------------------------------------------------------------------------


def _dephasing_gate(register: Register, sites: Sequence[int]) -> ChannelMap:
    region = register.region(tuple(sites))
    kraus = []
    for index in range(region.dim):
        K = np.zeros((region.dim, region.dim), dtype=complex)
        K[index, index] = 1.0
        kraus.append(K)
    return ChannelMap(region, region, region, np.stack(kraus))


def _stability_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    def product_state(seed: int) -> Outcome:
        rho = gibbs_state(ising_chain(4, J=0.0, h=0.7), 1.0)
        part = buffer_partition(rho.register, (0,), 1, 1)
        generator = QuantumDataGenerator(seed)
        inst = KrausInstrument(rho.register.region((0,)), tuple(generator.random_kraus(2, 3)))
        return at_most(stability_score(rho, inst, part).trajectory_error, 0.0, 1e-8)

    def cat(basis: str) -> Callable[[int], Outcome]:
        def run(_seed: int) -> Outcome:
            rho = cat_states(4, coherent=False)
            part = buffer_partition(rho.register, (0,), 1, 1)
            if basis == "Z":
                inst = z_measurement(rho.register, 0)
            else:
                plus = np.full((2, 2), 0.5, dtype=complex)
                inst = KrausInstrument(rho.register.region((0,)), (plus, np.eye(2) - plus))
            error = stability_score(rho, inst, part).trajectory_error
            return at_least(error, 0.5) if basis == "Z" else at_most(error, 0.0, 1e-8)
        return run

    def tfim_scan(seed: int) -> Outcome:
        table = stability_scan((2, 3, 4), n=6, beta=0.3, model="tfim", seed=seed)
        errors = table["traj_error"].to_numpy()
        increase = float(np.max(np.diff(errors))) if len(errors) > 1 else 0.0
        return Outcome(increase, 0.0, 1e-9, bool(increase <= 1e-9), table)

    def triangle(_seed: int) -> Outcome:
        rho = gibbs_state(transverse_field_ising(5), 0.5)
        part = buffer_partition(rho.register, (0,), 1, 1)
        report = stability_score(rho, z_measurement(rho.register, 0), part)
        return at_most(report.channel_error, report.trajectory_error, 1e-9)

    def eta_grows(seed: int) -> Outcome:
        H = ising_chain(6)
        cold = src_profile(gibbs_state(H, 2.0), restarts=4, seed=seed).eta
        hot = src_profile(gibbs_state(H, 0.3), restarts=4, seed=seed).eta
        return Outcome(cold, hot, 0.0, bool(cold > hot))

    def ghz_no_decay(seed: int) -> Outcome:
        profile = src_profile(ghz(5), restarts=2, seed=seed)
        return Outcome(profile.correlation_fit.slope, 0.0, Config.NO_DECAY_SLOPE,
                       profile.correlation_fit.flag == "no-decay")

    def product_floor(seed: int) -> Outcome:
        profile = src_profile(gibbs_state(ising_chain(5, J=0.0, h=0.5), 1.0), restarts=2, seed=seed)
        return Outcome(float(profile.correlation_fit.n_points), 0.0, 0.0,
                       profile.correlation_fit.flag == "floor")

    def qmc_postselection(seed: int) -> Outcome:
        rho = gibbs_state(ising_chain(4, J=0.0, h=0.7), 1.0)
        part = buffer_partition(rho.register, (0,), 1, 1)
        generator = QuantumDataGenerator(seed)
        inst = KrausInstrument(rho.register.region((0,)), (generator.random_operator(2),))
        return at_most(implement_postselection(rho, inst, part).averaged_error, 0.0, 1e-8)

    def trivial_circuit(_seed: int) -> Outcome:
        rho = gibbs_state(transverse_field_ising(5), 0.5)
        inst = z_measurement(rho.register, 1)
        dressed = dressed_recovery(rho, CircuitPair.trivial(rho.register), inst, 2, split=(1, 1))
        base = stability_score(rho, inst, buffer_partition(rho.register, (1,), 1, 1))
        return close(dressed.trajectory_error, base.trajectory_error, 1e-9)

    def unitary_circuit(seed: int) -> Outcome:
        rho = gibbs_state(ising_chain(7, h=0.3), 0.7)
        register = rho.register
        generator = QuantumDataGenerator(seed)
        gates = [((2 * k, 2 * k + 1), generator.random_unitary(4)) for k in range(3)]
        circuit = CircuitPair.unitary([gates], register)
        inst = z_measurement(register, 2)
        dressed = dressed_recovery(rho, circuit, inst, 2, split=(1, 1))
        W = gates[1][1]
        conjugated = KrausInstrument(register.region((2, 3)), tuple(
            W.conj().T @ np.kron(F, np.eye(2)) @ W for F in inst.kraus_ops))
        base = stability_score(rho, conjugated, buffer_partition(register, (2, 3), 1, 1))
        return close(dressed.trajectory_error, base.trajectory_error, 1e-9)

    def dephasing_circuit(_seed: int) -> Outcome:
        rho = gibbs_state(ising_chain(7), 0.5)
        register = rho.register
        layer = (_dephasing_gate(register, (0, 1)), _dephasing_gate(register, (2, 3)),
                 _dephasing_gate(register, (4, 5)))
        circuit = CircuitPair((layer,), (layer,))
        inst = z_measurement(register, 2)
        dressed = dressed_recovery(rho, circuit, inst, 2, split=(1, 1))
        base = stability_score(rho, inst, buffer_partition(register, (2,), 1, 1))
        return at_most(dressed.trajectory_error, 2.0 * base.trajectory_error, 1e-9)

    def correlation_bound(seed: int) -> Outcome:
        rho = gibbs_state(transverse_field_ising(5), 0.5)
        part = buffer_partition(rho.register, (0,), 1, 1)
        generator = QuantumDataGenerator(seed)
        worst = -np.inf
        for _ in range(5):
            bound = recovery_correlation_bound(rho, generator.random_hermitian(2),
                                               generator.random_operator(part["C"].dim), part)
            worst = max(worst, bound.connected - bound.recovery_error)
        return at_most(worst, 0.0, 1e-9)

    def depolarize_recover(_seed: int) -> Outcome:
        rho = gibbs_state(transverse_field_ising(4), 0.5)
        check = depolarize_recover_cmi_check(rho, tripartition(rho.register, [0], [1, 2], [3]))
        return Outcome(check.cmi, check.bounds.bound1, 1e-9, check.holds)

    return [
        Check("product_state", "product states are locally stable", product_state),
        Check("incoherent_cat_z", "incoherent cat is unstable against Z measurement", cat("Z")),
        Check("incoherent_cat_x", "incoherent cat recovers X-measurement trajectories", cat("X")),
        Check("tfim_buffer_scan", "recovery error non-increasing in buffer radius", tfim_scan),
        Check("triangle", "channel error below trajectory error", triangle),
        Check("eta_grows_with_beta", "correlation length grows with beta", eta_grows),
        Check("ghz_no_decay", "GHZ correlations do not decay", ghz_no_decay),
        Check("product_floor", "product chain correlations at the floor", product_floor),
        Check("postselection_product", "postselection on product states is local", qmc_postselection),
        Check("dressed_trivial", "trivial circuits leave the recovery unchanged", trivial_circuit),
        Check("dressed_unitary", "dressed recovery under a depth-one unitary circuit", unitary_circuit),
        Check("dressed_dephasing", "dressed recovery under a dephasing circuit", dephasing_circuit),
        Check("correlation_bound", "correlations bounded by the recovery error", correlation_bound),
        Check("depolarize_recover", "CMI bounded by the depolarize-and-recover error", depolarize_recover),
    ]


# -- Lindblad ----------------------------------------------------------------------------------


def _lindblad_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    Z, X = pauli_string_matrix("Z"), pauli_string_matrix("X")

    def davies_balance(_seed: int) -> Outcome:
        return at_most(davies_chain(3, 1.0).balance_residual, 0.0, 1e-8)

    def davies_steady(_seed: int) -> Outcome:
        model = davies_chain(3, 1.0)
        return at_most(trace_distance(model.steady_state, model.reference), 0.0, 1e-8)

    def relaxation_rate(_seed: int) -> Outcome:
        table = lindblad_scan(np.linspace(0.5, 4.0, 8), n=3, beta=1.0)
        fit = fit_log_decay(table["t"], table["error"])
        gap = float(table["gap"].iloc[0])
        return Outcome(fit.rate, 0.9 * gap, 0.0, bool(fit.rate >= 0.9 * gap), table)

    def envelope(_seed: int) -> Outcome:
        table = lindblad_scan(np.linspace(0.0, 4.0, 9), n=3, beta=1.0)
        ratio = float((table["error"] / table["bound"].clip(lower=Config.FIT_FLOOR)).max())
        return at_most(ratio, 1.0, 1e-6)

    def detectability(_seed: int) -> Outcome:
        table = detectability_table(range(0, 7), n=3, beta=1.0)
        fit = fit_log_decay(table["m"], table["error"])
        return Outcome(fit.r2, 0.95, 0.0, bool(fit.slope < 0 and fit.r2 >= 0.95), table)

    def detectability_deep(_seed: int) -> Outcome:
        model = davies_chain(3, 1.0)
        error = detectability_recovery(model, (0,), 20, z_measurement(model.register, 0))
        return at_most(error, 0.0, 1e-6)

    def two_level_gap(_seed: int) -> Outcome:
        model = davies_generator(Z, [((0,), X)], 1.0)
        return close(spectral_gap(model).gap, float(np.cosh(1.0)), 1e-8)

    def infinite_temperature(_seed: int) -> Outcome:
        model = davies_generator(Z, [((0,), X)], 0.0)
        start = DensityMatrix(model.register, np.diag([1.0, 0.0]).astype(complex))
        error = trace_distance(evolve(model, start, 1.0), maximally_mixed(model.register))
        return close(error, float(np.exp(-2.0)), 1e-8)

    def replacement_gap(seed: int) -> Outcome:
        rho = random_state(Register.chain(1), seed)
        return close(spectral_gap(replacement_model(rho)).gap, 1.0, 1e-8)

    def dephasing_shift(_seed: int) -> Outcome:
        kappa, beta = 0.3, 1.0
        model = davies_generator(Z, [((0,), X)], beta)
        shifted = model.with_generator(dephasing_generator(model.register, (0,), kappa), "dephased")
        rates = np.sort(-np.linalg.eigvals(shifted.generator.matrix).real)
        c = float(np.cosh(beta))
        expected = np.sort([0.0, c + 2 * kappa, c + 2 * kappa, 2 * c])
        return at_most(float(np.abs(rates - expected).max()), 0.0, 1e-8)

    def prefactor(seed: int) -> Outcome:
        model = davies_chain(3, 1.0)
        ensemble = apply_instrument(model.reference, z_measurement(model.register, 0))
        return at_most(prefactor_identity(ensemble.states[0], model.reference).spread, 0.0, 1e-9)

    def variance_decay(seed: int) -> Outcome:
        model = davies_chain(3, 1.0)
        O = QuantumDataGenerator(seed).random_hermitian(model.dim)
        result = variance_decay_check(model, O, np.linspace(0.0, 3.0, 7))
        return Outcome(float(max(result.variances)), float(max(result.bounds)), 1e-6, result.holds)

    def dressing_length(_seed: int) -> Outcome:
        short = imaginary_time_dressing_norm(ising_chain(3), X, 0.7, sites=(1,))
        long = imaginary_time_dressing_norm(ising_chain(5), X, 0.7, sites=(1,))
        return close(long, short, 1e-9)

    def dressing_commuting(_seed: int) -> Outcome:
        return close(imaginary_time_dressing_norm(ising_chain(3), Z, 1.3, sites=(1,)), 1.0, 1e-9)

    return [
        Check("davies_balance", "Davies generator is GNS balanced", davies_balance),
        Check("davies_steady_state", "Davies steady state is the Gibbs state", davies_steady),
        Check("relaxation_rate", "relaxation at least as fast as the gap", relaxation_rate),
        Check("convergence_envelope", "relaxation under the divergence envelope", envelope),
        Check("detectability_decay", "detectability tower error decays in depth", detectability),
        Check("detectability_deep", "deep detectability tower recovers", detectability_deep),
        Check("two_level_gap", "two-level Davies gap", two_level_gap),
        Check("infinite_temperature", "infinite-temperature relaxation", infinite_temperature),
        Check("replacement_gap", "replacement generator gap", replacement_gap),
        Check("dephasing_shift", "dephasing shifts only the coherence rate", dephasing_shift),
        Check("prefactor_identity", "variance and trace forms of the prefactor agree", prefactor),
        Check("variance_decay", "variance decays at twice the gap", variance_decay),
        Check("dressing_length", "dressing norm independent of chain length", dressing_length),
        Check("dressing_commuting", "commuting operators are not dressed", dressing_commuting),
    ]


# -- purification --------------------------------------------------------------------------


def _purification_checks(sizes: SuiteSizes, settings: RunSettings) -> List[Check]:
    def interpolation(_seed: int) -> Outcome:
        ts = np.linspace(0.1, 1.0, 10)
        _, part = counterexample("E4")
        cmis, defects = [], []
        for t in ts:
            rho = e4_family(float(t))
            cmis.append(conditional_mutual_information(rho, part["A"], part["C"], part["B"]))
            defects.append(tfd_local_computability_defect(rho, part))
        fit = fit_proportional(np.sqrt(np.maximum(cmis, 0.0)), defects)
        table = pd.DataFrame({"t": ts, "cmi": cmis, "defect": defects, "constant": fit.constant})
        return Outcome(fit.r2, 0.9, 0.0, bool(fit.r2 >= 0.9), table)

    def qmc_marginals(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(max(sizes.qmc_cases // 10, 3)):
            rho, part = _random_qmc(generator)
            worst = max(worst, tfd_local_computability_defect(rho, part), qmc_factorization_residual(rho, part))
        return at_most(worst, 0.0, 1e-9)

    def near_markov(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        qmc, part = qmc_fixture("classical-conditional", seed)
        noise = DensityMatrix(qmc.register, generator.random_density_matrix(qmc.dim))
        scan = near_markov_defect_scan(qmc, part, noise, np.geomspace(1e-4, 1e-1, 6))
        table = pd.DataFrame({"eps": scan.eps, "distance": scan.distances, "defect": scan.defects,
                              "constant": scan.fit.constant})
        return Outcome(scan.max_ratio, Config.NEAR_MARKOV_CONSTANT, 1e-9, scan.holds, table)

    def stabilizer(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(sizes.stabilizer_groups):
            n = int(generator.rng.integers(3, 5))
            k = int(generator.rng.integers(1, n + 1))
            rho = stabilizer_state(generator.random_stabilizer_generators(n, k))
            part = tripartition(rho.register, [0], list(range(1, n - 1)), [n - 1])
            lhs, rhs = stabilizer_tfd_identity(rho, part)
            worst = max(worst, abs(lhs - rhs))
        return at_most(worst, 0.0, 1e-8)

    def mie(_seed: int) -> Outcome:
        rho = gibbs_state(ising_chain(6), 0.5)
        worst = -np.inf
        for k in range(1, 5):
            part = tripartition(rho.register, list(range(k)), [k], list(range(k + 1, 6)))
            cmi = conditional_mutual_information(rho, part["A"], part["C"], part["B"])
            worst = max(worst, cmi - classical_mie(rho, part))
        return at_most(worst, 0.0, 1e-9)

    def cpq_identity(seed: int) -> Outcome:
        generator = QuantumDataGenerator(seed)
        worst = 0.0
        for _ in range(10):
            rho = _random_pair_state(generator, (2, 2))
            lhs, rhs = purified_cpq_identity(rho, generator.random_operator(4))
            worst = max(worst, abs(lhs - rhs))
        return at_most(worst, 0.0, 1e-10)

    return [
        Check("interpolation_fit", "purified marginal defect proportional to sqrt(CMI)", interpolation),
        Check("qmc_marginals", "exact Markov chains have equal purified marginals", qmc_marginals),
        Check("near_markov_constant", "marginal defect within 4 sqrt(distance) of a Markov chain", near_markov),
        Check("stabilizer_identity", "stabilizer entropy identity of the purification", stabilizer),
        Check("classical_mie", "measurement-induced entanglement bounds the CMI", mie),
        Check("purified_cpq", "purified expectation equals the squared C_1/2,1/2", cpq_identity),
    ]


SUITES: Dict[str, Callable[[SuiteSizes, RunSettings], List[Check]]] = {
    "counterexamples": _counterexample_checks,
    "cpq-properties": _cpq_checks,
    "markov": _markov_checks,
    "stability-scan": _stability_checks,
    "lindblad": _lindblad_checks,
    "purification": _purification_checks,
}


class VerificationHarness:
    """
    Runs named suites and writes their results

    Checks of a suite are dispatched on a thread pool; each one gets a seed
    derived from the run seed and its id, and results are merged by id.
    """

    def __init__(self, settings: Optional[RunSettings] = None, sizes: Optional[SuiteSizes] = None):
        self.settings = settings or RunSettings()
        self.sizes = sizes or SuiteSizes()

    def checks(self, name: str) -> List[Check]:
        """Checks of a suite, ids prefixed by the suite name"""
        if name == "all":
            return [check for suite in SUITE_NAMES for check in self.checks(suite)]
        if name not in SUITES:
            raise UnknownSuite(f"unknown suite {name!r}; choose from {list(SUITE_NAMES) + ['all']}")
        return [replace(check, id=f"{name}.{check.id}") for check in SUITES[name](self.sizes, self.settings)]

    def _run_check(self, check: Check) -> Tuple[CheckRecord, Optional[pd.DataFrame]]:
        outcome = check.run(check_seed(self.settings.seed, check.id))
        record = CheckRecord(check.id, check.ref, outcome.measured, outcome.expected,
                             outcome.tol, outcome.passed)
        logger.info("%-55s %s measured=%.6g", check.id, "PASS" if record.passed else "FAIL", record.measured)
        return record, outcome.table

    def run_suite(self, name: str) -> SuiteResult:
        """
        Run a suite (or "all")

        Args:
            name: Suite name

        Returns:
            SuiteResult: Records sorted by id, with any scan tables
        """
        checks = self.checks(name)
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=self.settings.threads) as executor:
            tasks = [executor.submit(self._run_check, check) for check in checks]
            results = [task.result() for task in as_completed(tasks)]
        wall_time = time.perf_counter() - start
        results = sorted(results, key=lambda item: item[0].id)
        tables = {record.id: table for record, table in results if table is not None}
        result = SuiteResult(name, self.settings.seed, tuple(record for record, _ in results),
                             wall_time, tables)
        logger.info("suite %s: %d/%d checks passed in %.2fs", name,
                    len(result.checks) - len(result.failures), len(result.checks), wall_time)
        return result

    def write(self, result: SuiteResult) -> List[str]:
        """results.json plus one CSV per scan table in the output directory"""
        out_dir = self.settings.out_dir
        paths = [write_json(os.path.join(out_dir, "results.json"), result)]
        for check_id, table in sorted(result.tables.items()):
            paths.append(write_scan(table, os.path.join(out_dir, f"{check_id}.csv")))
        return paths

    def run_and_write(self, name: str) -> SuiteResult:
        result = self.run_suite(name)
        self.write(result)
        return result
