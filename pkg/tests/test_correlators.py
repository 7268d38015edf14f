# Test the C_{p,q} correlator family and the operator-correlation norm

import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import qmc_fixture
from src.channels import ChannelMap
from src.correlators import (
    CorrelatorParams,
    connected_correlator,
    cpq,
    cpq_clustering_defect,
    fidelity_correlator,
    local_computability_defect,
    operator_correlation,
    p_plus_q_one_form,
    renyi1_correlator,
    renyi2_correlator,
    renyi_sandwich_correlator,
)
from src.states import DensityMatrix, Register, RegionPartition, bures_distance, fidelity, mix, pure_state, tensor
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import ParamsOutOfRange, RegionsOverlap

Z = np.diag([1.0, -1.0]).astype(complex)
GRID = (0.25, 0.5, 0.75, 1.0)


class TestCorrelatorValues(unittest.TestCase):
    """Test cases for correlator special points"""

    def setUp(self):
        """Set up test fixtures"""
        self.generator = QuantumDataGenerator(seed=2)
        self.register = Register.chain(2)
        self.rho = DensityMatrix(self.register, self.generator.random_density_matrix(4))

    def test_identity_is_one(self):
        """Test C_{p,q}(1, rho) = 1 on the grid"""
        for p in GRID:
            for q in GRID:
                self.assertAlmostEqual(cpq(np.eye(4), self.rho, CorrelatorParams(p, q)), 1.0, places=10)
        self.assertAlmostEqual(renyi2_correlator(np.eye(4), self.rho), 1.0)

    def test_pure_state_expectation(self):
        """Test the correlator of a pure state is |<O>|"""
        psi = self.generator.random_pure_vector(4)
        state = pure_state(self.register, psi)
        O = self.generator.random_operator(4)
        expected = abs(np.vdot(psi, O @ psi))
        self.assertAlmostEqual(cpq(O, state, CorrelatorParams(0.5, 0.75)), expected, places=8)

    def test_fidelity_point(self):
        """Test C_{1,1}(U) = F(rho, U rho U^dagger)"""
        U = self.generator.random_unitary(4)
        rotated = DensityMatrix(self.register, U @ self.rho.matrix @ U.conj().T)
        self.assertAlmostEqual(fidelity_correlator(U, self.rho), fidelity(self.rho, rotated), places=8)

    def test_one_form(self):
        """Test the p + q = 1 trace form equals C_{1-q,q}"""
        O = self.generator.random_operator(4)
        for q in (0.25, 0.5, 0.75):
            self.assertAlmostEqual(p_plus_q_one_form(O, self.rho, q),
                                   cpq(O, self.rho, CorrelatorParams(1 - q, q)), places=10)
        self.assertAlmostEqual(renyi1_correlator(O, self.rho), cpq(O, self.rho, CorrelatorParams(0.5, 0.5)))

    def test_parameter_ranges(self):
        """Test invalid exponents raise"""
        with self.assertRaises(ParamsOutOfRange):
            CorrelatorParams(0.0, 1.0)
        with self.assertRaises(ParamsOutOfRange):
            CorrelatorParams(0.5, 1.5)
        with self.assertRaises(ParamsOutOfRange):
            renyi_sandwich_correlator(Z, self.rho, 0.4, sites=[0])
        with self.assertRaises(ParamsOutOfRange):
            p_plus_q_one_form(Z, self.rho, 1.0, sites=[0])

    def test_local_operator(self):
        """Test a site-local operator is embedded"""
        value = cpq(Z, self.rho, CorrelatorParams(1.0, 1.0), sites=[1])
        embedded = cpq(np.kron(np.eye(2), Z), self.rho, CorrelatorParams(1.0, 1.0))
        self.assertAlmostEqual(value, embedded, places=12)


class TestCorrelatorProperties(unittest.TestCase):
    """Property tests for the correlator family"""

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_range_symmetry_monotonicity(self, seed):
        """Test |<O>| <= C <= ||O||, C_{p,q}(O) = C_{q,p}(O^dagger) and monotonicity in p"""
        generator = QuantumDataGenerator(seed)
        rho = DensityMatrix(Register.chain(2), generator.random_density_matrix(4, rank=3))
        O = generator.random_operator(4)
        mean = abs(rho.expectation(O))
        for q in GRID:
            values = [cpq(O, rho, CorrelatorParams(p, q)) for p in GRID]
            for value in values:
                self.assertGreaterEqual(value, mean - 1e-9)
                self.assertLessEqual(value, 1.0 + 1e-9)
            for first, second in zip(values, values[1:]):
                self.assertGreaterEqual(first, second - 1e-9)
        params = CorrelatorParams(0.25, 0.75)
        self.assertAlmostEqual(cpq(O, rho, params), cpq(O.conj().T, rho, params.swapped()), places=9)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_multiplicativity(self, seed):
        """Test C(O1 O2, rho1 rho2) = C(O1, rho1) C(O2, rho2)"""
        generator = QuantumDataGenerator(seed)
        qubit = Register.chain(1)
        r1 = DensityMatrix(qubit, generator.random_density_matrix(2))
        r2 = DensityMatrix(qubit, generator.random_density_matrix(2))
        O1, O2 = generator.random_operator(2), generator.random_operator(2)
        params = CorrelatorParams(0.5, 1.0)
        joint = tensor(r1, r2)
        self.assertAlmostEqual(cpq(np.kron(O1, O2), joint, params),
                               cpq(O1, r1, params) * cpq(O2, r2, params), places=9)
        self.assertLess(cpq_clustering_defect(joint, O1, [0], O2, [1], params), 1e-9)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_data_processing(self, seed):
        """Test channels on B do not decrease C_{p,q}(O_A)"""
        generator = QuantumDataGenerator(seed)
        register = Register.chain(2)
        rho = DensityMatrix(register, generator.random_density_matrix(4))
        channel = ChannelMap(register.region([1]), register.region([1]), register.region([1]),
                             np.stack(generator.random_kraus(2, 2)))
        O = generator.random_operator(2)
        for params in (CorrelatorParams(0.5, 0.5), CorrelatorParams(0.5, 1.0), CorrelatorParams(1.0, 1.0)):
            before = cpq(O, rho, params, sites=[0])
            after = cpq(O, channel.apply(rho), params, sites=[0])
            self.assertGreaterEqual(after, before - 1e-9)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_defect_nonnegative(self, seed):
        """Test C(O_A, rho_AB) >= C(O_A, rho_ABC) on random states"""
        generator = QuantumDataGenerator(seed)
        register = Register.chain(3)
        rho = DensityMatrix(register, generator.random_density_matrix(8))
        part = RegionPartition.from_sites(register, {"A": [0], "B": [1], "C": [2]})
        O = generator.random_operator(2)
        for params in (CorrelatorParams(0.5, 0.5), CorrelatorParams(1.0, 0.5)):
            self.assertGreaterEqual(local_computability_defect(rho, O, part, params), -1e-9)


class TestCorrelatorContinuity(unittest.TestCase):
    """Test cases for continuity and vanishing of C_{p,q}"""

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=1e-4, max_value=1.0))
    def test_bures_continuity(self, seed, weight):
        """Test |C(O, rho) - C(O, sigma)| <= 2^{3/2} ||O|| D_B(rho, sigma)^{min(p, q)}"""
        generator = QuantumDataGenerator(seed)
        register = Register.chain(2)
        rho = DensityMatrix(register, generator.random_density_matrix(4))
        noise = DensityMatrix(register, generator.random_density_matrix(4, rank=2))
        sigma = mix([rho, noise], [1.0 - weight, weight])
        O = generator.random_operator(4, unit_norm=False)
        scale = np.linalg.norm(O, 2)
        distance = bures_distance(rho, sigma)
        for p in GRID:
            for q in GRID:
                params = CorrelatorParams(p, q)
                gap = abs(cpq(O, rho, params) - cpq(O, sigma, params))
                self.assertLessEqual(gap, 2 ** 1.5 * scale * distance ** min(p, q) + 1e-9)

    def test_zero_off_support(self):
        """Test C vanishes when O maps supp(rho) into its orthocomplement"""
        generator = QuantumDataGenerator(seed=7)
        rho = DensityMatrix(Register.chain(2), generator.random_density_matrix(4, rank=2))
        values, vectors = np.linalg.eigh(rho.matrix)
        support = vectors[:, values > 1e-10]
        P = support @ support.conj().T
        G = generator.random_operator(4)
        off_support = G - P @ G @ P
        for p in GRID:
            for q in GRID:
                params = CorrelatorParams(p, q)
                self.assertAlmostEqual(cpq(off_support, rho, params), 0.0, places=7)
                self.assertAlmostEqual(cpq(P + off_support, rho, params), 1.0, places=7)

    def test_flip_on_pure_qubit(self):
        """Test X on a qubit fixed in |0> gives zero and Z does not"""
        rho = DensityMatrix(Register.chain(2), np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex))
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        for params in (CorrelatorParams(0.5, 0.5), CorrelatorParams(1.0, 0.25)):
            self.assertAlmostEqual(cpq(X, rho, params, sites=[0]), 0.0, places=10)
            self.assertAlmostEqual(cpq(Z, rho, params, sites=[0]), 1.0, places=10)


class TestOperatorCorrelation(unittest.TestCase):
    """Test cases for the operator-correlation norm"""

    def test_bell_pair(self):
        """Test the Bell pair reaches 1 under the 3/2 envelope"""
        bell = pure_state(Register.chain(2), [1, 0, 0, 1])
        estimate = operator_correlation(bell, [0], [1], restarts=4, seed=1)
        self.assertGreater(estimate.value, 0.99)
        self.assertLessEqual(estimate.value, estimate.upper_envelope + 1e-9)
        self.assertAlmostEqual(estimate.upper_envelope, 1.5)

    def test_classical_pair(self):
        """Test the classically correlated pair reaches 1"""
        classical = DensityMatrix(Register.chain(2), np.diag([0.5, 0, 0, 0.5]).astype(complex))
        self.assertGreater(operator_correlation(classical, [0], [1], restarts=4, seed=1).value, 0.99)
        self.assertAlmostEqual(connected_correlator(classical, Z, [0], Z, [1]).real, 1.0)

    def test_product_state(self):
        """Test product states have no correlation"""
        state, _ = qmc_fixture("product", seed=3)
        estimate = operator_correlation(state, [0], [2], restarts=2, seed=1)
        self.assertLess(estimate.value, 1e-9)
        self.assertLess(estimate.upper_envelope, 1e-9)

    def test_overlap(self):
        """Test overlapping regions raise"""
        state, _ = qmc_fixture("product", seed=3)
        with self.assertRaises(RegionsOverlap):
            operator_correlation(state, [0, 1], [1])

    def test_markov_defect_vanishes(self):
        """Test local computability holds exactly on a product Markov chain"""
        state, part = qmc_fixture("product", seed=4)
        O = QuantumDataGenerator(5).random_unitary(2)
        self.assertAlmostEqual(local_computability_defect(state, O, part, CorrelatorParams(0.5, 1.0)), 0.0, places=9)


if __name__ == '__main__':
    unittest.main(verbosity=2)
