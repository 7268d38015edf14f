# Test Markov chain certification, averaged CMI and local computability witnesses

import os
import sys
import unittest

import numpy as np

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import cat_states, counterexample, qmc_fixture, random_state, tripartition
from src.channels import KrausInstrument
from src.correlators import CorrelatorParams
from src.markov import (
    certify_qmc,
    fact1_recovery_scan,
    local_computability_witness_search,
    measurement_average_cmi,
    petz_recovery_error,
    regularize,
)
from src.states import Register
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import ParamsOutOfRange, SupportMismatch

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


class TestCertifyQMC(unittest.TestCase):
    """Test cases for quantum Markov chain certification"""

    def test_markov_fixtures(self):
        """Test every exact Markov fixture certifies"""
        for kind in ("product", "classical-conditional", "classical-chain"):
            state, part = qmc_fixture(kind, seed=13)
            report = certify_qmc(state, part)
            self.assertTrue(report.is_qmc, kind)
            self.assertLess(report.cmi, 1e-8)
            self.assertLess(report.petz_recovery_error, 1e-8)

    def test_e4_not_markov(self):
        """Test the four-qubit counterexample fails with CMI 5/2 - 3/2 log2 3"""
        state, part = counterexample("E4")
        report = certify_qmc(state, part)
        self.assertFalse(report.is_qmc)
        self.assertAlmostEqual(report.cmi, 2.5 - 1.5 * np.log2(3), places=9)

    def test_e3_markov(self):
        """Test the qutrit counterexample is a Markov chain"""
        state, part = counterexample("E3")
        self.assertTrue(certify_qmc(state, part).is_qmc)

    def test_ghz_not_markov(self):
        """Test GHZ fails the Petz criterion as well"""
        state = cat_states(3, coherent=True)
        part = tripartition(state.register, [0], [1], [2])
        self.assertGreater(petz_recovery_error(state, part), 1e-3)
        self.assertFalse(certify_qmc(state, part).is_qmc)


class TestMeasurementAverage(unittest.TestCase):
    """Test cases for the averaged-CMI inequality"""

    def setUp(self):
        """Set up test fixtures"""
        self.ghz = cat_states(3, coherent=True)
        self.part = tripartition(self.ghz.register, [0], [1], [2])

    def test_ghz_measurement(self):
        """Test a Z measurement on A removes the GHZ CMI on average"""
        inst = KrausInstrument(self.part["A"], (P0, P1))
        lhs, rhs = measurement_average_cmi(self.ghz, inst, self.part)
        self.assertAlmostEqual(lhs, 0.0, places=9)
        self.assertAlmostEqual(rhs, 1.0, places=9)

    def test_unitary_instrument(self):
        """Test a single unitary keeps the CMI"""
        U = QuantumDataGenerator(3).random_unitary(2)
        state = random_state(Register.chain(3), seed=4)
        lhs, rhs = measurement_average_cmi(state, KrausInstrument(self.part["A"], (U,)), self.part)
        self.assertAlmostEqual(lhs, rhs, places=9)

    def test_random_instruments(self):
        """Test lhs <= rhs for random instruments on random states"""
        generator = QuantumDataGenerator(9)
        for seed in range(5):
            state = random_state(Register.chain(3), seed=seed, rank=3)
            inst = KrausInstrument(self.part["A"], tuple(generator.random_kraus(2, 3)))
            lhs, rhs = measurement_average_cmi(state, inst, self.part)
            self.assertLessEqual(lhs, rhs + 1e-9)

    def test_support_outside_a(self):
        """Test instruments must act inside A"""
        with self.assertRaises(SupportMismatch):
            measurement_average_cmi(self.ghz, KrausInstrument(self.part["C"], (P0, P1)), self.part)


class TestWitnessSearch(unittest.TestCase):
    """Test cases for the local computability witness search"""

    def test_markov_has_no_witness(self):
        """Test no unitary separates a product Markov chain"""
        state, part = qmc_fixture("product", seed=6)
        result = local_computability_witness_search(state, part, CorrelatorParams(0.5, 1.0), n_samples=30, seed=1)
        self.assertIsNone(result.unitary)
        self.assertEqual(result.samples_tried, 30)

    def test_e4_witness(self):
        """Test a witness exists for the regularized four-qubit counterexample"""
        state, part = counterexample("E4")
        result = local_computability_witness_search(state, part, CorrelatorParams(0.5, 1.0), n_samples=100, seed=1)
        self.assertTrue(result.regularized)
        self.assertIsNotNone(result.unitary)
        self.assertGreater(abs(result.defect), 1e-6)

    def test_fidelity_point_excluded(self):
        """Test p = q = 1 is rejected"""
        state, part = qmc_fixture("product", seed=6)
        with self.assertRaises(ParamsOutOfRange):
            local_computability_witness_search(state, part, CorrelatorParams(1.0, 1.0))

    def test_regularize(self):
        """Test regularization yields a full-rank state"""
        state, _ = counterexample("E4")
        self.assertGreater(regularize(state).eigenvalues.min(), 0.0)


class TestRecoveryGuarantee(unittest.TestCase):
    """Test cases for the fidelity guarantee of rotated Petz recovery"""

    def test_guarantee_on_random_states(self):
        """Test the best recovery fidelity reaches 2^(-cmi/2)"""
        for seed in range(3):
            state = random_state(Register.chain(3), seed=seed, rank=2)
            part = tripartition(state.register, [0], [1], [2])
            result = fact1_recovery_scan(state, part, t_grid=np.linspace(-4, 4, 41))
            self.assertTrue(result.holds)

    def test_exact_on_markov(self):
        """Test Markov chains recover with fidelity one"""
        state, part = qmc_fixture("classical-chain", seed=2)
        result = fact1_recovery_scan(state, part, t_grid=[0.0])
        self.assertAlmostEqual(result.best_fidelity, 1.0, places=6)
        self.assertAlmostEqual(result.best_bures, 0.0, places=3)


if __name__ == '__main__':
    unittest.main(verbosity=2)
