# Test the canonical purification and its locality identities

import os
import sys
import unittest

import numpy as np

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import cat_states, counterexample, qmc_fixture, random_state, stabilizer_state, tripartition
from src.info import conditional_mutual_information
from src.purification import (
    NearMarkovScan,
    canonical_purify,
    choi_decompose,
    classical_mie,
    marginal_trace_norm_defect,
    near_markov_defect_scan,
    purified_cpq_identity,
    qmc_factorization_residual,
    stabilizer_tfd_identity,
    tfd_connected_correlator,
    tfd_local_computability_defect,
    tfd_mutual_information,
    weyl_basis,
)
from src.states import Register, RegionPartition, maximally_mixed, mix, pure_state
from utils.config import Config
from utils.data_generator import QuantumDataGenerator
from utils.exceptions import DimensionCap, NotClassical, NotStabilizerInput, ParamsOutOfRange, UnpairedBlock


def bell_across_mixed_qubit():
    """(|0b0> + |1b1>)/sqrt(2) averaged over the middle qubit b"""
    register = Register.chain(3)
    branches = []
    for b in (0, 1):
        vector = np.zeros(8, dtype=complex)
        vector[2 * b] = vector[5 + 2 * b] = 1.0
        branches.append(pure_state(register, vector))
    return mix(branches, [0.5, 0.5])


class TestCanonicalPurification(unittest.TestCase):
    """Test cases for |sqrt(rho)>"""

    def setUp(self):
        """Set up test fixtures"""
        self.rho = random_state(Register.chain(2), seed=12)
        self.purified = canonical_purify(self.rho)

    def test_marginal_is_rho(self):
        """Test tracing the mirror returns the state"""
        self.assertAlmostEqual(np.linalg.norm(self.purified.vector), 1.0)
        reduced = self.purified.reduced_matrix(self.rho.register.labels)
        np.testing.assert_allclose(reduced, self.rho.matrix, atol=1e-10)

    def test_mirror_labels(self):
        """Test mirror labels sort after the base labels"""
        self.assertEqual(self.purified.mirror([0, 1]), (2, 3))
        self.assertEqual(self.purified.block([1]), (1, 3))
        with self.assertRaises(UnpairedBlock):
            self.purified.mirror([2])

    def test_dimension_cap(self):
        """Test large states are not purified"""
        with self.assertRaises(DimensionCap):
            canonical_purify(maximally_mixed(Register.chain(7)))

    def test_purified_expectation(self):
        """Test <O (x) O^*> equals the squared C_{1/2,1/2}"""
        O = QuantumDataGenerator(4).random_operator(4)
        lhs, rhs = purified_cpq_identity(self.rho, O)
        self.assertAlmostEqual(lhs, rhs, places=9)


class TestMirrorDecomposition(unittest.TestCase):
    """Test cases for the mirror-symmetric operator decomposition"""

    def test_weyl_basis_orthonormal(self):
        """Test Tr(P_a^dagger P_b) = delta_ab for d = 3"""
        basis = weyl_basis(3)
        gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
        np.testing.assert_allclose(gram, np.eye(9), atol=1e-12)

    def test_reconstruction(self):
        """Test O1 - O2 + i O3 - i O4 returns the operator"""
        O = QuantumDataGenerator(6).ginibre(4, 4)
        decomposition = choi_decompose(O)
        np.testing.assert_allclose(decomposition.reconstruct(), O, atol=1e-10)
        self.assertTrue(all(norm >= 0 for norm in decomposition.part_norms()))

    def test_unpaired(self):
        """Test operators that are not on a mirror pair"""
        with self.assertRaises(UnpairedBlock):
            choi_decompose(np.eye(3))


class TestPurifiedLocality(unittest.TestCase):
    """Test cases for purified-state locality"""

    def test_markov_marginals_agree(self):
        """Test exact Markov chains have equal purified A A-bar marginals"""
        for kind in ("product", "classical-conditional", "classical-chain"):
            state, part = qmc_fixture(kind, seed=8)
            self.assertLess(tfd_local_computability_defect(state, part), 1e-9, kind)
            self.assertLess(marginal_trace_norm_defect(state, part), 1e-8, kind)
            self.assertLess(qmc_factorization_residual(state, part), 1e-8, kind)

    def test_e4_factorizes(self):
        """Test the four-qubit counterexample has factorized purified marginals despite CMI > 0"""
        state, part = counterexample("E4")
        self.assertGreater(conditional_mutual_information(state, part["A"], part["C"], part["B"]), 0.1)
        self.assertAlmostEqual(tfd_mutual_information(state, [0], [3]), 0.0, places=9)
        self.assertLess(tfd_local_computability_defect(state, part), 1e-9)
        zz = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0]))
        self.assertAlmostEqual(abs(tfd_connected_correlator(state, zz, [0], zz, [3])), 0.0, places=9)

    def test_ghz_purified_correlation(self):
        """Test GHZ blocks stay correlated after purification"""
        self.assertGreater(tfd_mutual_information(cat_states(3, coherent=True), [0], [2]), 0.5)


class TestNearMarkovScan(unittest.TestCase):
    """Test cases for marginal defects around exact Markov chains"""

    def setUp(self):
        """Set up test fixtures"""
        self.eps = np.geomspace(1e-4, 1e-1, 6)

    def test_markov_base_within_constant(self):
        """Test the defect stays below 4 sqrt(distance) near a Markov chain"""
        for seed in (2, 4):
            base, part = qmc_fixture("classical-conditional", seed=seed)
            noise = random_state(base.register, seed=seed + 50)
            scan = near_markov_defect_scan(base, part, noise, self.eps)
            self.assertIsInstance(scan, NearMarkovScan)
            self.assertTrue(all(d > 0.0 for d in scan.distances))
            self.assertLessEqual(scan.max_ratio, Config.NEAR_MARKOV_CONSTANT + 1e-9)
            self.assertTrue(scan.holds)

    def test_non_markov_base_fails(self):
        """Test a Bell pair across a mixed qubit breaks the square-root relation"""
        state = bell_across_mixed_qubit()
        part = tripartition(state.register, [0], [1], [2])
        self.assertAlmostEqual(marginal_trace_norm_defect(state, part), 1.5, places=8)
        scan = near_markov_defect_scan(state, part, maximally_mixed(state.register), [1e-4, 1e-3, 1e-2])
        self.assertAlmostEqual(scan.distances[0], 1.5e-4, places=10)
        self.assertGreater(scan.max_ratio, Config.NEAR_MARKOV_CONSTANT)
        self.assertFalse(scan.holds)

    def test_invalid_weights(self):
        """Test noise weights outside (0, 1]"""
        base, part = qmc_fixture("product", seed=1)
        for eps in ([], [0.0, 0.1], [1.5]):
            with self.assertRaises(ParamsOutOfRange):
                near_markov_defect_scan(base, part, maximally_mixed(base.register), eps)


class TestStabilizerAndClassical(unittest.TestCase):
    """Test cases for stabilizer and classical identities"""

    def test_stabilizer_identity(self):
        """Test I(A:C) + I(A:C|B) = I(A A-bar : C C-bar) on stabilizer states"""
        for generators in (["ZZI", "IZZ"], ["XXX"], ["XXI", "ZZZ"]):
            rho = stabilizer_state(generators)
            lhs, rhs = stabilizer_tfd_identity(rho, tripartition(rho.register, [0], [1], [2]))
            self.assertAlmostEqual(lhs, rhs, places=9, msg=str(generators))

    def test_stabilizer_bipartite(self):
        """Test I(A:B) = S(A A-bar) on two regions"""
        rho = stabilizer_state(["ZZI", "IZZ"])
        part = RegionPartition.from_sites(rho.register, {"A": [0], "B": [1, 2]})
        lhs, rhs = stabilizer_tfd_identity(rho, part)
        self.assertAlmostEqual(lhs, rhs, places=9)

    def test_requires_stabilizer_provenance(self):
        """Test other states are rejected"""
        rho = random_state(Register.chain(3), seed=1)
        with self.assertRaises(NotStabilizerInput):
            stabilizer_tfd_identity(rho, tripartition(rho.register, [0], [1], [2]))

    def test_classical_mie(self):
        """Test the measurement-induced entanglement bounds the CMI"""
        state, part = counterexample("E4")
        mie = classical_mie(state, part)
        self.assertGreaterEqual(mie, conditional_mutual_information(state, part["A"], part["C"], part["B"]) - 1e-9)
        ghz = cat_states(3, coherent=True)
        with self.assertRaises(NotClassical):
            classical_mie(ghz, tripartition(ghz.register, [0], [1], [2]))


if __name__ == '__main__':
    unittest.main(verbosity=2)
