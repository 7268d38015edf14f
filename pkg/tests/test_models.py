# Test Pauli algebra, spin-chain Hamiltonians and the fixture registry

import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import (
    build_fixture,
    cat_states,
    counterexample,
    e4_family,
    list_fixtures,
    parity_replacement_channel,
    parity_state,
    qmc_fixture,
    stabilizer_state,
)
from models.hamiltonians import (
    PAULI,
    LocalHamiltonian,
    gibbs_state,
    ising_chain,
    ising_partition_function_exact,
    ising_partition_function_transfer,
    pauli_on,
    pauli_string_matrix,
    transverse_field_ising,
)
from src.channels import KrausInstrument, apply_instrument
from src.info import conditional_mutual_information, mutual_information
from src.markov import certify_qmc
from src.states import Register, trace_distance
from utils.exceptions import BadName, NonCommutingGenerators


class TestPauliAlgebra(unittest.TestCase):
    """Test cases for Pauli strings"""

    def test_string_matrix(self):
        """Test Kronecker order and letter validation"""
        np.testing.assert_allclose(pauli_string_matrix("XZ"), np.kron(PAULI["X"], PAULI["Z"]))
        np.testing.assert_allclose(pauli_string_matrix("iy"), np.kron(PAULI["I"], PAULI["Y"]))
        with self.assertRaises(BadName):
            pauli_string_matrix("XQ")

    def test_pauli_on(self):
        """Test embedding a sparse Pauli product"""
        register = Register.chain(3)
        expected = np.kron(np.kron(PAULI["Z"], PAULI["I"]), PAULI["X"])
        np.testing.assert_allclose(pauli_on(register, {2: "X", 0: "Z"}), expected)


class TestHamiltonians(unittest.TestCase):
    """Test cases for local Hamiltonians and Gibbs states"""

    def test_ising_terms(self):
        """Test term layout and commutation of the Ising chains"""
        H = ising_chain(4, J=1.0, h=0.5)
        self.assertIsInstance(H, LocalHamiltonian)
        self.assertEqual(len(H.terms), 3 + 4)
        self.assertEqual(len(H.terms_touching(1)), 3)
        self.assertTrue(H.is_commuting())
        self.assertFalse(transverse_field_ising(3, g=0.7).is_commuting())
        self.assertEqual(len(ising_chain(4, periodic=True).terms), 4)

    def test_gibbs_state(self):
        """Test the Gibbs state is normalized and maximally mixed at beta = 0"""
        rho = gibbs_state(transverse_field_ising(3), 0.9)
        self.assertAlmostEqual(np.trace(rho.matrix).real, 1.0, places=12)
        mixed = gibbs_state(ising_chain(3), 0.0)
        np.testing.assert_allclose(mixed.matrix, np.eye(8) / 8, atol=1e-12)

    def test_gibbs_from_matrix(self):
        """Test a bare matrix gets a qubit chain register"""
        rho = gibbs_state(PAULI["Z"], np.log(3.0) / 2)
        self.assertEqual(rho.register.n_sites, 1)
        np.testing.assert_allclose(np.diag(rho.matrix).real, [0.25, 0.75], atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=2, max_value=6),
           st.floats(min_value=0.0, max_value=2.0),
           st.floats(min_value=-1.0, max_value=1.0),
           st.booleans())
    def test_transfer_matrix_partition_function(self, n, beta, h, periodic):
        """Test the transfer-matrix partition function against the diagonal sum"""
        if periodic and n < 3:
            n = 3
        exact = ising_partition_function_exact(ising_chain(n, J=1.0, h=h, periodic=periodic), beta)
        transfer = ising_partition_function_transfer(n, beta, 1.0, h, periodic)
        self.assertAlmostEqual(transfer / exact, 1.0, places=9)


class TestStateFamilies(unittest.TestCase):
    """Test cases for cat, stabilizer and parity states"""

    def test_cat_states(self):
        """Test both cat states share their diagonal"""
        coherent, incoherent = cat_states(3, True), cat_states(3, False)
        np.testing.assert_allclose(np.diag(coherent.matrix), np.diag(incoherent.matrix), atol=1e-12)
        self.assertAlmostEqual(coherent.purity, 1.0, places=12)
        self.assertAlmostEqual(incoherent.purity, 0.5, places=12)

    def test_stabilizer_state(self):
        """Test the {ZZI, IZZ} state is the incoherent cat"""
        rho = stabilizer_state(["ZZI", "IZZ"])
        self.assertEqual(rho.provenance, "stabilizer")
        self.assertLess(trace_distance(rho, cat_states(3, False)), 1e-12)
        with self.assertRaises(NonCommutingGenerators):
            stabilizer_state(["XI", "ZI"])
        with self.assertRaises(NonCommutingGenerators):
            stabilizer_state(["ZZ", "ZZ"])

    def test_parity_state(self):
        """Test parity states are uniform over half the strings"""
        even, odd = parity_state(4), parity_state(4, odd=True)
        self.assertEqual(int(np.count_nonzero(np.diag(even.matrix).real > 0)), 8)
        np.testing.assert_allclose(even.matrix + odd.matrix, np.eye(16) / 8, atol=1e-12)
        self.assertAlmostEqual(mutual_information(even, [0], [3]), 0.0, places=10)
        self.assertAlmostEqual(conditional_mutual_information(even, [0], [3], [1, 2]), 1.0, places=10)


class TestCounterexamples(unittest.TestCase):
    """Test cases for the exact counterexample states"""

    def test_partitions(self):
        """Test the natural partition of each counterexample"""
        _, part = counterexample("E1", 5)
        self.assertEqual(tuple(part["B2"]), (2, 3))
        _, part = counterexample("E2", 5)
        self.assertTrue(part["B1"].is_empty)
        self.assertEqual(tuple(part["C"]), (2, 3, 4))
        state, part = counterexample("E3")
        self.assertEqual(state.register.site_dims, (2, 3, 2))
        _, part = counterexample("e4")
        self.assertEqual(tuple(part["B"]), (1, 2))

    def test_invalid_requests(self):
        """Test unknown names and too few qubits"""
        with self.assertRaises(BadName):
            counterexample("E5")
        with self.assertRaises(BadName):
            counterexample("E1", 3)

    def test_e1_has_no_long_range_information(self):
        """Test A is uncorrelated with C in the first counterexample"""
        state, part = counterexample("E1", 4)
        self.assertAlmostEqual(mutual_information(state, part["A"], part["C"]), 0.0, places=10)

    def test_e3_is_uncorrelated(self):
        """Test zero mutual and conditional mutual information"""
        state, part = counterexample("E3")
        self.assertAlmostEqual(mutual_information(state, part["A"], part["C"]), 0.0, places=10)
        self.assertAlmostEqual(
            conditional_mutual_information(state, part["A"], part["C"], part["B"]), 0.0, places=10)

    def test_e4_family_endpoints(self):
        """Test the interpolating family is Markov at zero and the counterexample at one"""
        state, part = counterexample("E4")
        self.assertTrue(certify_qmc(e4_family(0.0), part).is_qmc)
        self.assertLess(trace_distance(e4_family(1.0), state), 1e-12)

    def test_parity_replacement_channel(self):
        """Test the two-site channel reproduces a projected trajectory"""
        state, _ = counterexample("E2", 4)
        F = np.diag([1.0, 0.0]).astype(complex)
        channel = parity_replacement_channel(F, state.register)
        region = state.register.region([0])
        ensemble = apply_instrument(state, KrausInstrument(region, (F,)))
        trajectory = ensemble.states[0]
        self.assertLess(trace_distance(channel.apply(state), trajectory), 1e-10)


class TestFixtureRegistry(unittest.TestCase):
    """Test cases for the fixture registry"""

    def test_listing(self):
        """Test every listed fixture builds"""
        names = [spec.name for spec in list_fixtures()]
        for expected in ("E1", "E4", "cat-coherent", "qmc-product", "stabilizer-ghz"):
            self.assertIn(expected, names)
        for name in names:
            fixture = build_fixture(name, n=4) if name in ("ising-gibbs", "tfim-gibbs") else build_fixture(name)
            self.assertAlmostEqual(np.trace(fixture.state.matrix).real, 1.0, places=10)

    def test_parameters_and_partition(self):
        """Test overrides reach the builder and a chain partition is added"""
        fixture = build_fixture("cat-coherent", n=4)
        self.assertEqual(fixture.state.register.n_sites, 4)
        self.assertEqual(fixture.spec.parameters["n"], 4)
        self.assertEqual(tuple(fixture.partition["B"]), (1, 2))

    def test_markov_fixtures(self):
        """Test seeded Markov fixtures are reproducible"""
        a, _ = qmc_fixture("classical-chain", seed=5)
        b, _ = qmc_fixture("classical-chain", seed=5)
        np.testing.assert_allclose(a.matrix, b.matrix)
        with self.assertRaises(BadName):
            qmc_fixture("quantum-chain")

    def test_unknown_fixture(self):
        """Test unknown registry names"""
        with self.assertRaises(BadName):
            build_fixture("no-such-state")


if __name__ == '__main__':
    unittest.main(verbosity=2)
