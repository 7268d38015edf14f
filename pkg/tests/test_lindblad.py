# Test Davies generators, gaps, convergence and the detectability-lemma tower

import os
import sys
import unittest

import numpy as np

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import random_state
from models.hamiltonians import PAULI, gibbs_state, ising_chain, transverse_field_ising
from src.channels import KrausInstrument
from src.lindblad import (
    assign_layers,
    build_dl_recovery,
    convergence_check,
    davies_generator,
    dephasing_generator,
    detectability_recovery,
    dissipator,
    dressing_scan,
    evolve,
    gamma_superoperator,
    hamiltonian_part,
    imaginary_time_dressing_norm,
    prefactor_identity,
    replacement_model,
    spectral_gap,
    variance_decay_check,
)
from src.states import Register, basis_state, operator_trace_distance
from utils.exceptions import DimensionCap, NotCommuting, NotDetailedBalanced, NotLocallyBalanced, ParamsOutOfRange

X = PAULI["X"]
Z = PAULI["Z"]


def two_level(beta):
    """Qubit with H = Z coupled through X"""
    return davies_generator(Z, [((0,), X)], beta, register=Register.chain(1))


class TestBuildingBlocks(unittest.TestCase):
    """Test cases for the superoperator building blocks"""

    def test_hamiltonian_part_is_commutator(self):
        """Test -i[H, X] for a qubit"""
        rho = np.full((2, 2), 0.5, dtype=complex)
        expected = -1j * (Z @ rho - rho @ Z)
        np.testing.assert_allclose(hamiltonian_part(Z).apply(rho), expected, atol=1e-12)

    def test_dissipator_is_traceless(self):
        """Test a dissipator maps every operator to a traceless one"""
        J = np.array([[0, 1], [0, 0]], dtype=complex)
        M = np.array([[0.3, 0.1 + 0.2j], [0.1 - 0.2j, 0.7]])
        self.assertAlmostEqual(abs(np.trace(dissipator(J, 2.0).apply(M))), 0.0, places=12)

    def test_gamma_inverse_needs_full_rank(self):
        """Test negative powers of Gamma on a pure reference"""
        with self.assertRaises(NotDetailedBalanced):
            gamma_superoperator(np.diag([1.0, 0.0]), "GNS", -1.0)
        with self.assertRaises(ParamsOutOfRange):
            gamma_superoperator(np.eye(2) / 2, "XYZ")

    def test_assign_layers(self):
        """Test greedy layering of overlapping supports"""
        self.assertEqual(assign_layers([(0, 1), (1, 2), (2, 3)]), ((0, 2), (1,)))
        self.assertEqual(assign_layers([]), ())


class TestDaviesGenerator(unittest.TestCase):
    """Test cases for Davies-type Gibbs samplers"""

    def test_two_level_gap(self):
        """Test the qubit gap equals cosh(beta)"""
        for beta in (0.0, 0.5, 1.3):
            model = two_level(beta)
            report = spectral_gap(model)
            self.assertAlmostEqual(report.gap, np.cosh(beta), places=8)
            self.assertTrue(report.agree)

    def test_two_level_spectrum(self):
        """Test the relaxation rates 0, cosh, cosh, 2 cosh"""
        beta = 0.7
        rates = np.sort(-np.linalg.eigvals(two_level(beta).generator.matrix).real)
        c = np.cosh(beta)
        np.testing.assert_allclose(rates, [0.0, c, c, 2 * c], atol=1e-9)

    def test_dephasing_shifts_coherence_rates(self):
        """Test extra dephasing moves only the coherence rates"""
        beta, kappa = 0.4, 0.3
        model = two_level(beta)
        shifted = model.with_generator(dephasing_generator(model.register, [0], kappa))
        rates = np.sort(-np.linalg.eigvals(shifted.generator.matrix).real)
        c = np.cosh(beta)
        np.testing.assert_allclose(rates, [0.0, c + 2 * kappa, c + 2 * kappa, 2 * c], atol=1e-9)

    def test_infinite_temperature_distance(self):
        """Test ||e^{L}(|0><0|) - I/2||_1 = e^{-2} at beta = 0"""
        model = two_level(0.0)
        zero = basis_state(model.register, [0])
        evolved = evolve(model, zero, 1.0)
        distance = operator_trace_distance(evolved.matrix, model.reference.matrix)
        self.assertAlmostEqual(distance, np.exp(-2.0), places=9)

    def test_steady_state_is_gibbs(self):
        """Test the kernel of a chain sampler is its Gibbs state"""
        H = ising_chain(3, h=0.3)
        model = davies_generator(H, [((i,), X) for i in range(3)], 0.8)
        gibbs = gibbs_state(H, 0.8)
        self.assertTrue(model.is_primitive)
        self.assertLess(model.steady_residual, 1e-9)
        self.assertLess(model.balance_residual, 1e-8)
        self.assertLess(operator_trace_distance(model.steady_state.matrix, gibbs.matrix), 1e-8)
        self.assertTrue(model.commuting)

    def test_parameter_errors(self):
        """Test negative beta and oversized registers"""
        with self.assertRaises(ParamsOutOfRange):
            two_level(-0.1)
        with self.assertRaises(DimensionCap):
            davies_generator(ising_chain(6), [((0,), X)], 1.0)


class TestReplacementModel(unittest.TestCase):
    """Test cases for the depolarize-to-rho generator"""

    def setUp(self):
        """Set up test fixtures"""
        self.rho = random_state(Register.chain(2), seed=3)

    def test_gap_equals_rate(self):
        """Test every nonzero rate equals the replacement rate"""
        for kind in ("GNS", "KMS"):
            model = replacement_model(self.rho, 2.0, kind)
            self.assertAlmostEqual(spectral_gap(model).gap, 2.0, places=7)

    def test_steady_state(self):
        """Test the reference is the unique steady state"""
        model = replacement_model(self.rho, 1.0)
        self.assertTrue(model.is_primitive)
        self.assertLess(model.steady_residual, 1e-10)


class TestConvergence(unittest.TestCase):
    """Test cases for convergence and variance decay"""

    def test_prefactor_identity(self):
        """Test the three forms of the chi-square prefactor agree"""
        register = Register.chain(2)
        rho = random_state(register, seed=11)
        rho_tilde = random_state(register, seed=12)
        for kind in ("GNS", "KMS"):
            identity = prefactor_identity(rho_tilde, rho, kind)
            self.assertLess(identity.spread, 1e-8)
            self.assertGreaterEqual(identity.trace_form, -1e-10)

    def test_convergence_below_envelope(self):
        """Test the distance stays under the gap envelope"""
        model = two_level(0.5)
        report = convergence_check(model, basis_state(model.register, [1]), [0.5, 1.0, 2.0, 3.0])
        self.assertTrue(report.holds)
        self.assertTrue(report.rate_ok)
        self.assertLessEqual(report.bound_constant, 1.0 + 1e-6)
        self.assertAlmostEqual(report.gap, np.cosh(0.5), places=8)

    def test_infinite_temperature_prefactor(self):
        """Test the prefactor of |0> against I/2 is one"""
        model = two_level(0.0)
        report = convergence_check(model, basis_state(model.register, [0]), [0.0, 1.0, 2.0])
        self.assertAlmostEqual(report.prefactor, 1.0, places=9)
        self.assertAlmostEqual(report.fit.rate, 2.0, places=6)

    def test_variance_decay(self):
        """Test Var(e^{L* t} O) <= Var(O) e^{-2 gap t}"""
        H = ising_chain(2, h=0.4)
        model = davies_generator(H, [((0,), X), ((1,), X)], 0.6)
        O = np.kron(X, np.eye(2)) + np.kron(np.eye(2), Z)
        decay = variance_decay_check(model, O, [0.0, 0.25, 0.5, 1.0])
        self.assertTrue(decay.holds)
        self.assertAlmostEqual(decay.variances[0], decay.bounds[0], places=10)


class TestDressing(unittest.TestCase):
    """Test cases for imaginary-time dressed operators"""

    def test_zero_beta_and_commuting(self):
        """Test dressing is trivial at beta = 0 and for commuting operators"""
        H = ising_chain(3, h=0.2)
        self.assertAlmostEqual(imaginary_time_dressing_norm(H, X, 0.0, [1]), 1.0, places=10)
        self.assertAlmostEqual(imaginary_time_dressing_norm(H, Z, 2.0, [1]), 1.0, places=10)

    def test_growth_constant(self):
        """Test a flip operator grows at most exponentially in beta"""
        H = ising_chain(3)
        scan = dressing_scan(H, X, [1], [0.5, 1.0, 1.5])
        self.assertTrue(all(v >= 1.0 - 1e-10 for v in scan.values))
        self.assertGreater(scan.constant, 0.0)
        self.assertLess(scan.constant, 10.0)


class TestDetectabilityRecovery(unittest.TestCase):
    """Test cases for the layered kernel-projector tower"""

    def setUp(self):
        """Set up test fixtures"""
        self.model = davies_generator(ising_chain(3), [((i,), X) for i in range(3)], 0.5)
        region = self.model.register.region([0])
        self.inst = KrausInstrument(region, (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))

    def test_tower_shape(self):
        """Test depth zero is empty and depth one reaches the neighbours of A"""
        self.assertEqual(build_dl_recovery(self.model, [0], 0).sequence, ())
        tower = build_dl_recovery(self.model, [0], 1)
        self.assertGreater(len(tower.sequence), 0)
        self.assertIn(0, tower.light_cone)
        self.assertIn(1, tower.light_cone)

    def test_errors_are_distances(self):
        """Test recovery errors are finite trace distances"""
        for m in (0, 1, 2):
            error = detectability_recovery(self.model, [0], m, self.inst)
            self.assertTrue(np.isfinite(error))
            self.assertGreaterEqual(error, 0.0)
            self.assertLessEqual(error, 2.0 + 1e-9)

    def test_tower_errors(self):
        """Test invalid depths and models the tower cannot use"""
        with self.assertRaises(ParamsOutOfRange):
            build_dl_recovery(self.model, [0], -1)
        with self.assertRaises(NotLocallyBalanced):
            build_dl_recovery(replacement_model(self.model.reference), [0], 1)
        tfim = davies_generator(transverse_field_ising(2, g=0.5), [((0,), Z)], 0.5)
        with self.assertRaises(NotCommuting):
            build_dl_recovery(tfim, [0], 1)


if __name__ == '__main__':
    unittest.main(verbosity=2)
