# Models package for locstab: Hamiltonians and named fixture states

from .hamiltonians import LocalHamiltonian, gibbs_state, ising_chain, transverse_field_ising
from .fixtures import build_fixture, counterexample, list_fixtures

__all__ = ['LocalHamiltonian', 'gibbs_state', 'ising_chain', 'transverse_field_ising',
           'build_fixture', 'counterexample', 'list_fixtures']
