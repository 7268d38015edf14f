# Source package for locstab: states, channels, information measures and recovery maps

from .states import DensityMatrix, Region, RegionPartition, Register
from .channels import ChannelMap, KrausInstrument, Superoperator
from .info import conditional_mutual_information, mutual_information, von_neumann_entropy
from .correlators import CorrelatorParams, cpq
from .markov import certify_qmc
from .stability import stability_score
from .lindblad import LindbladModel, davies_generator

__all__ = [
    'DensityMatrix',
    'Region',
    'RegionPartition',
    'Register',
    'ChannelMap',
    'KrausInstrument',
    'Superoperator',
    'conditional_mutual_information',
    'mutual_information',
    'von_neumann_entropy',
    'CorrelatorParams',
    'cpq',
    'certify_qmc',
    'stability_score',
    'LindbladModel',
    'davies_generator',
]
