# Utils package for locstab

from .config import Config, RunSettings, apply_settings, load_settings
from .validators import InputValidator
from .data_generator import QuantumDataGenerator
from .exceptions import LocstabError

__all__ = ['Config', 'RunSettings', 'apply_settings', 'load_settings',
           'InputValidator', 'QuantumDataGenerator', 'LocstabError']
