# Configuration settings for the locstab workbench

import os
from dataclasses import dataclass, replace
from typing import Dict, Optional

from dotenv import load_dotenv

from .exceptions import ConfigError


class Config:
    """
    Configuration class for the locstab workbench
    """

    # Spectral tolerances
    SUPPORT_TOL = 1e-12        # relative to the largest eigenvalue
    CLIP_TOL = 1e-10           # negative eigenvalues clipped inside this window
    HERMITIAN_TOL = 1e-9
    TRACE_TOL = 1e-9
    RECONSTRUCTION_TOL = 1e-10

    # Channels and instruments
    KRAUS_TOL = 1e-9
    CHOI_TOL = 1e-9
    OUTCOME_DROP_TOL = 1e-12

    # Markov certification
    QMC_TOL = 1e-8
    QMC_MARGIN = 10.0
    # Purified marginal defect <= K sqrt(||rho - sigma||_1) around an exact chain sigma
    NEAR_MARKOV_CONSTANT = 4.0

    # Dimension caps
    MAX_DIMENSION = 4096
    MAX_PURIFICATION_DIMENSION = 64
    MAX_SUPEROPERATOR_DIMENSION = 32   # Hilbert dimension, superoperator is 1024 x 1024

    # Correlation-norm maximization
    CORRELATION_RESTARTS = 16
    CORRELATION_MAX_ITER = 200
    CORRELATION_TOL = 1e-10

    # Local computability witnesses
    WITNESS_THRESHOLD = 1e-6
    WITNESS_SAMPLES = 200
    REGULARIZATION_EPS = 1e-6

    # Decay fits
    FIT_FLOOR = 1e-12
    FIT_MIN_POINTS = 3
    NO_DECAY_SLOPE = 1e-3

    # Lindblad
    FREQUENCY_TOL = 1e-9
    BALANCE_TOL = 1e-8
    KERNEL_TOL = 1e-9

    # Reversibility of circuit pairs
    REVERSIBILITY_TOL = 1e-8
    MAX_CIRCUIT_DEPTH = 2

    # C_{p,q} parameter grid used by the property suites
    CPQ_GRID = (0.25, 0.5, 0.75, 1.0)

    # Run defaults
    DEFAULT_SEED = 7
    DEFAULT_OUT_DIR = "results"
    DEFAULT_THREADS = 1

    # Environment variable names
    ENV_PREFIX = "LOCSTAB_"

    @staticmethod
    def support_threshold(max_eigenvalue: float) -> float:
        """Absolute eigenvalue threshold separating support from numerical kernel"""
        return Config.SUPPORT_TOL * max(max_eigenvalue, 0.0)


@dataclass(frozen=True)
class RunSettings:
    """Resolved settings for one CLI invocation."""

    seed: int = Config.DEFAULT_SEED
    tol: float = Config.QMC_TOL
    out_dir: str = Config.DEFAULT_OUT_DIR
    cap_dim: int = Config.MAX_DIMENSION
    threads: int = Config.DEFAULT_THREADS


_CASTS = {
    "seed": int,
    "tol": float,
    "out_dir": str,
    "cap_dim": int,
    "threads": int,
}

_ALIASES = {"out": "out_dir", "cap-dim": "cap_dim", "cap_dim": "cap_dim"}


def _normalize_key(key: str) -> str:
    key = key.strip().lower()
    if key.startswith(Config.ENV_PREFIX.lower()):
        key = key[len(Config.ENV_PREFIX):]
    return _ALIASES.get(key, key)


def _cast_values(raw: Dict[str, str], source: str) -> Dict[str, object]:
    values = {}
    for key, text in raw.items():
        name = _normalize_key(key)
        if name not in _CASTS:
            continue
        try:
            values[name] = _CASTS[name](text)
        except (TypeError, ValueError):
            raise ConfigError(f"{source}: cannot parse {key}={text!r}")
    return values


def read_config_file(path: str) -> Dict[str, object]:
    """
    Read a key=value configuration file

    Blank lines and lines starting with '#' are ignored.

    Args:
        path: Path to the configuration file

    Returns:
        Dict: Setting values keyed by RunSettings field name
    """
    raw = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")

    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{number}: expected key=value, got {text!r}")
        key, value = text.split("=", 1)
        raw[key.strip()] = value.strip().strip('"').strip("'")
    return _cast_values(raw, path)


def read_environment() -> Dict[str, object]:
    """Collect LOCSTAB_* settings from the process environment (after loading .env)"""
    load_dotenv()
    raw = {
        key: value for key, value in os.environ.items()
        if key.startswith(Config.ENV_PREFIX)
    }
    return _cast_values(raw, "environment")


def load_settings(config_file: Optional[str] = None,
                  overrides: Optional[Dict[str, object]] = None) -> RunSettings:
    """
    Resolve run settings: flags > config file > environment > defaults

    Args:
        config_file: Optional key=value file
        overrides: Values given on the command line (None entries are ignored)

    Returns:
        RunSettings: Resolved settings
    """
    settings = RunSettings()
    settings = replace(settings, **read_environment())
    if config_file:
        settings = replace(settings, **read_config_file(config_file))
    if overrides:
        given = {k: v for k, v in overrides.items() if v is not None}
        settings = replace(settings, **given)

    if settings.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {settings.threads}")
    if settings.cap_dim < 2:
        raise ConfigError(f"cap_dim must be >= 2, got {settings.cap_dim}")
    if settings.tol <= 0:
        raise ConfigError(f"tol must be positive, got {settings.tol}")
    return settings


def apply_settings(settings: RunSettings) -> None:
    """Install the dimension cap of a run on Config (read at state construction)"""
    Config.MAX_DIMENSION = settings.cap_dim
