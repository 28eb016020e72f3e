"""Simulator and optimizer for the ESR heralded nonlocality amplifier.

Computes heralding probabilities, heralded states, CHSH values, DIQKD key
rates, and Fock-basis reconstructions of an entanglement-swapping relay fed
by SPDC sources, using a Gaussian covariance-matrix pipeline validated by an
independent truncated-Fock-space oracle.
"""

__version__ = "0.1.0"

from .detection import (
    ChshReport,
    MeasurementAngles,
    OutcomeDistribution,
    chsh_value,
    hom_visibility,
    outcome_distribution,
    qber_and_key_rate,
)
from .exceptions import (
    ConfigError,
    ModelError,
    NeverHeraldsError,
    PhysicalityError,
    SwapsimError,
)
from .gaussian import GaussianState, ModeRegister, SymplecticOp
from .network import (
    HeraldedState,
    NetworkConfig,
    build_pre_bsm_state,
    derive_channel_transmittances,
    herald_probability,
    heralded_state,
)
from .sources import PumpConfig, combined_input, source_a_covariance, source_b_covariance

__all__ = [
    "ChshReport",
    "ConfigError",
    "GaussianState",
    "HeraldedState",
    "MeasurementAngles",
    "ModeRegister",
    "ModelError",
    "NetworkConfig",
    "NeverHeraldsError",
    "OutcomeDistribution",
    "PhysicalityError",
    "PumpConfig",
    "SwapsimError",
    "SymplecticOp",
    "build_pre_bsm_state",
    "chsh_value",
    "combined_input",
    "derive_channel_transmittances",
    "herald_probability",
    "heralded_state",
    "hom_visibility",
    "outcome_distribution",
    "qber_and_key_rate",
    "source_a_covariance",
    "source_b_covariance",
    "__version__",
]
