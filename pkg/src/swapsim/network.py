"""Lossy ESR network assembly and Bell-state-measurement heralding.

The pipeline follows the model's equation sequence literally: channel losses
on the relay-bound modes, eight vacuum ancillas, mode-match beamsplitters
pairing each signal mode with its "a" ancilla, six half-beamsplitters, then
heralding-detector losses on every post-HBS mode triple.  Heralding on a
two-fold click pattern turns the state of the far modes (H1, V1, H4, V4)
into a signed affine combination of four Gaussian components.
"""

import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np

from . import gaussian
from ._linalg import acos, dtype_for, sqrt
from .exceptions import NeverHeraldsError
from .gaussian import GaussianState, ModeRegister, apply_loss, apply_symplectic
from .sources import PumpConfig, combined_input

ANCILLA_MODES = ("H2a", "H3a", "V2a", "V3a", "H2b", "H3b", "V2b", "V3b")
NETWORK_MODES = (
    "H1", "V1", "H2", "V2", "H3", "V3", "H4", "V4",
) + ANCILLA_MODES
HERALDED_MODES = ("H1", "V1", "H4", "V4")

#: HBS pairings: the interfering fractions meet each other, the diverted
#: "a" fractions meet vacuum through the "b" ancillas.
HBS_PAIRS = (
    ("H2", "H3"), ("H2a", "H3b"), ("H3a", "H2b"),
    ("V2", "V3"), ("V2a", "V3b"), ("V3a", "V2b"),
)

#: Heralding-detector loss assignment, verbatim from the model: eta index ->
#: post-HBS mode triple.
DETECTOR_TRIPLES = {
    5: ("V3", "V3a", "V3b"),
    6: ("H3", "H3a", "H3b"),
    7: ("V2", "V2a", "V2b"),
    8: ("H2", "H2a", "H2b"),
}

PATTERN_D5V_D6H = "D5V&D6H"
PATTERN_D5H_D6V = "D5H&D6V"
#: Click pattern -> the two detector triples whose joint click heralds success.
PATTERN_TRIPLES = {
    PATTERN_D5V_D6H: (DETECTOR_TRIPLES[5], DETECTOR_TRIPLES[8]),
    PATTERN_D5H_D6V: (DETECTOR_TRIPLES[6], DETECTOR_TRIPLES[7]),
}

P_SUCCESS_FLOOR = 1e-30

# The lossy half-beamsplitter is modeled as a loss element on one relay arm
# followed by an ideal HBS; hbs_extra_loss multiplies that arm's channel
# transmittance.  Which arm carries it is fixed here (see the ledger): the
# characterized 0.27 belongs on the arm whose pump compensates it.
HBS_LOSS_ARM = "H2"


def derive_channel_transmittances(scheme: str, length_km: float,
                                  attenuation_db_per_km: float = 0.2) -> tuple:
    """Channel transmittances (eta_AH, eta_AV, eta_BH, eta_BV) for a scheme.

    The CH scheme splits the total fiber transmittance sqrt/sqrt between the
    two relay arms; the SH scheme puts all of it on source A's arm.
    """
    if length_km < 0:
        raise ValueError("length_km must be non-negative")
    eta_t = 10 ** (-attenuation_db_per_km * length_km / 10)
    if scheme == "CH":
        root = math.sqrt(eta_t)
        return (root, root, root, root)
    if scheme == "SH":
        return (eta_t, eta_t, 1.0, 1.0)
    raise ValueError(f"unknown scheme {scheme!r}; expected 'CH' or 'SH'")


@dataclass(frozen=True)
class NetworkConfig:
    """Full experiment description.

    ``eta`` lists the eight local detection efficiencies eta_1..eta_8:
    1..4 are Alice's and Bob's analyzer detectors (H1, H4, V1, V4), 5..8 the
    heralding detectors at the relay (triples per DETECTOR_TRIPLES).
    Channel transmittances are derived from ``length_km`` and ``scheme``
    unless overridden explicitly.
    """

    scheme: str = "CH"
    length_km: float = 0.0
    attenuation_db_per_km: float = 0.2
    eta_AH: float | None = None
    eta_AV: float | None = None
    eta_BH: float | None = None
    eta_BV: float | None = None
    hbs_extra_loss: float = 1.0
    t_mode: float = 1.0
    eta: tuple = (1.0,) * 8
    nu: float = 0.0
    bsm_patterns: str = "both"

    def __post_init__(self):
        if self.scheme not in ("CH", "SH"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.bsm_patterns not in ("single", "both"):
            raise ValueError(f"bsm_patterns must be 'single' or 'both'")
        if self.length_km < 0:
            raise ValueError("length_km must be non-negative")
        object.__setattr__(self, "eta", tuple(self.eta))
        if len(self.eta) != 8:
            raise ValueError("eta must list the 8 efficiencies eta_1..eta_8")
        for name, val in self._ranged_fields():
            if not 0 <= val <= 1:
                raise ValueError(f"{name} = {val} outside [0, 1]")
        if not 0 <= self.nu < 1:
            raise ValueError(f"nu = {self.nu} outside [0, 1)")

    def _ranged_fields(self):
        pairs = [("hbs_extra_loss", self.hbs_extra_loss), ("t_mode", self.t_mode)]
        pairs += [(f"eta{i + 1}", v) for i, v in enumerate(self.eta)]
        for name in ("eta_AH", "eta_AV", "eta_BH", "eta_BV"):
            val = getattr(self, name)
            if val is not None:
                pairs.append((name, val))
        return pairs

    def channel_transmittances(self) -> tuple:
        """Effective (eta_AH, eta_AV, eta_BH, eta_BV) with overrides applied."""
        derived = derive_channel_transmittances(
            self.scheme, self.length_km, self.attenuation_db_per_km
        )
        names = ("eta_AH", "eta_AV", "eta_BH", "eta_BV")
        return tuple(
            derived[k] if getattr(self, name) is None else getattr(self, name)
            for k, name in enumerate(names)
        )

    def patterns(self) -> tuple:
        if self.bsm_patterns == "single":
            return (PATTERN_D5V_D6H,)
        return (PATTERN_D5V_D6H, PATTERN_D5H_D6V)

    def at_length(self, length_km: float) -> "NetworkConfig":
        return replace(self, length_km=length_km)


@dataclass(frozen=True)
class HeraldedState:
    """Signed affine combination of four Gaussian components on the far modes.

    The heralded density operator is (1/p_success) * sum_i (-1)^i P_i rho_i
    with component covariances ``gammas`` and weights ``weights`` = (P0..P3).
    """

    gammas: tuple
    weights: tuple
    p_success: float
    pattern: str

    @property
    def register(self) -> ModeRegister:
        return self.gammas[0].register

    def signed_weights(self) -> tuple:
        return tuple((-1) ** i * w for i, w in enumerate(self.weights))


def _adjoin_vacuum(state: GaussianState, labels) -> GaussianState:
    reg = state.register.extend(labels)
    n_old, n_new = state.register.n, reg.n
    dtype = state.gamma.dtype
    gamma = np.eye(2 * n_new)
    if dtype == object:
        gamma = gamma.astype(object)
    old = np.concatenate([np.arange(n_old), n_new + np.arange(n_old)])
    gamma[np.ix_(old, old)] = state.gamma
    return GaussianState(reg, gamma)


def build_pre_bsm_state(config: NetworkConfig, pump: PumpConfig) -> GaussianState:
    """16-mode state just before the heralding detectors."""
    t_ah, t_av, t_bh, t_bv = config.channel_transmittances()
    channel = {"H2": t_ah, "V2": t_av, "H3": t_bh, "V3": t_bv}
    channel[HBS_LOSS_ARM] = channel[HBS_LOSS_ARM] * config.hbs_extra_loss

    state = combined_input(pump)
    for mode, t in channel.items():
        state = apply_loss(state, mode, t)
    state = _adjoin_vacuum(state, ANCILLA_MODES)

    is_mp = dtype_for(config.t_mode, config.nu, pump.mu1) == object
    theta_t = acos(sqrt(mpmath.mpf(config.t_mode) if is_mp else config.t_mode))
    quarter_pi = mpmath.pi / 4 if is_mp else math.pi / 4
    for sig in ("H2", "H3", "V2", "V3"):
        state = apply_symplectic(
            state, gaussian.beamsplitter(theta_t, sig, sig + "a", state.register)
        )
    for i, j in HBS_PAIRS:
        state = apply_symplectic(
            state, gaussian.beamsplitter(quarter_pi, i, j, state.register)
        )
    for det, triple in DETECTOR_TRIPLES.items():
        for mode in triple:
            state = apply_loss(state, mode, config.eta[det - 1])
    return state


def herald_probability(pre_bsm: GaussianState, nu, pattern: str) -> tuple:
    """(P0, P1, P2, P3, p) for one two-fold heralding click pattern.

    P0 = 1; P1 and P3 are the off-probabilities of the two detector triples,
    P2 of their union; p = P0 - P1 + P2 - P3.
    """
    trip_a, trip_b = PATTERN_TRIPLES[pattern]
    off3 = (1 - nu) ** 3
    p1 = off3 * gaussian.vacuum_overlap(pre_bsm, trip_a)
    p3 = off3 * gaussian.vacuum_overlap(pre_bsm, trip_b)
    p2 = off3 * off3 * gaussian.vacuum_overlap(pre_bsm, trip_a + trip_b)
    return (1.0, p1, p2, p3, 1.0 - p1 + p2 - p3)


def heralded_state(pre_bsm: GaussianState, nu, pattern: str) -> HeraldedState:
    """Condition the far modes on a successful heralding pattern."""
    p0, p1, p2, p3, p_suc = herald_probability(pre_bsm, nu, pattern)
    if p_suc <= P_SUCCESS_FLOOR:
        raise NeverHeraldsError(
            f"heralding probability {float(p_suc):.3e} at or below "
            f"{P_SUCCESS_FLOOR:g}; this configuration never heralds"
        )
    trip_a, trip_b = PATTERN_TRIPLES[pattern]
    gamma0 = pre_bsm.reduce(HERALDED_MODES)
    gamma1 = gaussian.condition_on_vacuum(pre_bsm, trip_a).reduce(HERALDED_MODES)
    gamma3 = gaussian.condition_on_vacuum(pre_bsm, trip_b).reduce(HERALDED_MODES)
    gamma2 = gaussian.condition_on_vacuum(pre_bsm, trip_a + trip_b).reduce(
        HERALDED_MODES
    )
    return HeraldedState(
        gammas=(gamma0, gamma1, gamma2, gamma3),
        weights=(p0, p1, p2, p3),
        p_success=p_suc,
        pattern=pattern,
    )
