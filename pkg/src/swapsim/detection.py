"""Click statistics at the polarization analyzers and derived figures of merit.

Detector dictionary (matching the network's loss assignment): D1 watches the
H1 output of Alice's polarizer (efficiency eta_1), D3 the V1 output (eta_3);
D2 watches Bob's H4 output (eta_2), D4 the V4 output (eta_4).  Outcomes are
binned as a = -1 iff D1 clicks (regardless of D3) and b = -1 iff D2 clicks.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import gaussian
from ._linalg import dtype_for
from .exceptions import ModelError, PhysicalityError
from .gaussian import GaussianState, apply_loss, apply_symplectic, beamsplitter
from .network import (
    DETECTOR_TRIPLES,
    HeraldedState,
    NetworkConfig,
    build_pre_bsm_state,
    heralded_state,
)
from .sources import PumpConfig

DETECTOR_MODES = ("H1", "H4", "V1", "V4")  # D1, D2, D3, D4
N_PATTERNS = 16

#: Click patterns in the conventional figure order: vacuum, singles, pairs,
#: triples, all four.
OUTCOME_LABELS = (
    (),
    ("D1",), ("D2",), ("D3",), ("D4",),
    ("D1", "D2"), ("D1", "D3"), ("D1", "D4"),
    ("D2", "D3"), ("D2", "D4"), ("D3", "D4"),
    ("D1", "D2", "D3"), ("D1", "D2", "D4"),
    ("D1", "D3", "D4"), ("D2", "D3", "D4"),
    ("D1", "D2", "D3", "D4"),
)


def _mask_of(labels) -> int:
    mask = 0
    for lab in labels:
        mask |= 1 << (int(lab[1]) - 1)
    return mask


_LABEL_MASKS = tuple(_mask_of(labels) for labels in OUTCOME_LABELS)


def _normalize_angle(theta):
    pi = math.pi
    wrapped = theta % pi
    return wrapped if 0 <= wrapped < pi else 0.0


@dataclass(frozen=True)
class MeasurementAngles:
    """Polarizer angles in radians; A0 is the key-generation basis."""

    theta_a1: float
    theta_a2: float
    theta_b1: float
    theta_b2: float
    theta_a0: float = 0.0

    def __post_init__(self):
        for name in ("theta_a0", "theta_a1", "theta_a2", "theta_b1", "theta_b2"):
            object.__setattr__(self, name, _normalize_angle(getattr(self, name)))

    def chsh_settings(self) -> tuple:
        """The four CHSH angle pairs, ordered (a1b1, a2b1, a1b2, a2b2)."""
        return (
            (self.theta_a1, self.theta_b1),
            (self.theta_a2, self.theta_b1),
            (self.theta_a1, self.theta_b2),
            (self.theta_a2, self.theta_b2),
        )

    def key_setting(self) -> tuple:
        return (self.theta_a0, self.theta_b1)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Conditional probabilities of the 16 click patterns at one angle pair.

    ``probs`` is indexed by bitmask (bit k set iff detector D(k+1) clicked).
    """

    probs: np.ndarray
    setting: tuple

    def prob(self, labels) -> float:
        return float(self.probs[_mask_of(labels)])

    def in_figure_order(self) -> np.ndarray:
        return np.array([self.probs[m] for m in _LABEL_MASKS])

    def total(self) -> float:
        return float(np.sum(self.probs))


@dataclass(frozen=True)
class ChshReport:
    S: float
    correlators: tuple
    qber: float
    key_rate_raw: float
    key_rate: float
    key_rate_per_pulse: float
    p_success: float
    distributions: tuple = ()


def apply_measurement(heralded: HeraldedState, theta_a, theta_b, etas) -> tuple:
    """Analyzer beamsplitters and detector losses on each signed component.

    ``etas`` are (eta_1, eta_2, eta_3, eta_4) for detectors D1..D4.
    """
    eta1, eta2, eta3, eta4 = etas
    reg = heralded.register
    bs_a = beamsplitter(theta_a, "H1", "V1", reg)
    bs_b = beamsplitter(theta_b, "H4", "V4", reg)
    out = []
    for comp in heralded.gammas:
        state = apply_symplectic(apply_symplectic(comp, bs_a), bs_b)
        for mode, eta in (("H1", eta1), ("H4", eta2), ("V1", eta3), ("V4", eta4)):
            state = apply_loss(state, mode, eta)
        out.append(state)
    return tuple(out)


def _off_weights(state: GaussianState, nu) -> list:
    """q[mask] = (1-nu)^|M| * vacuum overlap of the detector subset M."""
    weights = [None] * N_PATTERNS
    weights[0] = 1.0
    for mask in range(1, N_PATTERNS):
        modes = [DETECTOR_MODES[k] for k in range(4) if mask >> k & 1]
        weights[mask] = (1 - nu) ** len(modes) * gaussian.vacuum_overlap(state, modes)
    return weights


def _distribution_from_components(finals, heralded: HeraldedState, nu,
                                  setting, prob_atol=None) -> OutcomeDistribution:
    signed = heralded.signed_weights()
    combined = [0.0] * N_PATTERNS
    for weight, state in zip(signed, finals):
        q = _off_weights(state, nu)
        for mask in range(N_PATTERNS):
            combined[mask] = combined[mask] + weight * q[mask]

    p_suc = heralded.p_success
    values = []
    for on_mask in range(N_PATTERNS):
        off_mask = ~on_mask & 0xF
        total = 0.0
        sub = on_mask
        while True:  # iterate sub over all subsets of on_mask
            sign = -1 if bin(sub).count("1") & 1 else 1
            total = total + sign * combined[sub | off_mask]
            if sub == 0:
                break
            sub = (sub - 1) & on_mask
        values.append(total / p_suc)
    probs = np.array(values, dtype=dtype_for(values[0]))

    if prob_atol is None:
        # Conditional probabilities inherit an absolute cancellation floor of
        # ~64 eps / p_success from the alternating determinant sums (the
        # extended-precision path keeps the stated 1e-9 bound).
        eps = np.finfo(float).eps if probs.dtype != object else 1e-30
        prob_atol = max(1e-9, 64 * eps / float(p_suc))
    lo, hi = min(float(p) for p in values), max(float(p) for p in values)
    if lo < -prob_atol or hi > 1 + prob_atol:
        raise PhysicalityError(
            f"outcome probabilities outside [0, 1] beyond tolerance "
            f"{prob_atol:.1e}: min {lo:.3e}, max {hi:.3e}"
        )
    return OutcomeDistribution(probs=probs, setting=tuple(setting))


def outcome_distribution(heralded: HeraldedState, theta_a, theta_b, etas, nu,
                         prob_atol=None) -> OutcomeDistribution:
    """Conditional 16-outcome click distribution for one angle pair."""
    finals = apply_measurement(heralded, theta_a, theta_b, etas)
    return _distribution_from_components(
        finals, heralded, nu, (theta_a, theta_b), prob_atol
    )


def correlator(dist: OutcomeDistribution) -> float:
    """<ab> with a = -1 iff D1 clicked and b = -1 iff D2 clicked."""
    total = 0.0
    for mask in range(N_PATTERNS):
        a = -1 if mask & 1 else 1
        b = -1 if mask & 2 else 1
        total = total + a * b * dist.probs[mask]
    return total


def binary_entropy(x) -> float:
    if not 0 <= x <= 1:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x in (0, 1):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def chi_of_s(s) -> float:
    """Eavesdropper information bound chi(S); defined for S >= 2."""
    arg = (1 + math.sqrt((s / 2) ** 2 - 1)) / 2
    return binary_entropy(arg)


def _mix_distributions(dists, p_sucs, setting) -> OutcomeDistribution:
    total = sum(p_sucs)
    probs = sum(p * d.probs for p, d in zip(p_sucs, dists)) / total
    return OutcomeDistribution(probs=probs, setting=tuple(setting))


def evaluate_settings(config: NetworkConfig, pump: PumpConfig, settings,
                      prob_atol=None) -> tuple:
    """Heralding probability and outcome distributions for many angle pairs.

    Returns ``(p_success, dists)`` where p_success sums the configured
    heralding patterns and each distribution is the pattern mixture.  This is
    the reference implementation mirrored by the compiled kernel.
    """
    pre = build_pre_bsm_state(config, pump)
    heralds = [heralded_state(pre, config.nu, pat) for pat in config.patterns()]
    p_sucs = [h.p_success for h in heralds]
    etas = config.eta[:4]
    dists = []
    for theta_a, theta_b in settings:
        per_pattern = [
            outcome_distribution(h, theta_a, theta_b, etas, config.nu, prob_atol)
            for h in heralds
        ]
        if len(per_pattern) == 1:
            dists.append(per_pattern[0])
        else:
            dists.append(_mix_distributions(per_pattern, p_sucs, (theta_a, theta_b)))
    return sum(p_sucs), tuple(dists)


def chsh_value(config: NetworkConfig, pump: PumpConfig,
               angles: MeasurementAngles) -> ChshReport:
    """CHSH value, QBER, and key rates for one configuration.

    S = <a1 b1> + <a2 b1> + <a1 b2> - <a2 b2>; the key-generation setting is
    (theta_a0, theta_b1).  The Devetak-Winter rate is reported per heralding
    event (``key_rate``) and per source pulse (``key_rate_per_pulse``).
    """
    settings = angles.chsh_settings() + (angles.key_setting(),)
    p_suc, dists = evaluate_settings(config, pump, settings)
    correlators = tuple(correlator(d) for d in dists[:4])
    s_val = correlators[0] + correlators[1] + correlators[2] - correlators[3]

    key_dist = dists[4]
    qber = 0.0
    for mask in range(N_PATTERNS):
        if (mask & 1 != 0) != (mask & 2 != 0):  # a != b
            qber += float(key_dist.probs[mask])
    if not -1e-9 <= qber <= 1 + 1e-9:
        raise PhysicalityError(f"QBER {qber} outside [0, 1]")
    qber = min(max(qber, 0.0), 1.0)

    if s_val >= 2:
        key_raw = 1 - binary_entropy(qber) - chi_of_s(s_val)
    else:
        key_raw = -math.inf
    key = max(key_raw, 0.0)
    return ChshReport(
        S=s_val,
        correlators=correlators,
        qber=qber,
        key_rate_raw=key_raw,
        key_rate=key,
        key_rate_per_pulse=key * p_suc,
        p_success=p_suc,
        distributions=tuple(dists),
    )


def qber_and_key_rate(config: NetworkConfig, pump: PumpConfig,
                      angles: MeasurementAngles) -> tuple:
    """(Q, K_raw, K) per heralding event."""
    report = chsh_value(config, pump, angles)
    return report.qber, report.key_rate_raw, report.key_rate


def _fourfold_coincidence(config: NetworkConfig, pump: PumpConfig) -> float:
    """Joint probability of the four-fold HOM coincidence.

    Alice and Bob select the polarization conjugate to the interfering
    photons (analyzers at pi/2, detectors D1/D2), while the two H-polarized
    relay triples register the interference outputs.
    """
    state = build_pre_bsm_state(config, pump)
    reg = state.register
    half_pi = math.pi / 2
    state = apply_symplectic(state, beamsplitter(half_pi, "H1", "V1", reg))
    state = apply_symplectic(state, beamsplitter(half_pi, "H4", "V4", reg))
    eta1, eta2, eta3, eta4 = config.eta[:4]
    for mode, eta in (("H1", eta1), ("H4", eta2), ("V1", eta3), ("V4", eta4)):
        state = apply_loss(state, mode, eta)

    events = (("H1",), ("H4",), DETECTOR_TRIPLES[8], DETECTOR_TRIPLES[6])
    nu = config.nu
    total = 0.0
    for mask in range(1 << len(events)):
        modes = []
        for k, ev in enumerate(events):
            if mask >> k & 1:
                modes.extend(ev)
        sign = -1 if bin(mask).count("1") & 1 else 1
        if modes:
            term = (1 - nu) ** len(modes) * gaussian.vacuum_overlap(state, modes)
        else:
            term = 1.0
        total += sign * term
    return float(total)


def hom_visibility(config: NetworkConfig, pump: PumpConfig) -> float:
    """Hong-Ou-Mandel visibility V = (C_far - C_0) / C_far.

    C_0 is the four-fold coincidence at the configured mode match and C_far
    its value at t_mode = 0 (fully distinguishable photons, i.e. the
    large-delay baseline).
    """
    c_dip = _fourfold_coincidence(config, pump)
    c_far = _fourfold_coincidence(replace(config, t_mode=0.0), pump)
    if c_far <= 0:
        raise ModelError("HOM baseline coincidence is zero")
    return (c_far - c_dip) / c_far
