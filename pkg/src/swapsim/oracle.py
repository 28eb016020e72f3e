"""Brute-force truncated-Fock-space simulator of the full network.

This module is the independent validation oracle for the Gaussian pipeline:
it shares configuration interpretation with :mod:`swapsim.network` but none
of its matrix machinery.  States are sparse amplitude maps over per-mode
occupation numbers.  Losses are purified (beamsplitter to a fresh vacuum
ancilla that is simply never measured), so the global state stays pure and
every probability is a plain positive sum

    P = sum_occ |amp|^2 * prod_events w_event(occ),

with the on/off POVM and detector inefficiency folded into per-occupation
weights w.  No inclusion-exclusion over near-cancelling terms is needed,
which makes the oracle numerically solid exactly where the determinant
pipeline is worst.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .network import (
    DETECTOR_TRIPLES,
    HBS_LOSS_ARM,
    HBS_PAIRS,
    PATTERN_TRIPLES,
    NetworkConfig,
)
from .sources import PumpConfig

DEFAULT_N_MAX = 3
DEFAULT_PRUNE = 1e-11
TMSV_LEAKAGE_LIMIT = 1e-6

_MAX_FACT = 64
_SQRT_FACT = np.sqrt(np.array([math.factorial(n) for n in range(_MAX_FACT)], dtype=float))


@dataclass
class TruncatedState:
    """Sparse pure state: occupation tuple -> real amplitude.

    ``leakage`` accumulates the squared amplitude mass dropped by pruning;
    it bounds the probability error of everything computed downstream.
    Amplitudes stay real because every element of this network (TMSV with 0
    or pi pump phase, real beamsplitters) has a real transition amplitude.
    """

    labels: tuple
    amps: dict
    n_max: int = DEFAULT_N_MAX
    prune_tol: float = DEFAULT_PRUNE
    leakage: float = 0.0
    _pos: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self._pos = {lab: i for i, lab in enumerate(self.labels)}

    def position(self, label) -> int:
        return self._pos[label]

    def norm_square(self) -> float:
        return float(sum(a * a for a in self.amps.values()))

    def copy(self) -> "TruncatedState":
        return TruncatedState(
            self.labels, dict(self.amps), self.n_max, self.prune_tol, self.leakage
        )


def tmsv_state(mu: float, n_max: int = DEFAULT_N_MAX, labels=("a", "b"),
               sign: int = 1) -> TruncatedState:
    """Two-mode squeezed vacuum sum_n c_n |n, n> with c_n = (s*lam)^n sqrt(1-lam^2).

    ``sign`` = -1 encodes a pi pump phase.  Raises if the truncated tail
    exceeds the leakage budget.
    """
    if mu < 0:
        raise ValueError("mean photon number must be non-negative")
    lam = math.sqrt(mu / (mu + 1))
    leak = lam ** (2 * (n_max + 1))
    if leak > TMSV_LEAKAGE_LIMIT:
        raise ValueError(
            f"TMSV truncation leakage {leak:.2e} at mu={mu} exceeds "
            f"{TMSV_LEAKAGE_LIMIT:g}; raise n_max"
        )
    ground = math.sqrt(1 - lam * lam)
    amps = {(n, n): ground * (sign * lam) ** n for n in range(n_max + 1)}
    return TruncatedState(labels, amps, n_max=n_max, leakage=leak)


def product_state(a: TruncatedState, b: TruncatedState) -> TruncatedState:
    amps = {}
    for ka, va in a.amps.items():
        for kb, vb in b.amps.items():
            amps[ka + kb] = va * vb
    return TruncatedState(
        a.labels + b.labels,
        amps,
        n_max=max(a.n_max, b.n_max),
        prune_tol=min(a.prune_tol, b.prune_tol),
        leakage=a.leakage + b.leakage,
    )


def adjoin_vacuum(state: TruncatedState, labels) -> TruncatedState:
    pad = (0,) * len(tuple(labels))
    return TruncatedState(
        state.labels + tuple(labels),
        {key + pad: amp for key, amp in state.amps.items()},
        n_max=state.n_max,
        prune_tol=state.prune_tol,
        leakage=state.leakage,
    )


def apply_bs(state: TruncatedState, i, j, theta) -> TruncatedState:
    """Beamsplitter a_i+ -> cos(t) a_i+ + sin(t) a_j+, matching the
    covariance pipeline's rotation convention."""
    pi_, pj = state.position(i), state.position(j)
    c, s = math.cos(theta), math.sin(theta)
    out = {}
    for key, amp in state.amps.items():
        ni, nj = key[pi_], key[pj]
        if ni == 0 and nj == 0:
            out[key] = out.get(key, 0.0) + amp
            continue
        base = amp / (_SQRT_FACT[ni] * _SQRT_FACT[nj])
        klist = list(key)
        for p in range(ni + 1):
            left = (
                math.comb(ni, p) * c ** p * s ** (ni - p)
            )
            for q in range(nj + 1):
                coeff = (
                    base
                    * left
                    * math.comb(nj, q)
                    * (-s) ** q
                    * c ** (nj - q)
                )
                k = p + q
                l = ni + nj - k
                klist[pi_], klist[pj] = k, l
                newkey = tuple(klist)
                out[newkey] = out.get(newkey, 0.0) + coeff * (
                    _SQRT_FACT[k] * _SQRT_FACT[l]
                )
    return _pruned(state, out)


def _pruned(state: TruncatedState, amps: dict) -> TruncatedState:
    tol = state.prune_tol
    leak = state.leakage
    kept = {}
    for key, amp in amps.items():
        if abs(amp) < tol:
            leak += amp * amp
        else:
            kept[key] = amp
    return TruncatedState(state.labels, kept, state.n_max, state.prune_tol, leak)


def apply_loss_fock(state: TruncatedState, mode, t, env_label=None) -> TruncatedState:
    """Loss as a beamsplitter to a fresh vacuum ancilla (kept, never measured).

    The ensemble-over-outcomes view of the lossy state is recovered by
    grouping amplitudes on the environment mode's occupation.
    """
    if not 0 <= t <= 1:
        raise ValueError(f"transmittance {t} outside [0, 1]")
    env_label = env_label or f"E_{mode}"
    if env_label in state.labels:
        raise ValueError(f"environment label {env_label} already in use")
    ext = adjoin_vacuum(state, (env_label,))
    return apply_bs(ext, mode, env_label, math.acos(math.sqrt(t)))


@dataclass(frozen=True)
class ClickEvent:
    """One on/off detector reading over a set of modes.

    The off element of each mode contributes (1 - nu) * (1 - eta)^n; an "on"
    event is one minus the product of its modes' off weights.
    """

    modes: tuple
    etas: tuple
    nu: float
    on: bool = True

    def weight(self, key, positions) -> float:
        off = 1.0
        for mode, eta in zip(self.modes, self.etas):
            n = key[positions[mode]]
            off *= (1 - self.nu) * (1 - eta) ** n
        return 1.0 - off if self.on else off


def click_expectation(state: TruncatedState, events) -> float:
    """Positive-sum expectation of a product of click events."""
    positions = state._pos
    total = 0.0
    for key, amp in state.amps.items():
        w = amp * amp
        for ev in events:
            w *= ev.weight(key, positions)
        total += w
    return total


def project_onoff(state: TruncatedState, modes, etas, nu, on=True) -> float:
    """Probability that detectors on ``modes`` all read on (or all off)."""
    if on:
        events = [ClickEvent((m,), (e,), nu, on=True) for m, e in zip(modes, etas)]
    else:
        events = [ClickEvent(tuple(modes), tuple(etas), nu, on=False)]
    return click_expectation(state, events)


def build_network_state(config: NetworkConfig, pump: PumpConfig,
                        n_max: int = DEFAULT_N_MAX,
                        prune_tol: float = DEFAULT_PRUNE) -> TruncatedState:
    """Pure state of the 16 network modes (plus loss environments) after the
    HBS stage.  Heralding-detector losses are *not* applied here; they fold
    into the click weights."""
    t_ah, t_av, t_bh, t_bv = config.channel_transmittances()
    channel = {"H2": t_ah, "V2": t_av, "H3": t_bh, "V3": t_bv}
    channel[HBS_LOSS_ARM] = channel[HBS_LOSS_ARM] * config.hbs_extra_loss

    pairs = (
        (("H1", "V2"), pump.mu1, +1),
        (("V1", "H2"), pump.mu2, +1),
        (("H3", "V4"), pump.mu3, +1),
        (("V3", "H4"), pump.mu4, -1),
    )
    state = None
    for labels, mu, sign in pairs:
        tmsv = tmsv_state(mu, n_max=n_max, labels=labels, sign=sign)
        state = tmsv if state is None else product_state(state, tmsv)
    state.prune_tol = prune_tol

    for mode, t in channel.items():
        state = apply_loss_fock(state, mode, t)

    theta_t = math.acos(math.sqrt(config.t_mode))
    ancillas = ("H2a", "H3a", "V2a", "V3a", "H2b", "H3b", "V2b", "V3b")
    state = adjoin_vacuum(state, ancillas)
    for sig in ("H2", "H3", "V2", "V3"):
        state = apply_bs(state, sig, sig + "a", theta_t)
    for i, j in HBS_PAIRS:
        state = apply_bs(state, i, j, math.pi / 4)
    return state


def herald_events(config: NetworkConfig, pattern: str) -> tuple:
    """The two triple-click events whose coincidence heralds success."""
    events = []
    for triple in PATTERN_TRIPLES[pattern]:
        det = next(d for d, t in DETECTOR_TRIPLES.items() if t == triple)
        eta = config.eta[det - 1]
        events.append(ClickEvent(triple, (eta,) * 3, config.nu, on=True))
    return tuple(events)


def _rotated(state: TruncatedState, theta_a, theta_b) -> TruncatedState:
    state = apply_bs(state, "H1", "V1", theta_a)
    return apply_bs(state, "H4", "V4", theta_b)


def outcome_probabilities(state: TruncatedState, config: NetworkConfig,
                          theta_a, theta_b) -> tuple:
    """(p_success, conditional 16-outcome array) mirroring the pipeline.

    The array is indexed by detector bitmask (bit k = detector D(k+1)), with
    D1/D3 on Alice's H1/V1 analyzer outputs and D2/D4 on Bob's H4/V4.
    """
    detector_modes = ("H1", "H4", "V1", "V4")
    eta = config.eta
    rotated = _rotated(state, theta_a, theta_b)
    joint = np.zeros(16)
    p_total = 0.0
    for pattern in config.patterns():
        base = herald_events(config, pattern)
        p_total += click_expectation(state, base)
        for mask in range(16):
            events = list(base)
            for k, mode in enumerate(detector_modes):
                events.append(
                    ClickEvent((mode,), (eta[k],), config.nu, on=bool(mask >> k & 1))
                )
            joint[mask] += click_expectation(rotated, events)
    return p_total, joint / p_total


def heralded_pdm(state: TruncatedState, config: NetworkConfig, pattern: str,
                 basis) -> tuple:
    """(p_success, partial density matrix) of the heralded far-mode state.

    ``basis`` lists occupation tuples over (H1, V1, H4, V4).  Elements are
    <bra| rho |ket> of the unit-trace heralded state; the herald POVM acts
    only on relay/environment modes, so far-mode coherences survive the sum.
    """
    events = herald_events(config, pattern)
    p_suc = click_expectation(state, events)
    a_pos = [state.position(m) for m in ("H1", "V1", "H4", "V4")]
    rest_pos = [p for p in range(len(state.labels)) if p not in a_pos]
    positions = state._pos

    index = {occ: i for i, occ in enumerate(basis)}
    buckets = {}
    for key, amp in state.amps.items():
        occ_a = tuple(key[p] for p in a_pos)
        if occ_a not in index:
            continue
        w = 1.0
        for ev in events:
            w *= ev.weight(key, positions)
        rest = tuple(key[p] for p in rest_pos)
        buckets.setdefault(rest, []).append((index[occ_a], amp, w))

    dim = len(basis)
    pdm = np.zeros((dim, dim))
    for entries in buckets.values():
        for i, ai, wi in entries:
            for j, aj, wj in entries:
                # Both branches share the same rest occupations, hence the
                # same herald weight; use it once.
                pdm[i, j] += wi * ai * aj
    return p_suc, pdm / p_suc


def hom_fourfold(state: TruncatedState, config: NetworkConfig) -> float:
    """Joint probability of the four-fold HOM coincidence (oracle side)."""
    rotated = _rotated(state, math.pi / 2, math.pi / 2)
    eta = config.eta
    events = [
        ClickEvent(("H1",), (eta[0],), config.nu, on=True),
        ClickEvent(("H4",), (eta[1],), config.nu, on=True),
        ClickEvent(DETECTOR_TRIPLES[8], (eta[7],) * 3, config.nu, on=True),
        ClickEvent(DETECTOR_TRIPLES[6], (eta[5],) * 3, config.nu, on=True),
    ]
    return click_expectation(rotated, events)
