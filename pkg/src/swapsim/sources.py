"""Covariance matrices of the two Sagnac-loop polarization-entangled sources.

Each source is a pair of two-mode squeezed vacua (TMSV) across polarization
modes.  Source A couples (H1, V2) with mean photon number mu1 and (V1, H2)
with mu2; its post-selected two-photon component is the triplet state.
Source B couples (H3, V4) with mu3 and (V3, H4) with mu4, the latter with a
pi pump phase that flips the sign of its quadrature correlations, giving the
singlet two-photon component.  The pump phases are structural (sign pattern
of the off-diagonal blocks), not free parameters.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import dtype_for, sqrt
from .gaussian import GaussianState, ModeRegister

MU_MAX = 1e2

SOURCE_A_MODES = ("H1", "V1", "H2", "V2")
SOURCE_B_MODES = ("H3", "V3", "H4", "V4")
INPUT_MODES = ("H1", "V1", "H2", "V2", "H3", "V3", "H4", "V4")


@dataclass(frozen=True)
class PumpConfig:
    """Mean photon numbers per TMSV (dimensionless)."""

    mu1: float
    mu2: float
    mu3: float
    mu4: float

    def __post_init__(self):
        for name, mu in self.as_dict().items():
            if mu < 0:
                raise ValueError(f"{name} must be non-negative, got {mu}")
            if mu >= MU_MAX:
                raise ValueError(
                    f"{name} = {mu} exceeds sanity bound {MU_MAX}; "
                    "determinant arithmetic degrades"
                )

    def as_dict(self) -> dict:
        return {"mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "mu4": self.mu4}

    def as_tuple(self) -> tuple:
        return (self.mu1, self.mu2, self.mu3, self.mu4)


def _pair_block(mu_outer, mu_inner, sign_outer, sign_inner):
    """4x4 quadrature block of two TMSVs on modes (a, b, c, d).

    ``mu_outer`` couples modes (a, d), ``mu_inner`` couples (b, c); the signs
    set the quadrature-correlation sign of each coupling.
    """
    c_outer = sign_outer * 2 * sqrt(mu_outer * (mu_outer + 1))
    c_inner = sign_inner * 2 * sqrt(mu_inner * (mu_inner + 1))
    block = np.zeros((4, 4), dtype=dtype_for(mu_outer, mu_inner))
    block[0, 0] = block[3, 3] = 2 * mu_outer + 1
    block[1, 1] = block[2, 2] = 2 * mu_inner + 1
    block[0, 3] = block[3, 0] = c_outer
    block[1, 2] = block[2, 1] = c_inner
    return block


def _source_state(modes, x_block, p_block) -> GaussianState:
    dtype = dtype_for(x_block[0, 0])
    gamma = np.zeros((8, 8), dtype=dtype)
    gamma[:4, :4] = x_block
    gamma[4:, 4:] = p_block
    return GaussianState(ModeRegister(modes), gamma)


def source_a_covariance(mu1, mu2) -> GaussianState:
    """Source A on (H1, V1, H2, V2): couplings H1-V2 (mu1) and V1-H2 (mu2)."""
    return _source_state(
        SOURCE_A_MODES,
        _pair_block(mu1, mu2, +1, +1),
        _pair_block(mu1, mu2, -1, -1),
    )


def source_b_covariance(mu3, mu4) -> GaussianState:
    """Source B on (H3, V3, H4, V4): couplings H3-V4 (mu3) and V3-H4 (-mu4)."""
    return _source_state(
        SOURCE_B_MODES,
        _pair_block(mu3, mu4, +1, -1),
        _pair_block(mu3, mu4, -1, +1),
    )


def combined_input(pump: PumpConfig) -> GaussianState:
    """Direct sum of both sources in the global xxpp ordering of 8 modes."""
    src_a = source_a_covariance(pump.mu1, pump.mu2)
    src_b = source_b_covariance(pump.mu3, pump.mu4)
    dtype = dtype_for(src_a.gamma[0, 0], src_b.gamma[0, 0])
    gamma = np.zeros((16, 16), dtype=dtype)
    if dtype == object:
        gamma[:] = 0 * src_a.gamma[0, 0]
    for block, offset in ((src_a.gamma, 0), (src_b.gamma, 4)):
        for qa in (0, 1):  # x-block then p-block of the 4-mode source
            for qb in (0, 1):
                rows = slice(8 * qa + offset, 8 * qa + offset + 4)
                cols = slice(8 * qb + offset, 8 * qb + offset + 4)
                gamma[rows, cols] = block[4 * qa : 4 * qa + 4, 4 * qb : 4 * qb + 4]
    return GaussianState(ModeRegister(INPUT_MODES), gamma)


def mean_photon_numbers(state: GaussianState) -> dict:
    """Per-mode mean photon number, (gamma_xx + gamma_pp - 2) / 4."""
    n = state.register.n
    return {
        lab: float(state.gamma[i, i] + state.gamma[i + n, i + n] - 2) / 4
        for i, lab in enumerate(state.register.labels)
    }
