"""Fock-basis reconstruction of the heralded state on (H1, V1, H4, V4).

Matrix elements <bra| rho |ket> are overlap integrals of the heralded
state's signed-Gaussian characteristic function against product Fock-state
characteristic functions.  Each integrand is a Gaussian kernel times a
polynomial of total degree <= 8, so the integral is evaluated in closed form
by Wick (Isserlis) moment expansion; a whitened tensor-product Gauss-Hermite
quadrature doubles as an independent cross-check oracle.

The single-photon-per-side subspace is spanned, in this order, by
|0011>, |0101>, |0110>, |1001>, |1010>, |1100> over modes (H1, V1, H4, V4);
the swapped Bell state is (|0110> + |1001>)/sqrt(2).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, roots_hermite

from ._linalg import solve_pd
from .exceptions import ModelError
from .network import HeraldedState

#: Occupation tuples over (H1, V1, H4, V4) spanning the reconstruction subspace.
BASIS_OCCUPATIONS = (
    (0, 0, 1, 1),
    (0, 1, 0, 1),
    (0, 1, 1, 0),
    (1, 0, 0, 1),
    (1, 0, 1, 0),
    (1, 1, 0, 0),
)

BELL_PLUS_INDICES = (2, 3)  # |0110> and |1001>


@dataclass(frozen=True)
class FockIndex:
    """Photon occupations of the four heralded modes."""

    occupations: tuple

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if len(occ) != 4 or any(n < 0 for n in occ):
            raise ValueError(f"need four non-negative occupations, got {occ}")
        object.__setattr__(self, "occupations", occ)


@dataclass(frozen=True)
class PartialDensityMatrix:
    """6x6 matrix on the one-photon-per-side subspace.

    ``trace_raw`` is the population the subspace captures out of the
    unit-trace heralded state; ``subspace_deficit`` = 1 - trace_raw is the
    leakage into vacuum, single-photon, and higher-photon sectors.
    """

    elements: np.ndarray
    normalized: bool
    trace_raw: float

    @property
    def subspace_deficit(self) -> float:
        return 1.0 - self.trace_raw


def fock_char(n: int, m: int, xi1: float, xi2: float) -> complex:
    """Characteristic function of |n><m| at phase-space point (xi1, xi2).

    Piecewise generalized-Laguerre form with alpha = (xi2 - i*xi1)/sqrt(2).
    """
    if n < 0 or m < 0:
        raise ValueError("occupations must be non-negative")
    alpha = (xi2 - 1j * xi1) / math.sqrt(2)
    a2 = abs(alpha) ** 2
    gauss = math.exp(-a2 / 2)
    if m > n:
        pref = math.sqrt(math.factorial(n) / math.factorial(m))
        return pref * gauss * (-alpha) ** (m - n) * eval_genlaguerre(n, m - n, a2)
    if n > m:
        pref = math.sqrt(math.factorial(m) / math.factorial(n))
        return pref * gauss * np.conjugate(alpha) ** (n - m) * eval_genlaguerre(
            m, n - m, a2
        )
    return gauss * eval_genlaguerre(n, 0, a2)


# Per-mode polynomial factors of chi_{|k><b|}(-xi), as {(i_x, i_p): coeff}
# in that mode's (xi_x, xi_p); the shared Gaussian exp(-|xi|^2/4) is folded
# into the integration kernel.  Only occupations <= 1 are needed here.
_INV_SQRT2 = 1 / math.sqrt(2)


def _factor_poly(ket_n: int, bra_m: int) -> dict:
    if ket_n == 0 and bra_m == 0:
        return {(0, 0): 1.0}
    if ket_n == 1 and bra_m == 1:
        return {(0, 0): 1.0, (2, 0): -0.5, (0, 2): -0.5}
    # alpha evaluated at -xi: alpha(-xi) = (-xi_p + i*xi_x)/sqrt(2)
    if ket_n == 0 and bra_m == 1:  # -alpha(-xi)
        return {(1, 0): -1j * _INV_SQRT2, (0, 1): _INV_SQRT2}
    if ket_n == 1 and bra_m == 0:  # conj(alpha(-xi))
        return {(1, 0): -1j * _INV_SQRT2, (0, 1): -_INV_SQRT2}
    raise NotImplementedError("matrix elements implemented for occupations <= 1")


def _product_poly(bra, ket) -> dict:
    """Polynomial of chi_{|ket><bra|}(-xi) over xi ordered xxpp for 4 modes."""
    poly = {(0,) * 8: 1.0 + 0j}
    for mode in range(4):
        factor = _factor_poly(ket[mode], bra[mode])
        new = {}
        for expo, coeff in poly.items():
            for (ix, ip), fc in factor.items():
                key = list(expo)
                key[mode] += ix
                key[mode + 4] += ip
                key = tuple(key)
                new[key] = new.get(key, 0j) + coeff * fc
        poly = new
    return poly


def _isserlis_moment(indices: tuple, cov: np.ndarray) -> float:
    """E[x_{i1} ... x_{i2m}] for a zero-mean Gaussian via pairings."""
    k = len(indices)
    if k == 0:
        return 1.0
    if k % 2:
        return 0.0
    if k == 2:
        return cov[indices[0], indices[1]]
    head, rest = indices[0], indices[1:]
    total = 0.0
    for pos in range(len(rest)):
        pair = cov[head, rest[pos]]
        if pair != 0.0:
            total += pair * _isserlis_moment(rest[:pos] + rest[pos + 1 :], cov)
    return total


def _poly_gaussian_expectation(poly: dict, cov: np.ndarray) -> complex:
    total = 0j
    for expo, coeff in poly.items():
        if coeff == 0:
            continue
        indices = tuple(
            itertools.chain.from_iterable([i] * e for i, e in enumerate(expo))
        )
        moment = _isserlis_moment(indices, cov)
        if moment != 0.0:
            total += coeff * moment
    return total


def _component_kernels(heralded: HeraldedState):
    """Per component: signed weight, vacuum-overlap prefactor, Wick covariance.

    The integrand against component i is poly * exp(-xi (gamma_i + I) xi / 4),
    i.e. a Gaussian with covariance 2 (gamma_i + I)^{-1} and total mass
    (2 pi)^4 / sqrt(det((gamma_i + I)/2)).
    """
    kernels = []
    for weight, comp in zip(heralded.signed_weights(), heralded.gammas):
        mat = np.asarray(comp.gamma, dtype=float) + np.eye(8)
        try:
            inv = solve_pd(mat, np.eye(8))
        except ModelError as err:
            raise ModelError(
                f"heralded component kernel not positive definite: {err}"
            ) from err
        prefactor = 16.0 / math.sqrt(np.linalg.det(mat))
        kernels.append((weight / heralded.p_success, prefactor, 2.0 * inv))
    return kernels


def matrix_element(heralded: HeraldedState, bra, ket) -> complex:
    """<bra| rho_herald |ket> via closed-form Wick evaluation."""
    bra = bra.occupations if isinstance(bra, FockIndex) else tuple(bra)
    ket = ket.occupations if isinstance(ket, FockIndex) else tuple(ket)
    if heralded.register.n != 4:
        raise ValueError("heralded state must live on exactly 4 modes")
    poly = _product_poly(bra, ket)
    total = 0j
    for weight, prefactor, cov in _component_kernels(heralded):
        total += weight * prefactor * _poly_gaussian_expectation(poly, cov)
    return complex(total)


def matrix_element_quadrature(heralded: HeraldedState, bra, ket,
                              nodes: int = 6) -> complex:
    """Gauss-Hermite cross-check of :func:`matrix_element`.

    The 8-dimensional integral is whitened per component (xi = L z with
    L L^T = 2 (gamma_i + I)^{-1}), after which a tensor-product rule is
    exact for the degree <= 8 polynomial integrand whenever nodes >= 5.
    The raw 20-nodes-per-dimension tensor rule in the original coordinates
    would need 20^8 evaluations; whitening keeps exactness with ~10^6.
    """
    bra = bra.occupations if isinstance(bra, FockIndex) else tuple(bra)
    ket = ket.occupations if isinstance(ket, FockIndex) else tuple(ket)
    poly = _product_poly(bra, ket)
    x, w = roots_hermite(nodes)
    grids = np.meshgrid(*([x] * 8), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)  # (nodes^8, 8)
    wts = np.ones(len(pts))
    for g in np.meshgrid(*([w] * 8), indexing="ij"):
        wts *= g.ravel()

    total = 0j
    norm = math.pi ** -4  # prod of 1/sqrt(pi) per dimension
    for weight, prefactor, cov in _component_kernels(heralded):
        low = np.linalg.cholesky(cov)
        xi = pts @ (math.sqrt(2.0) * low.T)
        vals = np.zeros(len(pts), dtype=complex)
        for expo, coeff in poly.items():
            if coeff == 0:
                continue
            mono = np.ones(len(pts))
            for dim, e in enumerate(expo):
                if e:
                    mono = mono * xi[:, dim] ** e
            vals += coeff * mono
        total += weight * prefactor * norm * np.sum(wts * vals)
    return complex(total)


def partial_density_matrix(heralded: HeraldedState) -> PartialDensityMatrix:
    """All 36 subspace elements, hermitized; raises if the trace vanishes."""
    dim = len(BASIS_OCCUPATIONS)
    mat = np.zeros((dim, dim), dtype=complex)
    for i, bra in enumerate(BASIS_OCCUPATIONS):
        for j in range(i, dim):
            mat[i, j] = matrix_element(heralded, bra, BASIS_OCCUPATIONS[j])
            if j != i:
                mat[j, i] = np.conjugate(mat[i, j])
    mat = (mat + mat.conj().T) / 2
    trace_raw = float(mat.trace().real)
    if trace_raw <= 0:
        raise ModelError(
            f"subspace population {trace_raw:.3e} is not positive; "
            "cannot renormalize"
        )
    return PartialDensityMatrix(
        elements=mat / trace_raw, normalized=True, trace_raw=trace_raw
    )


def bell_fidelity(pdm: PartialDensityMatrix) -> float:
    """Overlap with the swapped Bell state (|0110> + |1001>)/sqrt(2)."""
    if not pdm.normalized:
        raise ValueError("bell_fidelity expects a renormalized matrix")
    i, j = BELL_PLUS_INDICES
    mat = pdm.elements
    return float((mat[i, i] + mat[j, j] + mat[i, j] + mat[j, i]).real / 2)
