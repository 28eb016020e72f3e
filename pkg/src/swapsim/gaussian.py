"""Covariance-matrix representation of zero-mean multimode Gaussian states.

Conventions, fixed once here and inherited by every downstream module:

* quadrature vector ordering is xxpp: ``R = (x_1..x_N, p_1..p_N)``;
* vacuum variance is 1, i.e. ``gamma_vacuum = I`` and a thermal mode with
  mean photon number ``mu`` has diagonal ``2*mu + 1``;
* displacements are identically zero (every source in this artifact is a
  squeezed vacuum), so states carry no displacement vector;
* a symplectic ``S`` acts on a covariance matrix as ``gamma -> S^T gamma S``.

States are immutable and all operations are pure functions, so values can be
shared freely across threads.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _linalg
from .exceptions import PhysicalityError

SYMMETRY_ATOL = 1e-12
PHYSICALITY_EIG_FLOOR = -1e-9
SYMPLECTIC_ATOL = 1e-10


@dataclass(frozen=True)
class ModeRegister:
    """Ordered set of mode labels with label -> position lookup."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate mode labels in {self.labels}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def position(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"mode {label!r} not in register {self.labels}") from None

    def positions(self, labels) -> list[int]:
        return [self.position(lab) for lab in labels]

    def quad_indices(self, labels) -> np.ndarray:
        """Row/column indices of the x- then p-quadratures of ``labels``.

        The returned ordering keeps the subset itself in xxpp form, so
        submatrices extracted with it are valid covariance matrices.
        """
        pos = self.positions(labels)
        return np.array(pos + [p + self.n for p in pos], dtype=np.intp)

    def complement(self, labels) -> tuple[str, ...]:
        drop = set(labels)
        missing = drop - set(self.labels)
        if missing:
            raise KeyError(f"modes {sorted(missing)} not in register")
        return tuple(lab for lab in self.labels if lab not in drop)

    def subset(self, labels) -> "ModeRegister":
        self.positions(labels)  # validate membership
        return ModeRegister(tuple(labels))

    def extend(self, labels) -> "ModeRegister":
        return ModeRegister(self.labels + tuple(labels))


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean Gaussian state: a mode register plus a 2N x 2N covariance."""

    register: ModeRegister
    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma)
        n2 = 2 * self.register.n
        if gamma.shape != (n2, n2):
            raise ValueError(
                f"gamma has shape {gamma.shape}, expected {(n2, n2)} "
                f"for {self.register.n} modes"
            )
        asym = np.max(np.abs(_linalg.as_float_matrix(gamma - gamma.T)), initial=0.0)
        if asym > SYMMETRY_ATOL:
            raise PhysicalityError(f"gamma asymmetry {asym:.3e} exceeds tolerance")
        gamma = (gamma + gamma.T) / 2
        if gamma.dtype != object:
            gamma = gamma.astype(np.float64, copy=False)
            gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_modes(self) -> int:
        return self.register.n

    def submatrix(self, labels) -> np.ndarray:
        """Extract the rows and columns of the listed modes (x and p)."""
        idx = self.register.quad_indices(labels)
        return self.gamma[np.ix_(idx, idx)]

    def deleted(self, labels) -> np.ndarray:
        """Submatrix obtained by deleting the listed modes' rows and columns."""
        return self.submatrix(self.register.complement(labels))

    def reduce(self, labels) -> "GaussianState":
        """Partial trace down to ``labels`` (a submatrix extraction)."""
        return GaussianState(self.register.subset(labels), self.submatrix(labels))

    def physicality_min_eig(self) -> float:
        """Minimum eigenvalue of the Hermitian matrix gamma + i*Omega."""
        gam = _linalg.as_float_matrix(self.gamma)
        omega = _linalg.symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(gam + 1j * omega)[0].real)

    def assert_physical(self):
        low = self.physicality_min_eig()
        if low < PHYSICALITY_EIG_FLOOR:
            raise PhysicalityError(
                f"gamma + i*Omega has eigenvalue {low:.3e} below tolerance"
            )


@dataclass(frozen=True)
class SymplecticOp:
    """Real symplectic matrix acting on a specific register."""

    matrix: np.ndarray
    register: ModeRegister

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        n2 = 2 * self.register.n
        if mat.shape != (n2, n2):
            raise ValueError(f"symplectic has shape {mat.shape}, expected {(n2, n2)}")
        smat = _linalg.as_float_matrix(mat)
        omega = _linalg.symplectic_form(self.register.n)
        err = np.max(np.abs(smat @ omega @ smat.T - omega))
        if err > SYMPLECTIC_ATOL:
            raise ValueError(f"matrix is not symplectic (S Omega S^T error {err:.3e})")
        if mat.dtype != object:
            mat = mat.astype(np.float64, copy=False)
            mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def generic_register(n: int) -> ModeRegister:
    return ModeRegister(tuple(f"m{i}" for i in range(n)))


def vacuum(modes) -> GaussianState:
    """Vacuum state on ``modes`` (a count or a ModeRegister): gamma = I."""
    if isinstance(modes, ModeRegister):
        reg = modes
    else:
        if modes < 1:
            raise ValueError("mode count must be at least 1")
        reg = generic_register(int(modes))
    return GaussianState(reg, np.eye(2 * reg.n))


def beamsplitter(theta, i: str, j: str, register: ModeRegister) -> SymplecticOp:
    """Beamsplitter of transmittance cos(theta)^2 between modes ``i`` and ``j``.

    The 2x2 rotation [[c, s], [-s, c]] is embedded identically in the x-block
    and the p-block of the 2N x 2N identity.
    """
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    c, s = _linalg.cos(theta), _linalg.sin(theta)
    n = register.n
    pi, pj = register.position(i), register.position(j)
    mat = np.eye(2 * n, dtype=_linalg.dtype_for(theta))
    if mat.dtype == object:
        mat = np.eye(2 * n).astype(object)
    for a, b in ((pi, pj), (pi + n, pj + n)):
        mat[a, a] = c
        mat[a, b] = s
        mat[b, a] = -s
        mat[b, b] = c
    return SymplecticOp(mat, register)


def apply_symplectic(state: GaussianState, op: SymplecticOp) -> GaussianState:
    """gamma -> S^T gamma S."""
    if op.register != state.register:
        raise ValueError("symplectic register does not match state register")
    smat = op.matrix
    return GaussianState(state.register, smat.T @ state.gamma @ smat)


def apply_loss(state: GaussianState, mode: str, t) -> GaussianState:
    """Pure-loss channel of transmittance ``t`` on one mode.

    On that mode's block: gamma -> K^T gamma K + alpha with K = sqrt(t) I and
    alpha = (1 - t) I; cross terms with other modes scale by sqrt(t).
    """
    if not 0 <= t <= 1:
        raise ValueError(f"transmittance {t} outside [0, 1]")
    pos = state.register.position(mode)
    n = state.register.n
    root = _linalg.sqrt(t)
    gamma = np.array(state.gamma, dtype=_linalg.dtype_for(t, state.gamma.flat[0]))
    for q in (pos, pos + n):
        gamma[q, :] *= root
        gamma[:, q] *= root
        gamma[q, q] += 1 - t
    return GaussianState(state.register, gamma)


def vacuum_overlap(state: GaussianState, modes) -> float:
    """Probability weight of projecting ``modes`` onto vacuum.

    Tr[rho |0><0|^k x I_rest] = 2^k / sqrt(det(gamma_sub + I)) where
    gamma_sub extracts both quadratures of the chosen modes.
    """
    modes = tuple(modes)
    if not modes:
        raise ValueError("mode subset must be non-empty")
    sub = state.submatrix(modes)
    eye = np.eye(sub.shape[0])
    det = _linalg.det_pd(sub + eye)
    return 2 ** len(modes) / _linalg.sqrt(det)


def condition_on_vacuum(state: GaussianState, projected) -> GaussianState:
    """State of the remaining modes given a vacuum outcome on ``projected``.

    Schur-complement update: gamma_A - gamma_AB (gamma_BB + I)^-1 gamma_AB^T.
    """
    projected = tuple(projected)
    kept = state.register.complement(projected)
    if not projected:
        raise ValueError("projected subset must be non-empty")
    if not kept:
        raise ValueError("cannot project every mode; complement is empty")
    idx_a = state.register.quad_indices(kept)
    idx_b = state.register.quad_indices(projected)
    gaa = state.gamma[np.ix_(idx_a, idx_a)]
    gab = state.gamma[np.ix_(idx_a, idx_b)]
    gbb = state.gamma[np.ix_(idx_b, idx_b)]
    solved = _linalg.solve_pd(gbb + np.eye(gbb.shape[0]), gab.T)
    cond = gaa - gab @ solved
    return GaussianState(state.register.subset(kept), (cond + cond.T) / 2)


def characteristic_function(state: GaussianState, xi) -> float:
    """chi(xi) = exp(-xi^T gamma xi / 4); real and positive for zero-mean states."""
    xi = np.asarray(xi)
    if xi.shape != (2 * state.n_modes,):
        raise ValueError(
            f"xi has shape {xi.shape}, expected ({2 * state.n_modes},)"
        )
    quad = xi @ state.gamma @ xi
    return _linalg.exp(-quad / 4)
