"""Density matrices, reference states and polarization projectors.

Basis ordering is fixed as ``|HH>, |HV>, |VH>, |VV>``; the first factor is
the signal photon, the second the idler.  Circular states use
``|L> = (|H> + i|V>)/sqrt(2)`` and ``|R> = (|H> - i|V>)/sqrt(2)``.

Measurement index ``k`` (0-based here) runs row-major over the pair
``(i, j)`` of single-photon projectors in the order H, V, A, D, L, R, so that
``k = 6*i + j``.
"""
from functools import lru_cache

import numpy as np

from .errors import DegenerateParams, ValidationError
from .linalg import HERMITIAN_TOL, PSD_TOL, kron

LABELS = ("H", "V", "A", "D", "L", "R")
NORM_EPS = 1e-12

_S = 1.0 / np.sqrt(2.0)
_KETS = {
    "H": np.array([1.0, 0.0], dtype=np.complex128),
    "V": np.array([0.0, 1.0], dtype=np.complex128),
    "A": np.array([_S, -_S], dtype=np.complex128),
    "D": np.array([_S, _S], dtype=np.complex128),
    "L": np.array([_S, 1j * _S], dtype=np.complex128),
    "R": np.array([_S, -1j * _S], dtype=np.complex128),
}

# positions of the complex off-diagonal entries of the lower-triangular W;
# (row, col, index of real part in the 0-based parameter vector)
_W_OFFDIAG = (
    (1, 0, 4),
    (2, 1, 6),
    (3, 2, 8),
    (2, 0, 10),
    (3, 1, 12),
    (3, 0, 14),
)


def single_kets():
    """The six single-photon kets as rows of a (6, 2) array."""
    return np.array([_KETS[s] for s in LABELS])


def single_projectors():
    """The six 2x2 projectors ``|s><s|`` ordered H, V, A, D, L, R."""
    kets = single_kets()
    return np.einsum("ka,kb->kab", kets, kets.conj())


@lru_cache(maxsize=1)
def _pair_kets():
    kets = single_kets()
    out = np.einsum("ia,jb->ijab", kets, kets).reshape(36, 4)
    out.setflags(write=False)
    return out


def pair_kets():
    """Product kets ``|s_i> (x) |s_j>`` as rows of a (36, 4) array, k = 6*i + j."""
    return _pair_kets()


def two_qubit_operators():
    """The 36 product projectors ``M_k = P_i (x) P_j`` as a (36, 4, 4) array."""
    singles = single_projectors()
    return np.array([kron(singles[i], singles[j]) for i in range(6) for j in range(6)])


def pair_labels(k):
    """Basis labels ``(signal, idler)`` for 0-based measurement index ``k``."""
    i, j = divmod(int(k), 6)
    return LABELS[i], LABELS[j]


def cholesky_matrix(w):
    """Lower-triangular W with diagonal w1..w4 and complex entries w5+iw6, ..."""
    w = np.asarray(w, dtype=float)
    if w.shape != (16,):
        raise ValidationError(f"expected 16 Cholesky parameters, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("Cholesky parameters must be finite")
    W = np.zeros((4, 4), dtype=np.complex128)
    W[np.diag_indices(4)] = w[:4]
    for r, c, i in _W_OFFDIAG:
        W[r, c] = w[i] + 1j * w[i + 1]
    return W


def density_from_cholesky(w):
    """Physical state ``W^dagger W / Tr(W^dagger W)`` from 16 real parameters."""
    W = cholesky_matrix(w)
    g = W.conj().T @ W
    tr = np.trace(g).real
    if tr <= NORM_EPS:
        raise DegenerateParams(f"Tr(W^dagger W) = {tr:.3e} is too small to normalise")
    rho = g / tr
    return 0.5 * (rho + rho.conj().T)


def cholesky_from_density(rho, tol=1e-12):
    """Parameters ``w`` with ``density_from_cholesky(w) == rho``.

    Uses a pivot-free semidefinite Cholesky factorisation of the
    index-reversed matrix, so rank-deficient states are supported.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    J = np.eye(4)[::-1]
    A = J @ rho @ J
    L = np.zeros((4, 4), dtype=np.complex128)
    for k in range(4):
        pivot = A[k, k].real
        if pivot > tol:
            col = A[k:, k] / np.sqrt(pivot)
            L[k:, k] = col
            A[k:, k:] = A[k:, k:] - np.outer(col, col.conj())
        elif np.max(np.abs(A[k:, k])) > np.sqrt(tol):
            raise ValidationError("matrix is not positive semi-definite")
    W = J @ L.conj().T @ J
    w = np.zeros(16)
    w[:4] = W[np.diag_indices(4)].real
    for r, c, i in _W_OFFDIAG:
        w[i] = W[r, c].real
        w[i + 1] = W[r, c].imag
    return w


def bell_vector():
    """``(|HV> + |VH>)/sqrt(2)``."""
    return np.array([0.0, _S, _S, 0.0], dtype=np.complex128)


def bell_state():
    psi = bell_vector()
    return np.outer(psi, psi.conj())


def maximally_mixed():
    return np.eye(4, dtype=np.complex128) / 4.0


def werner_state(p):
    """``p * bell + (1 - p) * I/4``."""
    return p * bell_state() + (1.0 - p) * maximally_mixed()


def pure_state(psi):
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def validate_density(rho, name="rho"):
    """Check the density-matrix invariants and return ``rho`` as an array.

    Eigenvalues are checked with ``numpy.linalg.eigvalsh`` so that this
    check stays independent of the package's own eigensolver.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValidationError(f"{name} must be 4x4, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValidationError(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1.0) > HERMITIAN_TOL:
        raise ValidationError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValidationError(f"{name} is not positive semi-definite")
    return rho


def is_density(rho):
    try:
        validate_density(rho)
    except ValidationError:
        return False
    return True


def random_density(rng, rank=4):
    """Random state from a complex Ginibre matrix with ``rank`` columns."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, n=2):
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
