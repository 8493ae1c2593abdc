"""Small dense complex linear algebra (2x2 and 4x4 matrices).

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The Hermitian
eigensolver is a cyclic complex Jacobi scheme; the numba kernel and the
vectorised numpy kernel run the same rotation sequence.
"""
import numpy as np

from . import _accel
from .errors import ConvergenceFailure, NonSquare, NotHermitian, NotPSD, ValidationError

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_cmatrix(a):
    """Return ``a`` as a finite 2-d complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise ValidationError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def dagger(a):
    return np.conj(np.asarray(a)).T


def kron(a, b):
    """Kronecker product; entry ``[i*rb + p, j*cb + q] = a[i, j] * b[p, q]``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def mat_trace(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"trace of non-square matrix with shape {a.shape}")
    return complex(np.trace(a))


@_accel.njit
def _jacobi_numba(a, tol, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(A[i, j]) ** 2
    thresh = tol * max(1.0, np.sqrt(scale))
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += abs(A[i, j]) ** 2
        if np.sqrt(off) < thresh:
            w = np.empty(n)
            for i in range(n):
                w[i] = A[i, i].real
            return w, V, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                ph = apq / mag
                cph = np.conj(ph)
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * cph * akq
                    A[k, q] = s * akp + c * cph * akq
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * cph * vkq
                    V[k, q] = s * vkp + c * cph * vkq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * ph * aqk
                    A[q, k] = s * apk + c * ph * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i].real
    return w, V, False


def _jacobi_numpy(a, tol, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n, dtype=np.complex128)
    thresh = tol * max(1.0, np.linalg.norm(A))
    offmask = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        if np.sqrt(np.sum(np.abs(A[offmask]) ** 2)) < thresh:
            return np.diag(A).real.copy(), V, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(A[p, q])
                if mag == 0.0:
                    continue
                ph = A[p, q] / mag
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                J = np.array([[c, s], [-s * np.conj(ph), c * np.conj(ph)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                V[:, idx] = V[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    return np.diag(A).real.copy(), V, False


_jacobi = _jacobi_numba if _accel.USE_NUMBA else _jacobi_numpy


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in descending order (ties keep their index order).
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    NotHermitian
        If ``max |a - a^dagger|`` exceeds ``HERMITIAN_TOL``.
    ConvergenceFailure
        If the Jacobi sweeps do not drive the off-diagonal norm below
        ``JACOBI_TOL`` (relative to the Frobenius norm) within
        ``JACOBI_MAX_SWEEPS`` sweeps.
    """
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"eigendecomposition of non-square matrix {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    h = 0.5 * (a + a.conj().T)
    w, v, ok = _jacobi(h, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not ok:
        raise ConvergenceFailure("Jacobi eigensolver did not converge")
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def sqrt_psd(a):
    """Principal square root of a Hermitian positive semi-definite matrix.

    Eigenvalues in ``[-PSD_TOL, 0)`` are treated as zero.
    """
    w, v = hermitian_eig(a)
    if w[-1] < -PSD_TOL:
        raise NotPSD(f"smallest eigenvalue {w[-1]:.3e} is negative")
    root = np.sqrt(np.clip(w, 0.0, None))
    out = (v * root) @ v.conj().T
    return 0.5 * (out + out.conj().T)
