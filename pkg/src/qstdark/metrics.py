"""Figures of merit for reconstructed two-qubit states.

Two fidelity conventions coexist on purpose: :func:`fidelity` is the
square-root (Uhlmann-Jozsa) fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``,
while :func:`fidelity_bell` is the plain overlap ``<psi|rho|psi>`` with the
Bell vector.  For a pure target the first is the square root of the second.

The Bell target is ``(|HV> + |VH>)/sqrt(2)``, which is usually called
``|Psi+>``; some write-ups label the same vector ``|Phi+>``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import EmptyEnsemble
from .estimation import average_state, summarize
from .linalg import hermitian_eig, kron, sqrt_psd
from .states import bell_vector

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = kron(SIGMA_Y, SIGMA_Y)
DEFAULT_GRID = 360
EIG_FLOOR = 1e-14


def spin_flip(rho):
    """``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)``."""
    return YY @ np.conj(rho) @ YY


def _hermitize(a):
    return 0.5 * (a + a.conj().T)


def concurrence(rho):
    """Wootters concurrence ``max(0, a1 - a2 - a3 - a4)``.

    The ``a_i`` are the eigenvalues of ``R = sqrt(sqrt(rho) rho_f sqrt(rho))``,
    obtained as square roots of the eigenvalues of the inner product matrix.
    Inner eigenvalues below ``EIG_FLOOR`` times the largest one are rounding
    noise of rank-deficient states and are set to zero before rooting.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    s = sqrt_psd(rho)
    lam, _ = hermitian_eig(_hermitize(s @ spin_flip(rho) @ s))
    lam = np.where(lam < EIG_FLOOR * max(lam[0], 0.0), 0.0, lam)
    alpha = np.sqrt(lam)
    return float(min(1.0, max(0.0, alpha[0] - alpha[1] - alpha[2] - alpha[3])))


def purity(rho):
    rho = np.asarray(rho, dtype=np.complex128)
    return float(np.real(np.trace(rho @ rho)))


def fidelity(rho, sigma):
    s = sqrt_psd(rho)
    inner = sqrt_psd(_hermitize(s @ np.asarray(sigma, dtype=np.complex128) @ s))
    return float(min(1.0, max(0.0, np.trace(inner).real)))


def fidelity_bell(rho):
    psi = bell_vector()
    return float(np.real(psi.conj() @ np.asarray(rho) @ psi))


def trace_distance(rho, sigma):
    w, _ = hermitian_eig(_hermitize(np.asarray(rho) - np.asarray(sigma)))
    return 0.5 * float(np.sum(np.abs(w)))


@dataclass
class CoincidenceCurve:
    thetas: np.ndarray
    values: np.ndarray
    n_pairs: float


def analyzer_ket(theta):
    """Linear polarizer ket ``(sin t, cos t)``: ``t = 0`` is V, ``t = pi/2`` is H."""
    return np.array([np.sin(theta), np.cos(theta)], dtype=np.complex128)


def coincidence_value(rho, n_pairs, theta):
    v = np.array([0.0, 1.0], dtype=np.complex128)
    psi = np.kron(v, analyzer_ket(theta))
    return float(n_pairs * np.real(psi.conj() @ np.asarray(rho) @ psi))


def coincidence_curve(rho, n_pairs, grid_size=DEFAULT_GRID):
    """``N Tr(|V><V| x |t><t| rho)`` on ``grid_size`` uniform angles in [0, 2 pi)."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    thetas = 2.0 * np.pi * np.arange(grid_size) / grid_size
    rho = np.asarray(rho, dtype=np.complex128)
    # signal analyzer fixed at V: only the |V?> block of rho contributes
    block = rho[2:, 2:]
    kets = np.stack([np.sin(thetas), np.cos(thetas)], axis=1).astype(np.complex128)
    vals = n_pairs * np.einsum("ta,ab,tb->t", kets.conj(), block, kets).real
    return CoincidenceCurve(thetas, np.clip(vals, 0.0, None), float(n_pairs))


@dataclass
class Stat:
    mean: float
    sd: float

    def as_dict(self):
        return {"mean": self.mean, "sd": self.sd}


@dataclass
class MeritReport:
    concurrence: Stat
    purity: Stat
    fidelity_bell: Stat
    fidelity_reference: Stat | None = None
    n_trials: int = 0

    def as_dict(self):
        out = {
            "n_trials": self.n_trials,
            "concurrence": self.concurrence.as_dict(),
            "purity": self.purity.as_dict(),
            "fidelity_bell": self.fidelity_bell.as_dict(),
        }
        if self.fidelity_reference is not None:
            out["fidelity_reference"] = self.fidelity_reference.as_dict()
        return out

    def rows(self):
        yield "concurrence", self.concurrence
        yield "purity", self.purity
        yield "fidelity_bell", self.fidelity_bell
        if self.fidelity_reference is not None:
            yield "fidelity_reference", self.fidelity_reference


def merit_report(ensemble, reference=None):
    """Ensemble mean and sample SD of every figure of merit."""
    states = [getattr(t, "rho", t) for t in ensemble]
    if not states:
        raise EmptyEnsemble("cannot report on an empty ensemble")
    ref = None
    if reference is not None:
        ref = Stat(*summarize(states, lambda r: fidelity(r, reference)))
    return MeritReport(
        concurrence=Stat(*summarize(states, concurrence)),
        purity=Stat(*summarize(states, purity)),
        fidelity_bell=Stat(*summarize(states, fidelity_bell)),
        fidelity_reference=ref,
        n_trials=len(states),
    )


__all__ = [
    "spin_flip", "concurrence", "purity", "fidelity", "fidelity_bell", "trace_distance",
    "coincidence_curve", "coincidence_value", "CoincidenceCurve", "MeritReport", "Stat",
    "merit_report", "average_state",
]
