"""Forward models from a state to the 36 expected photon counts.

The dark-count model mixes the signal state with the maximally mixed state
at rate ``a`` and adds a constant background ``b`` per measurement window::

    e_k = N (1 - a) Tr(M_k rho) + a N / 4 + b
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import MalformedCounts, OutOfRange, ValidationError
from .states import maximally_mixed, pair_kets

N_MEASUREMENTS = 36


@dataclass(frozen=True)
class NoiseModel:
    n_pairs: float
    dark_rate: float = 0.0
    background: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.n_pairs) or self.n_pairs <= 0:
            raise OutOfRange(f"n_pairs must be positive, got {self.n_pairs}")
        if not 0.0 <= self.dark_rate <= 1.0:
            raise OutOfRange(f"dark_rate must lie in [0, 1], got {self.dark_rate}")
        if not np.isfinite(self.background) or self.background < 0:
            raise OutOfRange(f"background must be >= 0, got {self.background}")


@dataclass
class CountSet:
    """36 measured counts ordered by ``k = 6*i + j``."""

    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.shape != (N_MEASUREMENTS,):
            raise MalformedCounts(f"expected {N_MEASUREMENTS} counts, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise MalformedCounts("counts must be finite")
        if np.any(c < 0):
            raise MalformedCounts("counts must be non-negative")
        self.counts = c

    def __len__(self):
        return N_MEASUREMENTS

    def __getitem__(self, k):
        return self.counts[k]


class Sampling(str, Enum):
    EXACT = "exact"
    POISSON = "poisson"


def probabilities(rho):
    """Born-rule probabilities ``Re Tr(M_k rho)`` for the 36 product projectors."""
    psi = pair_kets()
    rho = np.asarray(rho, dtype=np.complex128)
    return np.einsum("ka,ab,kb->k", psi.conj(), rho, psi).real


def expected_ideal(rho, n_pairs):
    if not n_pairs > 0:
        raise OutOfRange(f"n_pairs must be positive, got {n_pairs}")
    return n_pairs * probabilities(rho)


def apply_dark_mixture(rho, dark_rate):
    """``(1 - a) rho + a I/4``."""
    if not 0.0 <= dark_rate <= 1.0:
        raise OutOfRange(f"dark_rate must lie in [0, 1], got {dark_rate}")
    return (1.0 - dark_rate) * np.asarray(rho, dtype=np.complex128) + dark_rate * maximally_mixed()


def expected_noisy(rho, noise):
    n, a, b = noise.n_pairs, noise.dark_rate, noise.background
    return n * (1.0 - a) * probabilities(rho) + a * n / 4.0 + b


def simulate_counts(rho, noise, seed=0, sampling=Sampling.EXACT):
    """Synthetic count data.

    ``exact`` returns the expected counts themselves; ``poisson`` draws one
    Poisson variate per measurement from a generator seeded with ``seed``.
    """
    sampling = Sampling(sampling)
    mean = expected_noisy(rho, noise)
    if sampling is Sampling.EXACT:
        counts = mean
    else:
        rng = np.random.default_rng(seed)
        counts = rng.poisson(np.clip(mean, 0.0, None)).astype(float)
    meta = {
        "n_pairs": noise.n_pairs,
        "dark_rate": noise.dark_rate,
        "background": noise.background,
        "seed": int(seed),
        "mode": sampling.value,
    }
    return CountSet(counts, meta)


def basis_sums(values):
    """Sums over the 4 outcomes of each of the 9 product bases, shape (3, 3)."""
    v = np.asarray(values, dtype=float).reshape(3, 2, 3, 2)
    return v.sum(axis=(1, 3))


def ensure_counts(counts):
    if isinstance(counts, CountSet):
        return counts
    try:
        return CountSet(np.asarray(counts, dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise MalformedCounts(str(exc)) from exc
