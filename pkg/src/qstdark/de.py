"""Differential evolution (rand/1/bin) on a box.

Random numbers for a block of generations are drawn up front from a
``numpy.random.Generator`` so that the compiled kernel and the numpy
implementation consume exactly the same stream.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel, _kernels
from .errors import ValidationError

CHUNK = 200


@dataclass(frozen=True)
class FitConfig:
    iterations: int = 1600
    trials: int = 40
    population: int = 60
    de_weight: float = 0.7
    de_crossover: float = 0.9
    seed: int = 0
    bounds: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.iterations < 1 or self.trials < 1:
            raise ValidationError("iterations and trials must be >= 1")
        if self.population < 8:
            raise ValidationError("population must be >= 8")
        if not 0.0 < self.de_weight <= 2.0:
            raise ValidationError("de_weight must lie in (0, 2]")
        if not 0.0 <= self.de_crossover <= 1.0:
            raise ValidationError("de_crossover must lie in [0, 1]")

    def with_(self, **changes):
        return replace(self, **changes)


def _as_bounds(bounds):
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] == 0:
        raise ValidationError("bounds must be a sequence of (low, high) pairs")
    if not np.all(np.isfinite(b)) or np.any(b[:, 0] > b[:, 1]):
        raise ValidationError("bounds must be finite with low <= high")
    return b[:, 0].copy(), b[:, 1].copy()


def _draws(rng, n_gen, NP, D):
    u_idx = rng.random((n_gen, NP, 3))
    u_cross = rng.random((n_gen, NP, D))
    jrand = rng.integers(0, D, size=(n_gen, NP))
    return u_idx, u_cross, jrand


def _init(rng, lo, hi, NP):
    return lo + rng.random((NP, lo.size)) * (hi - lo)


def minimize_de(objective, bounds, config=None, *, vectorized=False, seed=None,
                return_history=False):
    """Minimise ``objective`` over a box with differential evolution.

    Parameters
    ----------
    objective : callable
        Maps a 1-d parameter vector to a float, or a (P, D) array to P
        floats when ``vectorized`` is true.
    bounds : sequence of (low, high)
    config : FitConfig, optional
        Supplies ``iterations``, ``population``, ``de_weight``,
        ``de_crossover`` and (unless ``seed`` is given) the seed.

    Returns
    -------
    best : ndarray
    best_value : float
    history : ndarray, only if ``return_history``
        Incumbent value after each generation.
    """
    config = config or FitConfig()
    lo, hi = _as_bounds(bounds)
    rng = np.random.default_rng(config.seed if seed is None else seed)
    if vectorized:
        evaluate = objective
    else:
        def evaluate(pop):
            return np.array([objective(x) for x in pop], dtype=float)
    NP, D = config.population, lo.size
    pop = _init(rng, lo, hi, NP)
    fit = np.asarray(evaluate(pop), dtype=float).copy()
    history = np.empty(config.iterations)
    done = 0
    while done < config.iterations:
        n = min(CHUNK, config.iterations - done)
        u_idx, u_cross, jrand = _draws(rng, n, NP, D)
        for g in range(n):
            _kernels.de_step_numpy(pop, fit, lo, hi, config.de_weight, config.de_crossover,
                                   u_idx[g], u_cross[g], jrand[g], evaluate)
            history[done + g] = fit.min()
        done += n
    i = int(np.argmin(fit))
    out = (pop[i].copy(), float(fit[i]))
    return out + (history,) if return_history else out


def minimize_tomography_loss(counts, kets, kind, dark, bounds, config, seed,
                             floor=_kernels.E_FLOOR, return_history=False):
    """:func:`minimize_de` specialised to the tomographic loss.

    With numba enabled the whole generation loop runs compiled; otherwise
    the generic driver is used with the vectorised numpy loss.  Both paths
    draw identical random numbers.
    """
    counts = np.ascontiguousarray(counts, dtype=float)
    kets = np.ascontiguousarray(kets, dtype=np.complex128)
    if not _accel.USE_NUMBA:
        def objective(pop):
            return _kernels.batch_loss_numpy(pop, counts, kets, kind, dark, floor)
        return minimize_de(objective, bounds, config, vectorized=True, seed=seed,
                           return_history=return_history)
    lo, hi = _as_bounds(bounds)
    rng = np.random.default_rng(seed)
    NP, D = config.population, lo.size
    pop = _init(rng, lo, hi, NP)
    fit = _kernels.batch_loss_numba(pop, counts, kets, kind, dark, floor)
    history = np.empty(config.iterations)
    done = 0
    while done < config.iterations:
        n = min(CHUNK, config.iterations - done)
        u_idx, u_cross, jrand = _draws(rng, n, NP, D)
        _kernels.de_generations_numba(pop, fit, lo, hi, config.de_weight, config.de_crossover,
                                      u_idx, u_cross, jrand, counts, kets, kind, dark,
                                      floor, history, done)
        done += n
    i = int(np.argmin(fit))
    out = (pop[i].copy(), float(fit[i]))
    return out + (history,) if return_history else out
