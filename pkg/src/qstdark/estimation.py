"""Estimators, multi-trial differential-evolution fits and ensemble reduction.

Three loss functions are available (``mle``, ``chi2``, ``ls``) and each can be
fed with either the ideal Born-rule counts or the dark-count model, giving the
six estimator variants.  The ``mle`` loss is the Gaussian-approximated form
``sum[(m - e)^2 / e + ln e]``, not the exact Poisson log-likelihood.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .de import FitConfig, minimize_tomography_loss
from .errors import EmptyEnsemble, MalformedCounts, ValidationError
from .model import NoiseModel, ensure_counts, expected_ideal, expected_noisy
from .states import density_from_cholesky, pair_kets

E_FLOOR = _kernels.E_FLOOR

__all__ = [
    "LossKind", "CountModel", "EstimatorSpec", "ALL_SPECS", "FitConfig", "ParamVector",
    "TrialResult", "TrialEnsemble", "default_bounds", "loss", "estimate", "fit_trial",
    "trial_seed", "average_state", "summarize",
]


class LossKind(str, Enum):
    MLE = "mle"
    CHI2 = "chi2"
    LS = "ls"


class CountModel(str, Enum):
    IDEAL = "ideal"
    DARK = "dark"


_KIND_CODE = {LossKind.MLE: _kernels.MLE, LossKind.CHI2: _kernels.CHI2, LossKind.LS: _kernels.LS}


@dataclass(frozen=True)
class EstimatorSpec:
    loss_kind: LossKind = LossKind.MLE
    count_model: CountModel = CountModel.DARK

    def __post_init__(self):
        object.__setattr__(self, "loss_kind", LossKind(self.loss_kind))
        object.__setattr__(self, "count_model", CountModel(self.count_model))

    @property
    def dark(self):
        return self.count_model is CountModel.DARK

    @property
    def n_params(self):
        return 19 if self.dark else 17

    @property
    def label(self):
        base = {"mle": "MLE", "chi2": "chi2", "ls": "LS"}[self.loss_kind.value]
        return base + ("~" if self.dark else "")


ALL_SPECS = tuple(EstimatorSpec(k, m) for m in CountModel for k in LossKind)


@dataclass
class ParamVector:
    w: np.ndarray
    n_pairs: float
    dark_rate: float | None = None
    background: float | None = None

    def to_array(self):
        tail = [self.n_pairs]
        if self.dark_rate is not None:
            tail += [self.dark_rate, self.background]
        return np.concatenate([np.asarray(self.w, dtype=float), tail])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.shape not in ((17,), (19,)):
            raise ValidationError(f"parameter vector must have length 17 or 19, got {x.shape}")
        if x.size == 17:
            return cls(x[:16].copy(), float(x[16]))
        return cls(x[:16].copy(), float(x[16]), float(x[17]), float(x[18]))


def default_bounds(counts, count_model=CountModel.DARK):
    """Search box for ``[w1..w16, N(, a, b)]``.

    ``w`` in [-1, 1] (the normalisation makes W scale-free), ``N`` between half
    the largest count and 4/9 of the total (the mean per-basis sum), ``a`` in
    [0, 1] and ``b`` in [0, max count].
    """
    m = ensure_counts(counts).counts
    top = float(m.max())
    if top <= 0:
        raise MalformedCounts("all counts are zero")
    n_lo = 0.5 * top
    n_hi = max(4.0 * float(m.sum()) / 9.0, n_lo)
    b = [(-1.0, 1.0)] * 16 + [(n_lo, n_hi)]
    if CountModel(count_model) is CountModel.DARK:
        b += [(0.0, 1.0), (0.0, top)]
    return tuple(b)


def expected_counts(params, count_model):
    """Expected counts for a parameter vector under the chosen count model."""
    p = params if isinstance(params, ParamVector) else ParamVector.from_array(params)
    rho = density_from_cholesky(p.w)
    if CountModel(count_model) is CountModel.DARK:
        if p.dark_rate is None:
            raise ValidationError("dark-count model needs dark_rate and background")
        return expected_noisy(rho, NoiseModel(p.n_pairs, p.dark_rate, p.background))
    return expected_ideal(rho, p.n_pairs)


def loss(params, counts, spec):
    """Value of the estimator ``spec`` at ``params`` for measured ``counts``."""
    m = ensure_counts(counts).counts
    e = expected_counts(params, spec.count_model)
    if spec.loss_kind is LossKind.LS:
        return float(np.sum((m - e) ** 2))
    e = np.maximum(e, E_FLOOR)
    value = np.sum((m - e) ** 2 / e)
    if spec.loss_kind is LossKind.MLE:
        value += np.sum(np.log(e))
    return float(value)


@dataclass
class TrialResult:
    rho: np.ndarray
    n_pairs_hat: float
    dark_rate_hat: float | None
    background_hat: float | None
    loss_value: float
    trial_seed: int
    params: np.ndarray = field(repr=False, default=None)


@dataclass
class TrialEnsemble:
    trials: list
    spec: EstimatorSpec | None = None
    config: FitConfig | None = None

    def __len__(self):
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def __getitem__(self, i):
        return self.trials[i]

    @property
    def states(self):
        return np.array([t.rho for t in self.trials])


def trial_seed(master_seed, trial):
    """Seed of trial ``trial``, a hash of ``(master_seed, trial)``."""
    if master_seed < 0:
        raise ValidationError("master seed must be non-negative")
    ss = np.random.SeedSequence([int(master_seed), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def fit_trial(counts, spec, config, seed, bounds=None):
    """Run a single differential-evolution fit and package the result."""
    cs = ensure_counts(counts)
    bounds = bounds if bounds is not None else (config.bounds or default_bounds(cs, spec.count_model))
    if len(bounds) != spec.n_params:
        raise ValidationError(f"{spec.label} needs {spec.n_params} bounds, got {len(bounds)}")
    x, value = minimize_tomography_loss(cs.counts, pair_kets(), _KIND_CODE[spec.loss_kind],
                                        spec.dark, bounds, config, seed)
    p = ParamVector.from_array(x)
    return TrialResult(
        rho=density_from_cholesky(p.w),
        n_pairs_hat=p.n_pairs,
        dark_rate_hat=p.dark_rate,
        background_hat=p.background,
        loss_value=value,
        trial_seed=seed,
        params=x,
    )


def estimate(counts, spec, config=None, jobs=1):
    """Fit ``config.trials`` independent trials; results are ordered by trial index.

    Each trial is seeded from ``(config.seed, t)`` only, so the ensemble does
    not depend on ``jobs`` or on execution order.
    """
    config = config or FitConfig()
    cs = ensure_counts(counts)
    bounds = config.bounds or default_bounds(cs, spec.count_model)
    seeds = [trial_seed(config.seed, t) for t in range(config.trials)]

    def run(seed):
        return fit_trial(cs, spec, config, seed, bounds)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(run, seeds))
    else:
        trials = [run(s) for s in seeds]
    return TrialEnsemble(trials, spec, config)


def _states(ensemble):
    out = []
    for item in ensemble:
        out.append(item.rho if isinstance(item, TrialResult) else np.asarray(item))
    return out


def average_state(ensemble):
    """Entrywise mean of the trial density matrices."""
    states = _states(ensemble)
    if not states:
        raise EmptyEnsemble("cannot average an empty ensemble")
    rho = np.mean(np.array(states, dtype=np.complex128), axis=0)
    return 0.5 * (rho + rho.conj().T)


def summarize(ensemble, metric):
    """Sample mean and sample standard deviation (n - 1) of ``metric`` over trials."""
    values = np.array([metric(r) for r in _states(ensemble)], dtype=float)
    if values.size == 0:
        raise EmptyEnsemble("cannot summarise an empty ensemble")
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(np.mean(values)), sd
