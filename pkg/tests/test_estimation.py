import numpy as np
import pytest

from qstdark.de import FitConfig, minimize_de
from qstdark.errors import EmptyEnsemble, ValidationError
from qstdark.estimation import (ALL_SPECS, CountModel, EstimatorSpec, LossKind, ParamVector,
                                TrialResult, average_state, default_bounds, estimate,
                                expected_counts, fit_trial, loss, summarize, trial_seed)
from qstdark.metrics import fidelity, trace_distance
from qstdark.model import CountSet, NoiseModel, expected_noisy, simulate_counts
from qstdark.states import bell_state, cholesky_from_density, maximally_mixed, pure_state

MIXED_W = cholesky_from_density(maximally_mixed())


def test_param_vector_roundtrip():
    x = np.arange(19.0)
    p = ParamVector.from_array(x)
    assert p.dark_rate == 17 and p.background == 18
    np.testing.assert_array_equal(p.to_array(), x)
    assert ParamVector.from_array(x[:17]).dark_rate is None
    with pytest.raises(ValidationError):
        ParamVector.from_array(x[:18])


def test_estimator_labels():
    assert [s.label for s in ALL_SPECS] == ["MLE", "chi2", "LS", "MLE~", "chi2~", "LS~"]
    assert EstimatorSpec("ls", "ideal").n_params == 17
    assert EstimatorSpec("ls", "dark").n_params == 19


def test_loss_perfect_fit():
    params = ParamVector(MIXED_W, 400.0)
    e = expected_counts(params, CountModel.IDEAL)
    np.testing.assert_allclose(e, 100.0)
    counts = CountSet(e)
    assert loss(params, counts, EstimatorSpec("ls", "ideal")) == pytest.approx(0, abs=1e-18)
    assert loss(params, counts, EstimatorSpec("chi2", "ideal")) == pytest.approx(0, abs=1e-18)
    assert loss(params, counts, EstimatorSpec("mle", "ideal")) == pytest.approx(np.sum(np.log(e)))


def test_loss_single_measurement_toy():
    params = ParamVector(MIXED_W, 400.0)
    m = np.full(36, 100.0)
    m[5] = 110.0
    counts = CountSet(m)
    # only k = 5 contributes a residual: (110 - 100)^2 = 100
    assert loss(params, counts, EstimatorSpec("ls", "ideal")) == pytest.approx(100.0)
    assert loss(params, counts, EstimatorSpec("chi2", "ideal")) == pytest.approx(1.0)
    assert loss(params, counts, EstimatorSpec("mle", "ideal")) == pytest.approx(1.0 + 36 * np.log(100.0))


def test_loss_dark_model_uses_noisy_counts():
    params = ParamVector(cholesky_from_density(bell_state()), 1000.0, 0.2, 50.0)
    counts = CountSet(expected_noisy(bell_state(), NoiseModel(1000, 0.2, 50)))
    assert loss(params, counts, EstimatorSpec("chi2", "dark")) == pytest.approx(0, abs=1e-12)


def test_loss_floor_keeps_values_finite():
    params = ParamVector(cholesky_from_density(bell_state()), 1000.0)
    m = np.full(36, 5.0)
    for spec in ALL_SPECS[:3]:
        assert np.isfinite(loss(params, CountSet(m), spec))


def test_default_bounds():
    m = np.full(36, 250.0)
    b = default_bounds(CountSet(m), "dark")
    assert len(b) == 19
    assert b[16] == (125.0, 4 * 9000 / 9)
    assert b[17] == (0.0, 1.0) and b[18] == (0.0, 250.0)
    assert len(default_bounds(CountSet(m), "ideal")) == 17


def test_de_constant_objective():
    best, value = minimize_de(lambda x: 7.0, [(-1, 1)] * 3, FitConfig(iterations=20))
    assert value == 7.0
    assert np.all(np.abs(best) <= 1)


def test_de_deterministic_and_bounded():
    def rosen(x):
        return float(np.sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2))
    bounds = [(-2, 2), (-1, 3), (0.5, 1.5)]
    cfg = FitConfig(iterations=200, population=20, seed=4)
    a = minimize_de(rosen, bounds, cfg)
    b = minimize_de(rosen, bounds, cfg)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1]
    lo, hi = np.array(bounds).T
    assert np.all(a[0] >= lo) and np.all(a[0] <= hi)


def test_de_history_monotone_and_final_population():
    def sphere(pop):
        return np.sum(pop ** 2, axis=1)
    best, value, hist = minimize_de(sphere, [(-5, 5)] * 4, FitConfig(iterations=300, seed=2),
                                    vectorized=True, return_history=True)
    assert np.all(np.diff(hist) <= 0)
    assert hist[-1] == value == pytest.approx(np.sum(best ** 2))


def test_de_vectorized_matches_scalar():
    cfg = FitConfig(iterations=100, population=12, seed=9)
    bounds = [(-3, 3)] * 5
    a = minimize_de(lambda x: float(np.sum(np.abs(x))), bounds, cfg)
    b = minimize_de(lambda p: np.sum(np.abs(p), axis=1), bounds, cfg, vectorized=True)
    np.testing.assert_array_equal(a[0], b[0])


def test_fit_config_validation():
    for bad in [dict(population=7), dict(iterations=0), dict(de_weight=0), dict(de_crossover=1.5)]:
        with pytest.raises(ValidationError):
            FitConfig(**bad)


def test_trial_seeds():
    seeds = [trial_seed(3, t) for t in range(40)]
    assert len(set(seeds)) == 40
    assert seeds == [trial_seed(3, t) for t in range(40)]
    assert trial_seed(4, 0) != seeds[0]


def test_estimate_single_trial():
    counts = simulate_counts(bell_state(), NoiseModel(1000))
    ens = estimate(counts, EstimatorSpec("ls", "ideal"), FitConfig(trials=1, iterations=50))
    assert len(ens) == 1
    assert ens[0].dark_rate_hat is None and ens[0].background_hat is None


def test_estimate_independent_of_jobs_and_order():
    counts = simulate_counts(bell_state(), NoiseModel(1000, 0.1, 20), seed=2, sampling="poisson")
    spec = EstimatorSpec("chi2", "dark")
    cfg = FitConfig(trials=4, iterations=150, seed=8)
    a = estimate(counts, spec, cfg, jobs=1)
    b = estimate(counts, spec, cfg, jobs=3)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.params, y.params)
    # any single trial can be recomputed from its own seed
    t = fit_trial(counts, spec, cfg, a[2].trial_seed)
    np.testing.assert_array_equal(t.params, a[2].params)


def test_every_trial_state_physical():
    counts = CountSet(np.random.default_rng(0).uniform(0, 500, 36))
    for spec in ALL_SPECS:
        for t in estimate(counts, spec, FitConfig(trials=2, iterations=40)):
            assert np.isfinite(t.loss_value)
            assert np.linalg.eigvalsh(t.rho).min() >= -1e-8
            assert np.trace(t.rho).real == pytest.approx(1, abs=1e-9)


def test_uniform_counts_give_mixed_state():
    counts = CountSet(np.full(36, 250.0))
    ens = estimate(counts, EstimatorSpec("mle", "ideal"), FitConfig(trials=3, seed=1))
    for t in ens:
        assert trace_distance(t.rho, maximally_mixed()) <= 0.02
        assert t.n_pairs_hat == pytest.approx(1000, rel=0.01)


def test_noiseless_random_pure_state_recovered(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    rho = pure_state(psi)
    counts = simulate_counts(rho, NoiseModel(1000))
    ens = estimate(counts, EstimatorSpec("mle", "ideal"), FitConfig(trials=4, seed=5))
    for t in ens:
        assert fidelity(t.rho, rho) >= 0.999


@pytest.mark.parametrize("kind", ["chi2", "ls"])
def test_noiseless_dark_fit_reproduces_counts(kind):
    noise = NoiseModel(1000, 0.1, 20)
    counts = simulate_counts(bell_state(), noise)
    spec = EstimatorSpec(kind, "dark")
    for t in estimate(counts, spec, FitConfig(trials=3, seed=2)):
        fitted = expected_counts(t.params, spec.count_model)
        np.testing.assert_allclose(fitted, counts.counts, rtol=1e-3, atol=1e-3 * counts.counts.max())


def test_noiseless_mle_and_chi2_dark_agree():
    counts = simulate_counts(bell_state(), NoiseModel(1000, 0.2, 50))
    cfg = FitConfig(trials=5, seed=3)
    a = average_state(estimate(counts, EstimatorSpec("mle", "dark"), cfg))
    b = average_state(estimate(counts, EstimatorSpec("chi2", "dark"), cfg))
    assert fidelity(a, b) >= 0.999


def _trial(rho):
    return TrialResult(np.asarray(rho, dtype=complex), 1.0, None, None, 0.0, 0)


def test_average_state():
    d1, d2 = np.diag([1.0, 0, 0, 0]), np.diag([0.0, 1, 0, 0])
    np.testing.assert_allclose(average_state([_trial(d1), _trial(d2)]), np.diag([0.5, 0.5, 0, 0]))
    np.testing.assert_allclose(average_state([_trial(bell_state())] * 3), bell_state())
    with pytest.raises(EmptyEnsemble):
        average_state([])


def test_average_state_random_trace(rng):
    from qstdark.states import random_density
    ens = [_trial(random_density(rng)) for _ in range(10)]
    assert abs(np.trace(average_state(ens)) - 1) <= 1e-10


def test_summarize():
    values = iter([2, 4, 4, 4, 5, 5, 7, 9])
    trials = [_trial(np.eye(4) / 4) for _ in range(8)]
    mean, sd = summarize(trials, lambda r: next(values))
    assert mean == pytest.approx(5)
    assert sd == pytest.approx(np.sqrt(32 / 7))
    assert summarize(trials[:1], lambda r: 3.0) == (3.0, 0.0)
    assert summarize(trials, lambda r: 1.5)[1] == 0.0
    with pytest.raises(EmptyEnsemble):
        summarize([], lambda r: 0.0)
