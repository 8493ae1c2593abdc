import numpy as np
import pytest

from qstdark.errors import MalformedCounts, OutOfRange
from qstdark.model import (CountSet, NoiseModel, apply_dark_mixture, basis_sums,
                           expected_ideal, expected_noisy, simulate_counts)
from qstdark.states import bell_state, maximally_mixed, random_density, two_qubit_operators

HH, VV = 0, 7


def brute_expected(rho, n):
    # Tr(M_k rho) straight from the 4x4 operators
    return np.array([n * np.trace(M @ rho).real for M in two_qubit_operators()])


def test_expected_ideal_examples():
    assert expected_ideal(np.diag([1.0, 0, 0, 0]), 1000)[HH] == pytest.approx(1000)
    np.testing.assert_allclose(expected_ideal(maximally_mixed(), 1000), 250)
    assert expected_ideal(bell_state(), 1000)[VV] == pytest.approx(0, abs=1e-12)


def test_expected_ideal_matches_trace_oracle(rng):
    for _ in range(50):
        rho = random_density(rng)
        e = expected_ideal(rho, 123.0)
        np.testing.assert_allclose(e, brute_expected(rho, 123.0), atol=1e-10)
        assert np.all(e >= -1e-12) and np.all(e <= 123.0 + 1e-9)
        np.testing.assert_allclose(basis_sums(e), 123.0, rtol=1e-6)


def test_expected_ideal_linear(rng):
    for _ in range(50):
        r1, r2, alpha = random_density(rng), random_density(rng), rng.random()
        lhs = expected_ideal(alpha * r1 + (1 - alpha) * r2, 1000)
        rhs = alpha * expected_ideal(r1, 1000) + (1 - alpha) * expected_ideal(r2, 1000)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_dark_mixture():
    rho = bell_state()
    np.testing.assert_allclose(apply_dark_mixture(rho, 0.0), rho)
    np.testing.assert_allclose(apply_dark_mixture(rho, 1.0), maximally_mixed())
    w = np.linalg.eigvalsh(apply_dark_mixture(rho, 0.5))[::-1]
    np.testing.assert_allclose(w, [0.625, 0.125, 0.125, 0.125], atol=1e-12)
    with pytest.raises(OutOfRange):
        apply_dark_mixture(rho, 1.5)


def test_expected_noisy_examples(rng):
    e = expected_noisy(bell_state(), NoiseModel(1000, 0.2, 50))
    assert e[VV] == pytest.approx(100.0)
    assert np.all(e >= 50 - 1e-9)
    for _ in range(100):
        rho = random_density(rng)
        np.testing.assert_allclose(expected_noisy(rho, NoiseModel(1000)), expected_ideal(rho, 1000), atol=1e-10)
    np.testing.assert_allclose(expected_noisy(maximally_mixed(), NoiseModel(1000, 0.37, 0)), 250)


def test_basis_sums_with_background(rng):
    for _ in range(50):
        n, a, b = rng.uniform(10, 1e4), rng.random(), rng.uniform(0, 100)
        e = expected_noisy(random_density(rng), NoiseModel(n, a, b))
        np.testing.assert_allclose(basis_sums(e), n + 4 * b, atol=1e-6 * n)


def test_noise_model_validation():
    for bad in [dict(n_pairs=0), dict(n_pairs=10, dark_rate=-0.1), dict(n_pairs=10, background=-1)]:
        with pytest.raises(OutOfRange):
            NoiseModel(**bad)


def test_simulate_exact_and_poisson():
    noise = NoiseModel(1000, 0.2, 50)
    exact = simulate_counts(bell_state(), noise, sampling="exact")
    np.testing.assert_array_equal(exact.counts, expected_noisy(bell_state(), noise))
    a = simulate_counts(bell_state(), noise, seed=11, sampling="poisson")
    b = simulate_counts(bell_state(), noise, seed=11, sampling="poisson")
    np.testing.assert_array_equal(a.counts, b.counts)
    assert np.all(a.counts == np.round(a.counts))
    c = simulate_counts(bell_state(), noise, seed=12, sampling="poisson")
    assert not np.array_equal(a.counts, c.counts)


def test_poisson_mean_clt():
    noise = NoiseModel(1000)
    draws = np.array([simulate_counts(maximally_mixed(), noise, seed=s, sampling="poisson").counts[0]
                      for s in range(10_000)])
    assert abs(draws.mean() - 250) <= 4 * np.sqrt(250 / 10_000)


def test_countset_validation():
    with pytest.raises(MalformedCounts):
        CountSet(np.ones(35))
    with pytest.raises(MalformedCounts):
        CountSet(-np.ones(36))
    with pytest.raises(MalformedCounts):
        CountSet(np.full(36, np.nan))
