import re
import warnings

import numpy as np
import pytest

import reference_model as ref
from conftest import NOMINAL_K
from tendonhand.calibration import (
    FlexionDataset,
    fit_stiffness,
    format_error,
    generate_synthetic_dataset,
    objective_gradient,
    prediction_errors,
    residual_objective,
)
from tendonhand.errors import IdentifiabilityWarning, InvalidArgumentError
from tendonhand.geometry import scale_geometry

GRID = np.linspace(0.0, 75.0, 10)


@pytest.fixture(scope="module")
def clean():
    from tendonhand.geometry import reference_geometry

    g = reference_geometry(1.5)
    return g, generate_synthetic_dataset(g, NOMINAL_K, GRID, cycles=16)


def test_sample_count(clean):
    assert len(clean[1]) == 160
    assert set(np.unique(clean[1].cycles)) == set(range(16))


def test_objective_zero_at_generating_stiffness(clean):
    g, data = clean
    assert residual_objective(NOMINAL_K, data, g) <= 1e-18


def test_objective_increases_off_truth(clean):
    g, data = clean
    base = residual_objective(NOMINAL_K, data, g)
    for i in range(3):
        k = NOMINAL_K.copy()
        k[i] *= 1.1
        assert residual_objective(k, data, g) > base


def test_rest_only_dataset_is_flat(nominal_finger):
    data = FlexionDataset(np.zeros(5), np.tile(nominal_finger.rest(), (5, 1)))
    for k in ([1, 1, 1], [50, 2, 7]):
        assert residual_objective(k, data, nominal_finger) == 0.0
    with pytest.warns(IdentifiabilityWarning):
        fit = fit_stiffness(data, nominal_finger, [1, 1, 1], predict=False)
    assert fit.warning


def test_closed_form_least_squares(clean):
    # objective is separable and quadratic per joint: k_i = sum(U_i D_i) / sum(D_i^2)
    g, data = clean
    arrays = ref.geometry_arrays(g)
    noisy = FlexionDataset(data.forces, data.angles + np.deg2rad(0.5) * np.sin(np.arange(data.angles.size)).reshape(data.angles.shape))
    D = noisy.angles - g.rest()
    U = np.array([ref.load_torques(f, *arrays, list(q)) for f, q in zip(noisy.forces, noisy.angles)])
    expected = (U * D).sum(axis=0) / (D * D).sum(axis=0)
    fit = fit_stiffness(noisy, g, [1, 1, 1], predict=False)
    np.testing.assert_allclose(fit.stiffness, expected, rtol=1e-8)


@pytest.mark.parametrize("factor", [5.0, 0.2, np.array([5.0, 0.2, 3.0]), np.array([0.2, 5.0, 0.25])])
def test_noiseless_recovery(clean, factor):
    g, data = clean
    fit = fit_stiffness(data, g, NOMINAL_K * factor)
    np.testing.assert_allclose(fit.stiffness, NOMINAL_K, rtol=1e-3)
    assert fit.error_mean_deg <= 1e-6
    assert fit.prediction.failures == 0


def test_random_stiffness_recovery():
    from tendonhand.geometry import reference_geometry

    rng = np.random.default_rng(5)
    g = reference_geometry(1.5)
    for _ in range(5):
        k = rng.uniform(1, 50, 3)
        data = generate_synthetic_dataset(g, k, GRID, cycles=2)
        fit = fit_stiffness(data, g, k * rng.choice([0.2, 5.0], 3), predict=False)
        np.testing.assert_allclose(fit.stiffness, k, rtol=1e-3)


def test_noisy_recovery(nominal_finger):
    data = generate_synthetic_dataset(nominal_finger, NOMINAL_K, GRID, noise_std_deg=1.0, seed=3, cycles=16)
    fit = fit_stiffness(data, nominal_finger, NOMINAL_K * 5)
    np.testing.assert_allclose(fit.stiffness, NOMINAL_K, rtol=0.1)
    assert 0.1 < fit.error_mean_deg < 10
    assert re.fullmatch(r"\d+\.\d{2}° ± \d+\.\d{2}°", fit.prediction.summary())


def test_dimension_mismatch(nominal_finger):
    data = FlexionDataset(np.ones(4), np.zeros((4, 2)))
    with pytest.raises(InvalidArgumentError):
        residual_objective(NOMINAL_K, data, nominal_finger)
    with pytest.raises(InvalidArgumentError):
        fit_stiffness(data, nominal_finger, NOMINAL_K)


def test_dataset_validation():
    with pytest.raises(InvalidArgumentError):
        FlexionDataset(np.array([-1.0, 1.0, 2.0]), np.zeros((3, 3)))
    with pytest.raises(InvalidArgumentError):
        FlexionDataset(np.ones(2), np.zeros((2, 3)))
    with pytest.raises(InvalidArgumentError):
        FlexionDataset(np.ones(3), np.zeros((4, 3)))


def test_seed_determinism(nominal_finger):
    a = generate_synthetic_dataset(nominal_finger, NOMINAL_K, GRID, noise_std_deg=1.0, seed=42)
    b = generate_synthetic_dataset(nominal_finger, NOMINAL_K, GRID, noise_std_deg=1.0, seed=42)
    assert a.angles.tobytes() == b.angles.tobytes()
    c = generate_synthetic_dataset(nominal_finger, NOMINAL_K, GRID, noise_std_deg=1.0, seed=43)
    assert not np.array_equal(a.angles, c.angles)


def test_gradient_against_central_differences(clean):
    g, data = clean
    noisy = FlexionDataset(data.forces, data.angles + 0.01 * np.cos(np.arange(data.angles.size)).reshape(data.angles.shape))
    rng = np.random.default_rng(20)
    for _ in range(20):
        k = rng.uniform(1, 50, 3)
        grad = objective_gradient(k, noisy, g)
        fd = np.empty(3)
        for i in range(3):
            h = 1e-5 * k[i]
            e = np.zeros(3)
            e[i] = h
            fd[i] = (residual_objective(k + e, noisy, g) - residual_objective(k - e, noisy, g)) / (2 * h)
        np.testing.assert_allclose(grad, fd, rtol=1e-6)


def test_scale_covariance(nominal_finger):
    kappa, lam = 1.4, 2.5
    big = scale_geometry(nominal_finger, kappa)
    data = generate_synthetic_dataset(big, lam * kappa * NOMINAL_K, lam * GRID, cycles=2)
    fit = fit_stiffness(data, big, [1, 1, 1], predict=False)
    np.testing.assert_allclose(fit.stiffness, lam * kappa * NOMINAL_K, rtol=1e-6)


def test_prediction_errors_exact_and_perturbed(clean):
    g, data = clean
    exact = prediction_errors(NOMINAL_K, data, g)
    assert exact.mean_deg <= 1e-8
    k = NOMINAL_K.copy()
    k[1] *= 1.5
    off = prediction_errors(k, data, g)
    per_joint = off.errors_deg.mean(axis=0)
    assert off.mean_deg > 0
    assert np.argmax(per_joint) == 1


def test_min_tension_excludes_samples(clean):
    g, data = clean
    fit = fit_stiffness(data, g, [1, 1, 1], min_tension=10.0, predict=False)
    assert fit.excluded == 32
    np.testing.assert_allclose(fit.stiffness, NOMINAL_K, rtol=1e-6)


def test_format_error():
    assert format_error(1.04, 0.74) == "1.04° ± 0.74°"


def test_fit_emits_no_warning_on_good_data(clean):
    g, data = clean
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit_stiffness(data, g, [1, 1, 1], predict=False)
