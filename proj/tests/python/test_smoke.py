import json
import math

import numpy as np
import pytest

import clrlab


def circle(n):
    a = 2 * np.pi * np.arange(n) / n
    return np.vstack([np.cos(a), np.sin(a)])


def test_loss_two_antipodal_points():
    z = np.array([[1.0, -1.0], [0.0, 0.0]])
    assert clrlab.generalized_loss(z, tau=1.0) == pytest.approx(math.log1p((1 + math.exp(-2)) / 2), rel=1e-14)


def test_loss_matches_numpy():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(3, 7))
    tau = 0.3
    d2 = ((z[:, :, None] - z[:, None, :]) ** 2).sum(axis=0)
    expected = np.log1p(np.exp(-d2 / (2 * tau)).mean(axis=1)).mean()
    assert clrlab.generalized_loss(z, tau=tau) == pytest.approx(expected, rel=1e-13)


def test_roots_of_unity_are_stationary():
    for n in range(2, 10):
        r = clrlab.stationarity_check(circle(n), tau=0.1)
        assert r["stationary"]
        assert r["max_tangential_norm"] <= 1e-10


def test_gradient_shape_and_projection():
    z = circle(5)
    g = clrlab.invariant_gradient(z, tau=0.2)
    assert g["euclidean"].shape == (2, 5)
    assert np.abs((g["tangential"] * z).sum(axis=0)).max() <= 1e-12


def test_dataset_generation():
    d = clrlab.generate_dataset(3, 2, [50, 50], [1.0, 1.0], noise_bound=0.05, seed=3)
    assert d.points.shape == (3, 100)
    assert d.max_noise_norm() < 0.05
    assert abs(d.centers[:, 0] @ d.centers[:, 1]) <= 1e-12
    with pytest.raises(ValueError):
        clrlab.generate_dataset(2, 2, [1, 1, 1, 1], [1, 1, 1, 1])


def test_forward_and_kernel():
    B = clrlab.init_gaussian_weights(3, 2, 8, seed=1)
    assert B.shape == (16, 3)
    X = np.random.default_rng(1).normal(size=(3, 4))
    F = clrlab.one_hidden_forward(B, 8, 2, "relu", X)
    hidden = np.maximum(B @ X, 0.0)
    expected = np.vstack([hidden[:8].sum(axis=0), hidden[8:].sum(axis=0)]) / math.sqrt(8)
    np.testing.assert_allclose(F, expected, rtol=1e-13)
    K = clrlab.kernel(B, 8, 2, "relu", X)
    assert K.shape == (8, 8)
    np.testing.assert_array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-10
    Kinf = clrlab.kernel_infinite(np.eye(2), 1)
    np.testing.assert_allclose(Kinf, np.diag([0.5, 0.5]), atol=1e-15)


def test_kernel_step_reduces_to_vanilla():
    z = circle(4) + 0.1 * np.random.default_rng(2).normal(size=(2, 4))
    K = 4 * np.eye(8)
    a = clrlab.step_kernel(z, K, tau=0.5, step=0.2)
    b = clrlab.step_vanilla(z, tau=0.5, step=0.2, sphere=False)
    np.testing.assert_allclose(a, b, rtol=1e-14)
    with pytest.raises(ValueError):
        clrlab.step_kernel(z, np.eye(6), tau=0.5)


def test_diagnostics():
    assert clrlab.uniformity_score(circle(64)) < 0.05
    blobs = np.hstack([np.tile([[1.0], [0.0]], 5), np.tile([[-1.0], [0.0]], 5)])
    assert clrlab.cluster_coherence(blobs, [0] * 5 + [1] * 5) == pytest.approx(1.0)


def test_run_experiment_rejects_unknown_keys(tmp_path):
    cfg = {"schema_version": 1, "experiment": "sweep-clusters", "sweep": {"kmax": 4}}
    with pytest.raises(ValueError, match="kmax"):
        clrlab.run_experiment(json.dumps(cfg))


def test_run_experiment(tmp_path):
    cfg = {
        "schema_version": 1,
        "experiment": "sweep-clusters",
        "output_dir": str(tmp_path),
        "format": "svg",
        "sweep": {"k_max": 16, "taus": [0.1], "plateau_fraction": 0.05},
    }
    rep = clrlab.run_experiment(json.dumps(cfg))
    assert rep["passed"]
    assert (tmp_path / "manifest.json").exists()
    svg = (tmp_path / "sweep-clusters.svg").read_text()
    assert svg.count('class="marker"') == 16
