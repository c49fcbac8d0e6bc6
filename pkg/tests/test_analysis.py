import numpy as np
import pytest

from aecomm.analysis import (
    achievable_rate,
    build_F,
    mse_decomposition,
    relu_activation_report,
)
from aecomm.channel import spawn_rng
from aecomm.errors import DomainError, SingularityError
from aecomm.nn import softmax


def test_linearization_matrix_is_diagonal():
    u = np.array([0.5, 1.0, 2.0])
    lin = build_F(u)
    F = lin.F
    assert F.shape == (3, 3)
    np.testing.assert_array_equal(F, np.diag(np.diag(F)))
    np.testing.assert_array_equal(lin.F_plus, F)


def test_linearization_approximates_softmax():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        u = rng.uniform(0.1, 5.0, size=8)
        p = build_F(u).predict(u)
        worst = max(worst, float(np.max(np.abs(softmax(u) - p))))
    assert worst <= 1e-6


def test_linearization_error_shrinks_with_order():
    rng = np.random.default_rng(1)
    u = rng.uniform(0.5, 3.0, size=6)
    target = softmax(u)
    errs = [
        float(np.max(np.abs(build_F(u, taylor_order=N).predict(u) - target)))
        for N in (1, 2, 4, 8, 16)
    ]
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < errs[0] / 1e6


def test_linearization_uniform_reference_predicts_uniform():
    u = np.full(5, 1.3)
    np.testing.assert_allclose(build_F(u).predict(u), 0.2, atol=1e-9)


def test_linearization_rejects_near_zero_components():
    with pytest.raises(SingularityError) as err:
        build_F(np.array([1.0, 1e-5, 2.0]))
    assert err.value.index == 1
    with pytest.raises(DomainError):
        build_F(np.ones((2, 2)))
    with pytest.raises(DomainError):
        build_F(np.ones(3), taylor_order=0)


def test_negative_reference_blocks_all_active_form():
    lin = build_F(np.array([1.0, -2.0, 1.5]))
    assert not lin.all_active
    with pytest.raises(DomainError):
        lin.F_plus


def test_achievable_rate_gain_near_published_value():
    high = achievable_rate(16, 6, 7, 20.0)
    low = achievable_rate(16, 1, 7, 20.0)
    assert float(high - low) == pytest.approx(1.577, abs=0.01)


def test_achievable_rate_monotone_in_ebn0_and_bits():
    curve = achievable_rate(16, 2, 7, np.arange(0.0, 20.1, 2.0))
    assert np.all(np.diff(curve) > 0)
    assert float(achievable_rate(16, 2, 7, 10.0)) > float(achievable_rate(16, 1, 7, 10.0))
    assert float(achievable_rate(64, 1, 7, -100.0)) == pytest.approx(0.0, abs=1e-6)


def test_achievable_rate_rejects_bad_order():
    with pytest.raises(DomainError):
        achievable_rate(16, 0, 7, 10.0)
    with pytest.raises(DomainError):
        achievable_rate(16, 9, 7, 10.0)


def test_activation_report_noiseless_is_exact(model_zoo):
    model, _ = model_zoo(4, 1, 10.0, seed=2)
    frac = relu_activation_report(model, None, 0.0, 0, spawn_rng(0, 0))
    u = model.receiver_preactivation(model.transmit(model.codebook.entries))
    assert frac == pytest.approx(float(np.mean(np.all(u > 0, axis=1))))
    assert 0.0 <= frac <= 1.0


def test_activation_report_is_reproducible(model_zoo):
    model, _ = model_zoo(4, 1, 10.0, seed=2)
    a = relu_activation_report(model, None, 0.05, 20_000, spawn_rng(5, 0))
    b = relu_activation_report(model, None, 0.05, 20_000, spawn_rng(5, 0))
    assert a == b


def test_decomposition_noise_term_is_exactly_linear_in_sigma2(model_zoo):
    model, _ = model_zoo(4, 1, 10.0, seed=2)
    lo = mse_decomposition(model, None, 0.01, 1000, spawn_rng(6, 0))
    hi = mse_decomposition(model, None, 0.02, 1000, spawn_rng(6, 1))
    assert hi["noise_term"] == pytest.approx(2.0 * lo["noise_term"], rel=1e-12)
    assert hi["signal_term"] == pytest.approx(lo["signal_term"], rel=1e-12)


def test_decomposition_zero_noise_collapses_to_signal_term(model_zoo):
    model, _ = model_zoo(4, 1, 10.0, seed=2)
    out = mse_decomposition(model, None, 0.0, 5000, spawn_rng(7, 0))
    assert out["noise_term"] == 0.0
    assert out["predicted_total"] == out["signal_term"]
    # noiseless simulation over included entries is deterministic, so the
    # simulated value must equal the exact restricted MSE of the softmax path
    assert out["active_fraction"] == pytest.approx(1.0)


def test_decomposition_agrees_with_simulation(model_zoo):
    model, _ = model_zoo(4, 1, 10.0, seed=2)
    out = mse_decomposition(model, None, 0.05, 100_000, spawn_rng(8, 0))
    rel = abs(out["predicted_total"] - out["simulated_mse"]) / out["simulated_mse"]
    assert rel < 0.2
    assert 0.0 < out["active_fraction"] <= 1.0


def test_decomposition_rejects_model_with_no_active_entry():
    # an untrained receiver almost never keeps every relu unit active
    from aecomm.codebooks import build_onehot
    from aecomm.model import build_model

    model = build_model(build_onehot(4), 7, seed=0)
    u = model.receiver_preactivation(model.transmit(model.codebook.entries))
    assert not np.any(np.all(u > 0, axis=1))  # precondition for this seed
    with pytest.raises(DomainError):
        mse_decomposition(model, None, 0.01, 100, spawn_rng(9, 0))
