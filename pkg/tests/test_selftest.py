import numpy as np
import pytest

from tapauc.services import selftest


@pytest.fixture(scope="module")
def results():
    return selftest.run_selftest(seed=0)


def test_every_check_passes(results):
    failed = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert failed == []


def test_all_suites_are_reported(results):
    names = {r.name for r in results}
    assert {"gradient/bce", "gradient/auc_hinge", "gradient/tapauc"} <= names
    assert {"oracle/approx_auc_loss", "oracle/tapauc_loss", "oracle/roc_auc"} <= names
    assert {"reduction/alpha_one", "reduction/warmup", "reduction/floor_fallback"} <= names
    assert {"zfn/bce", "zfn/auc_hinge", "zfn/tapauc"} <= names


@pytest.mark.parametrize("method", ["bce", "auc_hinge", "tapauc"])
def test_gradient_problem_stays_clear_of_kinks(method):
    model, features, labels = selftest.gradcheck_problem(method, seed=5)
    relu, boundary = selftest.kink_distance(model, features, labels, method, 0.3, 0.25)
    assert relu >= 0.05
    assert boundary >= 0.005
    assert features.shape == (10, 6)
    assert model.config.hidden_dim == 3


@pytest.mark.parametrize("method", ["bce", "auc_hinge", "tapauc"])
def test_network_gradients_per_parameter(method):
    model, features, labels = selftest.gradcheck_problem(method, seed=11)
    errors = selftest.network_gradient_errors(model, features, labels, selftest.loss_function(method))
    assert set(errors) == {"layer1_weights", "layer1_bias", "bn_scale", "bn_shift", "layer2_weights", "layer2_bias"}
    assert max(errors.values()) <= selftest.GRADIENT_TOLERANCE


def test_gradient_errors_are_judged_entry_by_entry(monkeypatch):
    """
    A single bad entry fails the check even when the rest of its array is exact.
    """
    model, features, labels = selftest.gradcheck_problem("bce", seed=0)
    exact = selftest.network_gradient_errors(model, features, labels, selftest.loss_function("bce"))
    assert max(exact.values()) <= selftest.GRADIENT_TOLERANCE
    assert selftest.GRADIENT_FLOOR == 1e-8

    real_backward = selftest.backward

    def one_entry_off(*args, **kwargs):
        grads = real_backward(*args, **kwargs)
        grads["layer1_weights"] = grads["layer1_weights"].copy()
        grads["layer1_weights"].flat[0] *= 1.01
        return grads

    monkeypatch.setattr(selftest, "backward", one_entry_off)
    errors = selftest.network_gradient_errors(model, features, labels, selftest.loss_function("bce"))
    assert errors["layer1_weights"] == pytest.approx(0.01, rel=0.05)
    assert errors["layer2_weights"] <= selftest.GRADIENT_TOLERANCE


def test_gradient_problem_avoids_vanishing_entries():
    model, features, labels = selftest.gradcheck_problem("tapauc", seed=3)
    assert selftest.smallest_gradient(model, features, labels, selftest.loss_function("tapauc")) >= selftest.MIN_GRADIENT


def test_brute_force_helpers_by_hand():
    value, grad_pos, grad_neg = selftest.brute_force_squared_hinge(np.array([0.6]), np.array([0.5, 0.1]), 0.3)
    # hinges 0.2 and 0.0
    assert value == pytest.approx(0.04 / 2)
    assert grad_pos.tolist() == pytest.approx([-0.2])
    assert grad_neg.tolist() == pytest.approx([0.2, 0.0])
    assert selftest.brute_force_hard_negatives(np.array([0.3, 0.8, 0.8]), 0.7) == [1, 2]
    assert selftest.brute_force_auc(np.array([0.5, 0.9]), np.array([0.5, 0.1])) == 0.875
