import json

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logistic_ensemble.model import (
    PROB_EPS,
    EnsembleModel,
    InvalidArgumentError,
    all_activations,
    batch_activations,
    children,
    is_leaf,
    n_nodes,
    node_activation,
    node_depth,
    parent,
    sigmoid,
)

from conftest import random_model


def mp_sigmoid(z):
    mpmath.mp.dps = 60
    return 1 / (1 + mpmath.exp(-mpmath.mpf(z)))


class TestSigmoid:
    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_clamped_at_large_input(self):
        # exact value sits above 1 - 1e-12, so the clamp must engage
        assert 1 - mp_sigmoid(500) < mpmath.mpf("1e-12")
        assert sigmoid(500.0) == 1.0 - 1e-12
        assert sigmoid(-500.0) == 1e-12

    @pytest.mark.parametrize("z", [-25.0, -7.5, -1.0, 0.3, 2.0, 13.0, 27.0])
    def test_matches_extended_precision(self, z):
        assert sigmoid(z) == pytest.approx(float(mp_sigmoid(z)), rel=1e-15, abs=0)

    @given(st.floats(min_value=-30, max_value=30))
    def test_symmetry(self, z):
        assert abs(sigmoid(z) + sigmoid(-z) - 1.0) <= 1e-15

    @given(st.floats(min_value=-1e300, max_value=1e300))
    def test_strictly_inside_unit_interval(self, z):
        s = sigmoid(z)
        assert PROB_EPS <= s <= 1 - PROB_EPS

    def test_no_overflow_warning(self):
        with np.errstate(over="raise"):
            out = sigmoid(np.array([-800.0, 800.0]))
        np.testing.assert_array_equal(out, [PROB_EPS, 1 - PROB_EPS])

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(InvalidArgumentError):
            sigmoid(bad)


class TestIndexing:
    @pytest.mark.parametrize("n", range(1, 8))
    def test_leaf_set(self, n):
        leaves = [j for j in range(1, n_nodes(n) + 1) if is_leaf(j, n)]
        assert leaves == list(range(2 ** (n - 1), 2**n))

    def test_parent_child_roundtrip(self):
        for j in range(1, 200):
            left, right = children(j)
            assert parent(left) == j and parent(right) == j

    def test_depth(self):
        assert [node_depth(j) for j in (1, 2, 3, 4, 7, 8, 15)] == [1, 2, 2, 3, 3, 4, 4]


class TestEnsembleModel:
    def test_shape_validation(self):
        with pytest.raises(InvalidArgumentError):
            EnsembleModel(2, 3, np.zeros((2, 4)))
        with pytest.raises(InvalidArgumentError):
            EnsembleModel(0, 3, np.zeros((0, 4)))

    def test_rejects_non_finite_weights(self):
        W = np.zeros((3, 2))
        W[1, 1] = np.nan
        with pytest.raises(InvalidArgumentError):
            EnsembleModel(2, 1, W)

    def test_weights_are_read_only(self):
        m = EnsembleModel.zeros(2, 2)
        with pytest.raises(ValueError):
            m.weights[0, 0] = 1.0

    def test_truncate(self, rng):
        m = random_model(rng, 4, 3)
        t = m.truncate(2)
        assert t.n_layers == 2
        np.testing.assert_array_equal(t.weights, m.weights[:3])

    def test_json_roundtrip_is_bit_exact(self, rng, tmp_path):
        m = random_model(rng, 3, 5)
        m = m.with_weights(m.weights * np.array([1e-300, 1.0, 1e300, np.pi, -0.1, 1 / 3]))
        path = tmp_path / "m.json"
        m.save(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"n_layers", "feature_dim", "weights"}
        back = EnsembleModel.load(path)
        assert back.weights.tobytes() == m.weights.tobytes()
        assert (back.n_layers, back.feature_dim) == (3, 5)

    def test_missing_key(self):
        with pytest.raises(InvalidArgumentError):
            EnsembleModel.from_dict({"n_layers": 1, "weights": [[0.0, 0.0]]})


class TestActivations:
    def test_zero_weights_give_half(self, rng):
        m = EnsembleModel.zeros(3, 4)
        x = rng.standard_normal(4)
        assert all(node_activation(m, j, x) == 0.5 for j in range(1, 8))

    def test_bias_only(self):
        m = EnsembleModel(1, 1, np.array([[0.0, 1.0]]))
        assert node_activation(m, 1, [0.0]) == 0.5

    def test_worked_value(self):
        m = EnsembleModel(1, 1, np.array([[1.0, 2.0]]))
        # z = 1 + 2 * 0.5 = 2
        assert node_activation(m, 1, [0.5]) == pytest.approx(float(mp_sigmoid(2)), rel=1e-15)
        assert node_activation(m, 1, [0.5]) == pytest.approx(0.880797, abs=5e-7)

    @pytest.mark.parametrize("n", [1, 3])
    def test_cache_length(self, n, rng):
        cache = all_activations(random_model(rng, n, 2), rng.standard_normal(2))
        assert len(cache.h) == len(cache.z) == 2**n - 1
        assert cache.n_layers == n

    def test_cache_matches_per_node(self, rng):
        m = random_model(rng, 4, 6)
        x = rng.standard_normal(6)
        cache = all_activations(m, x)
        per_node = [node_activation(m, j, x) for j in range(1, m.size + 1)]
        np.testing.assert_allclose(cache.h, per_node, rtol=1e-14)
        np.testing.assert_allclose(sigmoid(cache.z), cache.h, rtol=0)

    def test_batch_matches_single(self, rng):
        m = random_model(rng, 3, 4)
        X = rng.standard_normal((9, 4))
        H = batch_activations(m, X)
        for k in range(9):
            np.testing.assert_allclose(H[k], all_activations(m, X[k]).h, rtol=1e-14)

    def test_errors(self, rng):
        m = random_model(rng, 2, 3)
        with pytest.raises(InvalidArgumentError):
            node_activation(m, 4, np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            node_activation(m, 0, np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            all_activations(m, np.zeros(2))
