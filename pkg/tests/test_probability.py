import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logistic_ensemble.model import InvalidArgumentError, all_activations, batch_activations
from logistic_ensemble.probability import (
    batch_path_probabilities,
    batch_subtree_probabilities,
    class1_probability,
    label_probability,
    leaf_term,
    mixture_oracle,
    path_probability,
    predict_proba,
    subtree_label_probability,
)

from conftest import model_with_activations, random_model


class TestLeafTerm:
    def test_values(self):
        assert leaf_term(0.8, 1) == 0.8
        assert leaf_term(0.8, 0) == pytest.approx(0.2, abs=1e-16)

    @given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
    def test_complement(self, h):
        assert leaf_term(h, 1) + leaf_term(h, 0) == pytest.approx(1.0, abs=1e-16)

    @pytest.mark.parametrize("y", [2, -1, 0.5])
    def test_bad_label(self, y):
        with pytest.raises(InvalidArgumentError):
            leaf_term(0.3, y)


class TestLabelProbability:
    def test_two_layer_worked_value(self):
        m = model_with_activations([0.5, 0.8, 0.4])
        # 0.5 * 0.8 + 0.5 * 0.4
        assert label_probability(m, [0.0], 1) == pytest.approx(0.6, abs=1e-12)

    def test_identical_children_ignore_router(self):
        for h1 in (0.1, 0.5, 0.93):
            m = model_with_activations([h1, 0.37, 0.37])
            assert label_probability(m, [0.0], 1) == pytest.approx(0.37, abs=1e-15)

    def test_single_layer_is_leaf_term(self, rng):
        m = random_model(rng, 1, 3)
        x = rng.standard_normal(3)
        h = all_activations(m, x).h[0]
        assert label_probability(m, x, 1) == h
        assert label_probability(m, x, 0) == 1 - h

    def test_three_layer_symmetric_subtrees(self):
        values = []
        for h1 in (0.05, 0.5, 0.77):
            m = model_with_activations([h1, 0.3, 0.3, 0.9, 0.2, 0.9, 0.2])
            values.append(class1_probability(m, [0.0]))
        np.testing.assert_allclose(values, values[0], rtol=0, atol=1e-15)

    def test_three_layer_all_half(self):
        m = model_with_activations([0.5] * 7)
        assert class1_probability(m, [0.0]) == pytest.approx(0.5, abs=1e-15)

    def test_three_layer_term_by_term(self, rng):
        m = random_model(rng, 3, 4)
        x = rng.standard_normal(4)
        h = dict(enumerate(all_activations(m, x).h, start=1))
        expanded = (
            h[1] * (h[2] * (h[4] - h[5]) + h[5] - (h[3] * (h[6] - h[7]) + h[7]))
            + h[3] * (h[6] - h[7])
            + h[7]
        )
        assert class1_probability(m, x) == pytest.approx(expanded, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_normalized(self, n, rng):
        for _ in range(50):
            m = random_model(rng, n, 3, scale=2.0)
            x = rng.standard_normal(3)
            assert abs(label_probability(m, x, 0) + label_probability(m, x, 1) - 1) <= 1e-12

    def test_monotone_in_leaves(self, rng):
        m = random_model(rng, 3, 2)
        x = rng.standard_normal(2)
        base = class1_probability(m, x)
        W = m.weights.copy()
        # leaf j's activation at x rises when its bias rises
        W[3:, 0] += 0.5
        assert class1_probability(m.with_weights(W), x) > base

    def test_errors(self, rng):
        m = random_model(rng, 2, 2)
        with pytest.raises(InvalidArgumentError):
            label_probability(m, np.zeros(3), 1)
        with pytest.raises(InvalidArgumentError):
            label_probability(m, np.zeros(2), 3)


class TestPathProbability:
    def test_closed_forms(self, rng):
        m = random_model(rng, 3, 2)
        c = all_activations(m, rng.standard_normal(2))
        h = dict(enumerate(c.h, start=1))
        assert path_probability(c, 1, 1) == 1.0
        assert path_probability(c, 2, 2) == h[1]
        assert path_probability(c, 2, 3) == 1 - h[1]
        assert path_probability(c, 3, 4) == pytest.approx(h[1] * h[2], abs=1e-15)
        assert path_probability(c, 3, 5) == pytest.approx(h[1] * (1 - h[2]), abs=1e-15)
        assert path_probability(c, 3, 6) == pytest.approx((1 - h[1]) * h[3], abs=1e-15)
        assert path_probability(c, 3, 7) == pytest.approx((1 - h[1]) * (1 - h[3]), abs=1e-15)

    def test_recursion(self, rng):
        m = random_model(rng, 5, 2)
        c = all_activations(m, rng.standard_normal(2))
        for j in range(2, 32):
            up = j // 2
            hu = c.node(up)
            step = hu ** ((1 + j) % 2) * (1 - hu) ** (j % 2)
            assert path_probability(c, 5, j) == pytest.approx(path_probability(c, 4, up) * step, rel=1e-14)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_leaves_sum_to_one(self, n, rng):
        m = random_model(rng, n, 3, scale=2.0)
        c = all_activations(m, rng.standard_normal(3))
        total = sum(path_probability(c, n, j) for j in range(2 ** (n - 1), 2**n))
        assert abs(total - 1) <= 1e-12

    def test_out_of_range(self, rng):
        c = all_activations(random_model(rng, 2, 1), [0.0])
        with pytest.raises(InvalidArgumentError):
            path_probability(c, 2, 4)


class TestMixtureOracle:
    def test_single_layer(self, rng):
        m = random_model(rng, 1, 2)
        x = rng.standard_normal(2)
        h = all_activations(m, x).node(1)
        assert mixture_oracle(m, x, 0) == pytest.approx(1 - h, abs=1e-16)

    def test_two_path_worked_value(self):
        m = model_with_activations([0.5, 0.8, 0.4])
        assert mixture_oracle(m, [0.0], 1) == pytest.approx(0.6, abs=1e-12)

    def test_matches_path_probability_sum(self, rng):
        m = random_model(rng, 4, 3)
        x = rng.standard_normal(3)
        c = all_activations(m, x)
        for y in (0, 1):
            direct = sum(path_probability(c, 4, j) * leaf_term(c.node(j), y) for j in range(8, 16))
            assert mixture_oracle(m, x, y) == pytest.approx(direct, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(1, 6),
        seed=st.integers(0, 2**32 - 1),
        scale=st.floats(0.01, 5.0),
        y=st.sampled_from([0, 1]),
    )
    def test_agrees_with_recursion(self, n, seed, scale, y):
        r = np.random.default_rng(seed)
        m = random_model(r, n, 4, scale)
        x = r.standard_normal(4)
        assert abs(label_probability(m, x, y) - mixture_oracle(m, x, y)) <= 1e-12


class TestSubtreeProbability:
    def test_leaf_base_case(self, rng):
        m = random_model(rng, 3, 2)
        c = all_activations(m, rng.standard_normal(2))
        for j in range(4, 8):
            assert subtree_label_probability(c, 0, 3, j) == 1 - c.node(j)

    def test_root_is_label_probability(self, rng):
        for n in range(1, 7):
            m = random_model(rng, n, 3)
            x = rng.standard_normal(3)
            c = all_activations(m, x)
            assert subtree_label_probability(c, 1, n, 1) == label_probability(m, x, 1)

    def test_worked_value(self):
        m = model_with_activations([0.5, 0.8, 0.4])
        c = all_activations(m, [0.0])
        assert subtree_label_probability(c, 1, 2, 1) == pytest.approx(0.5 * (0.8 - 0.4) + 0.4, abs=1e-12)


class TestVectorized:
    @pytest.mark.parametrize("n", [1, 2, 4, 6])
    def test_matches_per_sample(self, n, rng):
        m = random_model(rng, n, 3)
        X = rng.standard_normal((20, 3))
        y = rng.integers(0, 2, 20)
        H = batch_activations(m, X)
        S = batch_subtree_probabilities(H, y)
        A = batch_path_probabilities(H)
        for k in range(20):
            c = all_activations(m, X[k])
            assert S[k, 0] == pytest.approx(label_probability(m, X[k], int(y[k])), abs=1e-14)
            for j in range(1, m.size + 1):
                assert A[k, j - 1] == pytest.approx(path_probability(c, n, j), rel=1e-13)

    def test_predict_proba(self, rng):
        m = random_model(rng, 3, 2)
        X = rng.standard_normal((5, 2))
        np.testing.assert_allclose(predict_proba(m, X), [class1_probability(m, x) for x in X], atol=1e-15)
