import math

import numpy as np
import pytest

from brushwork.errors import InvalidArchitectureError, ShapeMismatchError
from brushwork.nnet import (
    Architecture,
    backward,
    bce_loss,
    bilinear_resize,
    forward,
    forward_batch,
    init_model,
    normalize_batch,
    normalize_tile,
)
from brushwork.nnet.layers import (
    conv3x3_forward,
    dense_forward,
    maxpool2x2_forward,
    relu_forward,
    sigmoid,
)


class TestArchitecture:
    def test_default_flat_features(self):
        assert Architecture().flat_features == 2048

    def test_resolution_must_divide(self):
        with pytest.raises(InvalidArchitectureError):
            init_model(Architecture(input_resolution=60), seed=0)

    def test_param_order_stable(self):
        names = [n for n, _ in Architecture().param_shapes()]
        assert names == ["conv1_w", "conv1_b", "conv2_w", "conv2_b",
                         "conv3_w", "conv3_b", "fc1_w", "fc1_b",
                         "fc2_w", "fc2_b"]


class TestInitModel:
    def test_same_seed_identical(self):
        a = init_model(Architecture(), seed=7)
        b = init_model(Architecture(), seed=7)
        for k in a.params:
            np.testing.assert_array_equal(a.params[k], b.params[k])

    def test_different_seeds_differ(self):
        a = init_model(Architecture(), seed=1)
        b = init_model(Architecture(), seed=2)
        assert any(not np.array_equal(a.params[k], b.params[k])
                   for k in a.params)

    def test_biases_and_final_layer_zero(self):
        m = init_model(Architecture(), seed=3)
        for name in ("conv1_b", "conv2_b", "conv3_b", "fc1_b", "fc2_b", "fc2_w"):
            assert (m.params[name] == 0).all()

    def test_hidden_weights_within_bound(self):
        m = init_model(Architecture(), seed=4)
        for name, fan_in in (("conv1_w", 27), ("conv2_w", 72),
                             ("conv3_w", 144), ("fc1_w", 2048)):
            bound = math.sqrt(6.0 / fan_in)
            assert np.abs(m.params[name]).max() <= bound
            assert np.abs(m.params[name]).max() > 0.5 * bound  # actually random


class TestForward:
    def test_fresh_model_outputs_half(self, rng):
        m = init_model(Architecture(), seed=5)
        x = rng.uniform(-0.5, 0.5, size=(3, 64, 64))
        assert forward(m, x) == 0.5

    def test_open_interval(self, rng):
        m = init_model(Architecture(), seed=6)
        m.params["fc2_w"] = rng.uniform(-2, 2, size=(1, 64))
        for scale in (1.0, 1e4, 1e8):
            p = forward(m, rng.uniform(-0.5, 0.5, size=(3, 64, 64)) * scale)
            assert 0.0 < p < 1.0

    def test_deterministic(self, rng):
        m = init_model(Architecture(), seed=8)
        m.params["fc2_w"] = rng.uniform(-1, 1, size=(1, 64))
        x = rng.uniform(-0.5, 0.5, size=(4, 3, 64, 64))
        p1 = forward_batch(m, x)
        p2 = forward_batch(m, x)
        np.testing.assert_array_equal(p1, p2)

    def test_shape_mismatch(self, rng):
        m = init_model(Architecture(), seed=9)
        with pytest.raises(ShapeMismatchError):
            forward(m, np.zeros((3, 32, 32)))
        with pytest.raises(ShapeMismatchError):
            forward_batch(m, np.zeros((2, 3, 64, 60)))

    def test_toy_network_hand_computed(self):
        """One conv filter, ReLU, one 2x2 pool, dense to sigmoid on a 4x4
        input, with weights simple enough to evaluate with pencil and paper.

        Kernel: center 1, right neighbor -1 (zero elsewhere), bias 0.25.
        Input column j has value j, every row.  Pre-activations per row:
        j - (j+1) + 0.25 = -0.75 for j < 3, and 3 - 0 + 0.25 = 3.25 at the
        padded right edge.  ReLU leaves [0, 0, 0, 3.25]; each 2x2 pool
        window yields [0, 3.25] per row-pair.  Dense weight 0.5 on all four
        pooled units, bias -1:  z = 0.5*(0 + 3.25 + 0 + 3.25) - 1 = 2.25.
        """
        x = np.tile(np.arange(4.0), (4, 1))[np.newaxis, np.newaxis]  # (C,B,H,W)
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 1] = 1.0
        w[0, 0, 1, 2] = -1.0
        b = np.array([0.25])
        h, _ = conv3x3_forward(x, w, b)
        assert h[0, 0, 1, 3] == 3.25
        assert h[0, 0, 1, 1] == -0.75
        h, _ = relu_forward(h)
        h, _ = maxpool2x2_forward(h)
        flat = h.transpose(1, 0, 2, 3).reshape(1, -1)
        z, _ = dense_forward(flat, np.full((1, 4), 0.5), np.array([-1.0]))
        p = sigmoid(z[:, 0])
        expected = 1.0 / (1.0 + math.exp(-2.25))
        assert abs(p[0] - expected) < 1e-12


class TestBceLoss:
    def test_half_probability(self):
        assert abs(bce_loss(0.5, 1) - math.log(2)) < 1e-12

    def test_perfect_confidence_goes_to_zero(self):
        assert bce_loss(1.0 - 1e-13, 1) < 1e-11

    def test_confidently_wrong(self):
        assert abs(bce_loss(0.9, 0) - (-math.log(0.1))) < 1e-12

    def test_clamp_absorbs_extremes(self):
        assert np.isfinite(bce_loss(0.0, 1))
        assert np.isfinite(bce_loss(1.0, 0))


class TestBackwardContracts:
    def test_gradient_shapes_match_params(self, rng):
        m = init_model(Architecture(), seed=10)
        x = rng.uniform(-0.5, 0.5, size=(2, 3, 64, 64))
        grads, loss = backward(m, x, np.array([1.0, 0.0]))
        assert set(grads) == set(m.params)
        for k in grads:
            assert grads[k].shape == m.params[k].shape
        assert loss > 0

    def test_saturated_model_has_vanishing_gradients(self, rng):
        """Labels all 1 and the model already outputs (numerically) 1:
        the loss sits at its minimum and every gradient is ~0."""
        m = init_model(Architecture(), seed=11)
        m.params["fc2_b"] = np.array([60.0])  # sigmoid(60) == 1 - O(1e-27)
        x = rng.uniform(-0.5, 0.5, size=(2, 3, 64, 64))
        grads, _ = backward(m, x, np.array([1.0, 1.0]))
        for k, g in grads.items():
            assert np.abs(g).max() < 1e-12, k

    def test_label_count_mismatch(self, rng):
        m = init_model(Architecture(), seed=12)
        with pytest.raises(ShapeMismatchError):
            backward(m, rng.uniform(-0.5, 0.5, (2, 3, 64, 64)), np.array([1.0]))


class TestNormalize:
    def test_full_white_maps_to_half(self):
        tile = np.full((64, 64, 3), 255, dtype=np.uint8)
        out = normalize_tile(tile, 64)
        assert out.shape == (3, 64, 64)
        np.testing.assert_array_equal(out, np.full((3, 64, 64), 0.5))

    def test_black_maps_to_minus_half(self):
        out = normalize_tile(np.zeros((10, 10, 3), dtype=np.uint8), 64)
        np.testing.assert_allclose(out, -0.5, atol=1e-12)

    def test_range(self, rng):
        tile = rng.integers(0, 256, size=(23, 23, 3), dtype=np.uint8)
        out = normalize_tile(tile, 64)
        assert out.min() >= -0.5 and out.max() <= 0.5

    def test_bilinear_probes_hand_computed(self):
        """2R x 2R horizontal ramp, resampled to R=4: output x-coordinate i
        maps to source x = i*(7/3); with the ramp value equal to the source
        x index, the resample reproduces i*(7/3) exactly at every probe."""
        s, r = 8, 4
        ramp = np.tile(np.arange(s, dtype=np.float64), (s, 1))
        out = bilinear_resize(ramp[np.newaxis, :, :, np.newaxis], r)[0, :, :, 0]
        for i, expected in [(0, 0.0), (1, 7 / 3), (2, 14 / 3), (3, 7.0)]:
            assert abs(out[0, i] - expected) < 1e-12

    def test_corners_exact(self, rng):
        tile = rng.integers(0, 256, size=(1, 9, 9, 1)).astype(np.float64)
        out = bilinear_resize(tile, 5)
        for oi, si in ((0, 0), (-1, -1)):
            for oj, sj in ((0, 0), (-1, -1)):
                assert out[0, oi, oj, 0] == tile[0, si, sj, 0]

    def test_one_pixel_tile_broadcasts(self):
        tile = np.full((1, 1, 3), 100, dtype=np.uint8)
        out = normalize_tile(tile, 64)
        np.testing.assert_allclose(out, 100 / 255 - 0.5, atol=1e-15)

    def test_identity_when_sizes_match(self, rng):
        tile = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        out = normalize_tile(tile, 64)
        np.testing.assert_array_equal(
            out, (tile.astype(np.float64) / 255.0 - 0.5).transpose(2, 0, 1))

    def test_batch_matches_single(self, rng):
        tiles = rng.integers(0, 256, size=(5, 16, 16, 3), dtype=np.uint8)
        batch = normalize_batch(tiles, 64)
        for i in range(5):
            np.testing.assert_array_equal(batch[i], normalize_tile(tiles[i], 64))
