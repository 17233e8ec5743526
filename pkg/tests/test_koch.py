import numpy as np
import pytest

from sarrain.koch import (FilterBankSpec, KochParams, Prediction,
                          highpass_bank, koch_backward, koch_binary,
                          koch_clipped, koch_forward, sigmoid)
from sarrain.training import mse_loss
from gridutils import make_grid

SPEC = FilterBankSpec()
ODD_SPEC = FilterBankSpec((3, 5, 9, 15))


class TestFilterBank:
    def test_kernels_are_zero_dc(self):
        for j in range(4):
            assert abs(SPEC.kernel(j).sum()) < 1e-6

    def test_exactly_four_filters(self):
        with pytest.raises(ValueError):
            FilterBankSpec((2, 4, 8))

    def test_constant_input_zero_response(self):
        bank = highpass_bank(np.full((32, 32), 7.25), SPEC)
        assert (bank == 0).all()

    def test_dc_invariance(self, rng):
        v = rng.normal(size=(32, 32))
        a = highpass_bank(v, SPEC)
        b = highpass_bank(v + 128.0, SPEC)
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_impulse_center_value(self):
        v = np.zeros((17, 17))
        v[8, 8] = 1.0
        bank = highpass_bank(v, ODD_SPEC)
        assert bank[0][8, 8] == pytest.approx(1.0 - 1.0 / 9.0, abs=1e-9)

    def test_grid_smaller_than_window_rejected(self):
        with pytest.raises(ValueError):
            highpass_bank(np.zeros((8, 8)), SPEC)


class TestSigmoid:
    def test_half_at_center(self):
        assert sigmoid(0.5) == pytest.approx(0.5)

    def test_unit_slope_at_center(self):
        eps = 1e-6
        slope = (sigmoid(0.5 + eps) - sigmoid(0.5 - eps)) / (2 * eps)
        assert slope == pytest.approx(1.0, rel=1e-6)

    def test_point_symmetry(self, rng):
        for x in rng.normal(size=10):
            assert sigmoid(x) + sigmoid(1.0 - x) == pytest.approx(1.0)


class TestKochForward:
    def test_constant_input_closed_form(self, rng):
        p = KochParams(rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
        pred = koch_forward(make_grid(np.full((32, 32), 3.0)), p)
        expected = np.sqrt((sigmoid(p.B) ** 2).mean(axis=1))
        for i in range(3):
            np.testing.assert_allclose(pred.channels[i], expected[i], rtol=1e-12)

    def test_zero_gain_center_bias_gives_half(self, rng):
        p = KochParams(np.zeros((3, 4)), np.full((3, 4), 0.5))
        pred = koch_forward(make_grid(rng.normal(size=(32, 32))), p)
        np.testing.assert_allclose(pred.channels, 0.5, rtol=1e-12)

    def test_bounded(self, rng):
        p = KochParams(rng.normal(size=(3, 4)) * 5, rng.normal(size=(3, 4)) * 5)
        pred = koch_forward(make_grid(rng.normal(size=(32, 32)) * 10), p)
        assert (pred.channels >= 0).all() and (pred.channels <= 1).all()

    def test_monotone_in_bias(self, rng):
        v = make_grid(rng.normal(size=(32, 32)))
        base = KochParams.initial()
        bumped = KochParams(base.K, base.B + 0.1)
        assert (koch_forward(v, bumped).channels
                >= koch_forward(v, base).channels).all()

    def test_dc_invariance_end_to_end(self, rng):
        v = rng.normal(size=(32, 32))
        p = KochParams.initial()
        a = koch_forward(v, p).channels
        b = koch_forward(v + 64.0, p).channels
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestKochBinary:
    def test_threshold_zero_all_ones(self, rng):
        mask = koch_binary(make_grid(rng.normal(size=(32, 32))), SPEC,
                           KochParams.initial(), 0.0)
        assert (mask.values == 1).all()

    def test_constant_input_closed_form(self):
        p = KochParams.initial(gain=1.0, bias=0.3)
        # constant input: responses are clip(B) = 0.3 per filter, RMS = 0.3
        g = make_grid(np.full((32, 32), 5.0))
        assert (koch_binary(g, SPEC, p, 0.29).values == 1).all()
        assert (koch_binary(g, SPEC, p, 0.31).values == 0).all()

    def test_clip_vs_sigmoid_small_difference(self, rng):
        # same parameters, speckle-like scenes: the two fusions agree
        # closely (sub-percent on realistic scenes, <=2% tolerance here)
        diffs = []
        p = KochParams.initial()
        for _ in range(10):
            v = rng.gamma(16.0, 1.0 / 16.0, size=(64, 64))
            clip = koch_clipped(v, p).channels
            sig = koch_forward(v, p).channels
            diffs.append(np.abs(sig - clip).mean() / clip.mean())
        assert np.mean(diffs) <= 0.02


class TestKochBackward:
    def test_zero_grad_y_gives_zero(self, rng):
        p = KochParams.initial()
        v = rng.normal(size=(32, 32))
        dK, dB = koch_backward(v, p, np.zeros((3, 32, 32)))
        assert (dK == 0).all() and (dB == 0).all()

    def test_constant_input_kills_gain_gradient(self, rng):
        p = KochParams.initial()
        v = np.full((32, 32), 2.0)
        dK, dB = koch_backward(v, p, rng.normal(size=(3, 32, 32)))
        np.testing.assert_allclose(dK, 0.0, atol=1e-15)
        assert np.abs(dB).max() > 0

    def test_matches_finite_differences(self, rng):
        spec = SPEC
        v = rng.normal(size=(24, 24))
        target = (rng.random((3, 24, 24)) > 0.7).astype(float)
        p = KochParams(rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
        _, grad_y = mse_loss(koch_forward(v, p, spec), target)
        dK, dB = koch_backward(v, p, grad_y, spec)
        flat = p.flat()
        analytic = np.concatenate([dK.ravel(), dB.ravel()])
        eps = 1e-5
        for i in range(flat.size):
            plus, minus = flat.copy(), flat.copy()
            plus[i] += eps
            minus[i] -= eps
            lp, _ = mse_loss(koch_forward(v, KochParams.from_flat(plus), spec), target)
            lm, _ = mse_loss(koch_forward(v, KochParams.from_flat(minus), spec), target)
            numeric = (lp - lm) / (2 * eps)
            denom = max(abs(numeric) + abs(analytic[i]), 1e-8)
            assert abs(analytic[i] - numeric) / denom < 1e-4


class TestSerialization:
    def test_json_round_trip(self, rng):
        p = KochParams(rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
        text = p.to_json(scales=(2, 4, 8, 16), resolution_m=200)
        back, spec, resolution = KochParams.from_json(text)
        np.testing.assert_array_equal(back.K, p.K)
        np.testing.assert_array_equal(back.B, p.B)
        assert spec.scales == (2, 4, 8, 16)
        assert resolution == 200
