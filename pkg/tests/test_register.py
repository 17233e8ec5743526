import numpy as np
import pytest

from sarrain.register import (NoSignalError, RegistrationOffset, _translate,
                              apply_offset, negate, register)
from gridutils import make_grid


def shifted_pair(rng, shape=(96, 96), d_row=5, d_col=-3, noise=0.0):
    feat = rng.normal(size=shape)
    radar = _translate(feat, d_row, d_col, 0.0)
    if noise:
        radar = radar + noise * feat.std() * rng.normal(size=shape)
    return make_grid(feat), make_grid(radar)


class TestRegister:
    def test_recovers_known_shift(self, rng):
        feat, radar = shifted_pair(rng, d_row=5, d_col=-3)
        off = register(feat, radar, search_radius_px=8)
        assert (off.d_row, off.d_col) == (5, -3)
        assert off.score == pytest.approx(1.0, abs=1e-9)

    def test_identical_inputs_zero_offset(self, rng):
        feat, _ = shifted_pair(rng)
        off = register(feat, feat, search_radius_px=8)
        assert (off.d_row, off.d_col) == (0, 0)

    def test_noisy_recovery_within_one_pixel(self, rng):
        hits = 0
        for _ in range(20):
            feat, radar = shifted_pair(rng, d_row=4, d_col=6, noise=0.1)
            off = register(feat, radar, search_radius_px=10)
            if abs(off.d_row - 4) <= 1 and abs(off.d_col - 6) <= 1:
                hits += 1
        assert hits >= 19

    def test_equivariance(self, rng):
        feat, radar = shifted_pair(rng, d_row=2, d_col=1)
        extra = make_grid(_translate(radar.values, 3, -2, 0.0))
        off = register(feat, extra, search_radius_px=10)
        assert (off.d_row, off.d_col) == (5, -1)

    def test_flat_input_rejected(self, rng):
        feat, _ = shifted_pair(rng)
        flat = make_grid(np.zeros((96, 96)))
        with pytest.raises(NoSignalError):
            register(flat, feat, search_radius_px=8)
        with pytest.raises(NoSignalError):
            register(feat, flat, search_radius_px=8)

    def test_geometry_mismatch(self, rng):
        with pytest.raises(ValueError):
            register(make_grid(np.zeros((8, 8))), make_grid(np.zeros((9, 8))), 2)


class TestApplyOffset:
    def test_zero_offset_identity(self, rng):
        g = make_grid(rng.normal(size=(16, 16)))
        out = apply_offset(g, RegistrationOffset(0, 0, 1.0))
        np.testing.assert_array_equal(out.values, g.values)

    def test_round_trip_on_overlap(self, rng):
        g = make_grid(rng.normal(size=(16, 16)))
        off = RegistrationOffset(3, -2, 1.0)
        back = apply_offset(apply_offset(g, off), negate(off))
        overlap = back.values != np.float32(g.nodata)
        np.testing.assert_array_equal(back.values[overlap], g.values[overlap])
        assert overlap.sum() == (16 - 3) * (16 - 2)

    def test_register_then_apply_aligns(self, rng):
        feat, radar = shifted_pair(rng, d_row=4, d_col=-6)
        off = register(feat, radar, search_radius_px=8)
        aligned = apply_offset(radar, off)
        overlap = aligned.values != np.float32(radar.nodata)
        np.testing.assert_allclose(aligned.values[overlap],
                                   feat.values.astype(np.float32)[overlap])

    def test_exposed_cells_are_nodata(self, rng):
        g = make_grid(rng.normal(size=(8, 8)))
        out = apply_offset(g, RegistrationOffset(2, 0, 1.0))
        assert (out.values[-2:, :] == np.float32(g.nodata)).all()
