import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from sarrain.zr import (ClassMasks, THRESHOLDS_DBZ, ZrParams, class_masks,
                        dbz_from_rainrate, rainrate_from_dbz)
from gridutils import make_grid


class TestDbzFromRainrate:
    @pytest.mark.parametrize("rate,expected", [(1.0, 24.7), (3.0, 31.5), (10.0, 38.8)])
    def test_paper_thresholds(self, rate, expected):
        assert dbz_from_rainrate(rate) == pytest.approx(expected, abs=0.1)

    def test_zero_rate_is_rain_free(self):
        assert dbz_from_rainrate(0.0) == -np.inf

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            dbz_from_rainrate(-0.1)

    def test_strictly_increasing(self):
        rates = np.logspace(-2, 2, 50)
        assert np.all(np.diff(dbz_from_rainrate(rates)) > 0)


class TestRainrateFromDbz:
    def test_inverse_identity(self):
        for r in np.logspace(-1, 2, 20):
            assert rainrate_from_dbz(dbz_from_rainrate(r)) == pytest.approx(r, rel=1e-9)

    def test_at_lowest_threshold(self):
        assert rainrate_from_dbz(24.7) == pytest.approx(0.989, abs=1e-3)

    def test_at_zero_dbz(self):
        assert rainrate_from_dbz(0.0) == pytest.approx(0.0170, abs=5e-4)

    def test_strictly_increasing(self):
        z = np.linspace(-10, 60, 50)
        assert np.all(np.diff(rainrate_from_dbz(z)) > 0)


class TestZrParams:
    def test_defaults_reproduce_rounded_bounds(self):
        # a=300, b=1.4 put all three printed bounds within 0.05 dB
        for rate, bound in zip((1.0, 3.0, 10.0), THRESHOLDS_DBZ):
            assert abs(dbz_from_rainrate(rate) - bound) < 0.08

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            ZrParams(a=-1.0)


class TestClassMasks:
    def test_uniform_40_dbz_all_ones(self):
        masks = class_masks(make_grid(np.full((4, 4), 40.0)))
        for m in (masks.m1, masks.m3, masks.m10):
            assert (m.values == 1).all()

    def test_uniform_28_dbz_only_m1(self):
        masks = class_masks(make_grid(np.full((4, 4), 28.0)))
        assert (masks.m1.values == 1).all()
        assert (masks.m3.values == 0).all()
        assert (masks.m10.values == 0).all()

    def test_nodata_zero_in_masks_and_flagged(self):
        v = np.full((2, 2), 40.0, dtype=np.float32)
        v[0, 0] = -9999.0
        masks = class_masks(make_grid(v))
        assert masks.m1.values[0, 0] == 0
        assert masks.valid.values[0, 0] == 0
        assert masks.valid.values[1, 1] == 1

    def test_non_increasing_thresholds_rejected(self):
        with pytest.raises(ValueError):
            class_masks(make_grid(np.zeros((2, 2))), (30.0, 20.0, 40.0))

    @given(hnp.arrays(np.float32, (8, 8), elements=st.floats(-20, 60, width=32)))
    @settings(max_examples=50, deadline=None)
    def test_nesting_property(self, values):
        masks = class_masks(make_grid(values))
        assert np.all(masks.m10.values <= masks.m3.values)
        assert np.all(masks.m3.values <= masks.m1.values)

    def test_labels_reproduce_four_intervals(self):
        z = np.array([[10.0, 25.0], [32.0, 40.0]], dtype=np.float32)
        masks = class_masks(make_grid(z))
        np.testing.assert_array_equal(masks.labels(), [[0, 1], [2, 3]])
