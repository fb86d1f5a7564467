import numpy as np
import pytest

from tiltbeam.channel import (ChannelSet, FadingParams, build_channel_set,
                              calibrated_reference_loss_db, draw_channel_vector,
                              large_scale_gain)
from tiltbeam.scenario import NetworkConfig, build_layout, drop_users


def flat_params(**kwargs):
    return FadingParams(**{"shadow_sigma_db": 0.0, "reference_loss_db": 0.0, **kwargs})


class TestFadingParams:
    @pytest.mark.parametrize("kwargs", [
        {"pathloss_exponent": 2.0},
        {"shadow_sigma_db": -1.0},
        {"reference_distance_m": 0.0},
        {"noise_power": 0.5},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FadingParams(**kwargs)

    def test_default_calibration_formula(self):
        # 30 dB edge SNR at 46 dBm with 18 dB peak gain, 500 m cell, v = 3.8
        expected = (46.0 - 30.0) + 18.0 - 38.0 * np.log10(500.0) - 30.0
        assert FadingParams().reference_loss_db == pytest.approx(expected)
        assert calibrated_reference_loss_db() == pytest.approx(expected)


class TestLargeScaleGain:
    def test_unity_at_reference(self, rng):
        p = flat_params(reference_distance_m=10.0)
        assert large_scale_gain(p, 10.0, rng) == pytest.approx(1.0)

    def test_pathloss_exponent(self, rng):
        p = flat_params()
        assert large_scale_gain(p, 2.0, rng) == pytest.approx(2.0 ** -3.8)
        assert large_scale_gain(p, 2.0, rng) == pytest.approx(0.0718, abs=2e-4)

    def test_shadow_std(self):
        rng = np.random.default_rng(99)
        p = FadingParams(shadow_sigma_db=8.0, reference_loss_db=0.0)
        samples = np.array([large_scale_gain(p, 100.0, rng) for _ in range(100_000)])
        assert np.std(10.0 * np.log10(samples)) == pytest.approx(8.0, abs=0.1)

    def test_domain_error(self, rng):
        with pytest.raises(ValueError):
            large_scale_gain(flat_params(), 0.0, rng)


class TestDrawChannelVector:
    def test_unit_entry_power(self):
        rng = np.random.default_rng(1)
        g = np.concatenate([draw_channel_vector(1.0, 4, rng) for _ in range(25_000)])
        assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_norm_scales_with_beta(self):
        rng = np.random.default_rng(2)
        norms = [np.sum(np.abs(draw_channel_vector(0.25, 4, rng)) ** 2)
                 for _ in range(100_000)]
        assert np.mean(norms) == pytest.approx(4 * 0.25, rel=0.02)

    def test_deterministic(self):
        a = draw_channel_vector(1.0, 3, np.random.default_rng(5))
        b = draw_channel_vector(1.0, 3, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_sample_covariance_is_scaled_identity(self):
        rng = np.random.default_rng(3)
        m, n, beta = 3, 100_000, 0.7
        g = np.array([draw_channel_vector(beta, m, rng) for _ in range(n)])
        cov = g.conj().T @ g / n
        off = cov - np.diag(np.diag(cov))
        assert np.all(np.abs(off) < 0.02)
        assert np.allclose(np.abs(np.diag(cov)), beta, rtol=0.02)

    def test_validation(self, rng):
        with pytest.raises(ValueError):
            draw_channel_vector(0.0, 3, rng)
        with pytest.raises(ValueError):
            draw_channel_vector(1.0, 0, rng)


def small_cfg(num_cells=2, users_per_cell=1):
    return NetworkConfig(num_cells=num_cells, users_per_cell=users_per_cell,
                         antennas=2)


class TestBuildChannelSet:
    def test_scalar_network(self):
        c = NetworkConfig(num_cells=1, users_per_cell=1, antennas=1)
        drop = drop_users(c, build_layout(c), 3)
        chans = build_channel_set(drop, c, FadingParams(), 4)
        assert chans.g.shape == (1, 1, 1, 1)
        assert chans.beta.shape == (1, 1, 1)
        assert chans.beta[0, 0, 0] > 0

    def test_deterministic(self):
        c = small_cfg()
        drop = drop_users(c, build_layout(c), 3)
        a = build_channel_set(drop, c, FadingParams(), 4)
        b = build_channel_set(drop, c, FadingParams(), 4)
        np.testing.assert_array_equal(a.g, b.g)
        np.testing.assert_array_equal(a.beta, b.beta)

    def test_link_streams_stable_in_k(self):
        cs = NetworkConfig(num_cells=2, users_per_cell=2, antennas=2)
        cb = NetworkConfig(num_cells=2, users_per_cell=3, antennas=2)
        layout = build_layout(cs)
        ds, db = drop_users(cs, layout, 8), drop_users(cb, layout, 8)
        a = build_channel_set(ds, cs, FadingParams(), 9)
        b = build_channel_set(db, cb, FadingParams(), 9)
        np.testing.assert_array_equal(b.g[:, :, :2, :], a.g)

    def test_serving_links_stronger_on_average(self):
        c = small_cfg(num_cells=2, users_per_cell=1)
        layout = build_layout(c)
        params = FadingParams()
        serving, cross = [], []
        for d in range(1000):
            drop = drop_users(c, layout, d)
            chans = build_channel_set(drop, c, params, 10_000 + d)
            serving.append(chans.beta[0, 0, 0])
            serving.append(chans.beta[1, 1, 0])
            cross.append(chans.beta[0, 1, 0])
            cross.append(chans.beta[1, 0, 0])
        assert np.mean(serving) > np.mean(cross)

    def test_inconsistent_drop_rejected(self):
        c = small_cfg()
        drop = drop_users(c, build_layout(c), 1)
        other = NetworkConfig(num_cells=3, users_per_cell=1, antennas=2)
        with pytest.raises(ValueError):
            build_channel_set(drop, other, FadingParams(), 1)

    def test_save_load_roundtrip(self, tmp_path):
        c = small_cfg()
        drop = drop_users(c, build_layout(c), 3)
        chans = build_channel_set(drop, c, FadingParams(), 4)
        path = tmp_path / "channels.npz"
        chans.save(path)
        loaded = ChannelSet.load(path)
        np.testing.assert_array_equal(loaded.g, chans.g)
        np.testing.assert_array_equal(loaded.beta, chans.beta)
        assert loaded.antennas == chans.antennas
