import math

import numpy as np
import pytest
from scipy import integrate

from tiltbeam.scenario import (NetworkConfig, build_layout, drop_users,
                               elevation_aoa)


def cfg(**kwargs):
    return NetworkConfig(**{"num_cells": 3, "users_per_cell": 2, **kwargs})


class TestNetworkConfig:
    @pytest.mark.parametrize("kwargs", [
        {"num_cells": 0},
        {"users_per_cell": 0},
        {"antennas": 0},
        {"bs_height_m": 1.0, "ue_height_m": 1.5},
        {"min_user_distance_m": 0.0},
        {"min_user_distance_m": 600.0},
        {"boresights_deg": [0.0]},
    ])
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ValueError):
            cfg(**kwargs)


class TestBuildLayout:
    def test_single_site_at_origin(self):
        layout = build_layout(cfg(num_cells=1))
        np.testing.assert_array_equal(layout.positions_m, np.zeros((1, 2)))
        assert layout.boresights_deg[0] == 0.0

    def test_three_sites_equilateral(self):
        layout = build_layout(cfg(num_cells=3, cell_radius_m=500.0))
        pos = layout.positions_m
        dists = [np.linalg.norm(pos[a] - pos[b])
                 for a, b in ((0, 1), (0, 2), (1, 2))]
        expected = 2 * 500.0 * math.cos(math.radians(30.0))
        for d in dists:
            assert d == pytest.approx(expected, abs=1e-9)
        assert max(dists) - min(dists) < 1e-9

    def test_boresight_override_passthrough(self):
        layout = build_layout(cfg(num_cells=3, boresights_deg=[0.0, 120.0, 240.0]))
        np.testing.assert_array_equal(layout.boresights_deg, [0.0, 120.0, 240.0])

    def test_default_boresights_point_inward(self):
        layout = build_layout(cfg(num_cells=3))
        for pos, bore in zip(layout.positions_m, layout.boresights_deg):
            to_center = math.degrees(math.atan2(-pos[1], -pos[0]))
            assert math.isclose((bore - to_center + 180) % 360 - 180, 0.0, abs_tol=1e-9)

    def test_unsupported_count(self):
        with pytest.raises(ValueError):
            build_layout(cfg(num_cells=8))


class TestElevationAoa:
    def test_forty_five_degrees_when_height_equals_distance(self):
        assert elevation_aoa(32.0, 1.5, 30.5) == pytest.approx(45.0)

    def test_far_distance_limit(self):
        assert elevation_aoa(32.0, 1.5, 1e9) == pytest.approx(0.0, abs=1e-5)

    def test_cell_edge_value(self):
        expected = math.degrees(math.atan(30.5 / 500.0))
        assert elevation_aoa(32.0, 1.5, 500.0) == pytest.approx(expected, rel=1e-14)
        assert elevation_aoa(32.0, 1.5, 500.0) == pytest.approx(3.4907, abs=1e-3)

    def test_monotone_decreasing_in_distance(self):
        d = np.linspace(10.0, 2000.0, 500)
        a = elevation_aoa(32.0, 1.5, d)
        assert np.all(np.diff(a) < 0)
        assert np.all((a > 0) & (a < 90))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            elevation_aoa(32.0, 1.5, 0.0)
        with pytest.raises(ValueError):
            elevation_aoa(1.0, 1.5, 10.0)


class TestDropUsers:
    def test_deterministic(self):
        c = cfg()
        layout = build_layout(c)
        a = drop_users(c, layout, 123)
        b = drop_users(c, layout, 123)
        np.testing.assert_array_equal(a.user_xy, b.user_xy)
        np.testing.assert_array_equal(a.elevation_aoa_deg, b.elevation_aoa_deg)
        np.testing.assert_array_equal(a.azimuth_aoa_deg, b.azimuth_aoa_deg)
        np.testing.assert_array_equal(a.distance_m, b.distance_m)

    def test_seed_changes_drop(self):
        c = cfg()
        layout = build_layout(c)
        a = drop_users(c, layout, 123)
        b = drop_users(c, layout, 124)
        assert not np.array_equal(a.user_xy, b.user_xy)

    def test_min_distance_respected(self):
        c = cfg(num_cells=1, users_per_cell=10_000, min_user_distance_m=35.0)
        layout = build_layout(c)
        drop = drop_users(c, layout, 7)
        assert drop.distance_m[0, 0].min() >= 35.0

    def test_users_inside_hexagon(self):
        c = cfg(num_cells=3, users_per_cell=200)
        layout = build_layout(c)
        drop = drop_users(c, layout, 11)
        a = math.sqrt(3) / 2 * c.cell_radius_m
        for j in range(3):
            rel = drop.user_xy[j] - layout.positions_m[j]
            x, y = rel[:, 0], rel[:, 1]
            assert np.all(np.abs(x) <= a + 1e-9)
            assert np.all(np.abs(x + math.sqrt(3) * y) <= 2 * a + 1e-9)
            assert np.all(np.abs(x - math.sqrt(3) * y) <= 2 * a + 1e-9)

    def test_mean_distance_matches_quadrature(self):
        c = cfg(num_cells=1, users_per_cell=100_000)
        layout = build_layout(c)
        drop = drop_users(c, layout, 42)
        R, d0 = c.cell_radius_m, c.min_user_distance_m
        a = math.sqrt(3) / 2 * R
        # polar integration over one 30-degree wedge (12-fold symmetry):
        # boundary r(phi) = apothem / cos(phi)
        area = 12 * integrate.quad(lambda phi: 0.5 * ((a / math.cos(phi)) ** 2 - d0 ** 2),
                                   0.0, math.pi / 6)[0]
        moment = 12 * integrate.quad(lambda phi: ((a / math.cos(phi)) ** 3 - d0 ** 3) / 3.0,
                                     0.0, math.pi / 6)[0]
        analytic_mean = moment / area
        empirical = drop.distance_m[0, 0].mean()
        assert empirical == pytest.approx(analytic_mean, rel=0.01)

    def test_all_elevations_in_open_interval(self):
        c = cfg()
        layout = build_layout(c)
        drop = drop_users(c, layout, 9)
        assert np.all(drop.elevation_aoa_deg > 0.0)
        assert np.all(drop.elevation_aoa_deg < 90.0)

    def test_serving_aoa_exceeds_farther_bs_aoa(self):
        c = cfg()
        layout = build_layout(c)
        drop = drop_users(c, layout, 17)
        L, K = c.num_cells, c.users_per_cell
        for j in range(L):
            for m in range(K):
                for i in range(L):
                    if drop.distance_m[i, j, m] > drop.distance_m[j, j, m]:
                        assert drop.elevation_aoa_deg[j, j, m] > \
                            drop.elevation_aoa_deg[i, j, m]

    def test_user_prefix_stable_in_k(self):
        layout = build_layout(cfg(num_cells=3, users_per_cell=2))
        small = drop_users(cfg(num_cells=3, users_per_cell=2), layout, 5)
        big = drop_users(cfg(num_cells=3, users_per_cell=4), layout, 5)
        np.testing.assert_array_equal(big.user_xy[:, :2, :], small.user_xy)

    def test_to_dict_field_order(self):
        c = cfg(num_cells=1, users_per_cell=1)
        drop = drop_users(c, build_layout(c), 1)
        assert list(drop.to_dict().keys()) == \
            ["user_xy", "elevation_aoa_deg", "azimuth_aoa_deg", "distance_m"]
