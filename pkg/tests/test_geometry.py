import math

import numpy as np
import pytest

from axisphere.geometry import (
    INFINITY,
    POINT_AT_INFINITY,
    ConeDipoleMap,
    RadialProfile,
    SpherePoint,
    UnderResolvedQuadratureError,
    chart_to_colatitude,
    colatitude_to_chart,
    degree_from_flux,
    geometric_grid,
    is_at_infinity,
    stereo_inverse,
    stereo_project,
    tilde_u0_value,
    u0_profile,
    u_eps_profile,
)


class TestStereographic:
    def test_north_pole_to_origin(self):
        assert stereo_project(SpherePoint(0.0, 0.0, 1.0)) == (0.0, 0.0)

    def test_equator_fixed_point(self):
        assert stereo_project(SpherePoint(1.0, 0.0, 0.0)) == (1.0, 0.0)

    def test_south_pole_to_infinity(self):
        w = stereo_project(SpherePoint(0.0, 0.0, -1.0))
        assert is_at_infinity(w)

    def test_inverse_trivial_points(self):
        assert stereo_inverse((0.0, 0.0)) == SpherePoint(0.0, 0.0, 1.0)
        assert stereo_inverse((1.0, 0.0)) == SpherePoint(1.0, 0.0, 0.0)
        assert stereo_inverse(POINT_AT_INFINITY) == SpherePoint(0.0, 0.0, -1.0)

    def test_round_trip_plane(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            w = tuple(rng.normal(0.0, 3.0, 2))
            back = stereo_project(stereo_inverse(w))
            assert abs(back[0] - w[0]) <= 1e-12 * max(1.0, abs(w[0]))
            assert abs(back[1] - w[1]) <= 1e-12 * max(1.0, abs(w[1]))
        assert is_at_infinity(stereo_project(stereo_inverse(POINT_AT_INFINITY)))

    def test_round_trip_sphere(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            p = SpherePoint(*v)
            q = stereo_inverse(stereo_project(p))
            assert np.allclose(q.as_array(), p.as_array(), atol=1e-12)

    def test_sphere_point_validation(self):
        with pytest.raises(ValueError):
            SpherePoint(1.0, 1.0, 1.0)


class TestChartConversions:
    @pytest.mark.parametrize("f,phi", [(0.0, 0.0), (1.0, math.pi / 2), (INFINITY, math.pi)])
    def test_trivial_values(self, f, phi):
        assert chart_to_colatitude(f) == pytest.approx(phi, abs=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            chart_to_colatitude(-0.1)

    def test_monotone_and_invertible(self):
        f = np.geomspace(1e-8, 1e8, 400)
        phi = np.array([chart_to_colatitude(v) for v in f])
        assert np.all(np.diff(phi) > 0.0)
        back = np.array([colatitude_to_chart(p) for p in phi])
        # the colatitude resolution near the far pole floors the recovery
        # error at ~ f * eps, which overtakes 1e-12 relative beyond f ~ 5e3
        tol = np.maximum(1e-12, 4.0 * np.finfo(float).eps * f)
        assert np.all(np.abs(back - f) <= tol * f)

    def test_pi_maps_to_infinity(self):
        assert math.isinf(colatitude_to_chart(math.pi))


class TestProfiles:
    def test_u0_constant_at_alpha_zero(self):
        p = u0_profile(0.0, 2, geometric_grid(1e-4, 1.0, 64))
        assert np.all(p.phi == 0.0)

    def test_u0_pointwise_value(self):
        # f = alpha r^n at r = 1: phi = 2 arctan(0.25)
        p = u0_profile(0.25, 2, np.array([0.5, 1.0]))
        assert p.phi[-1] == pytest.approx(2.0 * math.atan(0.25), abs=1e-15)
        assert p.phi[-1] == pytest.approx(0.4899573263, abs=1e-9)

    def test_u0_equator_at_alpha_one(self):
        p = u0_profile(1.0, 1, np.array([0.5, 1.0]))
        assert p.phi[-1] == pytest.approx(math.pi / 2, abs=1e-15)

    def test_u_eps_continuity_and_outer_match(self):
        grid = geometric_grid(1e-5, 1.0, 512)
        alpha, n, eps = 0.25, 2, 0.1
        pe = u_eps_profile(alpha, n, eps, grid)
        p0 = u0_profile(alpha, n, pe.grid)
        outer = pe.grid >= eps
        assert np.array_equal(pe.phi[outer], p0.phi[outer])
        # both branches at r = eps
        k = np.searchsorted(pe.grid, eps)
        f_at = alpha * eps ** n
        assert pe.phi[k] == pytest.approx(2.0 * math.atan(f_at), abs=1e-15)

    def test_u_eps_inner_branch_value(self):
        grid = np.array([0.05, 0.1, 1.0])
        pe = u_eps_profile(0.25, 2, 0.1, grid)
        f_inner = math.tan(pe.phi[0] / 2.0)
        assert f_inner == pytest.approx(0.01, rel=1e-12)

    def test_u_eps_diverges_at_axis(self):
        grid = geometric_grid(1e-9, 1.0, 256)
        pe = u_eps_profile(0.25, 2, 0.1, grid)
        assert pe.phi[0] > math.pi - 1e-3

    def test_u_eps_rejects_bad_eps(self):
        for eps in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                u_eps_profile(0.25, 2, eps, np.array([0.1, 1.0]))

    def test_profile_invariants(self):
        with pytest.raises(ValueError):
            RadialProfile(grid=np.array([1.0, 0.5]), phi=np.array([0.0, 0.0]), n=1)
        with pytest.raises(ValueError):
            RadialProfile(grid=np.array([0.5, 1.0]), phi=np.array([0.0, 4.0]), n=1)
        with pytest.raises(ValueError):
            RadialProfile(grid=np.array([1.0]), phi=np.array([0.0]), n=1)

    def test_csv_round_trip(self, tmp_path):
        p = u0_profile(0.25, 2, geometric_grid(1e-6, 1.0, 128))
        path = tmp_path / "profile.csv"
        p.to_csv(path)
        q = RadialProfile.from_csv(path, n=2)
        assert np.array_equal(p.grid, q.grid)
        assert np.array_equal(p.phi, q.phi)
        header = path.read_text().splitlines()[0]
        assert header == "r,phi"


class TestConeDipoleMap:
    def test_inside_upper_cone_value(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        f = m.chart_value(0.2, 1.6)
        assert f == pytest.approx(0.81, rel=1e-12)

    def test_matches_smooth_map_outside_cones(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        for r, z in [(0.5, 0.0), (1.0, 0.5), (0.3, -0.9), (1.2, 1.1)]:
            assert m.chart_value(r, z) == pytest.approx(0.25 * r ** 2, rel=1e-12)

    def test_continuous_across_cone_boundary(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        for z in np.linspace(1.05, 1.8, 17):
            r = z - 1.0
            inner = m.chart_value(r * (1.0 - 1e-9), z)
            outer = m.chart_value(r * (1.0 + 1e-9), z)
            assert abs(inner - outer) < 1e-10 * max(1.0, outer)

    def test_even_in_z(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        rng = np.random.default_rng(3)
        for _ in range(50):
            z = rng.uniform(0.0, 1.9)
            r = rng.uniform(0.0, math.sqrt(max(1e-12, 4.0 - z * z)))
            if r == 0.0 and abs(z) == 1.0:
                continue
            assert m.chart_value(r, z) == m.chart_value(r, -z)

    def test_singular_points_rejected(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        for z in (1.0, -1.0):
            with pytest.raises(ValueError):
                m.chart_value(0.0, z)

    def test_outside_ball_rejected(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        with pytest.raises(ValueError):
            m.chart_value(2.5, 0.0)

    def test_value_on_sphere(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        p = tilde_u0_value(m, 0.5, 0.3, 0.0)
        assert abs(np.linalg.norm(p.as_array()) - 1.0) < 1e-12
        # axis between the singular points maps to the north pole
        assert tilde_u0_value(m, 0.0, 0.0, 0.5) == SpherePoint(0.0, 0.0, 1.0)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            ConeDipoleMap(alpha=0.3, n=2)
        with pytest.raises(ValueError):
            ConeDipoleMap(alpha=0.0, n=2)


class TestDegreeFromFlux:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cone_map_degrees(self, n):
        m = ConeDipoleMap(alpha=0.25, n=n)
        top = degree_from_flux(m.colatitude, n, (0.0, 0.0, 1.0), 0.5)
        bot = degree_from_flux(m.colatitude, n, (0.0, 0.0, -1.0), 0.5)
        assert top.degree == -n
        assert bot.degree == n
        assert top.residual < 1e-3
        assert bot.residual < 1e-3

    def test_radius_independence(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        d1 = degree_from_flux(m.colatitude, 2, (0.0, 0.0, 1.0), 0.3)
        d2 = degree_from_flux(m.colatitude, 2, (0.0, 0.0, 1.0), 0.7)
        assert d1.degree == d2.degree == -2

    def test_constant_map(self):
        res = degree_from_flux(lambda r, z: 1.0, 5, (0.0, 0.0, 0.0), 0.5)
        assert res.degree == 0
        assert res.raw == pytest.approx(0.0, abs=1e-12)

    def test_smooth_region_degree_zero(self):
        m = ConeDipoleMap(alpha=0.25, n=2)
        res = degree_from_flux(m.colatitude, 2, (0.0, 0.0, 0.0), 0.5)
        assert res.degree == 0

    def test_off_axis_center_rejected(self):
        with pytest.raises(ValueError):
            degree_from_flux(lambda r, z: 0.0, 1, (0.5, 0.0, 0.0), 0.1)

    def test_under_resolved_raises(self):
        # an oscillatory image colatitude aliases on a coarse panel grid
        def wavy(r, z):
            beta = math.atan2(r, z)
            return min(math.pi, max(0.0, beta + 0.45 * math.sin(8.0 * beta)))

        fine = degree_from_flux(wavy, 1, (0.0, 0.0, 0.0), 1.0, panels=2048)
        assert fine.degree == 1
        with pytest.raises(UnderResolvedQuadratureError):
            degree_from_flux(wavy, 1, (0.0, 0.0, 0.0), 1.0, panels=6)
