import math

import numpy as np
import pytest

from hookwalk.diagram import (
    PiecewiseLinearDiagram,
    RectangularDiagram,
    SmoothDiagram,
    constant_slope_diagram,
    trivial_diagram,
)
from hookwalk.moments import (
    MomentVector,
    charge_moments,
    charge_moments_from_exterior,
    exterior_moments_from_charge,
    interior_moments_from_charge,
    measure_moments,
)
from hookwalk.transition import density_grid, exterior_atoms, interior_atoms


def random_interlacing(rng, n, lo=-2.0, hi=2.0):
    while True:
        pts = np.sort(rng.uniform(lo, hi, 2 * n - 1))
        if n == 1 or np.min(np.diff(pts)) > 1e-3:
            return RectangularDiagram(pts[0::2], pts[1::2])


class TestChargeMoments:
    def test_rect_exact(self):
        p = charge_moments(RectangularDiagram([0, 2], [1]), 3)
        assert np.allclose(p.values, [1, 3, 7])

    def test_trivial_at_origin(self):
        p = charge_moments(trivial_diagram(0.0), 5)
        assert np.allclose(p.values, 0.0)

    def test_trivial_off_origin(self):
        # the cone stretch between 0 and the center carries all the charge
        p = charge_moments(trivial_diagram(2.0), 4)
        assert np.allclose(p.values, [2.0, 4.0, 8.0, 16.0])

    def test_center_and_area_relations(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            d = random_interlacing(rng, int(rng.integers(1, 9)))
            p = charge_moments(d, 2)
            assert p.order(1) == pytest.approx(d.center, abs=1e-12)
            assert p.order(2) - p.order(1) ** 2 == pytest.approx(d.area,
                                                                 abs=1e-11)

    def test_constant_slope_zero(self):
        p = charge_moments(constant_slope_diagram(0.0, (-1, 1)), 2)
        assert p.order(1) == pytest.approx(0.0, abs=1e-12)
        assert p.order(2) == pytest.approx(1.0, abs=1e-12)

    def test_piecewise_matches_smooth_quadrature(self):
        # same diagram through the closed-form and the quadrature paths
        pl = PiecewiseLinearDiagram([(-2, 2), (0, 1), (2, 2)])
        sm = SmoothDiagram(lambda x: pl.evaluate(x),
                           lambda x: np.where(np.asarray(x) < 0, -0.5, 0.5),
                           (-2, 2), (-0.5, 0.5))
        p_pl = charge_moments(pl, 6)
        p_sm = charge_moments(sm, 6)
        assert np.max(np.abs(p_pl.values - p_sm.values)) < 1e-8

    def test_positive_support_power_sums(self):
        d = RectangularDiagram([1, 3], [2])
        p_exact = charge_moments(d, 4).values
        assert np.allclose(p_exact, [1 + 3 - 2, 1 + 9 - 4, 1 + 27 - 8,
                                     1 + 81 - 16])

    def test_positive_support_piecewise_path(self):
        # shifted constant-slope diagram; support [2, 4] stays right of 0,
        # so the closed-form cone stretch over [0, 2] must kick in
        c = constant_slope_diagram(0.5, (2, 4))
        p = charge_moments(c, 3)
        assert p.order(1) == pytest.approx(c.center, abs=1e-12)
        assert p.order(2) - p.order(1) ** 2 == pytest.approx(c.area, abs=1e-10)


class TestPartitionRelations:
    def test_exterior_from_charge_example(self):
        p = MomentVector("charge", np.array([1.0, 3.0, 7.0]))
        h = exterior_moments_from_charge(p)
        assert np.allclose(h.values, [1, 1, 2, 4])

    def test_interior_from_charge_example(self):
        p = MomentVector("charge", np.array([1.0, 3.0, 7.0]))
        g = interior_moments_from_charge(p, area=2.0, center=1.0)
        assert np.allclose(g.values, [1.0, 1.0])

    def test_zero_charge_gives_point_mass_at_origin(self):
        p = MomentVector("charge", np.zeros(6))
        h = exterior_moments_from_charge(p)
        assert h.values[0] == 1.0 and np.allclose(h.values[1:], 0.0)

    def test_area_must_be_positive(self):
        p = MomentVector("charge", np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            interior_moments_from_charge(p, area=0.0)

    def test_round_trip_random(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            p = MomentVector("charge", rng.uniform(-1, 1, 8))
            back = charge_moments_from_exterior(exterior_moments_from_charge(p))
            assert np.max(np.abs(back.values - p.values)) < 1e-10

    def test_inverse_example(self):
        h = MomentVector("exterior", np.array([1.0, 1.0, 2.0, 4.0]))
        p = charge_moments_from_exterior(h)
        assert np.allclose(p.values, [1, 3, 7])


class TestMeasureMoments:
    def test_atomic(self):
        m = exterior_atoms(RectangularDiagram([0, 2], [1]))
        h = measure_moments(m, 3)
        assert np.allclose(h.values, [1, 1, 2, 4])

    def test_point_mass(self):
        from hookwalk.transition import AtomicMeasure
        m = AtomicMeasure([1.7], [1.0])
        h = measure_moments(m, 4)
        assert np.allclose(h.values, 1.7 ** np.arange(5))

    def test_arcsine_second_moment_from_grid(self):
        c = constant_slope_diagram(0.0, (-1, 1))
        theta = np.linspace(0, math.pi, 2050)[1:-1]
        pts = -np.cos(theta)
        from hookwalk.transition import DensityGrid, exterior_density
        vals = np.array([exterior_density(c, float(x)) for x in pts])
        g = DensityGrid(pts, vals, c.interval, "exterior", -0.5, -0.5)
        h = measure_moments(g, 2)
        assert abs(h.order(2) - 0.5) < 1e-8


class TestConsistencyOracles:
    def test_exterior_consistency_random_rect(self):
        rng = np.random.default_rng(21)
        for _ in range(8):
            d = random_interlacing(rng, int(rng.integers(1, 9)))
            h_chain = exterior_moments_from_charge(charge_moments(d, 8))
            h_direct = measure_moments(exterior_atoms(d), 8)
            scale = np.maximum(1.0, np.abs(h_direct.values))
            assert np.max(np.abs(h_chain.values - h_direct.values) / scale) < 1e-9

    def test_interior_consistency_random_rect(self):
        rng = np.random.default_rng(22)
        for _ in range(8):
            d = random_interlacing(rng, int(rng.integers(2, 9)))
            g_chain = interior_moments_from_charge(
                charge_moments(d, 8), d.area, d.center)
            g_direct = measure_moments(interior_atoms(d), 6, kind="interior")
            scale = np.maximum(1.0, np.abs(g_direct.values))
            assert np.max(np.abs(g_chain.values - g_direct.values) / scale) < 1e-9

    def test_exterior_generating_identity(self):
        # both sides of the exp generating identity at |x| = 2 max|support|,
        # truncation order 30 so the tails sit below the 1e-8 comparison
        rng = np.random.default_rng(23)
        for _ in range(5):
            d = random_interlacing(rng, int(rng.integers(1, 7)))
            x = 2.0 * max(abs(d.minima[0]), abs(d.minima[-1]), 1e-1)
            order = 30
            p = charge_moments(d, order)
            h = exterior_moments_from_charge(p)
            lhs = math.fsum(h.values[n] * x ** -n for n in range(order + 1))
            rhs = math.exp(math.fsum(p.values[n - 1] / n * x ** -n
                                     for n in range(1, order + 1)))
            assert abs(lhs - rhs) < 1e-8

    def test_interior_generating_identity(self):
        rng = np.random.default_rng(24)
        for _ in range(5):
            d = random_interlacing(rng, int(rng.integers(2, 7)))
            x = 2.0 * max(abs(d.minima[0]), abs(d.minima[-1]), 1e-1)
            order = 30
            p = charge_moments(d, order)
            g = interior_moments_from_charge(p, d.area, d.center)
            lhs = (1.0 - d.center / x
                   - 0.5 * d.area * math.fsum(
                       g.values[n] * x ** -(n + 2)
                       for n in range(len(g.values))))
            rhs = math.exp(-math.fsum(p.values[n - 1] / n * x ** -n
                                      for n in range(1, order + 1)))
            assert abs(lhs - rhs) < 1e-8

    def test_grid_interior_moments_match_partition_route(self):
        d = PiecewiseLinearDiagram([(-2, 2), (0, 1), (2, 2)])
        g_grid = density_grid(d, "interior", 512)
        g_direct = measure_moments(g_grid, 4)
        g_chain = interior_moments_from_charge(charge_moments(d, 6),
                                               d.area, d.center)
        assert np.max(np.abs(g_direct.values - g_chain.values[:5])) < 1e-6


class TestMomentVector:
    def test_orders(self):
        p = MomentVector("charge", np.array([2.0, 5.0]))
        assert p.order(1) == 2.0 and p.max_order == 2
        with pytest.raises(IndexError):
            p.order(0)

    def test_measure_normalization_enforced(self):
        with pytest.raises(ValueError):
            MomentVector("exterior", np.array([0.5, 1.0]))
