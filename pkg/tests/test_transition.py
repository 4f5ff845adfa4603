import math

import numpy as np
import pytest

from hookwalk.diagram import (
    DiagramError,
    PiecewiseLinearDiagram,
    RectangularDiagram,
    SmoothDiagram,
    UnrotatedDiagram,
    constant_slope_diagram,
    rectangular_approximation,
    rotate,
    trivial_diagram,
)
from hookwalk.numerics import QuadratureConfig, integrate_endpoint_singular
from hookwalk.transition import (
    AtomicMeasure,
    _interior_atoms_direct,
    cauchy_identity_residual,
    density_cdf,
    density_grid,
    exterior_atoms,
    exterior_density,
    exterior_density_unrotated,
    exterior_mass,
    interior_atoms,
    interior_density,
    interior_density_unrotated,
    interior_mass,
    started_interior_density,
)


def random_interlacing(rng, n, lo=-2.0, hi=2.0):
    while True:
        pts = np.sort(rng.uniform(lo, hi, 2 * n - 1))
        if n == 1 or np.min(np.diff(pts)) > 1e-3:
            return RectangularDiagram(pts[0::2], pts[1::2])


def two_slope_diagram():
    return PiecewiseLinearDiagram([(-2, 2), (0, 1), (2, 2)])


def sine_profile_diagram():
    """Smooth diagram with slope 0.6 sin(pi x)(1 - x^2) on [-1, 1]."""

    def antideriv(x):
        x = np.asarray(x, dtype=float)
        return (np.cos(np.pi * x) * (x * x - 1.0) / np.pi
                - (2.0 / np.pi ** 2) * (x * np.sin(np.pi * x)
                                        + np.cos(np.pi * x) / np.pi))

    f1 = antideriv(1.0)

    def evaluator(x):
        return 1.0 + 0.6 * (antideriv(x) - f1)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return 0.6 * np.sin(np.pi * x) * (1.0 - x * x)

    return SmoothDiagram(evaluator, derivative, (-1, 1), (-0.5, 0.5))


def linear_unrotated():
    return UnrotatedDiagram(
        lambda x: np.asarray(x, dtype=float),
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        (0, 1), (1, 1))


class TestAtomicMeasure:
    def test_validation(self):
        with pytest.raises(ValueError):
            AtomicMeasure([0, 1], [0.5, 0.4])  # not summing to 1
        with pytest.raises(ValueError):
            AtomicMeasure([1, 0], [0.5, 0.5])  # not increasing
        with pytest.raises(ValueError):
            AtomicMeasure([0, 1], [1.1, -0.1])  # negative weight

    def test_cdf(self):
        m = AtomicMeasure([0.0, 2.0], [0.25, 0.75])
        assert m.cdf(-1) == 0.0
        assert m.cdf(0.0) == 0.25
        assert m.cdf(1.0) == 0.25
        assert m.cdf(2.5) == 1.0


class TestExteriorAtoms:
    def test_trivial(self):
        m = exterior_atoms(trivial_diagram(0.7))
        assert np.allclose(m.locations, [0.7]) and m.weights[0] == 1.0

    def test_two_minima(self):
        m = exterior_atoms(RectangularDiagram([0, 2], [1]))
        assert np.allclose(m.weights, [0.5, 0.5], atol=1e-15)

    def test_three_minima_exact(self):
        m = exterior_atoms(RectangularDiagram([0, 2, 5], [1, 3]))
        assert np.max(np.abs(m.weights - [3 / 10, 1 / 6, 8 / 15])) < 1e-12

    def test_random_weights_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            d = random_interlacing(rng, int(rng.integers(1, 13)))
            m = exterior_atoms(d)
            assert abs(math.fsum(m.weights) - 1.0) < 1e-12


class TestInteriorAtoms:
    def test_single_maximum(self):
        m = interior_atoms(RectangularDiagram([0, 2], [1]))
        assert np.allclose(m.locations, [1.0]) and m.weights[0] == pytest.approx(1.0)

    def test_two_maxima_exact(self):
        m = interior_atoms(RectangularDiagram([0, 2, 5], [1, 3]))
        assert np.max(np.abs(m.weights - [2 / 5, 3 / 5])) < 1e-12

    def test_trivial_rejected(self):
        with pytest.raises(DiagramError):
            interior_atoms(trivial_diagram(0.0))

    def test_random_weights_sum_to_one(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = random_interlacing(rng, int(rng.integers(2, 13)))
            m = interior_atoms(d)
            assert abs(math.fsum(m.weights) - 1.0) < 1e-12

    def test_product_forms_agree(self):
        # the paired second form against the literal ratio of products
        rng = np.random.default_rng(3)
        for _ in range(25):
            d = random_interlacing(rng, int(rng.integers(2, 10)))
            paired = interior_atoms(d).weights
            direct = _interior_atoms_direct(d)
            assert np.max(np.abs(paired - direct)) < 1e-10


class TestPartialFractionIdentities:
    def test_exterior_rational_identity(self):
        # sum w_k/(x - x_k) equals prod(x - y)/prod(x - x) off the support
        rng = np.random.default_rng(4)
        for _ in range(20):
            d = random_interlacing(rng, int(rng.integers(1, 11)))
            m = exterior_atoms(d)
            b = d.interval.b
            for x in np.linspace(b + 0.5, b + 10, 5):
                lhs = m.cauchy_transform(x)
                rhs = np.prod(x - d.maxima) / np.prod(x - d.minima)
                assert abs(lhs - rhs) < 1e-10

    def test_interior_rational_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = random_interlacing(rng, int(rng.integers(2, 11)))
            m = interior_atoms(d)
            b = d.interval.b
            for x in np.linspace(b + 0.5, b + 10, 5):
                lhs = -0.5 * d.area * m.cauchy_transform(x) + x - d.center
                rhs = np.prod(x - d.minima) / np.prod(x - d.maxima)
                assert abs(lhs - rhs) < 1e-10


class TestDensities:
    def test_arcsine_specialization(self):
        c = constant_slope_diagram(0.0, (-1, 1))
        assert exterior_density(c, 0.0) == pytest.approx(1 / math.pi, rel=1e-12)
        assert exterior_density(c, 0.6) == pytest.approx(1 / (math.pi * 0.8),
                                                         rel=1e-12)

    def test_constant_slope_closed_form(self):
        # with constant slope the exponent integral vanishes identically
        for slope in (-0.5, 0.0, 0.3, 0.8):
            c = constant_slope_diagram(slope, (-1.5, 2.5))
            a, b = c.interval.a, c.interval.b
            for x in (-1.0, 0.1, 2.0):
                expect = ((1 / math.pi) * math.cos(math.pi * slope / 2)
                          * (x - a) ** (-(1 + slope) / 2)
                          * (b - x) ** (-(1 - slope) / 2))
                assert exterior_density(c, x) == pytest.approx(expect, rel=1e-12)

    def test_semicircle_specialization(self):
        c = constant_slope_diagram(0.0, (-1, 1))
        assert interior_density(c, 0.0) == pytest.approx(2 / math.pi, rel=1e-12)
        xs = np.linspace(-0.9, 0.9, 7)
        for x in xs:
            expect = (2 / math.pi) * math.sqrt(1 - x * x)
            assert interior_density(c, float(x)) == pytest.approx(expect,
                                                                  rel=1e-12)

    def test_interior_vanishes_at_endpoints(self):
        c = constant_slope_diagram(0.0, (-1, 1))
        assert interior_density(c, 1 - 1e-9) < 1e-4

    def test_breakpoint_rejected(self):
        with pytest.raises(DiagramError):
            exterior_density(two_slope_diagram(), 0.0)

    def test_outside_rejected(self):
        with pytest.raises(DiagramError):
            exterior_density(two_slope_diagram(), 2.5)

    def test_trivial_interior_rejected(self):
        with pytest.raises(DiagramError):
            interior_density(trivial_diagram(0.0, interval=(-1, 1)), 0.5)


class TestMasses:
    def test_two_slope_masses(self):
        d = two_slope_diagram()
        assert abs(exterior_mass(d) - 1.0) < 1e-6
        assert abs(interior_mass(d) - 1.0) < 1e-6

    def test_smooth_masses(self):
        d = sine_profile_diagram()
        assert abs(exterior_mass(d) - 1.0) < 1e-6
        assert abs(interior_mass(d) - 1.0) < 1e-6

    def test_interior_mass_equals_area_recovery(self):
        # interior mass 1 is the area identity: density integrates the area out
        d = two_slope_diagram()
        raw = integrate_endpoint_singular(
            lambda x: interior_density(d, x) * d.area, (-2, 0), 0.25, 0.5)
        raw += integrate_endpoint_singular(
            lambda x: interior_density(d, x) * d.area, (0, 2), 0.5, 0.25)
        assert abs(raw - d.area) < 1e-6


class TestDensityGrid:
    def test_mass_and_exponents(self):
        d = two_slope_diagram()
        g = density_grid(d, "exterior", 512)
        assert g.alpha == pytest.approx(-0.25)
        assert g.beta == pytest.approx(-0.25)
        assert g.singular_points == ((0.0, -0.5),)
        assert abs(g.mass() - 1.0) < 1e-6

    def test_interior_grid(self):
        d = two_slope_diagram()
        g = density_grid(d, "interior", 512)
        assert g.singular_points == ((0.0, 0.5),)
        assert abs(g.mass() - 1.0) < 1e-6

    def test_values_nonnegative_enforced(self):
        g = density_grid(constant_slope_diagram(0.0, (-1, 1)), "exterior", 64)
        assert np.all(g.values > 0)

    def test_arcsine_second_moment(self):
        # theta-clustered grid; classical arcsine moment is 1/2
        c = constant_slope_diagram(0.0, (-1, 1))
        theta = np.linspace(0, math.pi, 2050)[1:-1]
        grid_pts = -np.cos(theta)
        vals = np.array([exterior_density(c, float(x)) for x in grid_pts])
        from hookwalk.transition import DensityGrid
        g = DensityGrid(grid_pts, vals, c.interval, "exterior", -0.5, -0.5)
        assert abs(g.moment(2) - 0.5) < 1e-8

    def test_cdf_monotone(self):
        d = two_slope_diagram()
        xs = np.linspace(-1.8, 1.8, 13)
        cdf = density_cdf(d, "exterior", xs)
        assert np.all(np.diff(cdf) >= 0)
        assert cdf[-1] < 1.0


class TestCauchyIdentity:
    def test_rect_exterior_exact(self):
        lhs, rhs = cauchy_identity_residual(
            RectangularDiagram([0, 2], [1]), 3.0, "exterior")
        assert lhs == pytest.approx(2 / 3, abs=1e-14)
        assert rhs == pytest.approx(2 / 3, abs=1e-12)

    def test_trivial(self):
        lhs, rhs = cauchy_identity_residual(
            trivial_diagram(0.0), 5.0, "exterior")
        assert lhs == pytest.approx(0.2, abs=1e-14)
        assert rhs == pytest.approx(0.2, abs=1e-12)

    def test_smooth_exterior(self):
        c = constant_slope_diagram(0.25, (-1, 1))
        lhs, rhs = cauchy_identity_residual(c, 2.0, "exterior")
        assert abs(lhs - rhs) < 1e-6

    def test_smooth_interior(self):
        c = constant_slope_diagram(0.25, (-1, 1))
        lhs, rhs = cauchy_identity_residual(c, 2.0, "interior")
        assert abs(lhs - rhs) < 1e-6

    def test_rect_interior_random(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            d = random_interlacing(rng, int(rng.integers(2, 8)))
            lhs, rhs = cauchy_identity_residual(d, d.interval.b + 1.0,
                                                "interior")
            assert abs(lhs - rhs) < 1e-9

    def test_inside_rejected(self):
        with pytest.raises(DiagramError):
            cauchy_identity_residual(two_slope_diagram(), 0.5, "exterior")

    def test_positive_support_diagram(self):
        # support strictly right of the origin exercises the cone stretch
        d = RectangularDiagram([1, 3], [2])
        lhs, rhs = cauchy_identity_residual(d, 4.0, "exterior")
        assert abs(lhs - rhs) < 1e-12


class TestUnrotatedDensities:
    def test_arcsine_values(self):
        f = linear_unrotated()
        assert exterior_density_unrotated(f, 0.5) == pytest.approx(
            2 / math.pi, rel=1e-10)
        assert exterior_density_unrotated(f, 0.9) == pytest.approx(
            1 / (math.pi * 0.3), rel=1e-10)

    def test_change_of_variables_consistency(self):
        f = UnrotatedDiagram(
            lambda x: np.asarray(x, dtype=float) ** 2 + np.asarray(x, dtype=float),
            lambda x: 2 * np.asarray(x, dtype=float) + 1,
            (0, 1), (1, 3))
        w = rotate(f)
        for x in np.linspace(0.1, 0.9, 9):
            x = float(x)
            t = (x + f.evaluate(x)) / math.sqrt(2)
            jac = (1 + f.slope(x)) / math.sqrt(2)
            assert exterior_density_unrotated(f, x) == pytest.approx(
                exterior_density(w, t) * jac, abs=1e-8)
            assert interior_density_unrotated(f, x) == pytest.approx(
                interior_density(w, t) * jac, abs=1e-8)

    def test_started_corner_is_arcsine(self):
        f = linear_unrotated()
        got = started_interior_density(f, 1.0, 0.0, 0.5)
        assert got == pytest.approx(2 / math.pi, rel=1e-9)

    def test_started_mass_one(self):
        f = linear_unrotated()
        mass = integrate_endpoint_singular(
            lambda x: started_interior_density(f, 1.0, 0.0, x), (0, 1),
            -0.5, -0.5)
        assert abs(mass - 1.0) < 1e-6

    def test_started_outside_support(self):
        f = linear_unrotated()
        with pytest.raises(DiagramError):
            started_interior_density(f, 0.8, 0.2, 0.9)

    def test_self_consistency_step_relation(self):
        # the density equals the average of densities over its own hook
        f = linear_unrotated()
        x, s, t = 0.5, 1.0, 0.0
        lhs = started_interior_density(f, s, t, x)
        fx = f.evaluate(x)
        i1 = integrate_endpoint_singular(
            lambda v: started_interior_density(f, v, t, x), (x, s), -0.5, 0.0)
        i2 = integrate_endpoint_singular(
            lambda v: started_interior_density(f, s, v, x), (t, fx), 0.0, -0.5)
        rhs = (i1 + i2) / (s - f.f_inverse(t) + f.evaluate(s) - t)
        assert abs(lhs - rhs) < 1e-3


class TestWeakConvergence:
    def test_approximant_atoms_approach_density_cdf(self):
        d = two_slope_diagram()
        dists = []
        for n in (16, 64):
            r = rectangular_approximation(d, n)
            atoms = exterior_atoms(r)
            cdf_vals = density_cdf(d, "exterior", atoms.locations)
            cum = np.cumsum(atoms.weights)
            dist = float(np.max(np.maximum(np.abs(cdf_vals - cum),
                                           np.abs(cdf_vals - (cum - atoms.weights)))))
            dists.append(dist)
        assert dists[1] <= dists[0]
