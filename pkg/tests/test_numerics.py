import math

import numpy as np
import pytest
from scipy.integrate import quad

from hookwalk.numerics import (
    BracketError,
    Partition,
    QuadratureConfig,
    QuadratureError,
    StepFunction,
    difference_quotient_integral,
    difference_quotient_integral_step,
    find_root_bracketed,
    integrate_endpoint_singular,
    partitions,
)

TIGHT = QuadratureConfig(rel_tol=1e-12, max_levels=14)


class TestEndpointSingular:
    def test_arcsine_kernel_gives_pi(self):
        got = integrate_endpoint_singular(
            lambda x: (1.0 - x * x) ** -0.5, (-1, 1), -0.5, -0.5, TIGHT)
        assert abs(got - math.pi) < 1e-10

    def test_constant(self):
        assert integrate_endpoint_singular(lambda x: 1.0, (0, 1)) == pytest.approx(1.0, abs=1e-14)

    def test_beta_half_half(self):
        got = integrate_endpoint_singular(
            lambda x: x ** -0.5 * (1 - x) ** -0.5, (0, 1), -0.5, -0.5, TIGHT)
        assert abs(got - math.pi) < 1e-10

    @pytest.mark.parametrize("alpha,beta", [(-0.75, -0.25), (-0.5, 0.0),
                                            (-0.9, -0.6), (0.0, -0.5)])
    def test_beta_function_grid(self, alpha, beta):
        # Oracle: the classical Beta integral via the gamma function.
        expect = (math.gamma(alpha + 1) * math.gamma(beta + 1)
                  / math.gamma(alpha + beta + 2))
        got = integrate_endpoint_singular(
            lambda x: x ** alpha * (1 - x) ** beta, (0, 1), alpha, beta, TIGHT)
        assert abs(got - expect) < 1e-10 * abs(expect)

    def test_polynomials_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = np.polynomial.Polynomial(rng.uniform(-1, 1, 9))
            anti = p.integ()
            got = integrate_endpoint_singular(
                lambda x: float(p(x)), (-1.0, 1.5), 0.0, 0.0, TIGHT)
            assert abs(got - (anti(1.5) - anti(-1.0))) < 1e-12

    def test_reversed_interval_negates(self):
        fwd = integrate_endpoint_singular(lambda x: x * x, (0, 1))
        rev = integrate_endpoint_singular(lambda x: x * x, (1, 0))
        assert fwd == pytest.approx(-rev)

    def test_level_budget_exhaustion_raises(self):
        # far too few levels for a high-frequency integrand at tight tolerance
        with pytest.raises(QuadratureError) as err:
            integrate_endpoint_singular(
                lambda x: math.sin(1000.0 * x), (0, 1), 0.0, 0.0,
                QuadratureConfig(rel_tol=1e-12, max_levels=3))
        assert err.value.estimates is not None
        assert len(err.value.estimates) == 2

    def test_exponent_validation(self):
        with pytest.raises(ValueError):
            integrate_endpoint_singular(lambda x: 1.0, (0, 1), -1.0, 0.0)


class TestDifferenceQuotient:
    def test_constant_vanishes(self):
        got = difference_quotient_integral(lambda u: 3.0, None, 0.3, (0, 1))
        assert abs(got) < 1e-14

    def test_identity_gives_width(self):
        got = difference_quotient_integral(lambda u: u, 1.0, 0.3, (-2, 5))
        assert abs(got - 7.0) < 1e-10

    def test_square_minus_linear(self):
        # quotient of u^2 - u is u + x - 1; at x = 1/2 the integral vanishes
        got = difference_quotient_integral(
            lambda u: u * u - u, None, 0.5, (0, 1))
        assert abs(got) < 1e-12

    def test_square(self):
        # quotient of u^2 is u + x; hand antiderivative gives 1 at x = 1/2
        got = difference_quotient_integral(lambda u: u * u, 1.0, 0.5, (0, 1))
        assert abs(got - 1.0) < 1e-12

    def test_x_outside_rejected(self):
        with pytest.raises(ValueError):
            difference_quotient_integral(lambda u: u, 1.0, 2.0, (0, 1))


class TestStepQuotient:
    def test_constant_step(self):
        s = StepFunction([0, 0.4, 1], [2.5, 2.5])
        assert difference_quotient_integral_step(s, 0.7) == 0.0

    def test_two_step_log3(self):
        s = StepFunction([0, 0.5, 1], [0.0, 1.0])
        got = difference_quotient_integral_step(s, 0.25)
        assert abs(got - math.log(3)) < 1e-14

    def test_left_tie_break_at_boundary(self):
        s = StepFunction([0, 0.5, 1], [1.0, 4.0])
        assert s(0.5) == 1.0  # left step wins

    def test_matches_quadpack_on_random_steps(self):
        # Independent oracle: QUADPACK with explicit difficulty points.
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 100:
            m = int(rng.integers(2, 7))
            inner = np.sort(rng.uniform(-1, 1, m - 1))
            edges = np.concatenate([[-1.0], inner, [1.0]])
            if np.min(np.diff(edges)) < 1e-3:
                continue
            vals = rng.uniform(-2, 2, m)
            step = StepFunction(edges, vals)
            x = float(rng.uniform(-0.95, 0.95))
            if np.min(np.abs(edges - x)) < 1e-3:
                continue
            closed = difference_quotient_integral_step(step, x)
            vx = step(x)

            def quot(u):
                du = u - x
                return 0.0 if du == 0.0 else (step(u) - vx) / du

            pts = sorted(set(edges[1:-1].tolist() + [x]))
            oracle, _ = quad(quot, -1, 1, points=pts, limit=300)
            assert abs(closed - oracle) < 1e-9
            checked += 1


class TestRootFinding:
    def test_linear(self):
        assert find_root_bracketed(lambda x: x - 1, 0, 2) == pytest.approx(1.0)

    def test_two_pole_sum(self):
        g = lambda x: 1.0 / x + 1.0 / (x - 2.0)
        assert find_root_bracketed(g, 0.001, 1.999) == pytest.approx(1.0, abs=1e-12)

    def test_cosine(self):
        got = find_root_bracketed(math.cos, 1, 2, tol=1e-13)
        assert abs(got - math.pi / 2) < 1e-12

    def test_sign_flip_near_root(self):
        tol = 1e-10
        g = lambda x: math.tanh(x - 0.3)
        r = find_root_bracketed(g, -1, 1, tol=tol)
        assert g(r - tol) * g(r + tol) <= 0

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root_bracketed(lambda x: x * x + 1, -1, 1)


CLASSICAL_COUNTS = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135,
                    176, 231, 297, 385, 490, 627]


class TestPartitions:
    def test_one(self):
        parts = partitions(1)
        assert len(parts) == 1 and parts[0].multiplicities == {1: 1}

    @pytest.mark.parametrize("n,count", [(4, 5), (8, 22)])
    def test_examples(self, n, count):
        assert len(partitions(n)) == count

    def test_counts_match_classical(self):
        for n, count in enumerate(CLASSICAL_COUNTS, start=1):
            assert len(partitions(n)) == count

    def test_each_sums_to_n_and_unique(self):
        parts = partitions(9)
        keys = set()
        for p in parts:
            assert p.n == 9
            keys.add(tuple(sorted(p.multiplicities.items())))
        assert len(keys) == len(parts)

    @pytest.mark.parametrize("bad", [0, 41, -3])
    def test_range_guard(self, bad):
        with pytest.raises(ValueError):
            partitions(bad)
