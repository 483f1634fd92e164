import math

import numpy as np
import pytest

from herzkit.batteries import random_smooth
from herzkit.errors import InputDomainError, ShapeError
from herzkit.mixed_norm import (
    ExponentVector,
    holder_check,
    mixed_lebesgue_norm,
    power_identity_check,
)
from herzkit.sampled_function import Grid, SampledFunction, quadrature_integral

from conftest import sampled


def box01(grid):
    """chi_[0,1]^n with the half-at-jump convention (grid cells aligned)."""
    pts = grid.points()
    vals = np.ones(len(pts))
    for i in range(grid.dim):
        x = pts[:, i]
        axis = np.where((x > 1e-12) & (x < 1 - 1e-12), 1.0, 0.0)
        axis = np.where((np.abs(x) <= 1e-12) | (np.abs(x - 1) <= 1e-12), 0.5, axis)
        vals *= axis
    return SampledFunction(grid, vals.reshape(grid.shape))


class TestExponentVector:
    def test_conjugates(self):
        q = ExponentVector((1.0, 2.0, math.inf))
        assert q.conjugate.q == (math.inf, 2.0, 1.0)

    def test_conjugate_undefined_below_one(self):
        with pytest.raises(InputDomainError):
            _ = ExponentVector((0.5,)).conjugate

    def test_positive_required(self):
        with pytest.raises(InputDomainError):
            ExponentVector((0.0, 2.0))

    def test_scaled(self):
        assert ExponentVector((1.0, 2.0)).scaled(2.0).q == (2.0, 4.0)


class TestMixedNorm:
    def test_unit_box(self):
        # the jump cells limit indicator norms to one-cell accuracy
        defects = []
        for pts in (129, 257):
            g = Grid.uniform(2, 2.0, pts)
            val = mixed_lebesgue_norm(box01(g), ExponentVector((2.0, 3.0)))
            defects.append(abs(val - 1.0))
            assert defects[-1] <= 2.0 * g.spacing[0]
        assert defects[1] <= 0.6 * defects[0]

    def test_equal_exponents_match_classical(self, grid2d):
        f = sampled(grid2d, lambda p: np.exp(-(p**2).sum(axis=-1)) * (1 + p[:, 0]))
        for p in (1.0, 2.0, 3.5):
            classical = quadrature_integral(f.power(p)) ** (1.0 / p)
            assert mixed_lebesgue_norm(f, ExponentVector((p, p))) == pytest.approx(classical, rel=1e-13)

    def test_separable_factorization(self):
        g = Grid.uniform(2, 3.0, 65)
        g1 = Grid((3.0,), (65,))
        fx = lambda x: np.exp(-x**2) * (1 + 0.5 * x)
        fy = lambda y: np.cos(y) ** 2
        f2 = sampled(g, lambda p: fx(p[:, 0]) * fy(p[:, 1]))
        q = ExponentVector((2.0, 3.0))
        nx = mixed_lebesgue_norm(sampled(g1, lambda p: fx(p[:, 0])), ExponentVector((2.0,)))
        ny = mixed_lebesgue_norm(sampled(g1, lambda p: fy(p[:, 0])), ExponentVector((3.0,)))
        assert mixed_lebesgue_norm(f2, q) == pytest.approx(nx * ny, rel=1e-12)

    def test_ball_indicator_scaling_bound(self, aniso21):
        # The per-axis bounding box of B(0, r) gives the sharp computable
        # bound prod_i (2 r^(a_i))^(1/q_i); the sampled norm stays below it.
        g = Grid.uniform(2, 4.0, 129)
        q = ExponentVector((2.0, 3.0))
        for r in (0.5, 1.0, 2.0):
            semi = np.array([r**2.0, r])
            ind = sampled(g, lambda p: (((p / semi) ** 2).sum(axis=-1) < 1.0).astype(float))
            norm = mixed_lebesgue_norm(ind, q)
            bound = np.prod([(2.0 * semi[i]) ** (1.0 / q.q[i]) for i in range(2)])
            assert norm <= bound * (1 + 1e-9)
            # scaling exponent: both sides scale like r^(sum a_i / q_i)
            assert norm <= 2.0 * r ** (2.0 / 2.0 + 1.0 / 3.0)

    def test_infinite_axis_takes_sup(self):
        g = Grid.uniform(2, 1.0, 33)
        f = sampled(g, lambda p: p[:, 0] * 0 + np.abs(p[:, 1]))
        val = mixed_lebesgue_norm(f, ExponentVector((math.inf, math.inf)))
        assert val == pytest.approx(1.0)

    def test_zero_function_with_inf_axis(self, grid2d):
        z = SampledFunction(grid2d, np.zeros(grid2d.shape))
        assert mixed_lebesgue_norm(z, ExponentVector((math.inf, 2.0))) == 0.0

    def test_dimension_mismatch(self, grid2d):
        f = sampled(grid2d, lambda p: np.ones(len(p)))
        with pytest.raises(ShapeError):
            mixed_lebesgue_norm(f, ExponentVector((2.0,)))

    def test_absolute_homogeneity(self, grid2d):
        f = random_smooth(grid2d, seed=9)
        q = ExponentVector((1.5, 0.7))
        assert mixed_lebesgue_norm(-3.0 * f, q) == pytest.approx(
            3.0 * mixed_lebesgue_norm(f, q), rel=1e-13
        )

    def test_monotonicity(self, grid2d):
        f = random_smooth(grid2d, seed=10)
        g = f.with_values(np.abs(f.values) + 0.1)
        for q in (ExponentVector((0.6, 2.0)), ExponentVector((2.0, 3.0))):
            assert mixed_lebesgue_norm(f, q) <= mixed_lebesgue_norm(g, q)

    def test_triangle_inequality_banach_range(self, grid2d):
        rng = np.random.default_rng(11)
        for i in range(20):
            q = ExponentVector(tuple(rng.uniform(1.0, 4.0, size=2)))
            f = random_smooth(grid2d, seed=100 + 2 * i)
            g = random_smooth(grid2d, seed=101 + 2 * i)
            assert mixed_lebesgue_norm(f + g, q) <= (
                mixed_lebesgue_norm(f, q) + mixed_lebesgue_norm(g, q)
            ) * (1 + 1e-12)


class TestHolder:
    def test_zero_partner(self, grid2d):
        f = random_smooth(grid2d, seed=12)
        z = SampledFunction(grid2d, np.zeros(grid2d.shape))
        lhs, rhs = holder_check(f, z, ExponentVector((2.0, 2.0)))
        assert lhs == 0.0 and rhs == 0.0

    def test_extremal_indicator_pair(self):
        g = Grid.uniform(1, 2.0, 129)
        f = box01(g)
        lhs, rhs = holder_check(f, f, ExponentVector((2.0,)))
        # Hoelder equality at the extremal pair is exact in the quadrature;
        # the values agree with the box measure to one jump cell
        assert lhs == pytest.approx(rhs, rel=1e-14)
        assert lhs == pytest.approx(1.0, abs=g.spacing[0])

    def test_random_pairs_never_violate(self, grid2d):
        rng = np.random.default_rng(13)
        for i in range(30):
            qs = tuple(rng.uniform(1.0, 4.0, size=2))
            f = random_smooth(grid2d, seed=200 + 2 * i)
            g = random_smooth(grid2d, seed=201 + 2 * i)
            lhs, rhs = holder_check(f, g, ExponentVector(qs))
            assert lhs <= rhs * (1 + 1e-12)

    def test_spec_example_pair(self):
        g = Grid.uniform(2, 2.0, 65)
        f = random_smooth(g, seed=14)
        h = random_smooth(g, seed=15)
        lhs, rhs = holder_check(f, h, ExponentVector((3.0, 1.5)))
        assert lhs <= rhs * (1 + 1e-12)


class TestPowerIdentity:
    def test_s_equal_one_exact(self, grid2d):
        f = random_smooth(grid2d, seed=16)
        lhs, rhs = power_identity_check(f, ExponentVector((2.0, 3.0)), 1.0)
        assert lhs == pytest.approx(rhs, rel=1e-14)

    def test_indicator_idempotent(self):
        g = Grid.uniform(2, 2.0, 129)
        f = box01(g)
        # indicator powers only move the half-jump samples; compare to the
        # box measure both ways at s = 1
        lhs, rhs = power_identity_check(f, ExponentVector((1.0, 1.0)), 1.0)
        assert lhs == pytest.approx(1.0, abs=1e-12)
        assert rhs == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_s2(self, grid2d):
        f = sampled(grid2d, lambda p: np.exp(-(p**2).sum(axis=-1)))
        lhs, rhs = power_identity_check(f, ExponentVector((2.0, 3.0)), 2.0)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_fractional_s(self, grid2d):
        f = random_smooth(grid2d, seed=17)
        lhs, rhs = power_identity_check(f, ExponentVector((1.5, 2.5)), 0.7)
        assert lhs == pytest.approx(rhs, rel=1e-10)
