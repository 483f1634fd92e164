import math

import numpy as np
import pytest

from herzkit.batteries import annulus_supported, random_smooth
from herzkit.errors import PreconditionError, TruncationWarning
from herzkit.herz import (
    BlockDecomposition,
    HerzParams,
    annulus_terms,
    block_decompose,
    block_synthesize,
    herz_norm,
    quasi_triangle_constant,
)
from herzkit.mixed_norm import ExponentVector, mixed_lebesgue_norm
from herzkit.sampled_function import (
    SampledFunction,
    annulus_mask,
    dyadic_ball_measure,
    quasi_norm_field,
)


@pytest.fixture
def params2d(aniso21):
    return HerzParams(0.4, 1.3, ExponentVector((2.0, 2.0)), aniso21, window=(-5, 3))


class TestHerzNorm:
    def test_zero(self, grid2d, params2d):
        z = SampledFunction(grid2d, np.zeros(grid2d.shape))
        assert herz_norm(z, params2d) == 0.0

    def test_single_annulus_one_term(self, grid2d, params2d):
        k0 = 1
        mask = annulus_mask(k0, params2d.anisotropy, grid2d, window=params2d.window)
        f = SampledFunction(grid2d, mask.indicator.astype(float))
        # one-term sum: |B_k|^alpha * ||chi_k||_q, both factors independent
        expect = dyadic_ball_measure(k0, params2d.anisotropy) ** params2d.alpha
        expect *= mixed_lebesgue_norm(f, params2d.q)
        assert herz_norm(f, params2d) == pytest.approx(expect, rel=1e-13)

    def test_scaling_homogeneity(self, grid2d, params2d):
        f = annulus_supported(grid2d, params2d.anisotropy, seed=1)
        assert herz_norm(-2.5 * f, params2d) == pytest.approx(
            2.5 * herz_norm(f, params2d), rel=1e-12
        )

    def test_p_infinity_takes_sup(self, grid2d, aniso21):
        f = annulus_supported(grid2d, aniso21, seed=2)
        q = ExponentVector((2.0, 2.0))
        pinf = HerzParams(0.4, math.inf, q, aniso21, window=(-5, 3))
        meas, norms = annulus_terms(f, pinf)
        assert herz_norm(f, pinf) == pytest.approx(float((meas * norms).max()))

    def test_truncation_warning(self, grid2d, aniso21):
        q = quasi_norm_field(grid2d, aniso21)
        f = SampledFunction(grid2d, (q >= 2.0).astype(float))
        narrow = HerzParams(0.2, 1.0, ExponentVector((2.0, 2.0)), aniso21, window=(-5, 0))
        with pytest.warns(TruncationWarning):
            herz_norm(f, narrow)

    def test_nonhomogeneous_uses_central_ball(self, grid2d, aniso21):
        q = ExponentVector((2.0, 2.0))
        hom = HerzParams(0.3, 1.0, q, aniso21, homogeneous=True, window=(-5, 3))
        non = HerzParams(0.3, 1.0, q, aniso21, homogeneous=False, window=(-5, 3))
        qf = quasi_norm_field(grid2d, aniso21)
        inner = SampledFunction(grid2d, (qf < 0.25).astype(float) * 0.7)
        # all mass inside the central ball: the non-homogeneous norm sees it
        # in the k=0 term with weight |B_0|^alpha
        expect = dyadic_ball_measure(0, aniso21) ** 0.3 * mixed_lebesgue_norm(inner, q)
        assert herz_norm(inner, non) == pytest.approx(expect, rel=1e-12)
        assert herz_norm(inner, hom) != pytest.approx(expect, rel=1e-3)


class TestQuasiTriangleConstant:
    def test_banach_range_is_one(self):
        assert quasi_triangle_constant(2.0, ExponentVector((1.0, 3.0))) == 1.0

    def test_small_p(self):
        assert quasi_triangle_constant(0.5, ExponentVector((1.0, 1.0))) == pytest.approx(2.0)

    def test_small_q(self):
        assert quasi_triangle_constant(1.0, ExponentVector((0.5, 1.0))) == pytest.approx(2.0)

    def test_random_pairs_respect_constant(self, grid2d, aniso21):
        rng = np.random.default_rng(3)
        for i in range(25):
            p = float(rng.uniform(0.4, 3.0))
            q = ExponentVector(tuple(rng.uniform(0.4, 3.0, size=2)))
            params = HerzParams(0.2, p, q, aniso21, window=(-5, 3))
            f = annulus_supported(grid2d, aniso21, seed=300 + 2 * i)
            g = annulus_supported(grid2d, aniso21, seed=301 + 2 * i)
            c = quasi_triangle_constant(p, q)
            s = herz_norm(f, params) + herz_norm(g, params)
            assert herz_norm(f + g, params) <= c * s * (1 + 1e-10)


class TestInclusions:
    def test_inclusion_p_monotone_exact(self, grid2d, aniso21):
        q = ExponentVector((2.0, 1.5))
        for i in range(20):
            f = annulus_supported(grid2d, aniso21, seed=500 + i)
            n1 = herz_norm(f, HerzParams(0.3, 0.8, q, aniso21, window=(-5, 3)))
            n2 = herz_norm(f, HerzParams(0.3, 2.4, q, aniso21, window=(-5, 3)))
            assert n2 <= n1 * (1 + 1e-12)

    def test_inclusion_alpha_nonhomogeneous(self, grid2d, aniso21):
        # alpha_2 <= alpha_1 => ||f||_(alpha_2) <= C ||f||_(alpha_1) with
        # C = v_n^(alpha_2 - alpha_1) = max_k |B_k|^(alpha_2 - alpha_1), k >= 0
        from herzkit.anisotropy import unit_ball_volume

        a1, a2 = 0.6, 0.2
        q = ExponentVector((2.0, 2.0))
        C = unit_ball_volume(2) ** (a2 - a1)
        for i in range(10):
            f = annulus_supported(grid2d, aniso21, seed=600 + i, k_lo=0, k_hi=2)
            lo = herz_norm(f, HerzParams(a2, 1.2, q, aniso21, homogeneous=False, window=(-5, 3)))
            hi = herz_norm(f, HerzParams(a1, 1.2, q, aniso21, homogeneous=False, window=(-5, 3)))
            assert lo <= C * hi * (1 + 1e-12)
            assert C <= 1.0  # v_n > 1 in dimensions 1..3

    def test_inclusion_exponent_vector(self, grid2d, aniso21):
        # q1 <= q2: per-annulus Hoelder with the measured annulus-indicator
        # norm gives ||f||_{alpha,p,q1} <= C_window ||f||_{alpha+delta,p,q2}
        q1 = ExponentVector((1.5, 2.0))
        q2 = ExponentVector((2.0, 3.0))
        delta = sum(1.0 / a - 1.0 / b for a, b in zip(q1.q, q2.q))
        r = ExponentVector(tuple(1.0 / (1.0 / a - 1.0 / b) for a, b in zip(q1.q, q2.q)))
        window = (-4, 3)
        cs = []
        for k in range(window[0], window[1] + 1):
            m = annulus_mask(k, aniso21, grid2d, window=window)
            chi = SampledFunction(grid2d, m.indicator.astype(float))
            cs.append(
                mixed_lebesgue_norm(chi, r)
                / dyadic_ball_measure(k, aniso21) ** delta
            )
        c_window = max(cs)
        for i in range(10):
            f = annulus_supported(grid2d, aniso21, seed=700 + i)
            lhs = herz_norm(f, HerzParams(0.25, 1.1, q1, aniso21, window=window))
            rhs = herz_norm(f, HerzParams(0.25 + delta, 1.1, q2, aniso21, window=window))
            assert lhs <= c_window * rhs * (1 + 1e-10)

    def test_holder_on_herz(self, grid2d, aniso21):
        # alpha = alpha1 + alpha2, 1/p = 1/p1 + 1/p2, 1/q = 1/q1 + 1/q2
        a1, a2 = 0.3, 0.2
        p1, p2 = 2.0, 3.0
        q1 = ExponentVector((2.0, 4.0))
        q2 = ExponentVector((3.0, 4.0))
        p = 1.0 / (1.0 / p1 + 1.0 / p2)
        q = ExponentVector(tuple(1.0 / (1.0 / u + 1.0 / v) for u, v in zip(q1.q, q2.q)))
        w = (-4, 3)
        for i in range(10):
            f = annulus_supported(grid2d, aniso21, seed=800 + 2 * i)
            g = annulus_supported(grid2d, aniso21, seed=801 + 2 * i)
            lhs = herz_norm(f * g, HerzParams(a1 + a2, p, q, aniso21, window=w))
            rhs = herz_norm(f, HerzParams(a1, p1, q1, aniso21, window=w)) * herz_norm(
                g, HerzParams(a2, p2, q2, aniso21, window=w)
            )
            assert lhs <= rhs * (1 + 1e-10)


class TestBlocks:
    def test_single_annulus_single_lambda(self, grid2d, params2d):
        mask = annulus_mask(0, params2d.anisotropy, grid2d, window=params2d.window)
        f = SampledFunction(grid2d, mask.indicator * 0.4)
        dec = block_decompose(f, params2d)
        assert dec.ks == (0,)
        assert len(dec.lambdas) == 1

    def test_block_norms_saturate_bound(self, grid2d, params2d):
        f = annulus_supported(grid2d, params2d.anisotropy, seed=4)
        dec = block_decompose(f, params2d)
        for k, b in zip(dec.ks, dec.blocks):
            expect = dyadic_ball_measure(k, params2d.anisotropy) ** (-params2d.alpha)
            assert mixed_lebesgue_norm(b, params2d.q) == pytest.approx(expect, rel=1e-12)

    def test_coefficients_recover_norm(self, grid2d, params2d):
        f = annulus_supported(grid2d, params2d.anisotropy, seed=5)
        dec = block_decompose(f, params2d)
        n = herz_norm(f, params2d)
        assert dec.coefficient_lp() ** params2d.p == pytest.approx(n**params2d.p, rel=1e-12)

    def test_roundtrip_exact(self, grid2d, params2d):
        f = annulus_supported(grid2d, params2d.anisotropy, seed=6)
        rec = block_synthesize(block_decompose(f, params2d))
        assert np.max(np.abs(rec.values - f.values)) <= 1e-14 * np.max(np.abs(f.values))

    def test_empty_input_empty_decomposition(self, grid2d, params2d):
        z = SampledFunction(grid2d, np.zeros(grid2d.shape))
        dec = block_decompose(z, params2d)
        assert dec.lambdas == ()
        assert np.all(block_synthesize(dec).values == 0.0)

    def test_precondition_alpha(self, grid2d, aniso21):
        bad = HerzParams(-0.1, 1.0, ExponentVector((2.0, 2.0)), aniso21)
        f = annulus_supported(grid2d, aniso21, seed=7)
        with pytest.raises(PreconditionError):
            block_decompose(f, bad)

    def test_precondition_q(self, grid2d, aniso21):
        bad = HerzParams(0.3, 1.0, ExponentVector((0.7, 2.0)), aniso21)
        f = annulus_supported(grid2d, aniso21, seed=8)
        with pytest.raises(PreconditionError):
            block_decompose(f, bad)

    def test_synthesis_bound_small_p(self, grid2d, aniso21):
        # random valid block family: ||sum lambda_k b_k|| <= C (sum |lambda|^p)^(1/p)
        # with C = (1 - 2^(-v alpha p))^(-1/p) from the geometric tail
        alpha, p = 0.4, 0.7
        q = ExponentVector((2.0, 2.0))
        params = HerzParams(alpha, p, q, aniso21, window=(-4, 3))
        rng = np.random.default_rng(9)
        ks, lambdas, blocks = [], [], []
        for k in range(-3, 3):
            mask = annulus_mask(k, aniso21, grid2d, window=params.window)
            raw = random_smooth(grid2d, seed=900 + k).values * mask.indicator
            nrm = mixed_lebesgue_norm(SampledFunction(grid2d, raw), q)
            if nrm == 0:
                continue
            bound = dyadic_ball_measure(k, aniso21) ** (-alpha)
            blocks.append(SampledFunction(grid2d, raw * (bound / nrm) * rng.uniform(0.3, 1.0)))
            lambdas.append(float(rng.uniform(0.1, 2.0)))
            ks.append(k)
        f = SampledFunction(grid2d, sum(l * b.values for l, b in zip(lambdas, blocks)))
        lp = float(np.sum(np.abs(lambdas) ** p) ** (1 / p))
        C = (1.0 - 2.0 ** (-aniso21.v * alpha * p)) ** (-1.0 / p)
        assert herz_norm(f, params) <= C * lp * (1 + 1e-10)

    def test_files_roundtrip(self, tmp_path, grid2d, params2d):
        f = annulus_supported(grid2d, params2d.anisotropy, seed=10)
        dec = block_decompose(f, params2d)
        dec.to_files(str(tmp_path / "dec"))
        back = BlockDecomposition.from_files(str(tmp_path / "dec"))
        assert back.ks == dec.ks
        assert np.allclose(back.lambdas, dec.lambdas)
        assert back.params == params2d
        rec = block_synthesize(back)
        assert np.allclose(rec.values, f.values)
