import math

import numpy as np
import pytest
from scipy.signal import fftconvolve

from herzkit.anisotropy import AnisotropyVector
from herzkit.batteries import annulus_supported, make_atom, make_molecule
from herzkit.errors import CapabilityError, InputDomainError, PreconditionError
from herzkit.hardy_atoms import (
    AtomicDecomposition,
    AtomSpec,
    MoleculeSpec,
    SchwartzWindow,
    atom_check,
    atomic_decompose,
    decomposition_index_range,
    herz_hardy_norm,
    molecule_check,
    molecule_to_atoms,
    n_index,
    radial_maximal,
    schwartz_seminorm,
)
from herzkit.herz import HerzParams, herz_norm
from herzkit.mixed_norm import ExponentVector, mixed_lebesgue_norm
from herzkit.sampled_function import (
    Grid,
    SampledFunction,
    quadrature_integral,
    quasi_norm_field,
    weight_field,
)
from herzkit.weights_maximal import BallFamily, hl_maximal

from conftest import sampled

A1 = AnisotropyVector((1.0,))
Q2 = ExponentVector((2.0,))


@pytest.fixture(scope="module")
def g513():
    return Grid.uniform(1, 8.0, 513)


@pytest.fixture(scope="module")
def window1d():
    return SchwartzWindow.default(A1, Q2, (-8, 3))


class TestNIndex:
    def test_isotropic_unit_exponents(self):
        assert n_index(ExponentVector((1.0, 1.0)), AnisotropyVector((1.0, 1.0))) == 11

    def test_anisotropic_case(self):
        assert n_index(ExponentVector((2.0, 2.0)), AnisotropyVector((2.0, 1.0))) == 26

    def test_monotone_in_p_minus(self):
        a = AnisotropyVector((1.5, 1.0))
        prev = None
        for p in (2.0, 1.0, 0.5, 0.25):
            cur = n_index(ExponentVector((p, p)), a)
            if prev is not None:
                assert cur >= prev
            prev = cur


class TestSchwartzSeminorm:
    def test_zero_function(self, g513):
        z = SampledFunction(g513, np.zeros(g513.shape))
        assert schwartz_seminorm(z, 2, A1) == 0.0

    def test_order_zero_is_sup(self):
        g = Grid.uniform(1, 6.0, 513)
        phi = sampled(g, lambda p: np.exp(-p[:, 0] ** 2))
        assert schwartz_seminorm(phi, 0, A1) == pytest.approx(1.0)

    def test_order_two_vs_symbolic_gaussian(self):
        g = Grid.uniform(1, 6.0, 513)
        phi = sampled(g, lambda p: np.exp(-p[:, 0] ** 2))
        got = schwartz_seminorm(phi, 2, A1)
        x = g.axes()[0]
        d0 = np.exp(-(x**2))
        d1 = -2 * x * d0
        d2 = (4 * x**2 - 2) * d0
        stack = np.max(np.abs(np.stack([d0, d1, d2])), axis=0)
        oracle = float(np.max((1 + x**2) * stack))  # bracket is sqrt(1+x^2) here
        assert got == pytest.approx(oracle, rel=2e-3)

    def test_order_beyond_stencils(self, g513):
        phi = sampled(g513, lambda p: np.exp(-p[:, 0] ** 2))
        with pytest.raises(CapabilityError):
            schwartz_seminorm(phi, 9, A1)


class TestRadialMaximal:
    def test_window_mass(self, g513, window1d):
        assert window1d.validate_mass(g513) == pytest.approx(1.0, abs=1e-9)

    def test_constant_reproduced_in_core(self, g513, window1d):
        c = SampledFunction(g513, np.full(g513.shape, 1.7))
        out = radial_maximal(c, window1d)
        x = np.abs(g513.axes()[0])
        core = x < 4.0  # away from the zero-extension boundary
        assert np.allclose(out.values[core], 1.7, rtol=1e-6)

    def test_dominated_by_hl_maximal(self, g513, window1d):
        # |M0 f| <= ||phi||_1 M f with the unit-mass window (isotropic case)
        f = annulus_supported(g513, A1, seed=1)
        m0 = radial_maximal(f, window1d)
        mf = hl_maximal(f, BallFamily.default(g513))
        assert np.all(m0.values <= mf.values * (1 + 1e-9) + 1e-12)

    def test_dominates_f_pointwise(self, g513, window1d):
        # the sub-spacing scale makes the mollifier one-hot, so M0 f >= |f|
        f = annulus_supported(g513, A1, seed=2)
        m0 = radial_maximal(f, window1d).values
        assert np.all(m0 >= np.abs(f.values) * (1 - 1e-9))

    def test_single_cell_bump_oracle(self, g513):
        w = SchwartzWindow.default(A1, Q2, (-3, 2))
        vals = np.zeros(g513.shape)
        vals[200] = 1.0
        f = SampledFunction(g513, vals)
        got = radial_maximal(f, w)
        h = g513.spacing[0]
        m = g513.points_per_axis[0]
        best = np.zeros(m)
        for k in range(-3, 3):
            t = 2.0**k
            offs = h * np.arange(-(m - 1), m)
            ker = np.exp(-((offs / t) ** 2))
            ker /= ker.sum()
            conv = fftconvolve(vals, ker, mode="same")
            best = np.maximum(best, np.abs(conv))
        assert np.allclose(got.values, best, rtol=1e-9, atol=1e-12)

    def test_sublinear_and_monotone(self, g513, window1d):
        f = annulus_supported(g513, A1, seed=3)
        g = annulus_supported(g513, A1, seed=4)
        mfg = radial_maximal(f + g, window1d).values
        assert np.all(
            mfg <= radial_maximal(f, window1d).values + radial_maximal(g, window1d).values + 1e-12
        )
        bigger = f.with_values(np.abs(f.values) * 1.5)
        assert np.all(
            radial_maximal(f, window1d).values
            <= radial_maximal(bigger, window1d).values * (1 + 1e-12) + 1e-15
        )


class TestHerzHardyNorm:
    def test_zero(self, g513, window1d):
        params = HerzParams(0.5, 1.0, Q2, A1, window=(-6, 4))
        z = SampledFunction(g513, np.zeros(g513.shape))
        assert herz_hardy_norm(z, params, window1d) == 0.0

    def test_dominates_herz_norm(self, g513, window1d):
        params = HerzParams(0.3, 1.5, Q2, A1, window=(-6, 4))
        for seed in range(5):
            f = annulus_supported(g513, A1, seed=seed)
            assert herz_norm(f, params) <= herz_hardy_norm(f, params, window1d) * (1 + 1e-6)

    def test_finite_for_zero_mean_bump(self, g513, window1d):
        params = HerzParams(0.5, 1.0, Q2, A1, window=(-6, 4))
        f = annulus_supported(g513, A1, seed=6, zero_mean=True)
        val = herz_hardy_norm(f, params, window1d)
        assert math.isfinite(val) and val > 0


class TestAtoms:
    def test_generated_atoms_pass(self, g513):
        for k in range(-2, 3):
            spec = AtomSpec(0.5, Q2, 0, k, A1)
            rep = atom_check(make_atom(g513, spec, seed=20 + k), spec)
            assert rep.passed

    def test_higher_moment_atom(self, g513):
        spec = AtomSpec(0.5, Q2, 2, 1, A1)
        rep = atom_check(make_atom(g513, spec, seed=30), spec)
        assert rep.passed

    def test_translated_support_fails(self, g513):
        spec = AtomSpec(0.5, Q2, 0, 0, A1)
        atom = make_atom(g513, spec, seed=31)
        shifted = SampledFunction(g513, np.roll(atom.values, 150))
        rep = atom_check(shifted, spec)
        assert not rep.support_ok

    def test_oversized_fails_with_measured_excess(self, g513):
        spec = AtomSpec(0.5, Q2, 0, 0, A1)
        atom = make_atom(g513, spec, seed=32)
        rep = atom_check(2.0 * atom, spec)
        assert not rep.size_ok
        assert rep.norm == pytest.approx(2.0 * rep.bound, rel=1e-10)

    def test_odd_bump_has_zero_mean(self, g513):
        x = g513.axes()[0]
        vals = np.where(np.abs(x) <= 1.0, x * np.exp(-(x**2)), 0.0)
        f = SampledFunction(g513, vals)
        f = f.with_values(f.values / mixed_lebesgue_norm(f, Q2) / 2.0)
        rep = atom_check(f, AtomSpec(0.5, Q2, 0, 0, A1))
        assert rep.passed

    def test_required_min_s(self):
        spec = AtomSpec(1.5, ExponentVector((2.0, 2.0)), 3, 0, AnisotropyVector((2.0, 1.0)))
        v, am = 3.0, 1.0
        expect = math.floor((v / am) * (1.5 + (1.5 / 3.0) - 1.0))
        assert spec.required_min_s == expect

    def test_restricted_type_needs_nonnegative_k(self):
        with pytest.raises(InputDomainError):
            AtomSpec(0.5, Q2, 0, -1, A1, restricted=True)


class TestMolecules:
    def test_zero_function(self, g513):
        spec = MoleculeSpec(0.5, Q2, 0, 1.0, A1, l=0)
        z = SampledFunction(g513, np.zeros(g513.shape))
        rep = molecule_check(z, spec)
        assert rep.r_q == 0.0
        assert rep.moments_ok

    def test_atoms_have_uniform_r(self, g513):
        rs = []
        for k in range(-2, 3):
            aspec = AtomSpec(0.5, Q2, 0, k, A1)
            atom = make_atom(g513, aspec, seed=40 + k)
            mspec = MoleculeSpec(0.5, Q2, 0, 1.0, A1, l=k)
            rep = molecule_check(atom, mspec)
            assert rep.passed
            rs.append(rep.r_q)
        assert max(rs) / min(rs) <= 3.0

    def test_gaussian_envelope_molecule(self, g513):
        spec = MoleculeSpec(0.5, Q2, 0, 1.0, A1, l=0)
        mol = make_molecule(g513, spec, seed=41)
        rep = molecule_check(mol, spec)
        assert rep.passed
        assert math.isfinite(rep.r_q) and rep.r_q > 0
        # molecules strictly generalize atoms: no compact support required
        outside = quasi_norm_field(g513, A1) > 2.0
        assert np.abs(mol.values[outside]).max() > 0

    def test_moment_violation_detected(self, g513):
        spec = MoleculeSpec(0.5, Q2, 0, 1.0, A1, l=0)
        mol = make_molecule(g513, spec, seed=42)
        off = mol.with_values(mol.values + 1e-3 * np.exp(-quasi_norm_field(g513, A1) ** 2))
        assert not molecule_check(off, spec).moments_ok

    def test_epsilon_floor_enforced(self):
        with pytest.raises(InputDomainError):
            MoleculeSpec(0.5, Q2, 2, 1.0, A1, l=0)  # epsilon <= s


class TestAtomicDecompose:
    def params(self):
        return HerzParams(0.5, 1.0, Q2, A1, window=(-6, 4))

    def test_index_range_enforced(self, g513, window1d):
        f = annulus_supported(g513, A1, seed=50, zero_mean=True)
        bad = HerzParams(0.1, 1.0, Q2, A1, window=(-6, 4))
        lo, hi = decomposition_index_range(bad)
        assert not (lo <= 0.1 < hi)
        with pytest.raises(PreconditionError):
            atomic_decompose(f, bad, window1d)

    def test_zero_function_empty(self, g513, window1d):
        dec = atomic_decompose(SampledFunction(g513, np.zeros(g513.shape)), self.params(), window1d)
        assert dec.lambdas1 == () and dec.lambdas2 == ()
        assert np.all(dec.synthesize().values == 0.0)

    def test_reconstruction_distributional(self, g513, window1d):
        params = self.params()
        f = annulus_supported(g513, A1, seed=51, zero_mean=True)
        dec = atomic_decompose(f, params, window1d)
        resid = f.values - dec.synthesize().values
        w = weight_field(g513)
        fl2 = math.sqrt(float((f.values**2 * w).sum()))
        for seed in range(10):
            phi = annulus_supported(g513, A1, seed=600 + seed, k_lo=-2, k_hi=3)
            pl2 = math.sqrt(float((phi.values**2 * w).sum()))
            pairing = abs(float((resid * phi.values * w).sum()))
            assert pairing <= 1e-6 * fl2 * pl2

    def test_produced_atoms_valid(self, g513, window1d):
        params = self.params()
        f = annulus_supported(g513, A1, seed=52, zero_mean=True)
        dec = atomic_decompose(f, params, window1d)
        assert dec.atoms1
        for k, atom in zip(dec.ks1 + dec.ks2, dec.atoms1 + dec.atoms2):
            rep = atom_check(atom, AtomSpec(params.alpha, params.q, 0, k, A1))
            assert rep.passed

    def test_coefficients_controlled_by_hardy_norm(self, g513, window1d):
        params = self.params()
        cs = []
        for seed in (53, 54, 55):
            f = annulus_supported(g513, A1, seed=seed, zero_mean=True)
            dec = atomic_decompose(f, params, window1d)
            hh = herz_hardy_norm(f, params, window1d)
            cs.append(dec.coefficient_lp() ** params.p / hh**params.p)
        assert all(math.isfinite(c) and c > 0 for c in cs)
        assert max(cs) / min(cs) <= 50.0  # single reported constant scale

    def test_file_roundtrip(self, tmp_path, g513, window1d):
        params = self.params()
        f = annulus_supported(g513, A1, seed=56, zero_mean=True)
        dec = atomic_decompose(f, params, window1d)
        dec.to_files(str(tmp_path / "adec"))
        back = AtomicDecomposition.from_files(str(tmp_path / "adec"))
        assert back.ks1 == dec.ks1 and back.ks2 == dec.ks2
        assert np.allclose(back.synthesize().values, dec.synthesize().values)
        assert back.report["c1"] == dec.report["c1"]

    def test_2d_smoke(self, aniso21):
        g = Grid.uniform(2, 4.0, 65)
        q = ExponentVector((2.0, 2.0))
        params = HerzParams(0.5, 1.0, q, aniso21, window=(-4, 2))
        w = SchwartzWindow.default(aniso21, q, (-6, 2))
        f = annulus_supported(g, aniso21, seed=57, k_lo=-1, k_hi=1, zero_mean=True)
        dec = atomic_decompose(f, params, w)
        resid = np.abs(f.values - dec.synthesize().values).max()
        assert resid <= 1e-10 * np.abs(f.values).max()


class TestMoleculeToAtoms:
    def spec(self, l=0):
        return MoleculeSpec(0.5, Q2, 0, 1.0, A1, l=l)

    def params(self):
        return HerzParams(0.5, 1.0, Q2, A1, window=(-6, 4))

    def test_requires_valid_molecule(self, g513):
        f = annulus_supported(g513, A1, seed=60)  # nonzero mean
        with pytest.raises(PreconditionError):
            molecule_to_atoms(f, self.spec(), self.params())

    def test_atom_input_concentrates(self, g513):
        aspec = AtomSpec(0.5, Q2, 0, 0, A1)
        atom = make_atom(g513, aspec, seed=61)
        dec = molecule_to_atoms(atom, self.spec(), self.params())
        lam = np.array(dec.lambdas1 + dec.lambdas2)
        assert len(dec.atoms1) >= 1
        # the atom's own ball sits inside the first partition cell, so the
        # leading piece carries everything
        assert dec.lambdas1[0] == pytest.approx(np.max(lam))
        assert float(np.sum(lam**self.params().p)) < 10.0

    def test_pieces_have_zero_mean(self, g513):
        mol = make_molecule(g513, self.spec(), seed=62)
        dec = molecule_to_atoms(mol, self.spec(), self.params())
        for lam, atom in zip(dec.lambdas1 + dec.lambdas2, dec.atoms1 + dec.atoms2):
            assert abs(quadrature_integral(atom)) * lam <= 1e-10

    def test_reconstruction_exact_minus_mean_residual(self, g513):
        mol = make_molecule(g513, self.spec(), seed=63)
        dec = molecule_to_atoms(mol, self.spec(), self.params())
        resid = np.abs(mol.values - dec.synthesize().values).max()
        assert resid <= 1e-10 * np.abs(mol.values).max() + abs(dec.report["residual_mean"])

    def test_piece_norm_decay_bound(self, g513):
        # || M_k - F_k ||_q <= C 2^(-k v a) |B_(sigma+k)|^(-alpha), C measured
        mol = make_molecule(g513, self.spec(), seed=64)
        spec = self.spec()
        dec = molecule_to_atoms(mol, spec, self.params())
        sigma = dec.report["sigma_eff"]
        c = 0.0
        from herzkit.sampled_function import dyadic_ball_measure

        for k, nrm in dec.report["piece_norms"]:
            bound = 2.0 ** (-k * A1.v * spec.a_exp) * dyadic_ball_measure(sigma + k, A1) ** (
                -spec.alpha
            )
            c = max(c, nrm / bound)
        assert math.isfinite(c) and c > 0
        # the reported coefficient scale is exactly the measured sharp constant
        assert c == pytest.approx(dec.report["piece_bound_c1"], rel=1e-9)

    def test_lambda_sums_uniform_over_battery(self, g513):
        params = self.params()
        sums = []
        for seed in range(65, 71):
            mol = make_molecule(g513, self.spec(), seed=seed)
            dec = molecule_to_atoms(mol, self.spec(), params)
            sums.append(dec.coefficient_lp() ** params.p)
        assert max(sums) <= 20.0 * max(min(sums), 1e-6)
