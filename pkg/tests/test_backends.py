"""Compiled extension vs NumPy fallback: identical semantics on the hot kernels."""

import numpy as np
import pytest

from herzkit import _kernels_py

try:
    from herzkit import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

needs_compiled = pytest.mark.skipif(_kernels_c is None, reason="extension not built")


@needs_compiled
class TestQuasiNormKernel:
    def test_random_batches(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 3, 5):
            a = rng.uniform(1.0, 4.0, size=n)
            pts = rng.uniform(-10.0, 10.0, size=(500, n))
            got_c = np.asarray(_kernels_c.quasi_norm_points(pts, a, 1e-12))
            got_p = np.asarray(_kernels_py.quasi_norm_points(pts, a, 1e-12))
            assert np.allclose(got_c, got_p, rtol=1e-10, atol=1e-13)

    def test_zero_and_single_coordinate_rows(self):
        a = np.array([2.0, 1.0])
        pts = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, -3.0], [1e-12, 0.0]])
        got_c = np.asarray(_kernels_c.quasi_norm_points(pts, a, 1e-12))
        got_p = np.asarray(_kernels_py.quasi_norm_points(pts, a, 1e-12))
        assert got_c[0] == got_p[0] == 0.0
        assert np.allclose(got_c, got_p, rtol=1e-12)


@needs_compiled
class TestMaximalKernels:
    @pytest.mark.parametrize("periodic", [False, True])
    @pytest.mark.parametrize("stride", [1, 3])
    def test_scan_1d(self, periodic, stride):
        rng = np.random.default_rng(1)
        n, h = 161, 0.05
        absf = np.abs(rng.normal(size=n))
        semis = np.array([0.05, 0.17, 0.8, 3.3])
        for beta in (1.0, 0.6):
            out_c = absf.copy()
            out_p = absf.copy()
            _kernels_c.maximal_scan_1d(absf, h, semis, stride, beta, periodic, out_c)
            _kernels_py.maximal_scan_1d(absf, h, semis, stride, beta, periodic, out_p)
            assert np.allclose(out_c, out_p, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("periodic", [False, True])
    @pytest.mark.parametrize("stride", [1, 2])
    def test_scan_2d(self, periodic, stride):
        rng = np.random.default_rng(2)
        shape = (41, 37)
        h0, h1 = 0.1, 0.12
        absf = np.abs(rng.normal(size=shape))
        semi0 = np.array([0.1, 0.45, 1.7])
        semi1 = np.array([0.1, 0.3, 2.2])
        for beta in (1.0, 0.75):
            out_c = absf.copy()
            out_p = absf.copy()
            _kernels_c.maximal_scan_2d(absf, h0, h1, semi0, semi1, stride, stride, beta, periodic, out_c)
            _kernels_py.maximal_scan_2d(absf, h0, h1, semi0, semi1, stride, stride, beta, periodic, out_p)
            assert np.allclose(out_c, out_p, rtol=1e-12, atol=1e-14)


def test_backend_name_reported():
    from herzkit import backend_name

    assert backend_name() in ("compiled", "python")


def test_forced_python_backend_env(tmp_path):
    import subprocess
    import sys

    code = "import herzkit; print(herzkit.backend_name())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"HERZKIT_BACKEND": "python", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
