"""Self-contained verification suites shared by the CLI and the test rig.

Each suite returns a JSON-serializable dict with measured quantities and a
``passed`` flag; nothing here depends on external data.
"""

from __future__ import annotations

import math

import numpy as np

from .anisotropy import AnisotropyVector, dilate, quasi_norm
from .batteries import random_nonneg, random_smooth
from .errors import InputDomainError
from .herz import HerzParams, herz_norm, quasi_triangle_constant
from .mixed_norm import ExponentVector
from .sampled_function import Grid, SampledFunction
from .weights_maximal import BallFamily, hl_maximal


def quasinorm_suite(seed: int = 0, n_samples: int = 10_000, tol: float = 1e-10) -> dict:
    """Homogeneity, quasi-triangle, and sandwich bounds on random draws.

    Homogeneity is |Q(t^a x) - t Q(x)| <= tol * t with dilation parameters
    kept away from 0 so the absolute root tolerance stays subordinate.
    """
    rng = np.random.default_rng(seed)
    max_hom = 0.0
    tri_viol = 0
    sand_viol = 0
    fp_slack = 1e-12
    for n in (1, 2, 3, 4):
        m = n_samples // 4
        a = AnisotropyVector(tuple(rng.uniform(1.0, 4.0, size=n)))
        x = rng.uniform(-10.0, 10.0, size=(m, n))
        y = rng.uniform(-10.0, 10.0, size=(m, n))
        t = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=m))
        qx = quasi_norm(x, a)
        qy = quasi_norm(y, a)
        td = np.stack([dilate(ti, a, xi) for ti, xi in zip(t, x)])
        qtd = quasi_norm(td, a)
        max_hom = max(max_hom, float(np.max(np.abs(qtd - t * qx) / t)))
        qsum = quasi_norm(x + y, a)
        tri_viol += int(np.sum(qsum > qx + qy + fp_slack * (qx + qy + 1)))
        per = np.abs(x) ** (1.0 / np.array(a.a))
        lo = per.max(axis=1)
        hi = per.sum(axis=1)
        sand_viol += int(np.sum((qx < lo * (1 - fp_slack) - fp_slack)
                                | (qx > hi * (1 + fp_slack) + fp_slack)))
    ref = ((math.sqrt(5.0) - 1.0) / 2.0) ** -0.5
    pinned = abs(quasi_norm((1.0, 1.0), AnisotropyVector((2.0, 1.0))) - ref)
    return {
        "max_homogeneity_defect": max_hom,
        "homogeneity_ok": max_hom <= tol,
        "triangle_violations": tri_viol,
        "sandwich_violations": sand_viol,
        "pinned_root_error": pinned,
        "pinned_root_ok": pinned <= 1e-10,
        "passed": bool(max_hom <= tol and tri_viol == 0 and sand_viol == 0 and pinned <= 1e-10),
    }


def _default_rubio_params(grid: Grid) -> HerzParams:
    n = grid.dim
    return HerzParams(
        alpha=0.15,
        p=2.0,
        q=ExponentVector((2.0,) * n),
        anisotropy=AnisotropyVector.isotropic(n),
        homogeneous=True,
        window=(-6, 4),
    )


def rubio_suite(
    grid: Grid | None = None,
    B: float | str = "auto",
    K: int = 12,
    seed: int = 0,
    n_h: int = 50,
) -> dict:
    """Truncated Rubio de Francia checks (R1), (R2), (R3).

    (R1): h <= R_K h pointwise.  (R2): ||R_K h|| <= 2 ||h|| in a Herz norm
    for which B dominates the maximal operator; with B = "auto" the bound is
    measured on the battery's own iterates plus 10% headroom.  (R3):
    M(R_K h) <= 2 B R_{K+1} h pointwise (the truncation-corrected A_1 bound).
    """
    if grid is None:
        grid = Grid.uniform(1, 8.0, 257)
    params = _default_rubio_params(grid)
    family = BallFamily.default(grid)
    norm = lambda f: herz_norm(f, params)

    hs = [random_nonneg(grid, seed + 31 * i, support_radius=3.5) for i in range(n_h)]
    hs = [h for h in hs if norm(h) > 0]

    # All iterates M^k h, k = 0..K+1, shared by every check.
    iterates = []
    ratio_max = 1.0
    for h in hs:
        seq = [h]
        prev = norm(h)
        for _ in range(K + 1):
            nxt = hl_maximal(seq[-1], family)
            cur = norm(nxt)
            if prev > 0:
                ratio_max = max(ratio_max, cur / prev)
            prev = cur
            seq.append(nxt)
        iterates.append(seq)

    if B == "auto":
        b_val = 1.1 * ratio_max
    else:
        b_val = float(B)
        if not b_val > 0.5:
            raise InputDomainError("B must exceed 1/2")

    r1_viol = 0
    r3_viol = 0
    r2_max = 0.0
    slack = 1e-10
    for h, seq in zip(hs, iterates):
        coef = (2.0 * b_val) ** -np.arange(K + 2)
        rk = sum(c * s.values for c, s in zip(coef[: K + 1], seq[: K + 1]))
        rk1 = sum(c * s.values for c, s in zip(coef, seq))
        r1_viol += int(np.sum(h.values > rk * (1 + slack) + slack * np.max(rk)))
        m_rk = hl_maximal(SampledFunction(grid, rk), family).values
        bound = 2.0 * b_val * rk1
        r3_viol += int(np.sum(m_rk > bound * (1 + slack) + slack * np.max(bound)))
        r2_max = max(r2_max, norm(SampledFunction(grid, rk)) / norm(h))

    # Geometric series witness: constant input under the periodic convention.
    per_family = BallFamily.default(grid, boundary="periodic")
    ones = SampledFunction(grid, np.ones(grid.shape))
    acc = np.zeros(grid.shape)
    cur = ones
    for k in range(K + 1):
        if k > 0:
            cur = hl_maximal(cur, per_family)
        acc = acc + cur.values / (2.0 * b_val) ** k
    geo_expected = sum((2.0 * b_val) ** -k for k in range(K + 1))
    geo_err = float(np.max(np.abs(acc - geo_expected)))

    return {
        "B": b_val,
        "K": K,
        "battery_size": len(hs),
        "r1_violations": r1_viol,
        "r2_max_ratio": r2_max,
        "r2_ok": r2_max <= 2.0 + 1e-9,
        "r3_violations": r3_viol,
        "geometric_series_error": geo_err,
        "geometric_series_ok": geo_err <= 1e-9,
        "passed": bool(
            r1_viol == 0 and r2_max <= 2.0 + 1e-9 and r3_viol == 0 and geo_err <= 1e-9
        ),
    }


def herz_suite(
    grid: Grid | None = None,
    seed: int = 0,
    n_pairs: int = 50,
) -> dict:
    """Quasi-triangle with the formula constant and inclusion monotonicity."""
    if grid is None:
        grid = Grid.uniform(2, 4.0, 65)
    n = grid.dim
    aniso = AnisotropyVector((2.0, 1.0)) if n == 2 else AnisotropyVector.isotropic(n)
    rng = np.random.default_rng(seed)
    tri_viol = 0
    incl_viol = 0
    worst_tri = 0.0
    for i in range(n_pairs):
        qs = tuple(float(q) for q in rng.uniform(0.4, 3.0, size=n))
        p = float(rng.uniform(0.4, 3.0))
        alpha = float(rng.uniform(-0.3, 0.8))
        params = HerzParams(alpha, p, ExponentVector(qs), aniso, window=(-4, 3))
        f = random_smooth(grid, seed + 2 * i, support_radius=0.9 * min(grid.half_width))
        g = random_smooth(grid, seed + 2 * i + 1, support_radius=0.9 * min(grid.half_width))
        nf, ng = herz_norm(f, params), herz_norm(g, params)
        nsum = herz_norm(f + g, params)
        c = quasi_triangle_constant(p, params.q)
        ratio = nsum / (c * (nf + ng)) if nf + ng > 0 else 0.0
        worst_tri = max(worst_tri, ratio)
        if ratio > 1 + 1e-10:
            tri_viol += 1
        p2 = p * float(rng.uniform(1.0, 2.5))
        n_p2 = herz_norm(f, HerzParams(alpha, p2, params.q, aniso, window=(-4, 3)))
        if n_p2 > nf * (1 + 1e-12):
            incl_viol += 1
    return {
        "pairs": n_pairs,
        "triangle_violations": tri_viol,
        "worst_triangle_ratio": worst_tri,
        "inclusion_violations": incl_viol,
        "passed": bool(tri_viol == 0 and incl_viol == 0),
    }


SUITES = {
    "rubio": rubio_suite,
    "quasinorm": quasinorm_suite,
    "herz": herz_suite,
}
