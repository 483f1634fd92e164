"""Seeded test-function generators: smooth batteries, atoms, molecules.

Everything here is deterministic given the seed, so verification reports
are reproducible byte for byte.
"""

from __future__ import annotations

import numpy as np

from .anisotropy import AnisotropyVector
from .errors import InputDomainError
from .hardy_atoms import AtomSpec, MoleculeSpec, monomial_field, multi_indices
from .mixed_norm import mixed_lebesgue_norm
from .sampled_function import (
    Grid,
    SampledFunction,
    dyadic_ball_measure,
    quasi_norm_field,
    weight_field,
)


def _bump_profile(u: np.ndarray) -> np.ndarray:
    """Smooth compactly supported profile (1 - u^2)^3 on |u| < 1."""
    return np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 3, 0.0)


def random_smooth(
    grid: Grid,
    seed: int,
    n_bumps: int = 4,
    scale: tuple[float, float] = (0.2, 1.0),
    support_radius: float | None = None,
) -> SampledFunction:
    """Random sum of Gaussian bumps, optionally windowed into a ball."""
    rng = np.random.default_rng(seed)
    pts = grid.points()
    L = np.array(grid.half_width)
    vals = np.zeros(pts.shape[0])
    for _ in range(n_bumps):
        c = rng.uniform(-0.5, 0.5, size=grid.dim) * L
        s = rng.uniform(*scale) * min(grid.half_width)
        amp = rng.uniform(-1.0, 1.0)
        vals += amp * np.exp(-((pts - c) ** 2).sum(axis=-1) / s**2)
    if support_radius is not None:
        r = np.linalg.norm(pts, axis=-1)
        vals *= _bump_profile(r / support_radius)
    return SampledFunction(grid, vals.reshape(grid.shape), label=f"smooth{seed}")


def random_nonneg(grid: Grid, seed: int, **kw) -> SampledFunction:
    f = random_smooth(grid, seed, **kw)
    return f.with_values(np.abs(f.values), label=f"nonneg{seed}")


def annulus_supported(
    grid: Grid,
    aniso: AnisotropyVector,
    seed: int,
    k_lo: int = -1,
    k_hi: int = 2,
    zero_mean: bool = False,
) -> SampledFunction:
    """Smooth function supported in the quasi-norm shell [2^(k_lo-1), 2^k_hi).

    With ``zero_mean`` the quadrature integral is removed exactly inside the
    shell, which keeps the function in the Hardy-side test range.
    """
    rng = np.random.default_rng(seed)
    qf = quasi_norm_field(grid, aniso)
    lo, hi = 2.0 ** (k_lo - 1), 2.0**k_hi
    u = (np.log(np.maximum(qf, 1e-300)) - 0.5 * (np.log(lo) + np.log(hi))) / (
        0.5 * (np.log(hi) - np.log(lo))
    )
    shell = _bump_profile(u)
    pts = grid.points().reshape(grid.shape + (grid.dim,))
    mod = np.zeros(grid.shape)
    for _ in range(3):
        c = rng.uniform(-0.5, 0.5, size=grid.dim) * np.array(grid.half_width)
        s = rng.uniform(0.3, 1.2) * float(np.sqrt(lo * hi))
        amp = rng.uniform(-1.0, 1.0)
        mod += amp * np.exp(-((pts - c) ** 2).sum(axis=-1) / s**2)
    vals = shell * (mod + 0.25)
    if zero_mean:
        w = weight_field(grid)
        ref = shell * shell
        denom = float((ref * w).sum())
        vals = vals - (float((vals * w).sum()) / denom) * ref
    return SampledFunction(grid, vals, label=f"annulus{seed}")


def _orthogonalize_moments(
    grid: Grid, vals: np.ndarray, weight_mask: np.ndarray, s: int
) -> np.ndarray:
    """Remove all monomial moments |beta| <= s exactly (quadrature sense)."""
    betas = multi_indices(grid.dim, s)
    w = weight_field(grid)
    basis = [monomial_field(grid, b) * weight_mask for b in betas]
    gram = np.array(
        [[float((bi * monomial_field(grid, bj) * w).sum()) for bj in betas] for bi in basis]
    )
    rhs = np.array([float((vals * monomial_field(grid, b) * w).sum()) for b in betas])
    coef = np.linalg.solve(gram, rhs)
    out = vals.copy()
    for c, b in zip(coef, basis):
        out = out - c * b
    return out


def make_atom(
    grid: Grid,
    spec: AtomSpec,
    seed: int,
    fill: float = 1.0,
) -> SampledFunction:
    """Random valid central atom: support in B_k, exact moments, sharp size.

    ``fill`` in (0, 1] scales the norm to fill * |B_k|^(-alpha).
    """
    if not 0.0 < fill <= 1.0:
        raise InputDomainError("fill must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    a = spec.anisotropy
    qf = quasi_norm_field(grid, a)
    lo, hi = 2.0 ** (spec.k - 1), 2.0**spec.k
    u = (qf - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    shell = _bump_profile(u)
    pts = grid.points().reshape(grid.shape + (grid.dim,))
    mod = np.zeros(grid.shape)
    for _ in range(3):
        c = rng.uniform(-1.0, 1.0, size=grid.dim) * hi
        width = rng.uniform(0.4, 1.0) * (hi - lo)
        mod += rng.uniform(-1.0, 1.0) * np.exp(
            -((pts - c) ** 2).sum(axis=-1) / width**2
        )
    raw = shell * (mod + 0.3)
    raw = _orthogonalize_moments(grid, raw, shell, spec.s)
    if not np.any(raw != 0.0):
        raise InputDomainError("degenerate atom draw; change the seed")
    norm = mixed_lebesgue_norm(SampledFunction(grid, raw), spec.q)
    target = fill * dyadic_ball_measure(spec.k, a) ** (-spec.alpha)
    return SampledFunction(grid, raw * (target / norm), label=f"atom{seed}_k{spec.k}")


def make_molecule(
    grid: Grid,
    spec: MoleculeSpec,
    seed: int,
    fill: float = 0.9,
) -> SampledFunction:
    """Gaussian-envelope molecule: no compact support, exact moments.

    Satisfies the dyadic size bound ||M||_q <= fill * |B_l|^(-alpha) for the
    given ball index ``spec.l`` (required).
    """
    if spec.l is None:
        raise InputDomainError("make_molecule needs a dyadic ball index l")
    rng = np.random.default_rng(seed)
    a = spec.anisotropy
    qf = quasi_norm_field(grid, a)
    r0 = 2.0**spec.l
    pts = grid.points().reshape(grid.shape + (grid.dim,))
    mod = np.zeros(grid.shape)
    for _ in range(3):
        c = rng.uniform(-0.7, 0.7, size=grid.dim) * r0
        width = rng.uniform(0.5, 1.0) * r0
        mod += rng.uniform(-1.0, 1.0) * np.exp(
            -((pts - c) ** 2).sum(axis=-1) / width**2
        )
    envelope = np.exp(-((qf / r0) ** 2))
    raw = envelope * (mod + 0.3)
    raw = _orthogonalize_moments(grid, raw, envelope, spec.s)
    if not np.any(raw != 0.0):
        raise InputDomainError("degenerate molecule draw; change the seed")
    norm = mixed_lebesgue_norm(SampledFunction(grid, raw), spec.q)
    target = fill * dyadic_ball_measure(spec.l, a) ** (-spec.alpha)
    return SampledFunction(grid, raw * (target / norm), label=f"molecule{seed}_l{spec.l}")
