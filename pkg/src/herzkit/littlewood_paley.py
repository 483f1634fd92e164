"""Square functions g, S (Lusin area), and g* with admissible kernels.

Scales are dyadic, t_j = 2^j over a configured j-range, and the dt/t
integral is a trapezoid rule in log t (node weight ln 2, halved at the
ends).  Convolution kernels are sampled on the offset lattice with the
isotropic dilation psi_t(x) = t^(-n) psi(x/t) and recentred to exact zero
sum so that the defining cancellation against constants survives
discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .anisotropy import unit_ball_volume
from .errors import InputDomainError
from .sampled_function import Grid, SampledFunction, quadrature_integral, weight_field

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LPKernel:
    """Kernel for the square functions: zero mean, decay, L1 modulus.

    ``psi`` maps an array of points of shape (m, n) to values of shape (m,).
    ``decay_alpha`` and ``smoothness_gamma`` are the exponents the kernel is
    supposed to satisfy in conditions (ii) and (iii); the admissibility
    check measures the corresponding constants.
    """

    psi: Callable[[np.ndarray], np.ndarray]
    decay_alpha: float
    smoothness_gamma: float
    j_range: tuple[int, int] = (-5, 3)
    label: str = "psi"

    def __post_init__(self):
        if self.decay_alpha <= 0 or self.smoothness_gamma <= 0:
            raise InputDomainError("kernel exponents must be positive")
        if self.j_range[0] > self.j_range[1]:
            raise InputDomainError("empty scale range")

    @property
    def scales(self) -> np.ndarray:
        return 2.0 ** np.arange(self.j_range[0], self.j_range[1] + 1).astype(float)


def mexican_hat(j_range: tuple[int, int] = (-5, 3)) -> LPKernel:
    """1D kernel (1 - x^2) exp(-x^2 / 2); zero mean in closed form."""

    def psi(pts):
        x = np.asarray(pts)[..., 0]
        return (1.0 - x * x) * np.exp(-0.5 * x * x)

    return LPKernel(psi, decay_alpha=2.0, smoothness_gamma=1.0, j_range=j_range,
                    label="mexican-hat")


def laplacian_of_gaussian(j_range: tuple[int, int] = (-5, 3)) -> LPKernel:
    """2D kernel (|x|^2 - 2) exp(-|x|^2 / 2); zero mean by the divergence theorem."""

    def psi(pts):
        r2 = (np.asarray(pts) ** 2).sum(axis=-1)
        return (r2 - 2.0) * np.exp(-0.5 * r2)

    return LPKernel(psi, decay_alpha=2.0, smoothness_gamma=1.0, j_range=j_range,
                    label="log-2d")


def lp_admissibility_check(
    k: LPKernel,
    grid: Grid,
    zero_mean_tol: float = 1e-6,
    max_decay_constant: float | None = None,
    max_modulus_constant: float | None = None,
    n_shifts: int = 8,
    seed: int = 0,
) -> dict:
    """Measure the three admissibility constants on the grid.

    Returns the quadrature of psi (condition (i)), the decay constant
    sup |psi(x)| (1+|x|)^(n+alpha) (condition (ii)), and the L1-modulus
    constant sup_y ||psi(.+y) - psi|| / |y|^gamma over sampled shifts
    (condition (iii)), with a pass flag per condition.
    """
    n = grid.dim
    pts = grid.points()
    vals = np.asarray(k.psi(pts), dtype=float)
    f = SampledFunction(grid, vals.reshape(grid.shape))
    mean = quadrature_integral(f)
    r = np.linalg.norm(pts, axis=-1)
    decay_c = float(np.max(np.abs(vals) * (1.0 + r) ** (n + k.decay_alpha)))

    rng = np.random.default_rng(seed)
    w = weight_field(grid)
    modulus_c = 0.0
    h = np.array(grid.spacing)
    for _ in range(n_shifts):
        steps = rng.integers(1, 8, size=n)
        y = steps * h
        shifted = np.asarray(k.psi(pts + y), dtype=float)
        l1 = float((np.abs(shifted - vals).reshape(grid.shape) * w).sum())
        modulus_c = max(modulus_c, l1 / float(np.linalg.norm(y)) ** k.smoothness_gamma)

    report = {
        "zero_mean_value": mean,
        "zero_mean_ok": abs(mean) <= zero_mean_tol,
        "decay_constant": decay_c,
        "decay_ok": decay_c <= max_decay_constant if max_decay_constant else math.isfinite(decay_c),
        "modulus_constant": modulus_c,
        "modulus_ok": modulus_c <= max_modulus_constant if max_modulus_constant else math.isfinite(modulus_c),
    }
    report["admissible"] = bool(
        report["zero_mean_ok"] and report["decay_ok"] and report["modulus_ok"]
    )
    return report


def _offset_lattice(grid: Grid) -> np.ndarray:
    offs = [h * np.arange(-(m - 1), m) for h, m in zip(grid.spacing, grid.points_per_axis)]
    mesh = np.meshgrid(*offs, indexing="ij")
    return np.stack(mesh, axis=-1)


def _sampled_kernel(k: LPKernel, grid: Grid, t: float) -> np.ndarray:
    """Sample psi_t = t^-n psi(./t) on the offset lattice.

    Scales near or below the spacing are sampled by cell averages (midpoint
    refinement around the kernel core); a spiky kernel then degrades to its
    vanishing cell integrals instead of a spurious point spike.  The result
    is recentred to exact zero sum, so constants are annihilated exactly.
    """
    offs = _offset_lattice(grid)
    n = grid.dim
    ker = np.asarray(k.psi(offs.reshape(-1, n) / t), dtype=float).reshape(offs.shape[:-1])
    ker = ker / t**n
    h_min = min(grid.spacing)
    if t < 4.0 * h_min:
        reach = 8.0 * t + 2.0 * max(grid.spacing)
        core = np.linalg.norm(offs, axis=-1) <= reach
        idx = np.argwhere(core)
        nsub = int(min(33, max(3, math.ceil(8.0 * h_min / t))))
        sub = [np.linspace(-hh / 2, hh / 2, nsub + 1) for hh in grid.spacing]
        mids = [0.5 * (s[1:] + s[:-1]) for s in sub]
        mesh = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1).reshape(-1, n)
        base = offs[core]
        pts = base[:, None, :] + mesh[None, :, :]
        vals = np.asarray(k.psi(pts.reshape(-1, n) / t), dtype=float)
        vals = vals.reshape(len(base), -1).mean(axis=1) / t**n
        ker[tuple(idx.T)] = vals
    return ker - ker.mean()


def filtered_stack(f: SampledFunction, k: LPKernel) -> tuple[list[np.ndarray], np.ndarray]:
    """Convolutions f * psi_t at every dyadic scale, plus the log-t weights."""
    cv = f.grid.cellvol
    convs = []
    for t in k.scales:
        ker = _sampled_kernel(k, f.grid, t)
        convs.append(fftconvolve(f.values, ker, mode="same") * cv)
    wts = np.full(len(convs), LOG2)
    if len(wts) > 1:
        wts[0] *= 0.5
        wts[-1] *= 0.5
    return convs, wts


def g_function(f: SampledFunction, k: LPKernel) -> SampledFunction:
    """g(f)(x) = (int |f * psi_t(x)|^2 dt/t)^(1/2) on the dyadic scale grid."""
    convs, wts = filtered_stack(f, k)
    acc = np.zeros(f.grid.shape)
    for c, w in zip(convs, wts):
        acc += w * c * c
    return f.with_values(np.sqrt(acc), label=f"g[{f.label}]")


def _ball_stencil(grid: Grid, radius: float) -> np.ndarray:
    offs = _offset_lattice(grid)
    return (np.linalg.norm(offs, axis=-1) < radius).astype(float)


def lusin_area(f: SampledFunction, k: LPKernel, a: float) -> SampledFunction:
    """Cone square function over Gamma_a(x) = {(y, t) : |x - y| < a t}.

    S(x)^2 = (a^n |B_0|)^(-1) sum_t w_t t^(-n) int_{|x-y|<a t} |f*psi_t(y)|^2 dy.
    """
    if a <= 0:
        raise InputDomainError("aperture must be positive")
    n = f.grid.dim
    cv = f.grid.cellvol
    convs, wts = filtered_stack(f, k)
    acc = np.zeros(f.grid.shape)
    for c, w, t in zip(convs, wts, k.scales):
        stencil = _ball_stencil(f.grid, a * t)
        cone = fftconvolve(c * c, stencil, mode="same") * cv
        acc += w * t ** (-n) * np.maximum(cone, 0.0)
    pref = 1.0 / (a**n * unit_ball_volume(n))
    return f.with_values(np.sqrt(pref * acc), label=f"S[{f.label}]")


def g_star(f: SampledFunction, k: LPKernel, lam: float) -> SampledFunction:
    """Weighted square function with weight (1 + |x-y|/t)^(-2 lambda)."""
    if lam <= 0:
        raise InputDomainError("lambda must be positive")
    n = f.grid.dim
    cv = f.grid.cellvol
    offs = _offset_lattice(f.grid)
    dist = np.linalg.norm(offs, axis=-1)
    convs, wts = filtered_stack(f, k)
    acc = np.zeros(f.grid.shape)
    for c, w, t in zip(convs, wts, k.scales):
        wk = (1.0 + dist / t) ** (-2.0 * lam)
        inner = fftconvolve(c * c, wk, mode="same") * cv
        acc += w * t ** (-n) * np.maximum(inner, 0.0)
    return f.with_values(np.sqrt(acc), label=f"gstar[{f.label}]")


def domination_constant(n: int, a: float, lam: float) -> float:
    """Constant in the termwise bound S <= (1+a)^lambda (a^n |B_0|)^(-1/2) g*."""
    return (1.0 + a) ** lam / math.sqrt(a**n * unit_ball_volume(n))
