"""Anisotropic geometry: dilations, the implicit quasi-norm, brackets, balls.

The quasi-norm of ``x != 0`` is the unique ``t0 > 0`` with
``sum_i x_i**2 / t0**(2 a_i) == 1``; it scales like ``|t**a x| = t |x|``
under the one-parameter dilation ``t**a x = (t**a_1 x_1, ..., t**a_n x_n)``.
Balls ``{ |y - c| < r }`` are ellipsoids with semi-axes ``r**a_i`` and
Lebesgue measure ``v_n r**v`` where ``v = sum a_i`` and ``v_n`` is the
Euclidean unit-ball volume (the unit anisotropic ball is the Euclidean one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import CapabilityError, InputDomainError

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class AnisotropyVector:
    """Dilation exponents a = (a_1, ..., a_n), each >= 1."""

    a: tuple[float, ...]

    def __post_init__(self):
        if len(self.a) == 0:
            raise InputDomainError("anisotropy vector must be nonempty")
        object.__setattr__(self, "a", tuple(float(ai) for ai in self.a))
        for ai in self.a:
            if not math.isfinite(ai) or ai < 1.0:
                raise InputDomainError(f"anisotropy exponents must be finite and >= 1, got {ai}")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def v(self) -> float:
        """Homogeneous dimension sum(a_i)."""
        return float(sum(self.a))

    @property
    def a_minus(self) -> float:
        return float(min(self.a))

    @property
    def a_plus(self) -> float:
        return float(max(self.a))

    def augmented(self) -> "AnisotropyVector":
        """Exponents (1, a_1, ..., a_n) used by the bracket."""
        return AnisotropyVector((1.0,) + self.a)

    @classmethod
    def isotropic(cls, n: int) -> "AnisotropyVector":
        return cls((1.0,) * n)


def unit_ball_volume(n: int) -> float:
    """Euclidean unit-ball volume; also the anisotropic v_n for any exponents."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def ball_measure(aniso: AnisotropyVector, radius: float) -> float:
    """Lebesgue measure v_n * r**v of an anisotropic ball of radius r."""
    return unit_ball_volume(aniso.dim) * float(radius) ** aniso.v


def dilate(t: float, aniso: AnisotropyVector, x) -> np.ndarray:
    """Anisotropic dilation (t**a_1 x_1, ..., t**a_n x_n); total for t >= 0."""
    if t < 0:
        raise InputDomainError("dilation parameter must be nonnegative")
    x = np.asarray(x, dtype=float)
    factors = np.array([t**ai for ai in aniso.a])
    return factors * x


def _validate_points(x, n: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != n:
        raise InputDomainError(
            f"point dimension {pts.shape[-1]} does not match anisotropy dimension {n}"
        )
    if not np.all(np.isfinite(pts)):
        raise InputDomainError("non-finite coordinate in quasi-norm input")
    return pts


def quasi_norm(x, aniso: AnisotropyVector, tol: float = DEFAULT_TOL):
    """Anisotropic quasi-norm of a point or an array of points.

    ``x`` has shape (..., n); the result drops the last axis.  Uses the
    two-sided bracket max_i |x_i|**(1/a_i) <= |x| <= sum_i |x_i|**(1/a_i)
    for bisection, finished by Newton steps; absolute tolerance ``tol`` on
    the root.
    """
    if tol <= 0:
        raise InputDomainError("tol must be positive")
    pts = _validate_points(x, aniso.dim)
    scalar = pts.ndim == 1
    flat = pts.reshape(-1, aniso.dim)
    res = _backend.quasi_norm_points(flat, np.array(aniso.a), tol)
    res = np.asarray(res)
    if scalar:
        return float(res[0])
    return res.reshape(pts.shape[:-1])


def bracket(x, aniso: AnisotropyVector, tol: float = DEFAULT_TOL):
    """Quasi-norm of the augmented point (1, x) under exponents (1, a); >= 1."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1)
    ones = np.ones(pts.shape[:-1] + (1,))
    return quasi_norm(np.concatenate([ones, pts], axis=-1), aniso.augmented(), tol)


@dataclass(frozen=True)
class AnisotropicBall:
    """Open ball {y : |y - center| < radius} in the anisotropic quasi-norm."""

    center: tuple[float, ...]
    radius: float
    anisotropy: AnisotropyVector

    def __post_init__(self):
        if self.radius <= 0:
            raise InputDomainError("ball radius must be positive")
        if len(self.center) != self.anisotropy.dim:
            raise InputDomainError("center dimension mismatch")

    def contains(self, y) -> np.ndarray:
        """Membership test; avoids root finding via the defining inequality."""
        pts = _validate_points(y, self.anisotropy.dim)
        d = pts - np.asarray(self.center)
        semi = np.array([self.radius**ai for ai in self.anisotropy.a])
        return ((d / semi) ** 2).sum(axis=-1) < 1.0

    @property
    def measure(self) -> float:
        return ball_measure(self.anisotropy, self.radius)


def _sphere_rule(n: int, resolution) -> tuple[np.ndarray, np.ndarray]:
    """Unit-sphere nodes and quadrature weights (trapezoid grids).

    n == 2: uniform angles on [0, 2pi) (periodic trapezoid is exact for
    trigonometric polynomials).  n == 3: latitude-longitude product grid
    with the sin(theta) surface element folded into the weights.
    """
    if n == 2:
        n_ang = int(resolution)
        theta = np.linspace(0.0, 2.0 * math.pi, n_ang, endpoint=False)
        xi = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        wts = np.full(n_ang, 2.0 * math.pi / n_ang)
        return xi, wts
    if n == 3:
        n_th, n_ph = (int(resolution[0]), int(resolution[1])) if np.ndim(resolution) else (
            int(resolution), int(resolution))
        th = np.linspace(0.0, math.pi, n_th)
        w_th = np.full(n_th, math.pi / (n_th - 1))
        w_th[0] *= 0.5
        w_th[-1] *= 0.5
        ph = np.linspace(0.0, 2.0 * math.pi, n_ph, endpoint=False)
        w_ph = np.full(n_ph, 2.0 * math.pi / n_ph)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        xi = np.stack(
            [np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], axis=-1
        ).reshape(-1, 3)
        wts = (w_th[:, None] * w_ph[None, :] * np.sin(TH)).reshape(-1)
        return xi, wts
    raise CapabilityError(f"spherical quadrature implemented for n in {{2, 3}}, got {n}")


def polar_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    aniso: AnisotropyVector,
    rho_max: float,
    resolution: Sequence[int] | tuple[int, int],
) -> float:
    """Integrate ``f`` over R^n in anisotropic polar coordinates.

    Evaluates  integral_0^rho_max integral_{S^(n-1)}
    f(rho**a xi) rho**(v-1) <a xi, xi> dsigma(xi) drho,
    where <a xi, xi> = sum_i a_i xi_i**2 is the Jacobian's angular factor
    (the factor is 1 identically in the isotropic case).  ``f`` is called
    with an array of shape (m, n) and must return shape (m,).

    ``resolution``: (radial_nodes, angular_nodes) in 2D, or
    (radial_nodes, (n_theta, n_phi)) / (radial_nodes, angular_nodes) in 3D.
    """
    n = aniso.dim
    if n not in (2, 3):
        raise CapabilityError(f"polar integration implemented for n in {{2, 3}}, got {n}")
    if rho_max <= 0:
        raise InputDomainError("rho_max must be positive")
    n_rad = int(resolution[0])
    xi, w_ang = _sphere_rule(n, resolution[1])
    a_arr = np.array(aniso.a)
    ang_factor = (a_arr * xi * xi).sum(axis=-1)

    rho = np.linspace(0.0, rho_max, n_rad)
    w_rad = np.full(n_rad, rho_max / (n_rad - 1))
    w_rad[0] *= 0.5
    w_rad[-1] *= 0.5

    total = 0.0
    v = aniso.v
    # Chunk over radii to bound peak memory at n_rad*n_ang points.
    chunk = max(1, int(2e6 // max(len(xi), 1)))
    for i0 in range(0, n_rad, chunk):
        r = rho[i0 : i0 + chunk]
        scale = r[:, None] ** a_arr[None, :]
        pts = scale[:, None, :] * xi[None, :, :]
        vals = np.asarray(f(pts.reshape(-1, n)), dtype=float).reshape(len(r), len(xi))
        radial = r ** (v - 1.0) * w_rad[i0 : i0 + chunk]
        total += float(np.einsum("ij,j,i->", vals, w_ang * ang_factor, radial))
    return total
