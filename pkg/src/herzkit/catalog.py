"""Builtin sampled functions so every check runs without external data.

Indicators are sampled with the half-at-jump convention (value 1/2 exactly
on the jump), which keeps their quadrature second-order accurate.  Weights
singular at the origin get an analytic cell average (1D) or a half-spacing
regularization (nD) in the origin cell.
"""

from __future__ import annotations

import math

import numpy as np

from .anisotropy import AnisotropyVector
from .errors import InputDomainError, ParseError
from .sampled_function import Grid, SampledFunction

BUILTIN_NAMES = (
    "gauss",
    "box",
    "annulus-indicator",
    "log-weight",
    "power-weight",
    "mexican-hat",
)


def _axis_indicator(x: np.ndarray, half: float, eps: float) -> np.ndarray:
    out = np.where(np.abs(x) < half - eps, 1.0, 0.0)
    return np.where(np.abs(np.abs(x) - half) <= eps, 0.5, out)


def build(name: str, grid: Grid, params: dict | None = None) -> SampledFunction:
    """Instantiate a builtin function on ``grid``.

    Parameters by name:
      gauss: sigma (default 1)
      box: half (default 1)
      annulus-indicator: k (default 0), a (anisotropy exponents, default isotropic)
      log-weight: (none)
      power-weight: gamma (default 0.5)
      mexican-hat: (none; 1D mexican hat, 2D Laplacian-of-Gaussian)
    """
    params = dict(params or {})
    pts = grid.points()
    n = grid.dim
    eps = 1e-12 * max(grid.half_width)

    if name == "gauss":
        sigma = float(params.pop("sigma", 1.0))
        if sigma <= 0:
            raise InputDomainError("gauss: sigma must be positive")
        vals = np.exp(-(pts**2).sum(axis=-1) / sigma**2)
    elif name == "box":
        half = float(params.pop("half", 1.0))
        if half <= 0:
            raise InputDomainError("box: half must be positive")
        vals = np.ones(pts.shape[0])
        for i in range(n):
            vals = vals * _axis_indicator(pts[:, i], half, eps)
    elif name == "annulus-indicator":
        k = int(params.pop("k", 0))
        a = params.pop("a", (1.0,) * n)
        if isinstance(a, str):
            a = tuple(float(t) for t in a.split(","))
        aniso = AnisotropyVector(tuple(a))
        if aniso.dim != n:
            raise InputDomainError("annulus-indicator: anisotropy dimension mismatch")
        lo, hi = 2.0 ** (k - 1), 2.0**k
        semi_lo = np.array([lo**ai for ai in aniso.a])
        semi_hi = np.array([hi**ai for ai in aniso.a])
        inside_hi = ((pts / semi_hi) ** 2).sum(axis=-1) < 1.0
        outside_lo = ((pts / semi_lo) ** 2).sum(axis=-1) >= 1.0
        vals = (inside_hi & outside_lo).astype(float)
    elif name == "log-weight":
        r = np.linalg.norm(pts, axis=-1)
        h2 = min(grid.spacing) / 2.0
        if n == 1:
            origin_val = math.log(h2) - 1.0  # cell average of log|y|
        else:
            origin_val = math.log(h2)
        vals = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), origin_val)
    elif name == "power-weight":
        gamma = float(params.pop("gamma", 0.5))
        r = np.linalg.norm(pts, axis=-1)
        h2 = min(grid.spacing) / 2.0
        if n == 1 and gamma > -1.0:
            origin_val = h2**gamma / (gamma + 1.0)  # cell average of |y|^gamma
        else:
            origin_val = h2**gamma
        vals = np.where(r > 0, np.where(r > 0, r, 1.0) ** gamma, origin_val)
    elif name == "mexican-hat":
        if n == 1:
            x = pts[:, 0]
            vals = (1.0 - x * x) * np.exp(-0.5 * x * x)
        else:
            r2 = (pts**2).sum(axis=-1)
            vals = (r2 - 2.0) * np.exp(-0.5 * r2)
    else:
        raise ParseError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")

    if params:
        raise ParseError(f"unused parameters for builtin {name!r}: {sorted(params)}")
    return SampledFunction(grid, vals.reshape(grid.shape), label=name)
