"""Tensor-grid sampled functions, quadrature, and dyadic annulus masks.

Grids are uniform, symmetric about 0, and include 0 (odd point counts), so
indicator masks of balls and annuli behave predictably.  Quadrature is the
tensor trapezoid rule throughout.

Boundary convention for the dyadic machinery: balls are closed,
``B_k = { |y| <= 2**k }``, annuli are half-open,
``A_k = { 2**(k-1) <= |y| < 2**k }``, so the annuli partition the punctured
window exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .anisotropy import DEFAULT_TOL, AnisotropyVector, ball_measure, quasi_norm
from .errors import InputDomainError, ParseError, ShapeError, WindowRangeError

DEFAULT_WINDOW = (-6, 4)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on the box [-L_1, L_1] x ... x [-L_n, L_n]."""

    half_width: tuple[float, ...]
    points_per_axis: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "half_width", tuple(float(w) for w in self.half_width))
        object.__setattr__(self, "points_per_axis", tuple(int(m) for m in self.points_per_axis))
        if len(self.half_width) != len(self.points_per_axis):
            raise ShapeError("half_width and points_per_axis lengths differ")
        for w in self.half_width:
            if not (w > 0 and math.isfinite(w)):
                raise InputDomainError("half widths must be positive and finite")
        for m in self.points_per_axis:
            if m < 3 or m % 2 == 0:
                raise InputDomainError("points_per_axis entries must be odd and >= 3")

    @classmethod
    def uniform(cls, dim: int, half_width: float, points: int) -> "Grid":
        return cls((float(half_width),) * dim, (int(points),) * dim)

    @property
    def dim(self) -> int:
        return len(self.half_width)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points_per_axis

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * w / (m - 1) for w, m in zip(self.half_width, self.points_per_axis))

    @property
    def cellvol(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(-w, w, m) for w, m in zip(self.half_width, self.points_per_axis)
        ]

    def axis_weights(self) -> list[np.ndarray]:
        """Per-axis trapezoid weights (endpoints halved)."""
        out = []
        for h, m in zip(self.spacing, self.points_per_axis):
            w = np.full(m, h)
            w[0] *= 0.5
            w[-1] *= 0.5
            out.append(w)
        return out

    def points(self) -> np.ndarray:
        """All grid points as an array of shape (prod(shape), dim), C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def refine(self) -> "Grid":
        """Halve the spacing (points 2m-1 per axis), same box."""
        return Grid(self.half_width, tuple(2 * m - 1 for m in self.points_per_axis))


_WEIGHT_CACHE: dict[Grid, np.ndarray] = {}
_QNORM_CACHE: dict[tuple[Grid, AnisotropyVector], np.ndarray] = {}


def weight_field(grid: Grid) -> np.ndarray:
    """Full tensor trapezoid weight array for the grid (read-only, cached)."""
    w = _WEIGHT_CACHE.get(grid)
    if w is None:
        axes_w = grid.axis_weights()
        w = axes_w[0]
        for aw in axes_w[1:]:
            w = np.multiply.outer(w, aw)
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        _WEIGHT_CACHE[grid] = w
    return w


def quasi_norm_field(grid: Grid, aniso: AnisotropyVector, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Quasi-norm evaluated at every grid point (read-only, cached)."""
    key = (grid, aniso)
    q = _QNORM_CACHE.get(key)
    if q is None:
        if aniso.dim != grid.dim:
            raise ShapeError("anisotropy dimension does not match grid")
        q = quasi_norm(grid.points(), aniso, tol).reshape(grid.shape)
        q = np.ascontiguousarray(q)
        q.setflags(write=False)
        _QNORM_CACHE[key] = q
    return q


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real samples over a Grid; arithmetic is pointwise on a shared grid."""

    grid: Grid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise InputDomainError("sampled values must be finite everywhere")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], label: str = "") -> "SampledFunction":
        vals = np.asarray(fn(grid.points()), dtype=float).reshape(grid.shape)
        return cls(grid, vals, label)

    def with_values(self, values: np.ndarray, label: str | None = None) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.label if label is None else label)

    def _check_same_grid(self, other: "SampledFunction") -> None:
        if self.grid != other.grid:
            raise ShapeError("operands live on different grids")

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_same_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check_same_grid(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __abs__(self) -> "SampledFunction":
        return self.with_values(np.abs(self.values))

    def power(self, s: float) -> "SampledFunction":
        return self.with_values(np.abs(self.values) ** s)

    def to_json(self) -> dict:
        return {
            "grid": {
                "half_width": list(self.grid.half_width),
                "points_per_axis": list(self.grid.points_per_axis),
            },
            "values": np.asarray(self.values).reshape(-1).tolist(),
            "label": self.label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SampledFunction":
        try:
            grid = Grid(
                tuple(obj["grid"]["half_width"]),
                tuple(obj["grid"]["points_per_axis"]),
            )
            vals = np.asarray(obj["values"], dtype=float).reshape(grid.shape)
            return cls(grid, vals, obj.get("label", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed sampled-function JSON: {exc}") from exc

    def save(self, path: str) -> None:
        if str(path).endswith(".csv"):
            self.to_csv(path)
        else:
            with open(path, "w") as fh:
                json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path: str) -> "SampledFunction":
        if str(path).endswith(".csv"):
            return cls.from_csv(path)
        try:
            with open(path) as fh:
                return cls.from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from exc

    def to_csv(self, path: str) -> None:
        n = self.grid.dim
        pts = self.grid.points()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(n)] + ["value"])
            for row, val in zip(pts, self.values.reshape(-1)):
                w.writerow([repr(float(c)) for c in row] + [repr(float(val))])

    @classmethod
    def from_csv(cls, path: str) -> "SampledFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0] or rows[0][-1] != "value":
            raise ParseError("CSV must have header x1..xn,value")
        n = len(rows[0]) - 1
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise ParseError(f"non-numeric CSV entry: {exc}") from exc
        if data.size == 0 or data.shape[1] != n + 1:
            raise ParseError("CSV rows do not match header")
        axes = []
        for i in range(n):
            ax = np.unique(data[:, i])
            if len(ax) < 3 or len(ax) % 2 == 0:
                raise ParseError(f"axis {i + 1}: need an odd number (>=3) of distinct coordinates")
            steps = np.diff(ax)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise ParseError(f"axis {i + 1} is not uniformly spaced")
            if abs(ax[0] + ax[-1]) > 1e-9 * max(1.0, abs(ax[-1])):
                raise ParseError(f"axis {i + 1} is not symmetric about 0")
            axes.append(ax)
        grid = Grid(tuple(float(ax[-1]) for ax in axes), tuple(len(ax) for ax in axes))
        if data.shape[0] != int(np.prod(grid.shape)):
            raise ParseError("CSV does not contain a full tensor grid")
        vals = np.empty(grid.shape)
        filled = np.zeros(grid.shape, dtype=bool)
        idx = []
        for i, ax in enumerate(axes):
            h = (ax[-1] - ax[0]) / (len(ax) - 1)
            idx.append(np.rint((data[:, i] - ax[0]) / h).astype(int))
        vals[tuple(idx)] = data[:, n]
        filled[tuple(idx)] = True
        if not filled.all():
            raise ParseError("CSV does not contain a full tensor grid")
        return cls(grid, vals)


def quadrature_integral(f: SampledFunction) -> float:
    """Tensor trapezoid approximation of the integral over the box."""
    return float((f.values * weight_field(f.grid)).sum())


@dataclass(frozen=True, eq=False)
class AnnulusMask:
    """Indicator of a dyadic annulus (or the central ball, non-homogeneous k=0)."""

    k: int
    anisotropy: AnisotropyVector
    indicator: np.ndarray


def annulus_mask(
    k: int,
    aniso: AnisotropyVector,
    grid: Grid,
    homogeneous: bool = True,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> AnnulusMask:
    """Mask of A_k = {2**(k-1) <= |x| < 2**k}; non-homogeneous k=0 is the ball.

    Raises WindowRangeError for k outside ``window`` (or k < 0 in the
    non-homogeneous family).
    """
    kmin, kmax = int(window[0]), int(window[1])
    lo = 0 if not homogeneous else kmin
    if not (lo <= k <= kmax):
        raise WindowRangeError(f"annulus index {k} outside window [{lo}, {kmax}]")
    q = quasi_norm_field(grid, aniso)
    if not homogeneous and k == 0:
        ind = q < 1.0
    else:
        ind = (q >= 2.0 ** (k - 1)) & (q < 2.0**k)
    return AnnulusMask(int(k), aniso, ind)


def window_indices(window: tuple[int, int], homogeneous: bool) -> range:
    kmin, kmax = int(window[0]), int(window[1])
    return range(kmin if homogeneous else 0, kmax + 1)


def covered_mask(
    grid: Grid,
    aniso: AnisotropyVector,
    window: tuple[int, int] = DEFAULT_WINDOW,
    homogeneous: bool = True,
) -> np.ndarray:
    """Union of the window's annuli (plus the central ball if non-homogeneous)."""
    q = quasi_norm_field(grid, aniso)
    kmin, kmax = window
    if homogeneous:
        return (q >= 2.0 ** (kmin - 1)) & (q < 2.0**kmax)
    return q < 2.0**kmax


def truncation_fraction(
    f: SampledFunction,
    aniso: AnisotropyVector,
    window: tuple[int, int] = DEFAULT_WINDOW,
    homogeneous: bool = True,
) -> float:
    """Fraction of the L1 mass of ``f`` missed by the dyadic window.

    The exact origin sample is excluded: it carries a measure-zero set (the
    homogeneous scale lives on R^n minus the origin), so no finite window
    could ever capture it.
    """
    cov = covered_mask(f.grid, aniso, window, homogeneous)
    q = quasi_norm_field(f.grid, aniso)
    w = weight_field(f.grid)
    total = float((np.abs(f.values) * w).sum())
    if total == 0.0:
        return 0.0
    outside = float((np.abs(f.values) * (~cov & (q > 0)) * w).sum())
    return outside / total


def dyadic_ball_measure(k: int, aniso: AnisotropyVector) -> float:
    """Analytic measure |B_k| = v_n 2**(k v)."""
    return ball_measure(aniso, 2.0 ** int(k))
