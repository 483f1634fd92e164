"""Maximal, fractional, and singular integral operators; weights; commutators.

The Hardy-Littlewood maximal operator is uncentered: at each point it takes
the best average over every family ball containing the point.  Functions are
extended by zero outside the grid box (a ball's average divides by the full
ball cardinality, counting phantom zero samples), except under the periodic
convention used by the geometric-series checks.  Every point is always
covered by its own single-cell ball, so ``Mf >= |f|`` pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.signal import fftconvolve

from . import _backend
from .anisotropy import AnisotropyVector
from .errors import CapabilityError, InputDomainError, PreconditionError, ShapeError
from .sampled_function import Grid, SampledFunction, weight_field

__all__ = [
    "BallFamily",
    "StandardKernel",
    "WeightReport",
    "OperatorReport",
    "hl_maximal",
    "fractional_maximal",
    "fractional_integral",
    "cz_apply",
    "hilbert_kernel",
    "validate_kernel",
    "bmo_norm",
    "commutator_apply",
    "ap_constant",
    "apq_constant",
    "rubio_de_francia",
    "estimate_maximal_bound",
]


@dataclass(frozen=True)
class BallFamily:
    """Finite family of balls discretizing sup over all balls containing x.

    Centers run over every ``stride``-th grid index per axis; radii are a
    finite increasing set.  The minimal radius (one grid spacing, i.e. the
    single-cell ball) is always present so the family covers every point.
    """

    grid: Grid
    radii: tuple[float, ...]
    geometry: str = "euclidean"
    anisotropy: AnisotropyVector | None = None
    boundary: str = "zero"
    stride: int = 1

    def __post_init__(self):
        if self.geometry not in ("euclidean", "anisotropic"):
            raise InputDomainError(f"unknown geometry {self.geometry!r}")
        if self.boundary not in ("zero", "periodic"):
            raise InputDomainError(f"unknown boundary convention {self.boundary!r}")
        if self.geometry == "anisotropic":
            if self.anisotropy is None or self.anisotropy.dim != self.grid.dim:
                raise ShapeError("anisotropic family needs a matching anisotropy vector")
        if self.stride < 1:
            raise InputDomainError("stride must be >= 1")
        radii = tuple(sorted(float(r) for r in self.radii))
        if not radii or radii[0] <= 0:
            raise InputDomainError("radii must be positive")
        if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
            raise InputDomainError("radii must be strictly increasing")
        h_min = min(self.grid.spacing)
        if radii[0] > h_min:
            radii = (h_min,) + radii
        object.__setattr__(self, "radii", radii)

    @classmethod
    def default(
        cls,
        grid: Grid,
        geometry: str = "euclidean",
        anisotropy: AnisotropyVector | None = None,
        boundary: str = "zero",
        stride: int = 1,
    ) -> "BallFamily":
        """Dyadic radii from one grid spacing up to the box diameter."""
        h = min(grid.spacing)
        top = 2.0 * max(grid.half_width)
        radii = []
        r = h
        while r <= top:
            radii.append(r)
            r *= 2.0
        radii.append(r)
        return cls(grid, tuple(radii), geometry, anisotropy, boundary, stride)

    def semi_axes(self) -> list[tuple[float, ...]]:
        """Per-radius ellipsoid semi-axes; anisotropic balls have s_i = r**a_i."""
        n = self.grid.dim
        out = []
        for r in self.radii:
            if self.geometry == "euclidean":
                out.append((r,) * n)
            else:
                out.append(tuple(r**ai for ai in self.anisotropy.a))
        return out

    def summary(self) -> dict:
        return {
            "geometry": self.geometry,
            "boundary": self.boundary,
            "stride": self.stride,
            "radii": list(self.radii),
            "anisotropy": list(self.anisotropy.a) if self.anisotropy else None,
            "grid": {
                "half_width": list(self.grid.half_width),
                "points_per_axis": list(self.grid.points_per_axis),
            },
        }


def _scan(f: SampledFunction, family: BallFamily, beta: float) -> np.ndarray:
    if f.grid != family.grid:
        raise ShapeError("function and ball family live on different grids")
    n = f.grid.dim
    absf = np.abs(f.values).astype(float)
    out = absf.copy()  # own-cell minimal balls
    periodic = family.boundary == "periodic"
    semis = family.semi_axes()
    if n == 1:
        s0 = np.array([s[0] for s in semis])
        _backend.maximal_scan_1d(
            absf, f.grid.spacing[0], s0, family.stride, beta, periodic, out
        )
    elif n == 2:
        s0 = np.array([s[0] for s in semis])
        s1 = np.array([s[1] for s in semis])
        _backend.maximal_scan_2d(
            absf,
            f.grid.spacing[0],
            f.grid.spacing[1],
            s0,
            s1,
            family.stride,
            family.stride,
            beta,
            periodic,
            out,
        )
    else:
        raise CapabilityError("ball scans are implemented for n in {1, 2}")
    return out


def hl_maximal(f: SampledFunction, family: BallFamily) -> SampledFunction:
    """Uncentered Hardy-Littlewood maximal function over the ball family."""
    return f.with_values(_scan(f, family, beta=1.0), label=f"M[{f.label}]")


def fractional_maximal(
    f: SampledFunction, alpha: float, family: BallFamily
) -> SampledFunction:
    """Fractional maximal function sup_B |B|^(alpha/n - 1) * int_B |f|.

    Discrete ball measure |B| = (#points) * cellvol; alpha = 0 is exactly
    ``hl_maximal`` (same scan, same arithmetic).
    """
    n = f.grid.dim
    if not (0.0 <= alpha < n):
        raise InputDomainError(f"fractional order must lie in [0, {n}), got {alpha}")
    beta = 1.0 - alpha / n
    out = _scan(f, family, beta=beta) * f.grid.cellvol ** (1.0 - beta)
    return f.with_values(out, label=f"M_{alpha}[{f.label}]")


def _singular_kernel_grid(grid: Grid, alpha: float) -> np.ndarray:
    """|d|^(alpha - n) on the full offset lattice, singular cell averaged.

    The center cell uses the analytic cell average in 1D and a midpoint
    refinement in higher dimension, so the quadrature of the convolution
    stays first-order accurate through the singularity.
    """
    n = grid.dim
    offs = [h * np.arange(-(m - 1), m) for h, m in zip(grid.spacing, grid.points_per_axis)]
    mesh = np.meshgrid(*offs, indexing="ij")
    r2 = sum(m * m for m in mesh)
    with np.errstate(divide="ignore"):
        ker = np.where(r2 > 0, r2 ** ((alpha - n) / 2.0), 0.0)
    center = tuple(m - 1 for m in grid.points_per_axis)
    if n == 1:
        h = grid.spacing[0]
        cell_avg = (2.0 * (h / 2.0) ** alpha / alpha) / h
    else:
        sub = 16
        edges = [np.linspace(-h / 2, h / 2, sub + 1) for h in grid.spacing]
        mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
        mm = np.meshgrid(*mids, indexing="ij")
        rr = np.sqrt(sum(m * m for m in mm))
        cell_avg = float((rr ** (alpha - n)).mean())
    ker[center] = cell_avg
    return ker


def fractional_integral(f: SampledFunction, alpha: float) -> SampledFunction:
    """Riesz-type potential: quadrature of int f(y) |x-y|^(alpha-n) dy."""
    n = f.grid.dim
    if not (0.0 < alpha < n):
        raise InputDomainError(f"fractional order must lie in (0, {n}), got {alpha}")
    ker = _singular_kernel_grid(f.grid, alpha)
    out = fftconvolve(f.values, ker, mode="same") * f.grid.cellvol
    return f.with_values(out, label=f"I_{alpha}[{f.label}]")


class StandardKernel:
    """Singular integral kernel with size/regularity constants.

    ``kernel(x, y)`` is vectorized over leading axes of shape (..., n).
    ``validated`` is set by :func:`validate_kernel`; the integral driver
    refuses unvalidated kernels.
    """

    def __init__(
        self,
        kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
        size_constant: float,
        regularity_exponent: float,
        principal_value: bool = False,
        label: str = "kernel",
    ):
        if size_constant <= 0 or regularity_exponent <= 0:
            raise InputDomainError("kernel constants must be positive")
        self.kernel = kernel
        self.size_constant = float(size_constant)
        self.regularity_exponent = float(regularity_exponent)
        self.principal_value = principal_value
        self.label = label
        self.validated = False


def hilbert_kernel() -> StandardKernel:
    """Truncated Hilbert kernel K(x, y) = 1 / (pi (x - y)) in one dimension.

    The size condition holds with constant 1/pi; the two-point regularity
    condition forces the larger constant 4.5/pi (sup of (a+b)^2/(a b) over
    admissible distance pairs), which is what ``size_constant`` stores.
    """

    def k(x, y):
        d = np.asarray(x)[..., 0] - np.asarray(y)[..., 0]
        with np.errstate(divide="ignore"):
            return np.where(d != 0.0, 1.0 / (math.pi * d), 0.0)

    return StandardKernel(k, size_constant=4.5 / math.pi, regularity_exponent=1.0,
                          principal_value=True, label="hilbert")


def validate_kernel(
    kernel: StandardKernel,
    grid: Grid,
    n_samples: int = 500,
    seed: int = 0,
) -> dict:
    """Sample the size and regularity conditions on grid-point pairs/triples.

    Returns the measured constants and pass/fail versus the kernel's stored
    constant; marks the kernel validated iff both conditions pass.
    """
    rng = np.random.default_rng(seed)
    pts = grid.points()
    npts = pts.shape[0]
    n = grid.dim
    delta = kernel.regularity_exponent

    ix = rng.integers(0, npts, size=4 * n_samples)
    iy = rng.integers(0, npts, size=4 * n_samples)
    keep = ix != iy
    x, y = pts[ix[keep]][:n_samples * 2], pts[iy[keep]][:n_samples * 2]
    dist = np.linalg.norm(x - y, axis=-1)
    size_measured = float(np.max(np.abs(kernel.kernel(x, y)) * dist**n))

    ixp = rng.integers(0, npts, size=8 * n_samples)
    ix = rng.integers(0, npts, size=8 * n_samples)
    iy = rng.integers(0, npts, size=8 * n_samples)
    x, xp, y = pts[ix], pts[ixp], pts[iy]
    dxy = np.linalg.norm(x - y, axis=-1)
    dxpy = np.linalg.norm(xp - y, axis=-1)
    dxxp = np.linalg.norm(x - xp, axis=-1)
    adm = (dxxp > 0) & (dxy > 0) & (dxpy > 0) & (dxxp <= 0.5 * np.maximum(dxy, dxpy))
    x, xp, y, dxy, dxpy, dxxp = (arr[adm][:n_samples] for arr in (x, xp, y, dxy, dxpy, dxxp))
    if len(x):
        num = np.abs(kernel.kernel(x, y) - kernel.kernel(xp, y))
        reg_x = float(np.max(num * (dxy + dxpy) ** (n + delta) / dxxp**delta))
        num = np.abs(kernel.kernel(y, x) - kernel.kernel(y, xp))
        reg_y = float(np.max(num * (dxy + dxpy) ** (n + delta) / dxxp**delta))
        reg_measured = max(reg_x, reg_y)
    else:
        reg_measured = 0.0

    tol = 1e-9
    report = {
        "size_constant_measured": size_measured,
        "regularity_constant_measured": reg_measured,
        "size_ok": size_measured <= kernel.size_constant * (1 + tol),
        "regularity_ok": reg_measured <= kernel.size_constant * (1 + tol),
        "pairs_checked": int(len(dist)),
        "triples_checked": int(len(x)),
    }
    kernel.validated = bool(report["size_ok"] and report["regularity_ok"])
    return report


def cz_apply(kernel: StandardKernel, f: SampledFunction) -> SampledFunction:
    """Quadrature of T f(x) = int K(x, y) f(y) dy.

    The diagonal cell is skipped; on the symmetric grid this realizes the
    discrete principal value for odd kernels (the built-in Hilbert kernel).
    """
    if not kernel.validated:
        raise PreconditionError(
            f"kernel {kernel.label!r} has not passed validate_kernel"
        )
    pts = f.grid.points()
    fw = (f.values * weight_field(f.grid)).reshape(-1)
    npts = pts.shape[0]
    out = np.empty(npts)
    chunk = max(1, int(4e6) // npts)
    for i0 in range(0, npts, chunk):
        xb = pts[i0 : i0 + chunk]
        kb = kernel.kernel(xb[:, None, :], pts[None, :, :])
        idx = np.arange(i0, min(i0 + chunk, npts))
        kb[idx - i0, idx] = 0.0  # diagonal cell
        out[i0 : i0 + chunk] = kb @ fw
    return f.with_values(out.reshape(f.grid.shape), label=f"T[{f.label}]")


def commutator_apply(
    b: SampledFunction,
    op: Callable[[SampledFunction], SampledFunction],
    f: SampledFunction,
) -> SampledFunction:
    """[b, T] f = b * (T f) - T(b * f)."""
    return b * op(f) - op(b * f)


def _iter_ball_rows(grid: Grid, semi: tuple[float, ...], c_idx: tuple[int, ...]):
    """In-box index ranges of one ball: yields (j0, j1) in 1D, (i, j0, j1) in 2D."""
    h = grid.spacing
    shape = grid.shape

    def strict_steps(s, hh):
        k = int(math.floor(s / hh))
        while k >= 0 and k * hh >= s:
            k -= 1
        return max(k, 0)

    if grid.dim == 1:
        k = strict_steps(semi[0], h[0])
        yield (max(0, c_idx[0] - k), min(shape[0] - 1, c_idx[0] + k))
        return
    if grid.dim == 2:
        k0 = strict_steps(semi[0], h[0])
        for di in range(-k0, k0 + 1):
            i = c_idx[0] + di
            if i < 0 or i >= shape[0]:
                continue
            w = semi[1] * math.sqrt(max(1.0 - (di * h[0] / semi[0]) ** 2, 0.0))
            k1 = strict_steps(w, h[1])
            yield (i, max(0, c_idx[1] - k1), min(shape[1] - 1, c_idx[1] + k1))
        return
    raise CapabilityError("ball iteration implemented for n in {1, 2}")


def _iter_family(family: BallFamily):
    grid = family.grid
    strided = [range(0, m, family.stride) for m in grid.shape]
    for semi in family.semi_axes():
        if grid.dim == 1:
            for c0 in strided[0]:
                yield semi, (c0,)
        else:
            for c0 in strided[0]:
                for c1 in strided[1]:
                    yield semi, (c0, c1)


def _ball_stats(values_list, grid, semi, c_idx, track_min=False):
    """Sums of each array (and optionally min of the first) over one ball."""
    sums = [0.0] * len(values_list)
    cnt = 0
    mn = math.inf
    for ranges in _iter_ball_rows(grid, semi, c_idx):
        if grid.dim == 1:
            j0, j1 = ranges
            sl = (slice(j0, j1 + 1),)
        else:
            i, j0, j1 = ranges
            sl = (i, slice(j0, j1 + 1))
        cnt += j1 - j0 + 1
        for t, arr in enumerate(values_list):
            sums[t] += float(arr[sl].sum())
        if track_min:
            mn = min(mn, float(values_list[0][sl].min()))
    return sums, cnt, mn


def bmo_norm(b: SampledFunction, family: BallFamily) -> float:
    """Largest mean oscillation (1/|B|) int_B |b - mean_B b| over the family."""
    vals = b.values
    best = 0.0
    for semi, c in _iter_family(family):
        (s1,), cnt, _ = _ball_stats([vals], family.grid, semi, c)
        if cnt == 0:
            continue
        m = s1 / cnt
        osc = 0.0
        for ranges in _iter_ball_rows(family.grid, semi, c):
            if family.grid.dim == 1:
                j0, j1 = ranges
                osc += float(np.abs(vals[j0 : j1 + 1] - m).sum())
            else:
                i, j0, j1 = ranges
                osc += float(np.abs(vals[i, j0 : j1 + 1] - m).sum())
        best = max(best, osc / cnt)
    return best


@dataclass(frozen=True)
class WeightReport:
    """A computed weight constant together with the ball family that made it."""

    p: float
    constant: float
    family: BallFamily
    kind: str = "Ap"
    q: float | None = None
    a1_constant: float | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "q": self.q,
            "constant": self.constant,
            "a1_constant": self.a1_constant,
            "family": self.family.summary(),
        }


def ap_constant(w: SampledFunction, p: float, family: BallFamily) -> WeightReport:
    """Muckenhoupt constant sup_B (mean_B w) (mean_B w^(-p'/p))^(p/p').

    Also measures the A_1 constant sup_B (mean_B w) / (min_B w).
    """
    if p <= 1:
        raise InputDomainError("A_p requires p > 1")
    if np.any(w.values <= 0):
        raise InputDomainError("weight must be strictly positive on the grid")
    pp = p / (p - 1.0)
    wv = w.values
    w2 = wv ** (-pp / p)
    best_ap = 0.0
    best_a1 = 0.0
    for semi, c in _iter_family(family):
        (s1, s2), cnt, mn = _ball_stats([wv, w2], family.grid, semi, c, track_min=True)
        if cnt == 0:
            continue
        best_ap = max(best_ap, (s1 / cnt) * (s2 / cnt) ** (p / pp))
        best_a1 = max(best_a1, (s1 / cnt) / mn)
    return WeightReport(p=p, constant=best_ap, family=family, kind="Ap", a1_constant=best_a1)


def apq_constant(
    w: SampledFunction, p: float, q: float, family: BallFamily
) -> WeightReport:
    """Off-diagonal constant sup_B (mean_B w) (mean_B w^(-p'/q))^(q/p')."""
    if p <= 1 or q <= 0:
        raise InputDomainError("A_{p,q} requires p > 1 and q > 0")
    if np.any(w.values <= 0):
        raise InputDomainError("weight must be strictly positive on the grid")
    pp = p / (p - 1.0)
    wv = w.values
    w2 = wv ** (-pp / q)
    best = 0.0
    for semi, c in _iter_family(family):
        (s1, s2), cnt, _ = _ball_stats([wv, w2], family.grid, semi, c)
        if cnt == 0:
            continue
        best = max(best, (s1 / cnt) * (s2 / cnt) ** (q / pp))
    return WeightReport(p=p, constant=best, family=family, kind="Apq", q=q)


def rubio_de_francia(
    h: SampledFunction,
    B: float,
    K: int,
    family: BallFamily,
    return_iterates: bool = False,
):
    """Truncated iteration sum_{k=0}^{K} M^k h / (2 B)^k with M^0 h = h.

    ``B`` is meant to be (an upper estimate of) the maximal operator's norm
    on the relevant Herz space; see :func:`estimate_maximal_bound`.
    """
    if np.any(h.values < 0):
        raise InputDomainError("iteration input must be nonnegative")
    if not B > 0.5:
        raise InputDomainError("B must exceed 1/2")
    if K < 0:
        raise InputDomainError("truncation order must be >= 0")
    acc = h.values.copy()
    cur = h
    iterates = [h]
    for k in range(1, K + 1):
        cur = hl_maximal(cur, family)
        acc = acc + cur.values / (2.0 * B) ** k
        if return_iterates:
            iterates.append(cur)
    out = h.with_values(acc, label=f"R[{h.label}]")
    if return_iterates:
        return out, iterates
    return out


def estimate_maximal_bound(
    battery: Iterable[SampledFunction],
    family: BallFamily,
    norm_fn: Callable[[SampledFunction], float],
    headroom: float = 1.1,
) -> float:
    """Empirical bound on ||M|| in the given norm: max ratio times headroom."""
    best = 1.0
    for f in battery:
        denom = norm_fn(f)
        if denom <= 0:
            continue
        best = max(best, norm_fn(hl_maximal(f, family)) / denom)
    return best * headroom


@dataclass(frozen=True)
class OperatorReport:
    operator: str
    params: dict
    input_norm: float
    output_norm: float
    family: BallFamily | None = None

    @property
    def ratio(self) -> float:
        return self.output_norm / self.input_norm if self.input_norm > 0 else math.inf

    def to_json(self) -> dict:
        return {
            "operator": self.operator,
            "params": self.params,
            "input_norm": self.input_norm,
            "output_norm": self.output_norm,
            "ratio": self.ratio if math.isfinite(self.ratio) else "inf",
            "family": self.family.summary() if self.family else None,
        }
