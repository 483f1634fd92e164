"""Herz-Hardy machinery: radial maximal function, atoms, molecules,
constructive atomic decomposition, and molecule-to-atom conversion.

The grand maximal function (sup over a Schwartz-seminorm ball) is not
computable; following the pointwise equivalence of radial and grand maximal
functions, every Hardy-side quantity here uses the radial maximal function
with one fixed unit-mass Gaussian window.  Equivalence constants are
absorbed into the reported C's.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .anisotropy import AnisotropyVector, bracket
from .errors import CapabilityError, InputDomainError, PreconditionError
from .herz import HerzParams, herz_norm, params_from_json, params_to_json, sequence_lp
from .mixed_norm import ExponentVector, mixed_lebesgue_norm
from .sampled_function import (
    Grid,
    SampledFunction,
    dyadic_ball_measure,
    quadrature_integral,
    quasi_norm_field,
    weight_field,
)

MAX_SEMINORM_ORDER = 4


def n_index(q: ExponentVector, aniso: AnisotropyVector) -> int:
    """Seminorm order floor(v (a+/a-) (1 + 2/p_-) + v + 2 a+) + 1, p_- = min(1, q)."""
    p_minus = min(1.0, q.q_min)
    val = aniso.v * (aniso.a_plus / aniso.a_minus) * (1.0 + 2.0 / p_minus)
    return int(math.floor(val + aniso.v + 2.0 * aniso.a_plus)) + 1


def gaussian_window_fn(n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Unit-mass Gaussian pi^(-n/2) exp(-|y|^2)."""

    def phi(pts):
        r2 = (np.asarray(pts) ** 2).sum(axis=-1)
        return math.pi ** (-n / 2.0) * np.exp(-r2)

    return phi


@dataclass(frozen=True)
class SchwartzWindow:
    """Unit-mass mollifier with seminorm order, scale window, and anisotropy."""

    phi: Callable[[np.ndarray], np.ndarray]
    N: int
    anisotropy: AnisotropyVector
    k_range: tuple[int, int] = (-6, 3)

    @classmethod
    def default(
        cls,
        aniso: AnisotropyVector,
        q: ExponentVector | None = None,
        k_range: tuple[int, int] = (-6, 3),
    ) -> "SchwartzWindow":
        N = n_index(q, aniso) if q is not None else 2
        return cls(gaussian_window_fn(aniso.dim), N, aniso, k_range)

    def validate_mass(self, grid: Grid, tol: float = 1e-6) -> float:
        """Quadrature of phi; raises if it strays from unit mass."""
        f = SampledFunction.from_callable(grid, self.phi)
        mass = quadrature_integral(f)
        if abs(mass - 1.0) > tol:
            raise InputDomainError(f"window has quadrature mass {mass}, expected 1")
        return mass


def schwartz_seminorm(
    phi: SampledFunction, N: int, aniso: AnisotropyVector
) -> float:
    """max over the grid of bracket(x)^N * max_{|beta| <= N} |d^beta phi(x)|.

    Derivatives are central differences; orders above MAX_SEMINORM_ORDER are
    refused (stencil accuracy collapses there).
    """
    if N < 0:
        raise InputDomainError("seminorm order must be nonnegative")
    if N > MAX_SEMINORM_ORDER:
        raise CapabilityError(
            f"finite-difference seminorm supports order <= {MAX_SEMINORM_ORDER}"
        )
    grid = phi.grid
    n = grid.dim
    partials: dict[tuple[int, ...], np.ndarray] = {(0,) * n: phi.values}
    for order in range(1, N + 1):
        for beta in itertools.product(range(order + 1), repeat=n):
            if sum(beta) != order or beta in partials:
                continue
            i = next(j for j in range(n) if beta[j] > 0)
            parent = tuple(b - (1 if j == i else 0) for j, b in enumerate(beta))
            partials[beta] = np.gradient(
                partials[parent], grid.spacing[i], axis=i, edge_order=2
            )
    stack = np.max(np.abs(np.stack(list(partials.values()))), axis=0)
    br = bracket(grid.points(), aniso).reshape(grid.shape)
    return float(np.max(br**N * stack))


def radial_maximal(f: SampledFunction, w: SchwartzWindow) -> SampledFunction:
    """sup over dyadic scales of |f * phi_t|, phi_t(y) = t^-v phi(t^-a y).

    The anisotropy is taken from the window's Gaussian structure: the
    dilation acts per axis with exponents a_i, and each sampled kernel is
    normalized to exact unit mass on the grid (discrete mollifier), so
    constants are reproduced exactly and M0 f >= |f| once the smallest
    scale drops below the grid spacing.
    """
    aniso = w.anisotropy
    grid = f.grid
    out = np.zeros(grid.shape)
    for k in range(w.k_range[0], w.k_range[1] + 1):
        t = 2.0**k
        conv = f.values
        for ax, (h, m, ai) in enumerate(
            zip(grid.spacing, grid.points_per_axis, aniso.a)
        ):
            offs = h * np.arange(-(m - 1), m)
            ker = np.exp(-((offs / t**ai) ** 2))
            ker = ker / ker.sum()
            shape = [1] * grid.dim
            shape[ax] = len(ker)
            conv = fftconvolve(conv, ker.reshape(shape), mode="same", axes=ax)
        out = np.maximum(out, np.abs(conv))
    return f.with_values(out, label=f"M0[{f.label}]")


def herz_hardy_norm(
    f: SampledFunction, params: HerzParams, w: SchwartzWindow
) -> float:
    """Herz norm of the radial maximal function of ``f``."""
    return herz_norm(radial_maximal(f, w), params)


def monomial_field(grid: Grid, beta: tuple[int, ...]) -> np.ndarray:
    """x^beta = prod x_i^beta_i over the grid."""
    axes = grid.axes()
    out = np.ones(grid.shape)
    for i, b in enumerate(beta):
        if b:
            shape = [1] * grid.dim
            shape[i] = len(axes[i])
            out = out * axes[i].reshape(shape) ** b
    return out


def multi_indices(n: int, max_order: int) -> list[tuple[int, ...]]:
    out = []
    for order in range(max_order + 1):
        for beta in itertools.product(range(order + 1), repeat=n):
            if sum(beta) == order:
                out.append(beta)
    return out


@dataclass(frozen=True)
class AtomSpec:
    """Parameters of a central atom: size index, exponents, moments, ball."""

    alpha: float
    q: ExponentVector
    s: int
    k: int
    anisotropy: AnisotropyVector
    restricted: bool = False

    def __post_init__(self):
        if self.s < 0:
            raise InputDomainError("moment order must be nonnegative")
        if self.restricted and self.k < 0:
            raise InputDomainError("restricted-type atoms require ball index k >= 0")

    @property
    def required_min_s(self) -> int:
        """floor((v/a-) (alpha + (1/v) sum a_i/q_i - 1)); atomic decompositions
        need s at least this (clamped at 0)."""
        a = self.anisotropy
        return int(
            math.floor(
                (a.v / a.a_minus)
                * (self.alpha + self.q.inv_sum_weighted(a.a) / a.v - 1.0)
            )
        )


@dataclass(frozen=True)
class AtomReport:
    support_ok: bool
    size_ok: bool
    moments_ok: bool
    norm: float
    bound: float
    max_moment_ratio: float

    @property
    def passed(self) -> bool:
        return self.support_ok and self.size_ok and self.moments_ok


def atom_check(
    fn: SampledFunction,
    spec: AtomSpec,
    size_tol: float = 1e-9,
    moment_tol_scale: float = 1e-9,
) -> AtomReport:
    """Verify support in the closed ball B_k, the size bound, and the moments.

    The moment tolerance is scale-aware: 1e-9 * ||fn||_q * (2^k)^|beta|.
    """
    a = spec.anisotropy
    qf = quasi_norm_field(fn.grid, a)
    mask = qf <= 2.0**spec.k
    support_ok = bool(np.all(fn.values[~mask] == 0.0))
    norm = mixed_lebesgue_norm(fn, spec.q)
    bound = dyadic_ball_measure(spec.k, a) ** (-spec.alpha)
    size_ok = bool(norm <= bound * (1.0 + size_tol))
    radius = 2.0**spec.k
    worst = 0.0
    for beta in multi_indices(fn.grid.dim, spec.s):
        mom = abs(quadrature_integral(fn.with_values(fn.values * monomial_field(fn.grid, beta))))
        tol = moment_tol_scale * norm * radius ** sum(beta)
        if tol == 0.0:
            worst = max(worst, 0.0 if mom == 0.0 else math.inf)
        else:
            worst = max(worst, mom / tol)
    return AtomReport(support_ok, size_ok, worst <= 1.0, norm, bound, worst)


@dataclass(frozen=True)
class MoleculeSpec:
    """Molecule parameters; the tail exponents a_exp < d_exp derive from epsilon."""

    alpha: float
    q: ExponentVector
    s: int
    epsilon: float
    anisotropy: AnisotropyVector
    l: int | None = None
    restricted: bool = False

    def __post_init__(self):
        a = self.anisotropy
        floor_eps = max(
            float(self.s),
            (a.v / a.a_minus) * (self.alpha + self.q.inv_sum_weighted(a.a) - 1.0),
        )
        if not self.epsilon > floor_eps:
            raise InputDomainError(
                f"epsilon must exceed max(s, (v/a-)(alpha + sum a_i/q_i - 1)) = {floor_eps}"
            )
        if not (0.0 < self.a_exp < self.d_exp):
            raise InputDomainError("derived exponents must satisfy 0 < a < d")

    @property
    def _base(self) -> float:
        a = self.anisotropy
        return 1.0 - self.q.inv_sum_weighted(a.a) / a.v

    @property
    def a_exp(self) -> float:
        return self._base - self.alpha + self.epsilon

    @property
    def d_exp(self) -> float:
        return self._base + self.epsilon


@dataclass(frozen=True)
class MoleculeReport:
    r_q: float
    norm: float
    tail_norm: float
    moments_ok: bool
    size_ok: bool | None
    max_moment_ratio: float

    @property
    def passed(self) -> bool:
        return (
            math.isfinite(self.r_q)
            and self.moments_ok
            and (self.size_ok is not False)
        )


def molecule_check(
    fn: SampledFunction,
    spec: MoleculeSpec,
    size_tol: float = 1e-9,
    moment_tol_scale: float = 1e-9,
) -> MoleculeReport:
    """Compute R_q = ||fn||^(a/d) * || |x|^{v d} fn ||^(1-a/d) and the moments.

    For dyadic molecules (``spec.l`` set) the size bound ||fn|| <= |B_l|^-alpha
    is checked as well.
    """
    a = spec.anisotropy
    norm = mixed_lebesgue_norm(fn, spec.q)
    qf = quasi_norm_field(fn.grid, a)
    wfield = qf ** (a.v * spec.d_exp)
    tail = mixed_lebesgue_norm(fn.with_values(fn.values * wfield), spec.q)
    ratio = spec.a_exp / spec.d_exp
    r_q = norm**ratio * tail ** (1.0 - ratio)

    size_ok: bool | None = None
    if spec.l is not None:
        size_ok = bool(
            norm <= dyadic_ball_measure(spec.l, a) ** (-spec.alpha) * (1 + size_tol)
        )
    if spec.alpha > 0 and norm > 0:
        radius = max(norm ** (-1.0 / spec.alpha), min(fn.grid.spacing))
    else:
        radius = 1.0
    if spec.l is not None:
        radius = 2.0**spec.l
    worst = 0.0
    for beta in multi_indices(fn.grid.dim, spec.s):
        mom = abs(quadrature_integral(fn.with_values(fn.values * monomial_field(fn.grid, beta))))
        tol = moment_tol_scale * norm * radius ** sum(beta)
        if tol == 0.0:
            worst = max(worst, 0.0 if mom == 0.0 else math.inf)
        else:
            worst = max(worst, mom / tol)
    return MoleculeReport(r_q, norm, tail, worst <= 1.0, size_ok, worst)


@dataclass(frozen=True, eq=False)
class AtomicDecomposition:
    """Two atom families (local parts and telescoped averages) with weights."""

    ks1: tuple[int, ...]
    lambdas1: tuple[float, ...]
    atoms1: tuple[SampledFunction, ...]
    ks2: tuple[int, ...]
    lambdas2: tuple[float, ...]
    atoms2: tuple[SampledFunction, ...]
    params: HerzParams
    grid: Grid
    report: dict = field(default_factory=dict)

    def synthesize(self) -> SampledFunction:
        acc = np.zeros(self.grid.shape)
        for lam, atom in zip(self.lambdas1 + self.lambdas2, self.atoms1 + self.atoms2):
            acc = acc + lam * atom.values
        return SampledFunction(self.grid, acc, label="synthesized")

    def coefficient_lp(self) -> float:
        lams = np.array(self.lambdas1 + self.lambdas2)
        return sequence_lp(lams, self.params.p)

    def to_files(self, dirpath: str) -> dict:
        os.makedirs(dirpath, exist_ok=True)
        refs1, refs2 = [], []
        for i, atom in enumerate(self.atoms1):
            ref = f"atom1_{i}.json"
            atom.save(os.path.join(dirpath, ref))
            refs1.append(ref)
        for i, atom in enumerate(self.atoms2):
            ref = f"atom2_{i}.json"
            atom.save(os.path.join(dirpath, ref))
            refs2.append(ref)
        index = {
            "params": params_to_json(self.params),
            "grid": {
                "half_width": list(self.grid.half_width),
                "points_per_axis": list(self.grid.points_per_axis),
            },
            "ks1": list(self.ks1),
            "lambdas1": list(self.lambdas1),
            "atoms1": refs1,
            "ks2": list(self.ks2),
            "lambdas2": list(self.lambdas2),
            "atoms2": refs2,
            "residual_report": self.report,
        }
        with open(os.path.join(dirpath, "decomposition.json"), "w") as fh:
            json.dump(index, fh, indent=1, sort_keys=True)
        return index

    @classmethod
    def from_files(cls, dirpath: str) -> "AtomicDecomposition":
        with open(os.path.join(dirpath, "decomposition.json")) as fh:
            index = json.load(fh)
        load = lambda ref: SampledFunction.load(os.path.join(dirpath, ref))
        return cls(
            tuple(index["ks1"]),
            tuple(index["lambdas1"]),
            tuple(load(r) for r in index["atoms1"]),
            tuple(index["ks2"]),
            tuple(index["lambdas2"]),
            tuple(load(r) for r in index["atoms2"]),
            params_from_json(index["params"]),
            Grid(
                tuple(index["grid"]["half_width"]),
                tuple(index["grid"]["points_per_axis"]),
            ),
            index.get("residual_report", {}),
        )


def decomposition_index_range(params: HerzParams) -> tuple[float, float]:
    """Admissible alpha interval [1 - (1/v) sum a_i/q_i, (a+ - sum a_i/q_i)/v + 1)."""
    a = params.anisotropy
    s = params.q.inv_sum_weighted(a.a)
    return 1.0 - s / a.v, (a.a_plus - s) / a.v + 1.0


def _partition_bumps(qf: np.ndarray, window: tuple[int, int]) -> dict[int, np.ndarray]:
    """Smooth radial partition of unity subordinate to the dyadic annuli.

    The bump is (1 - u^2)^3 with u the linear map of the quasi-norm onto
    [-1, 1] over [2^(k-1), 2^(k+1)]; the family is self-similar across k and
    sums to 1 wherever any bump is positive.
    """
    kmin, kmax = window
    raw = {}
    for k in range(kmin, kmax + 1):
        lo = 2.0 ** (k - 1)
        hi = 2.0 ** (k + 1)
        u = (qf - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
        raw[k] = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 3, 0.0)
    denom = sum(raw.values())
    good = (denom > 0) & (qf > 0)
    return {k: np.where(good, r / np.where(good, denom, 1.0), 0.0) for k, r in raw.items()}


def atomic_decompose(
    f: SampledFunction,
    params: HerzParams,
    w: SchwartzWindow,
) -> AtomicDecomposition:
    """Constructive atomic decomposition on the admissible index range.

    Builds the smooth dyadic partition Psi_k, splits f Psi_k into a
    mean-free local part g_k (normalized into the first atom family) and
    telescopes the removed averages into the second family
    h_k = m_{k+1} (v_{k+1} - v_k).  Both families carry zero-order moments
    exactly; coefficient sizes follow the radial maximal function's annulus
    norms.  The finite window leaves the boundary term m_kmin v_kmin, which
    vanishes for (numerically) mean-free input and is recorded in the
    report otherwise.
    """
    lo, hi = decomposition_index_range(params)
    if not (lo <= params.alpha < hi):
        raise PreconditionError(
            f"alpha = {params.alpha} outside the decomposition range [{lo}, {hi})"
        )
    if not all(1.0 < qi < math.inf for qi in params.q.q):
        raise PreconditionError("decomposition requires 1 < q < inf componentwise")
    if not params.homogeneous:
        raise PreconditionError("constructive decomposition implemented for the homogeneous scale")
    a = params.anisotropy
    grid = f.grid
    kmin, kmax = params.window
    qf = quasi_norm_field(grid, a)
    wfield = weight_field(grid)

    mf = radial_maximal(f, w)
    annulus_norm = {}
    for k in range(kmin, kmax + 1):
        mask = (qf >= 2.0 ** (k - 1)) & (qf < 2.0**k)
        annulus_norm[k] = mixed_lebesgue_norm(mf.with_values(mf.values * mask), params.q)

    psi = _partition_bumps(qf, params.window)
    tilde_mask = {
        k: (qf >= 2.0 ** (k - 2)) & (qf < 2.0 ** (k + 1)) for k in range(kmin, kmax + 1)
    }
    tilde_measure = {k: float((tilde_mask[k] * wfield).sum()) for k in tilde_mask}

    g = {}
    ip = {}
    for k in range(kmin, kmax + 1):
        fpsi = f.values * psi[k]
        ip[k] = float((fpsi * wfield).sum())
        if tilde_measure[k] > 0:
            vk = tilde_mask[k] / tilde_measure[k]
            g[k] = fpsi - ip[k] * vk
        else:
            g[k] = fpsi

    def window_sum(lo_k, hi_k):
        return sum(annulus_norm[j] for j in range(max(lo_k, kmin), min(hi_k, kmax) + 1))

    # First family: mean-free local parts on ~A_k, atoms on B_{k+1}.
    gnorm = {k: mixed_lebesgue_norm(f.with_values(gk), params.q) for k, gk in g.items()}
    seeds1 = {}
    for k in range(kmin, kmax + 1):
        if gnorm[k] <= 0:
            continue
        s = window_sum(k - 1, k + 1)
        seeds1[k] = s if s > 0 else gnorm[k]
    c1 = max([1.0] + [gnorm[k] / s for k, s in seeds1.items()])
    ks1, lambdas1, atoms1 = [], [], []
    for k, s in seeds1.items():
        lam = c1 * dyadic_ball_measure(k + 1, a) ** params.alpha * s
        ks1.append(k + 1)
        lambdas1.append(lam)
        atoms1.append(f.with_values(g[k] / lam, label=f"atom1_k{k}"))

    # Second family: telescoped averages over the nonempty ~A_k in order;
    # gaps in the window (annuli below grid resolution carry no points and
    # no mass) are skipped, which keeps the Abel summation exact.
    live = [k for k in range(kmin, kmax + 1) if tilde_measure[k] > 0]
    suffix = {kmax + 1: 0.0}
    for k in range(kmax, kmin - 1, -1):
        suffix[k] = suffix[k + 1] + ip[k]
    h = {}
    for j in range(len(live) - 1):
        k, k_next = live[j], live[j + 1]
        vk = tilde_mask[k] / tilde_measure[k]
        vk1 = tilde_mask[k_next] / tilde_measure[k_next]
        h[(k, k_next)] = suffix[k + 1] * (vk1 - vk)
    hnorm = {kk: mixed_lebesgue_norm(f.with_values(hk), params.q) for kk, hk in h.items()}
    seeds2 = {}
    for (k, k_next), nrm in hnorm.items():
        if nrm <= 0:
            continue
        s = window_sum(k - 1, k_next + 1)
        seeds2[(k, k_next)] = s if s > 0 else nrm
    c2 = max([1.0] + [hnorm[kk] / s for kk, s in seeds2.items()])
    ks2, lambdas2, atoms2 = [], [], []
    for (k, k_next), s in seeds2.items():
        lam = c2 * dyadic_ball_measure(k_next + 1, a) ** params.alpha * s
        ks2.append(k_next + 1)
        lambdas2.append(lam)
        atoms2.append(f.with_values(h[(k, k_next)] / lam, label=f"atom2_k{k}"))

    coverage = sum(psi.values())
    uncovered = float((np.abs(f.values) * (1.0 - coverage) * wfield).sum())
    total_mass = float((np.abs(f.values) * wfield).sum())
    boundary = suffix[live[0]] if live else 0.0
    report = {
        "c1": c1,
        "c2": c2,
        "boundary_mean_term": boundary,
        "uncovered_mass_fraction": uncovered / total_mass if total_mass > 0 else 0.0,
    }
    return AtomicDecomposition(
        tuple(ks1), tuple(lambdas1), tuple(atoms1),
        tuple(ks2), tuple(lambdas2), tuple(atoms2),
        params, grid, report,
    )


def molecule_to_atoms(
    fn: SampledFunction,
    spec: MoleculeSpec,
    params: HerzParams,
) -> AtomicDecomposition:
    """Convert a central molecule into dyadic atoms around its natural scale.

    The scale is r = ||fn||_q^(-1/alpha) with sigma_r the dyadic index
    2^(sigma_r - 1) < r <= 2^sigma_r; the grid is partitioned into the ball
    E_0 = B_sigma and annuli E_k around it, each piece is made mean-free,
    and the removed averages are telescoped exactly as in the atomic
    construction.  Coefficients decay like 2^(-k v a_exp).
    """
    if spec.alpha <= 0:
        raise PreconditionError("molecule conversion requires alpha > 0")
    check = molecule_check(fn, spec)
    if not check.passed:
        raise PreconditionError("input fails molecule_check")
    a = spec.anisotropy
    grid = fn.grid
    qf = quasi_norm_field(grid, a)
    wfield = weight_field(grid)
    norm = check.norm
    if norm == 0.0:
        return AtomicDecomposition((), (), (), (), (), (), params, grid, {"r": 0.0})

    r = norm ** (-1.0 / spec.alpha)
    sigma = int(math.ceil(math.log2(r)))
    while 2.0 ** (sigma - 1) >= r:
        sigma -= 1
    while 2.0**sigma < r:
        sigma += 1
    qmax = float(qf.max())
    sigma_eff = min(max(sigma, int(math.floor(math.log2(min(grid.spacing))))),
                    int(math.ceil(math.log2(qmax))))

    k_top = max(1, int(math.ceil(math.log2(qmax))) - sigma_eff + 1)
    masks = [(0, qf < 2.0**sigma_eff)]
    for k in range(1, k_top + 1):
        lo = 2.0 ** (sigma_eff + k - 1)
        if k == k_top:
            masks.append((k, qf >= lo))
        else:
            masks.append((k, (qf >= lo) & (qf < 2.0 ** (sigma_eff + k))))
    masks = [(k, mask) for k, mask in masks if mask.any()]

    pieces = []
    integrals = []
    for k, mask in masks:
        meas = float((mask * wfield).sum())
        mk = fn.values * mask
        integ = float((mk * wfield).sum())
        pieces.append((k, mask, meas, mk, integ))
        integrals.append(integ)

    # First family: mean-free restrictions, supported in B_{sigma+k}.
    ks1, lambdas1, atoms1 = [], [], []
    raw1 = []
    for k, mask, meas, mk, integ in pieces:
        pk = mk - integ * mask / meas
        nrm = mixed_lebesgue_norm(fn.with_values(pk), spec.q)
        raw1.append((k, pk, nrm))
    scale1 = [
        nrm * dyadic_ball_measure(sigma_eff + k, a) ** spec.alpha * 2.0 ** (k * a.v * spec.a_exp)
        for k, _, nrm in raw1
        if nrm > 0
    ]
    c1 = max([1e-300] + scale1)
    for k, pk, nrm in raw1:
        if nrm <= 0:
            continue
        lam = c1 * 2.0 ** (-k * a.v * spec.a_exp)
        ks1.append(sigma_eff + k)
        lambdas1.append(lam)
        atoms1.append(fn.with_values(pk / lam, label=f"molatom1_k{k}"))

    # Second family: telescoped averages m_{k+1}(psi_{k+1} - psi_k).
    suffix = np.cumsum([0.0] + integrals[::-1])[::-1]  # suffix[j] = sum_{i>=j} integ_i
    ks2, lambdas2, atoms2 = [], [], []
    raw2 = []
    for j in range(len(pieces) - 1):
        k, mask, meas, _, _ = pieces[j]
        k1, mask1, meas1, _, _ = pieces[j + 1]
        mnext = float(suffix[j + 1])
        hk = mnext * (mask1 / meas1 - mask / meas)
        nrm = mixed_lebesgue_norm(fn.with_values(hk), spec.q)
        raw2.append((k, k1, hk, nrm))
    scale2 = [
        nrm * dyadic_ball_measure(sigma_eff + k1, a) ** spec.alpha * 2.0 ** (k * a.v * spec.a_exp)
        for k, k1, _, nrm in raw2
        if nrm > 0
    ]
    c2 = max([1e-300] + scale2)
    for k, k1, hk, nrm in raw2:
        if nrm <= 0:
            continue
        lam = c2 * 2.0 ** (-k * a.v * spec.a_exp)
        ks2.append(sigma_eff + k1)
        lambdas2.append(lam)
        atoms2.append(fn.with_values(hk / lam, label=f"molatom2_k{k}"))

    report = {
        "r": r,
        "sigma_r": sigma,
        "sigma_eff": sigma_eff,
        "residual_mean": float(suffix[0]),
        "piece_bound_c1": c1,
        "piece_bound_c2": c2,
        "piece_norms": [(k, nrm) for k, _, nrm in raw1],
    }
    return AtomicDecomposition(
        tuple(ks1), tuple(lambdas1), tuple(atoms1),
        tuple(ks2), tuple(lambdas2), tuple(atoms2),
        params, grid, report,
    )
