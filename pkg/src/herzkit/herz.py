"""Anisotropic mixed-norm Herz norms and the central block decomposition.

The homogeneous norm is (sum_k |B_k|^(alpha p) ||f chi_k||_q^p)^(1/p) over
the dyadic window; the non-homogeneous variant runs over k >= 0 with the
central ball indicator at k = 0.  Ball measures |B_k| = v_n 2^(k v) are
analytic, the annulus norms come from quadrature.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .anisotropy import AnisotropyVector
from .errors import InputDomainError, PreconditionError, ShapeError, TruncationWarning
from .mixed_norm import ExponentVector, mixed_lebesgue_norm
from .sampled_function import (
    DEFAULT_WINDOW,
    Grid,
    SampledFunction,
    annulus_mask,
    dyadic_ball_measure,
    truncation_fraction,
    window_indices,
)

DEFAULT_TRUNCATION_THRESHOLD = 1e-6


@dataclass(frozen=True)
class HerzParams:
    alpha: float
    p: float
    q: ExponentVector
    anisotropy: AnisotropyVector
    homogeneous: bool = True
    window: tuple[int, int] = DEFAULT_WINDOW

    def __post_init__(self):
        if not self.p > 0:
            raise InputDomainError("p must be positive")
        object.__setattr__(self, "window", (int(self.window[0]), int(self.window[1])))
        if self.window[0] > self.window[1]:
            raise InputDomainError("empty dyadic window")

    def ks(self) -> range:
        return window_indices(self.window, self.homogeneous)


def annulus_terms(f: SampledFunction, params: HerzParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-annulus pieces (|B_k|^alpha, ||f chi_k||_q) for k in the window."""
    a = params.anisotropy
    meas = []
    norms = []
    for k in params.ks():
        m = annulus_mask(k, a, f.grid, params.homogeneous, params.window)
        fk = f.with_values(f.values * m.indicator)
        meas.append(dyadic_ball_measure(k, a) ** params.alpha)
        norms.append(mixed_lebesgue_norm(fk, params.q))
    return np.array(meas), np.array(norms)


def sequence_lp(terms: np.ndarray, p: float) -> float:
    """l^p combination of nonnegative terms; p = inf takes the sup."""
    terms = np.asarray(terms, dtype=float)
    if math.isinf(p):
        return float(terms.max()) if terms.size else 0.0
    return float((terms**p).sum() ** (1.0 / p))


def herz_norm(
    f: SampledFunction,
    params: HerzParams,
    truncation_threshold: float = DEFAULT_TRUNCATION_THRESHOLD,
) -> float:
    """Herz norm of ``f`` over the configured dyadic window.

    Warns (TruncationWarning) when the window misses more than
    ``truncation_threshold`` of the L1 mass of ``f``.
    """
    if f.grid.dim != params.anisotropy.dim:
        raise ShapeError("grid and anisotropy dimensions differ")
    frac = truncation_fraction(f, params.anisotropy, params.window, params.homogeneous)
    if frac > truncation_threshold:
        warnings.warn(
            f"dyadic window {params.window} misses {frac:.3e} of the input mass",
            TruncationWarning,
            stacklevel=2,
        )
    meas, norms = annulus_terms(f, params)
    return sequence_lp(meas * norms, params.p)


def quasi_triangle_constant(p: float, q: ExponentVector) -> float:
    """Constant C with ||f+g|| <= C (||f|| + ||g||) on the Herz scale.

    Formula: max(1, 2^(sum_i (1-q_i)/q_i)) * max(1, 2^((1-p)/p)); equals 1
    in the Banach range p, q_i >= 1.
    """
    s = sum(0.0 if math.isinf(qi) else (1.0 - qi) / qi for qi in q.q)
    cq = max(1.0, 2.0**s)
    cp = 1.0 if math.isinf(p) else max(1.0, 2.0 ** ((1.0 - p) / p))
    return cq * cp


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Coefficients lambda_k and central blocks b_k with supp b_k in B_k."""

    ks: tuple[int, ...]
    lambdas: tuple[float, ...]
    blocks: tuple[SampledFunction, ...]
    params: HerzParams
    grid: Grid

    def coefficient_lp(self) -> float:
        return sequence_lp(np.array(self.lambdas), self.params.p)

    def to_files(self, dirpath: str, stem: str = "block") -> dict:
        """Serialize to ``dirpath``: an index JSON plus one file per block."""
        os.makedirs(dirpath, exist_ok=True)
        refs = []
        for k, b in zip(self.ks, self.blocks):
            ref = f"{stem}_k{k}.json"
            b.save(os.path.join(dirpath, ref))
            refs.append(ref)
        index = {
            "params": params_to_json(self.params),
            "grid": {
                "half_width": list(self.grid.half_width),
                "points_per_axis": list(self.grid.points_per_axis),
            },
            "ks": list(self.ks),
            "lambdas": list(self.lambdas),
            "blocks": refs,
        }
        with open(os.path.join(dirpath, "decomposition.json"), "w") as fh:
            json.dump(index, fh, indent=1, sort_keys=True)
        return index

    @classmethod
    def from_files(cls, dirpath: str) -> "BlockDecomposition":
        with open(os.path.join(dirpath, "decomposition.json")) as fh:
            index = json.load(fh)
        blocks = tuple(
            SampledFunction.load(os.path.join(dirpath, ref)) for ref in index["blocks"]
        )
        grid = Grid(
            tuple(index["grid"]["half_width"]),
            tuple(index["grid"]["points_per_axis"]),
        )
        return cls(
            tuple(int(k) for k in index["ks"]),
            tuple(float(x) for x in index["lambdas"]),
            blocks,
            params_from_json(index["params"]),
            grid,
        )


def params_to_json(params: HerzParams) -> dict:
    return {
        "alpha": params.alpha,
        "p": params.p if not math.isinf(params.p) else "inf",
        "q": [qi if not math.isinf(qi) else "inf" for qi in params.q.q],
        "a": list(params.anisotropy.a),
        "homogeneous": params.homogeneous,
        "window": list(params.window),
    }


def params_from_json(obj: dict) -> HerzParams:
    conv = lambda x: math.inf if x == "inf" else float(x)
    return HerzParams(
        alpha=float(obj["alpha"]),
        p=conv(obj["p"]),
        q=ExponentVector(tuple(conv(x) for x in obj["q"])),
        anisotropy=AnisotropyVector(tuple(obj["a"])),
        homogeneous=bool(obj["homogeneous"]),
        window=(int(obj["window"][0]), int(obj["window"][1])),
    )


def block_decompose(f: SampledFunction, params: HerzParams) -> BlockDecomposition:
    """Canonical block decomposition lambda_k b_k = f chi_k.

    lambda_k = |B_k|^alpha ||f chi_k||_q and b_k = f chi_k / lambda_k, so
    each block has mixed norm exactly |B_k|^(-alpha) and
    sum |lambda_k|^p = (Herz norm)^p.  Annuli with no mass are skipped.
    """
    if not (0.0 < params.alpha < math.inf):
        raise PreconditionError("block decomposition requires 0 < alpha < inf")
    if not params.q.is_banach or any(math.isinf(qi) for qi in params.q.q):
        raise PreconditionError("block decomposition requires 1 <= q < inf")
    a = params.anisotropy
    ks, lambdas, blocks = [], [], []
    for k in params.ks():
        m = annulus_mask(k, a, f.grid, params.homogeneous, params.window)
        fk = f.values * m.indicator
        norm_k = mixed_lebesgue_norm(f.with_values(fk), params.q)
        lam = dyadic_ball_measure(k, a) ** params.alpha * norm_k
        if lam > 0.0:
            ks.append(k)
            lambdas.append(lam)
            blocks.append(f.with_values(fk / lam, label=f"block_k{k}"))
    return BlockDecomposition(tuple(ks), tuple(lambdas), tuple(blocks), params, f.grid)


def block_synthesize(d: BlockDecomposition) -> SampledFunction:
    """Pointwise sum over k of lambda_k b_k (zero function if empty)."""
    acc = np.zeros(d.grid.shape)
    for lam, b in zip(d.lambdas, d.blocks):
        if b.grid != d.grid:
            raise ShapeError("blocks live on different grids")
        acc = acc + lam * b.values
    return SampledFunction(d.grid, acc, label="synthesized")
