"""Iterated mixed-norm Lebesgue functionals.

The norm integrates axis by axis, innermost axis (x1) first:
(int ... (int |f|^(q_1) dx_1)^(q_2/q_1) ... dx_n)^(1/q_n).
Axes with q_i = inf take the per-axis max (essential sup on the grid).
For q_i < 1 the same formula is computed; it is then only a quasi-norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputDomainError, ShapeError
from .sampled_function import SampledFunction, quadrature_integral


@dataclass(frozen=True)
class ExponentVector:
    """Exponents q = (q_1, ..., q_n), each in (0, inf]."""

    q: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        for qi in self.q:
            if not qi > 0 or math.isnan(qi):
                raise InputDomainError(f"exponents must lie in (0, inf], got {qi}")

    @property
    def dim(self) -> int:
        return len(self.q)

    @property
    def conjugate(self) -> "ExponentVector":
        """Componentwise q' with 1/q + 1/q' = 1 (1 <-> inf); needs q_i >= 1."""
        out = []
        for qi in self.q:
            if qi < 1.0:
                raise InputDomainError(f"conjugate exponent undefined for q = {qi} < 1")
            if qi == 1.0:
                out.append(math.inf)
            elif math.isinf(qi):
                out.append(1.0)
            else:
                out.append(qi / (qi - 1.0))
        return ExponentVector(tuple(out))

    def scaled(self, s: float) -> "ExponentVector":
        """The vector s * q (s > 0)."""
        if s <= 0:
            raise InputDomainError("scale must be positive")
        return ExponentVector(tuple(s * qi for qi in self.q))

    @property
    def is_banach(self) -> bool:
        return all(qi >= 1.0 for qi in self.q)

    @property
    def q_min(self) -> float:
        return float(min(self.q))

    def inv_sum_weighted(self, a: tuple[float, ...]) -> float:
        """sum_i a_i / q_i (a_i/inf = 0), the recurring index combination."""
        return float(sum(ai / qi for ai, qi in zip(a, self.q) if not math.isinf(qi)))


def mixed_lebesgue_norm(f: SampledFunction, q: ExponentVector) -> float:
    """Iterated trapezoid evaluation of the mixed Lebesgue norm."""
    if q.dim != f.grid.dim:
        raise ShapeError(f"exponent dimension {q.dim} != grid dimension {f.grid.dim}")
    arr = np.abs(f.values)
    for qi, w in zip(q.q, f.grid.axis_weights()):
        if math.isinf(qi):
            arr = arr.max(axis=0)
        else:
            arr = np.tensordot(w, arr**qi, axes=(0, 0)) ** (1.0 / qi)
    return float(arr)


def holder_check(
    f: SampledFunction, g: SampledFunction, q: ExponentVector
) -> tuple[float, float]:
    """Return (int |f g|, ||f||_q * ||g||_q'); the caller asserts lhs <= rhs."""
    f._check_same_grid(g)
    lhs = quadrature_integral(abs(f * g))
    rhs = mixed_lebesgue_norm(f, q) * mixed_lebesgue_norm(g, q.conjugate)
    return lhs, rhs


def power_identity_check(
    f: SampledFunction, q: ExponentVector, s: float
) -> tuple[float, float]:
    """Return (|| |f|^s ||_q, ||f||_{s q}^s); equal up to rounding."""
    if s <= 0:
        raise InputDomainError("power must be positive")
    lhs = mixed_lebesgue_norm(f.power(s), q)
    rhs = mixed_lebesgue_norm(f, q.scaled(s)) ** s
    return lhs, rhs
