"""NumPy fallback implementations of the hot kernels.

These functions define the reference semantics; ``_kernels.pyx`` mirrors the
same arithmetic (including the strict-inequality lattice counting) so both
backends agree to rounding error.  All ball memberships are strict:
``y`` belongs to the ball of semi-axes ``s`` at center ``c`` iff
``sum(((y_i - c_i)/s_i)**2) < 1``.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter1d

__backend_name__ = "python"


def quasi_norm_points(pts: np.ndarray, a: np.ndarray, tol: float) -> np.ndarray:
    """Solve sum_i x_i^2 / t^(2 a_i) = 1 for each row of ``pts``.

    Bisection on the strictly decreasing residual, bracketed by
    max_i |x_i|^(1/a_i) <= t0 <= sum_i |x_i|^(1/a_i), then Newton polish.
    Rows equal to zero map to 0.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a = np.asarray(a, dtype=np.float64)
    m = pts.shape[0]
    x2 = pts * pts
    two_a = 2.0 * a

    per = np.abs(pts) ** (1.0 / a)
    lo = per.max(axis=1)
    hi = per.sum(axis=1)
    out = np.zeros(m)
    active = lo > 0.0
    if not np.any(active):
        return out

    # Degenerate bracket: a single nonzero coordinate pins the root.
    tight = active & ((hi - lo) <= 1e-15 * hi)
    out[tight] = lo[tight]
    run = active & ~tight
    if np.any(run):
        lo_r = lo[run].copy()
        hi_r = hi[run].copy()
        x2_r = x2[run]
        for _ in range(54):
            mid = 0.5 * (lo_r + hi_r)
            f = (x2_r * mid[:, None] ** (-two_a)).sum(axis=1)
            up = f > 1.0
            lo_r = np.where(up, mid, lo_r)
            hi_r = np.where(up, hi_r, mid)
        t = 0.5 * (lo_r + hi_r)
        for _ in range(4):
            tp = t[:, None] ** (-two_a)
            f = (x2_r * tp).sum(axis=1)
            fp = (x2_r * tp * (-two_a) / t[:, None]).sum(axis=1)
            step = (f - 1.0) / fp
            t = np.clip(t - step, lo_r, hi_r)
        out[run] = t
    return out


def _strict_steps(s: float, h: float) -> int:
    """Largest integer k with k*h strictly less than s (s > 0)."""
    k = int(np.floor(s / h))
    while k * h >= s:
        k -= 1
    return max(k, 0) if k >= 0 else 0


def _window_sums_periodic(prefix, total, start, length):
    """Sum of a cyclic window of ``length`` points starting at ``start``.

    ``prefix`` is either a single cumulative row (shape (n+1,)) with vector
    ``start``, or a stack of rows (shape (m, n+1)) aligned with ``start``.
    """
    n = prefix.shape[-1] - 1
    full, rem = np.divmod(np.asarray(length), n)
    start = np.mod(np.asarray(start), n)
    end = start + rem
    if prefix.ndim == 1:
        def g(idx):
            return prefix[idx]
    else:
        rows = np.arange(prefix.shape[0])

        def g(idx):
            return prefix[rows, idx]

    inside = end <= n
    direct = g(np.minimum(end, n)) - g(start)
    wrapped = (g(np.full_like(start, n)) - g(start)) + g(np.maximum(end - n, 0))
    return full * total + np.where(inside, direct, wrapped)


def maximal_scan_1d(absf, h, semi_axes, stride, beta, periodic, out):
    """Uncentered max of ball averages on a 1D grid, in place into ``out``.

    ``out`` arrives initialized with the own-cell averages (the minimal
    balls).  ``beta`` = 1 gives plain averages; ``beta`` = 1 - alpha/n gives
    the fractional normalization ``count**(-beta) * sum`` (the caller scales
    by cellvol**(1-beta)).
    """
    n = absf.shape[0]
    prefix = np.concatenate(([0.0], np.cumsum(absf)))
    total = prefix[n]
    centers = np.arange(0, n, stride)
    for s in np.asarray(semi_axes, dtype=float):
        k = _strict_steps(float(s), h)
        m = 2 * k + 1
        if periodic:
            starts = centers - k
            sums = _window_sums_periodic(prefix, total, starts, m)
        else:
            j0 = np.clip(centers - k, 0, n)
            j1 = np.clip(centers + k + 1, 0, n)
            sums = prefix[j1] - prefix[j0]
        avg = sums * float(m) ** (-beta)
        lane = np.full(n, -np.inf)
        lane[centers] = avg
        if periodic:
            if m >= n:
                np.maximum(out, avg.max(), out=out)
            else:
                np.maximum(out, maximum_filter1d(lane, size=m, mode="wrap"), out=out)
        else:
            np.maximum(
                out,
                maximum_filter1d(lane, size=m, mode="constant", cval=-np.inf),
                out=out,
            )
    return out


def maximal_scan_2d(absf, h0, h1, semi0, semi1, stride0, stride1, beta, periodic, out):
    """Uncentered max of elliptical-ball averages on a 2D grid (in place).

    Balls are ellipses with semi-axes (semi0[r], semi1[r]); anisotropic balls
    of radius r are exactly the ellipses with semi-axes r**a_i.
    """
    n0, n1 = absf.shape
    prefix = np.concatenate((np.zeros((n0, 1)), np.cumsum(absf, axis=1)), axis=1)
    rowtot = prefix[:, n1]
    c0s = np.arange(0, n0, stride0)
    c1s = np.arange(0, n1, stride1)
    for s0, s1 in zip(np.asarray(semi0, float), np.asarray(semi1, float)):
        k0 = _strict_steps(float(s0), h0)
        di = np.arange(-k0, k0 + 1)
        w = s1 * np.sqrt(np.maximum(1.0 - (di * h0 / s0) ** 2, 0.0))
        k1 = np.floor(w / h1).astype(np.int64)
        bad = k1 * h1 >= w
        while np.any(bad):
            k1[bad] -= 1
            bad = k1 * h1 >= w
        np.maximum(k1, 0, out=k1)
        counts = 2 * k1 + 1
        total_cnt = float(counts.sum())
        for c0 in c0s:
            rows = c0 + di
            for c1 in c1s:
                if periodic:
                    wrows = rows % n0
                    starts = c1 - k1
                    sums = _window_sums_periodic(
                        prefix[wrows], rowtot[wrows], starts, counts
                    )
                    total = float(sums.sum())
                else:
                    inb = (rows >= 0) & (rows < n0)
                    r = rows[inb]
                    j0 = np.clip(c1 - k1[inb], 0, n1)
                    j1 = np.clip(c1 + k1[inb] + 1, 0, n1)
                    total = float((prefix[r, j1] - prefix[r, j0]).sum())
                avg = total * total_cnt ** (-beta)
                for t, kk in zip(rows, k1):
                    if periodic:
                        ti = t % n0
                        a0, a1 = (c1 - kk) % n1, (c1 + kk) % n1
                        if 2 * kk + 1 >= n1:
                            np.maximum(out[ti], avg, out=out[ti])
                        elif a0 <= a1:
                            np.maximum(out[ti, a0 : a1 + 1], avg, out=out[ti, a0 : a1 + 1])
                        else:
                            np.maximum(out[ti, a0:], avg, out=out[ti, a0:])
                            np.maximum(out[ti, : a1 + 1], avg, out=out[ti, : a1 + 1])
                    else:
                        if t < 0 or t >= n0:
                            continue
                        a0 = max(0, c1 - kk)
                        a1 = min(n1 - 1, c1 + kk)
                        if a0 <= a1:
                            np.maximum(out[t, a0 : a1 + 1], avg, out=out[t, a0 : a1 + 1])
    return out
