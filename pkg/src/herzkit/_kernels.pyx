# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: quasi-norm root finding and ball-average scans.

Mirrors the arithmetic of ``_kernels_py`` (strict lattice membership, phantom
counting outside the box for the zero-extension convention) so that both
backends agree to rounding error.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, floor, log, pow, sqrt
from libc.stdlib cimport free, malloc

__backend_name__ = "compiled"


def quasi_norm_points(pts, a, double tol):
    """Per-row root of sum_i x_i^2 / t^(2 a_i) = 1 (0 for the zero row)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(pts, dtype=np.float64)))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(
        np.asarray(a, dtype=np.float64))
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t n = p.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m)
    cdef double* two_a = <double*>malloc(n * sizeof(double))
    cdef double* x2 = <double*>malloc(n * sizeof(double))
    if two_a == NULL or x2 == NULL:
        free(two_a)
        free(x2)
        raise MemoryError()
    cdef Py_ssize_t i, j, it
    cdef double lo, hi, per, mid, f, fp, t, tp, step, lt
    for j in range(n):
        two_a[j] = 2.0 * av[j]
    for i in range(m):
        lo = 0.0
        hi = 0.0
        for j in range(n):
            x2[j] = p[i, j] * p[i, j]
            if x2[j] != 0.0:
                per = pow(fabs(p[i, j]), 1.0 / av[j])
                hi += per
                if per > lo:
                    lo = per
        if hi == 0.0:
            out[i] = 0.0
            continue
        if hi - lo <= 1e-15 * hi:
            out[i] = lo
            continue
        for it in range(54):
            mid = 0.5 * (lo + hi)
            lt = log(mid)
            f = 0.0
            for j in range(n):
                if x2[j] != 0.0:
                    f += x2[j] * exp(-two_a[j] * lt)
            if f > 1.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 0.25 * tol:
                break
        t = 0.5 * (lo + hi)
        for it in range(4):
            lt = log(t)
            f = 0.0
            fp = 0.0
            for j in range(n):
                if x2[j] != 0.0:
                    tp = x2[j] * exp(-two_a[j] * lt)
                    f += tp
                    fp += tp * (-two_a[j]) / t
            step = (f - 1.0) / fp
            t = t - step
            if t < lo:
                t = lo
            elif t > hi:
                t = hi
        out[i] = t
    free(two_a)
    free(x2)
    return out


cdef inline Py_ssize_t _strict_steps(double s, double h) nogil:
    cdef Py_ssize_t k = <Py_ssize_t>floor(s / h)
    while k >= 0 and k * h >= s:
        k -= 1
    if k < 0:
        k = 0
    return k


cdef inline double _wrap_sum(double[:, ::1] prefix, double[::1] rowtot,
                             Py_ssize_t row, Py_ssize_t start,
                             Py_ssize_t length, Py_ssize_t n) nogil:
    cdef Py_ssize_t full = length / n
    cdef Py_ssize_t rem = length % n
    cdef Py_ssize_t st = start % n
    cdef double s = full * rowtot[row]
    if st < 0:
        st += n
    cdef Py_ssize_t end = st + rem
    if end <= n:
        s += prefix[row, end] - prefix[row, st]
    else:
        s += (prefix[row, n] - prefix[row, st]) + prefix[row, end - n]
    return s


cdef int _sliding_max_into(double[::1] lane, Py_ssize_t k, double[::1] out) nogil:
    """out[i] = max(out[i], max lane[i-k .. i+k] clipped to [0, n))."""
    cdef Py_ssize_t n = lane.shape[0]
    cdef Py_ssize_t* dq = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    if dq == NULL:
        return -1
    cdef Py_ssize_t head = 0, tail = 0, i, j = 0, hi
    cdef double v
    for i in range(n):
        hi = i + k
        if hi > n - 1:
            hi = n - 1
        while j <= hi:
            while tail > head and lane[dq[tail - 1]] <= lane[j]:
                tail -= 1
            dq[tail] = j
            tail += 1
            j += 1
        while dq[head] < i - k:
            head += 1
        v = lane[dq[head]]
        if v > out[i]:
            out[i] = v
    free(dq)
    return 0


def maximal_scan_1d(absf, double h, semi_axes, Py_ssize_t stride,
                    double beta, bint periodic, out):
    cdef double[::1] fv = np.ascontiguousarray(absf, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] outv = np.ascontiguousarray(
        out, dtype=np.float64)
    cdef double[::1] ov = outv
    cdef double[::1] ss = np.ascontiguousarray(semi_axes, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pref2 = np.zeros((1, n + 1))
    cdef Py_ssize_t i
    for i in range(n):
        pref2[0, i + 1] = pref2[0, i] + fv[i]
    cdef double[:, ::1] prefix = pref2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tot = np.array([pref2[0, n]])
    cdef double[::1] rowtot = tot
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lane_buf = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ext_buf
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tmp_buf
    cdef double[::1] lane = lane_buf
    cdef double[::1] ext
    cdef double[::1] tmp
    cdef Py_ssize_t r, c, k, m, j0, j1, t
    cdef double avg, cnt, best
    cdef double NEG = -np.inf
    for r in range(ss.shape[0]):
        k = _strict_steps(ss[r], h)
        m = 2 * k + 1
        cnt = <double>m
        for t in range(n):
            lane[t] = NEG
        for c in range(0, n, stride):
            if periodic:
                avg = _wrap_sum(prefix, rowtot, 0, c - k, m, n) * pow(cnt, -beta)
            else:
                j0 = c - k
                if j0 < 0:
                    j0 = 0
                j1 = c + k + 1
                if j1 > n:
                    j1 = n
                avg = (prefix[0, j1] - prefix[0, j0]) * pow(cnt, -beta)
            lane[c] = avg
        if periodic:
            if m >= n:
                best = NEG
                for t in range(n):
                    if lane[t] > best:
                        best = lane[t]
                for t in range(n):
                    if best > ov[t]:
                        ov[t] = best
            else:
                # wrap by padding k entries of the lane on each side, then
                # run the same deque max over the extension
                ext_buf = np.empty(n + 2 * k)
                ext = ext_buf
                for t in range(k):
                    ext[t] = lane[n - k + t]
                    ext[n + k + t] = lane[t]
                for t in range(n):
                    ext[k + t] = lane[t]
                tmp_buf = np.full(n + 2 * k, NEG)
                tmp = tmp_buf
                if _sliding_max_into(ext, k, tmp) != 0:
                    raise MemoryError()
                for t in range(n):
                    if tmp[t + k] > ov[t]:
                        ov[t] = tmp[t + k]
        else:
            if _sliding_max_into(lane, k, ov) != 0:
                raise MemoryError()
    out[...] = outv
    return out


def maximal_scan_2d(absf, double h0, double h1, semi0, semi1,
                    Py_ssize_t stride0, Py_ssize_t stride1,
                    double beta, bint periodic, out):
    cdef double[:, ::1] fv = np.ascontiguousarray(absf, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] outv = np.ascontiguousarray(
        out, dtype=np.float64)
    cdef double[:, ::1] ov = outv
    cdef double[::1] s0v = np.ascontiguousarray(semi0, dtype=np.float64)
    cdef double[::1] s1v = np.ascontiguousarray(semi1, dtype=np.float64)
    cdef Py_ssize_t n0 = fv.shape[0]
    cdef Py_ssize_t n1 = fv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pref = np.zeros((n0, n1 + 1))
    cdef Py_ssize_t i, j
    for i in range(n0):
        for j in range(n1):
            pref[i, j + 1] = pref[i, j] + fv[i, j]
    cdef double[:, ::1] prefix = pref
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rt = pref[:, n1].copy()
    cdef double[::1] rowtot = rt
    cdef cnp.ndarray[cnp.int64_t, ndim=1] k1buf
    cdef long long[::1] k1
    cdef Py_ssize_t r, k0, di, c0, c1, row, kk, a0, a1, t, wrow
    cdef double s0, s1, w, u, total, avg, total_cnt
    for r in range(s0v.shape[0]):
        s0 = s0v[r]
        s1 = s1v[r]
        k0 = _strict_steps(s0, h0)
        k1buf = np.zeros(2 * k0 + 1, dtype=np.int64)
        k1 = k1buf
        total_cnt = 0.0
        for di in range(-k0, k0 + 1):
            u = di * h0 / s0
            w = 1.0 - u * u
            if w < 0.0:
                w = 0.0
            w = s1 * sqrt(w)
            kk = <Py_ssize_t>floor(w / h1)
            while kk >= 0 and kk * h1 >= w:
                kk -= 1
            if kk < 0:
                kk = 0
            k1[di + k0] = kk
            total_cnt += <double>(2 * kk + 1)
        for c0 in range(0, n0, stride0):
            for c1 in range(0, n1, stride1):
                total = 0.0
                for di in range(-k0, k0 + 1):
                    row = c0 + di
                    kk = k1[di + k0]
                    if periodic:
                        wrow = row % n0
                        if wrow < 0:
                            wrow += n0
                        total += _wrap_sum(prefix, rowtot, wrow,
                                           c1 - kk, 2 * kk + 1, n1)
                    else:
                        if row < 0 or row >= n0:
                            continue
                        a0 = c1 - kk
                        if a0 < 0:
                            a0 = 0
                        a1 = c1 + kk + 1
                        if a1 > n1:
                            a1 = n1
                        if a0 < a1:
                            total += prefix[row, a1] - prefix[row, a0]
                avg = total * pow(total_cnt, -beta)
                for di in range(-k0, k0 + 1):
                    row = c0 + di
                    kk = k1[di + k0]
                    if periodic:
                        wrow = row % n0
                        if wrow < 0:
                            wrow += n0
                        if 2 * kk + 1 >= n1:
                            for t in range(n1):
                                if avg > ov[wrow, t]:
                                    ov[wrow, t] = avg
                        else:
                            for t in range(c1 - kk, c1 + kk + 1):
                                a0 = t % n1
                                if a0 < 0:
                                    a0 += n1
                                if avg > ov[wrow, a0]:
                                    ov[wrow, a0] = avg
                    else:
                        if row < 0 or row >= n0:
                            continue
                        a0 = c1 - kk
                        if a0 < 0:
                            a0 = 0
                        a1 = c1 + kk
                        if a1 > n1 - 1:
                            a1 = n1 - 1
                        for t in range(a0, a1 + 1):
                            if avg > ov[row, t]:
                                ov[row, t] = avg
    out[...] = outv
    return out
