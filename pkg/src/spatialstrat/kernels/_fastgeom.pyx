# Compiled geometry kernels: batch point-in-polygon and segment clipping.
# Same contract as kernels._ref (even-odd rule, edges count as inside).

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline bint _point_in(double x, double y,
                           const double[:, ::1] coords,
                           const long long[::1] offsets) noexcept nogil:
    cdef Py_ssize_t r, i, lo, hi
    cdef double axv, ayv, bxv, byv, xcross, cross
    cdef bint inside = 0
    cdef Py_ssize_t nrings = offsets.shape[0] - 1
    for r in range(nrings):
        lo = <Py_ssize_t> offsets[r]
        hi = <Py_ssize_t> offsets[r + 1]
        for i in range(lo, hi):
            axv = coords[i, 0]
            ayv = coords[i, 1]
            if i + 1 < hi:
                bxv = coords[i + 1, 0]
                byv = coords[i + 1, 1]
            else:
                bxv = coords[lo, 0]
                byv = coords[lo, 1]
            if (ayv > y) != (byv > y):
                xcross = axv + (y - ayv) * (bxv - axv) / (byv - ayv)
                if x < xcross:
                    inside = not inside
            cross = (bxv - axv) * (y - ayv) - (byv - ayv) * (x - axv)
            if cross == 0.0:
                if (x >= min(axv, bxv)) and (x <= max(axv, bxv)) and \
                   (y >= min(ayv, byv)) and (y <= max(ayv, byv)):
                    return 1
    return inside


def points_in_rings(px, py, coords, offsets):
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(px, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] y = np.ascontiguousarray(py, dtype=np.float64).ravel()
    cdef const double[:, ::1] c = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0]
    out = np.zeros(n, dtype=bool)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _point_in(x[i], y[i], c, off)
    shape = np.asarray(px, dtype=np.float64).shape
    return out.reshape(shape)


def segment_lengths_in_rings(mx, my, double ex, double ey, coords, offsets):
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(mx, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] y = np.ascontiguousarray(my, dtype=np.float64).ravel()
    cdef const double[:, ::1] c = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nedges = c.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] tbuf = np.empty(nedges + 2, dtype=np.float64)
    cdef double[::1] ts = tbuf
    cdef double half = (ex * ex + ey * ey) ** 0.5
    cdef Py_ssize_t i, r, j, k, lo, hi, nt
    cdef double axv, ayv, bxv, byv, dx, dy, denom, wx, wy, t, s
    cdef double key, total, mt, t0, t1
    cdef Py_ssize_t nrings = offsets.shape[0] - 1
    if half == 0.0:
        return out
    with nogil:
        for i in range(n):
            nt = 0
            ts[nt] = -1.0
            nt += 1
            for r in range(nrings):
                lo = <Py_ssize_t> off[r]
                hi = <Py_ssize_t> off[r + 1]
                for j in range(lo, hi):
                    axv = c[j, 0]
                    ayv = c[j, 1]
                    if j + 1 < hi:
                        bxv = c[j + 1, 0]
                        byv = c[j + 1, 1]
                    else:
                        bxv = c[lo, 0]
                        byv = c[lo, 1]
                    dx = bxv - axv
                    dy = byv - ayv
                    denom = ex * dy - ey * dx
                    if denom == 0.0:
                        continue
                    wx = axv - x[i]
                    wy = ayv - y[i]
                    t = (wx * dy - wy * dx) / denom
                    s = (wx * ey - wy * ex) / denom
                    if 0.0 <= s <= 1.0 and -1.0 <= t <= 1.0:
                        ts[nt] = t
                        nt += 1
            ts[nt] = 1.0
            nt += 1
            # insertion sort (crossing counts are small)
            for j in range(2, nt):
                key = ts[j]
                k = j - 1
                while k >= 1 and ts[k] > key:
                    ts[k + 1] = ts[k]
                    k -= 1
                ts[k + 1] = key
            total = 0.0
            for j in range(nt - 1):
                t0 = ts[j]
                t1 = ts[j + 1]
                if t1 <= t0:
                    continue
                mt = 0.5 * (t0 + t1)
                if _point_in(x[i] + mt * ex, y[i] + mt * ey, c, off):
                    total += t1 - t0
            out[i] = total * half
    return out
