# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: per-patch SAD search and bilinear inverse warping.

Drop-in replacements for `reference.py`; see its docstrings for the
contract. Loops release the GIL so harness-level threading can overlap.
"""

from libc.math cimport fabs, floor

import numpy as np

cimport numpy as cnp

cnp.import_array()


def sad_search(double[:, ::1] src_pad, double[:, ::1] ref, int pad,
               cnp.int64_t[:, ::1] init_dy, cnp.int64_t[:, ::1] init_dx,
               int patch, cnp.int64_t[:, ::1] disps):
    cdef Py_ssize_t h = ref.shape[0]
    cdef Py_ssize_t w = ref.shape[1]
    cdef Py_ssize_t ny = init_dy.shape[0]
    cdef Py_ssize_t nx = init_dy.shape[1]
    cdef Py_ssize_t nk = disps.shape[0]

    best_dy_arr = np.empty((ny, nx), dtype=np.int64)
    best_dx_arr = np.empty((ny, nx), dtype=np.int64)
    best_sad_arr = np.empty((ny, nx), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] best_dy = best_dy_arr
    cdef cnp.int64_t[:, ::1] best_dx = best_dx_arr
    cdef double[:, ::1] best_sad = best_sad_arr

    cdef Py_ssize_t py, px, k, y, x, y0, y1, x0, x1
    cdef cnp.int64_t dy, dx, bdy, bdx
    cdef double s, best, d

    with nogil:
        for py in range(ny):
            y0 = py * patch
            y1 = y0 + patch
            if y1 > h:
                y1 = h
            for px in range(nx):
                x0 = px * patch
                x1 = x0 + patch
                if x1 > w:
                    x1 = w
                best = -1.0
                bdy = 0
                bdx = 0
                for k in range(nk):
                    dy = init_dy[py, px] + disps[k, 0]
                    dx = init_dx[py, px] + disps[k, 1]
                    s = 0.0
                    for y in range(y0, y1):
                        for x in range(x0, x1):
                            d = src_pad[y + dy + pad, x + dx + pad] - ref[y, x]
                            s += fabs(d)
                        if best >= 0.0 and s >= best:
                            break  # sums only grow; the winner is unchanged
                    if best < 0.0 or s < best:
                        best = s
                        bdy = dy
                        bdx = dx
                best_dy[py, px] = bdy
                best_dx[py, px] = bdx
                best_sad[py, px] = best / ((y1 - y0) * (x1 - x0))
    return best_dy_arr, best_dx_arr, best_sad_arr


def warp_bilinear(double[:, ::1] img, double[:, ::1] flow_dx,
                  double[:, ::1] flow_dy):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    valid_arr = np.zeros((h, w), dtype=np.bool_)
    cdef double[:, ::1] out = out_arr
    cdef cnp.uint8_t[:, ::1] valid = valid_arr.view(np.uint8)

    cdef Py_ssize_t y, x, y0, x0, y1, x1
    cdef double sy, sx, fy, fx, v0, v1

    with nogil:
        for y in range(h):
            for x in range(w):
                sy = y - flow_dy[y, x]
                sx = x - flow_dx[y, x]
                if sy < 0.0 or sy > h - 1.0 or sx < 0.0 or sx > w - 1.0:
                    continue
                valid[y, x] = 1
                y0 = <Py_ssize_t>floor(sy)
                x0 = <Py_ssize_t>floor(sx)
                y1 = y0 + 1
                if y1 > h - 1:
                    y1 = h - 1
                x1 = x0 + 1
                if x1 > w - 1:
                    x1 = w - 1
                fy = sy - y0
                fx = sx - x0
                v0 = img[y0, x0] + fx * (img[y0, x1] - img[y0, x0])
                v1 = img[y1, x0] + fx * (img[y1, x1] - img[y1, x0])
                out[y, x] = v0 + fy * (v1 - v0)
    return out_arr, valid_arr
