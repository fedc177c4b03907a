"""Pure-numpy implementations of the hot kernels.

Semantics match the compiled `_native` extension; the native module is
preferred at import time when available. Tie-breaking and validity rules
are identical, so both backends return the same flow on inputs without
floating-point near-ties (sums are accumulated in different orders, so
exact SAD values may differ in the last ulp).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def sad_search(src_pad: np.ndarray, ref: np.ndarray, pad: int,
               init_dy: np.ndarray, init_dx: np.ndarray, patch: int,
               disps: np.ndarray):
    """Exhaustive per-patch SAD search over candidate displacements.

    Args:
        src_pad: source image edge-padded by `pad` on every side, float64.
        ref: reference image (H, W), float64.
        pad: padding width; every candidate displacement must satisfy
            |init + disp| <= pad (callers clamp init accordingly).
        init_dy, init_dx: per-patch initial displacement, shape (ny, nx).
        patch: nominal patch size; border patches truncate.
        disps: (K, 2) array of (dy, dx) offsets tried in order; the first
            strictly-smallest SAD wins, so ordering defines the tie-break.

    Returns:
        (best_dy, best_dx, best_sad) with shapes (ny, nx); best_sad is the
        mean absolute difference per pixel of the winning displacement.
    """
    h, w = ref.shape
    ny, nx = init_dy.shape
    best_dy = np.empty((ny, nx), dtype=np.int64)
    best_dx = np.empty((ny, nx), dtype=np.int64)
    best_sad = np.empty((ny, nx), dtype=np.float64)
    kdy = disps[:, 0]
    kdx = disps[:, 1]
    for py in range(ny):
        y0, y1 = py * patch, min((py + 1) * patch, h)
        for px in range(nx):
            x0, x1 = px * patch, min((px + 1) * patch, w)
            ph, pw = y1 - y0, x1 - x0
            cy = y0 + pad + init_dy[py, px]
            cx = x0 + pad + init_dx[py, px]
            # All candidate windows live in this (ph+2r, pw+2r) region.
            r_lo_y = cy + kdy.min()
            r_lo_x = cx + kdx.min()
            region = src_pad[r_lo_y:cy + kdy.max() + ph,
                             r_lo_x:cx + kdx.max() + pw]
            wins = sliding_window_view(region, (ph, pw))
            cand = wins[kdy - kdy.min(), kdx - kdx.min()]
            sad = np.abs(cand - ref[y0:y1, x0:x1]).sum(axis=(-2, -1))
            k = int(np.argmin(sad))  # first occurrence wins ties
            best_dy[py, px] = init_dy[py, px] + kdy[k]
            best_dx[py, px] = init_dx[py, px] + kdx[k]
            best_sad[py, px] = sad[k] / (ph * pw)
    return best_dy, best_dx, best_sad


def warp_bilinear(img: np.ndarray, flow_dx: np.ndarray, flow_dy: np.ndarray):
    """Inverse-warp a single-channel image: out(p) = img(p - flow(p)).

    Returns (out, valid) where valid marks samples taken fully inside the
    image; invalid outputs are 0.
    """
    h, w = img.shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    sy = yy - flow_dy
    sx = xx - flow_dx
    valid = (sy >= 0.0) & (sy <= h - 1.0) & (sx >= 0.0) & (sx <= w - 1.0)
    y0 = np.clip(np.floor(sy), 0, h - 1).astype(np.int64)
    x0 = np.clip(np.floor(sx), 0, w - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = sy - y0
    fx = sx - x0
    # Same expression order as the native kernel so results agree bitwise.
    v0 = img[y0, x0] + fx * (img[y0, x1] - img[y0, x0])
    v1 = img[y1, x0] + fx * (img[y1, x1] - img[y1, x0])
    out = v0 + fy * (v1 - v0)
    out[~valid] = 0.0
    return out, valid
