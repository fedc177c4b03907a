"""Block-matching optical flow and inverse warping.

Flow fields map source coordinates toward the reference frame: content at
source pixel q appears at reference position q + flow(q). `warp` inverse-
samples the source at p - flow(p), so warp(src, block_match_flow(src, ref))
approximates ref.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels


@dataclass
class BlockMatchParams:
    """Coarse-to-fine search configuration.

    `patch` is the block size (flow is constant within each block),
    `radius` the integer search radius per pyramid level, `levels` the
    pyramid depth (mean-pooled by 2 per level). Patches whose best SAD per
    pixel exceeds `valid_threshold` are masked invalid; None disables
    masking.
    """

    patch: int = 16
    radius: int = 8
    levels: int = 3
    valid_threshold: Optional[float] = None

    def __post_init__(self):
        if self.patch < 1 or self.radius < 1 or self.levels < 1:
            raise ValueError("patch, radius and levels must all be >= 1")


@dataclass
class FlowField:
    """Per-pixel displacement (dx, dy) with a validity mask.

    `sad` holds the winning per-pixel mean SAD of each block (diagnostic;
    same value replicated across the block).
    """

    dx: np.ndarray
    dy: np.ndarray
    valid: np.ndarray
    sad: Optional[np.ndarray] = None

    @classmethod
    def zero(cls, height: int, width: int) -> "FlowField":
        z = np.zeros((height, width), dtype=np.float64)
        return cls(dx=z, dy=z.copy(),
                   valid=np.ones((height, width), dtype=bool))

    @property
    def shape(self):
        return self.dx.shape

    def magnitude_sq(self) -> np.ndarray:
        return self.dx * self.dx + self.dy * self.dy


@functools.lru_cache(maxsize=None)
def _displacements(radius: int) -> np.ndarray:
    """Search offsets sorted by (magnitude^2, dy, dx).

    The SAD search keeps the first strict minimum, so this ordering breaks
    ties toward the smallest displacement (then lexicographic), which keeps
    flat regions at zero flow.
    """
    rng = range(-radius, radius + 1)
    ds = sorted(((dy, dx) for dy in rng for dx in rng),
                key=lambda d: (d[0] * d[0] + d[1] * d[1], d[0], d[1]))
    return np.array(ds, dtype=np.int64)


def _mean_pool2(img: np.ndarray) -> np.ndarray:
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    v = img[: h2 * 2, : w2 * 2]
    return 0.25 * (v[0::2, 0::2] + v[0::2, 1::2] + v[1::2, 0::2]
                   + v[1::2, 1::2])


def _grid_shape(h: int, w: int, patch: int) -> tuple[int, int]:
    return -(-h // patch), -(-w // patch)


def _expand(grid: np.ndarray, h: int, w: int, patch: int) -> np.ndarray:
    """Replicate per-block values to a per-pixel map."""
    return np.repeat(np.repeat(grid, patch, axis=0), patch, axis=1)[:h, :w]


def block_match_flow(src: np.ndarray, ref: np.ndarray,
                     params: Optional[BlockMatchParams] = None) -> FlowField:
    """Estimate patchwise integer flow aligning `src` toward `ref`.

    Exhaustive SAD search per block over a mean-pooled pyramid; each level
    refines the doubled coarser estimate within +/- radius. Displacements
    are constant within a block. On noise-free global integer shifts within
    the search range the interior flow is exact.
    """
    params = params or BlockMatchParams()
    src = np.asarray(src, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if src.shape != ref.shape or src.ndim != 2:
        raise ValueError(f"src/ref must be equal-shape 2D images, got "
                         f"{src.shape} vs {ref.shape}")
    h, w = ref.shape
    if min(h, w) < params.patch:
        raise ValueError(f"image {ref.shape} smaller than patch "
                         f"{params.patch}")

    # Drop pyramid levels that would shrink below one patch.
    levels = params.levels
    while levels > 1 and (min(h, w) >> (levels - 1)) < params.patch:
        levels -= 1

    pyr_src = [src]
    pyr_ref = [ref]
    for _ in range(levels - 1):
        pyr_src.append(_mean_pool2(pyr_src[-1]))
        pyr_ref.append(_mean_pool2(pyr_ref[-1]))

    disps = _displacements(params.radius)
    dy_map = dx_map = None
    best_dy = best_dx = best_sad = None
    for level in range(levels - 1, -1, -1):
        s, r = pyr_src[level], pyr_ref[level]
        lh, lw = r.shape
        ny, nx = _grid_shape(lh, lw, params.patch)
        if dy_map is None:
            init_dy = np.zeros((ny, nx), dtype=np.int64)
            init_dx = np.zeros((ny, nx), dtype=np.int64)
        else:
            # Sample the doubled coarser estimate at block centers.
            cy = np.minimum(np.arange(ny) * params.patch + params.patch // 2,
                            lh - 1)
            cx = np.minimum(np.arange(nx) * params.patch + params.patch // 2,
                            lw - 1)
            init_dy = (2.0 * dy_map)[np.ix_(cy, cx)].astype(np.int64)
            init_dx = (2.0 * dx_map)[np.ix_(cy, cx)].astype(np.int64)
        # Clamp so every candidate stays within the padded source.
        pad = params.radius + max(
            int(np.abs(init_dy).max(initial=0)),
            int(np.abs(init_dx).max(initial=0)),
        )
        src_pad = np.pad(s, pad, mode="edge")
        best_dy, best_dx, best_sad = _kernels.sad_search(
            src_pad, np.ascontiguousarray(r), pad,
            np.ascontiguousarray(init_dy), np.ascontiguousarray(init_dx),
            params.patch, disps)
        if level > 0:
            # Per-pixel maps at this level's resolution guide the next one.
            dy_map = _expand(best_dy.astype(np.float64), lh, lw, params.patch)
            dx_map = _expand(best_dx.astype(np.float64), lh, lw, params.patch)

    dy_full = _expand(best_dy.astype(np.float64), h, w, params.patch)
    dx_full = _expand(best_dx.astype(np.float64), h, w, params.patch)
    sad_full = _expand(best_sad, h, w, params.patch)
    if params.valid_threshold is None:
        valid = np.ones((h, w), dtype=bool)
    else:
        valid = sad_full <= params.valid_threshold
    return FlowField(dx=dx_full, dy=dy_full, valid=valid, sad=sad_full)


def warp(img: np.ndarray, flow: FlowField):
    """Inverse-warp an image to the flow's reference frame.

    Bilinear sampling at p - flow(p); samples falling outside the image are
    reported invalid (and combined with the flow's own mask).

    Returns:
        (warped, valid) with warped matching img's shape and valid (H, W).
    """
    img = np.asarray(img, dtype=np.float64)
    if img.shape[:2] != flow.shape:
        raise ValueError(f"image {img.shape} does not match flow "
                         f"{flow.shape}")
    dx = np.ascontiguousarray(flow.dx, dtype=np.float64)
    dy = np.ascontiguousarray(flow.dy, dtype=np.float64)
    if img.ndim == 2:
        out, valid = _kernels.warp_bilinear(
            np.ascontiguousarray(img), dx, dy)
    else:
        planes = []
        valid = None
        for c in range(img.shape[2]):
            p, valid = _kernels.warp_bilinear(
                np.ascontiguousarray(img[..., c]), dx, dy)
            planes.append(p)
        out = np.stack(planes, axis=-1)
    return out, valid & flow.valid
