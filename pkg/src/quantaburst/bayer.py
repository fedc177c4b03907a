"""Bayer color filter array patterns and mosaicing."""

from __future__ import annotations

import enum

import numpy as np


class BayerPattern(enum.Enum):
    """2x2 CFA tiling, anchored at pixel (0, 0).

    The value encodes the channel index (R=0, G=1, B=2) at tile offsets
    (0,0), (0,1), (1,0), (1,1) in that order. Every tile holds one R, two G
    and one B site.
    """

    RGGB = (0, 1, 1, 2)
    GRBG = (1, 0, 2, 1)
    BGGR = (2, 1, 1, 0)
    GBRG = (1, 2, 0, 1)

    @classmethod
    def from_name(cls, name: str) -> "BayerPattern":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(
                f"unknown Bayer pattern {name!r}; expected one of "
                f"{[p.name for p in cls]}"
            ) from None

    def tile(self) -> np.ndarray:
        """Channel index of each position in the 2x2 tile."""
        return np.array(self.value, dtype=np.int64).reshape(2, 2)


# Codes used in the photon-cube header; 0 is reserved for "no CFA" (mono).
PATTERN_CODES = {None: 0, BayerPattern.RGGB: 1, BayerPattern.GRBG: 2,
                 BayerPattern.BGGR: 3, BayerPattern.GBRG: 4}
CODE_PATTERNS = {v: k for k, v in PATTERN_CODES.items()}


def channel_map(pattern: BayerPattern, height: int, width: int) -> np.ndarray:
    """Per-pixel channel index (H, W) for a pattern tiled from (0, 0).

    Odd dimensions are allowed; the tiling truncates at the borders.
    """
    tile = pattern.tile()
    ys = np.arange(height) % 2
    xs = np.arange(width) % 2
    return tile[np.ix_(ys, xs)]


def channel_masks(pattern: BayerPattern, height: int, width: int) -> np.ndarray:
    """Boolean site masks, shape (3, H, W), one per RGB channel.

    The three masks partition the image: they are pairwise disjoint and
    their union covers every pixel.
    """
    cmap = channel_map(pattern, height, width)
    return np.stack([cmap == c for c in range(3)])


def mosaic(img: np.ndarray, pattern: BayerPattern) -> np.ndarray:
    """Apply the CFA: keep, at each pixel, only the channel its site selects.

    Args:
        img: (H, W, 3) array.
        pattern: Bayer tiling.

    Returns:
        (H, W) array with the per-site channel value.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[-1] != 3:
        raise ValueError(
            f"mosaic requires a 3-channel image, got shape {img.shape}"
        )
    cmap = channel_map(pattern, img.shape[0], img.shape[1])
    return np.take_along_axis(img, cmap[..., None], axis=-1)[..., 0]
