"""Binary SPAD observation synthesis from ground-truth sRGB images.

An sRGB ground truth in [0, 1] is linearized with a plain power law,
scaled into a Poisson rate map, and each exposure detects at least one
photon with probability 1 - exp(-rate). Averaging N mosaiced binary frames
yields a nano-burst with log2(N+1)-bit levels (N=7 gives 8 levels).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bayer import BayerPattern, mosaic
from .cube import PhotonCube
from .rng import RngSpec

DEFAULT_GAMMA = 2.2
NANO_BURST_SIZE = 7


@dataclass(frozen=True)
class PhotonRateMap:
    """Poisson rate per pixel-channel (photons per exposure)."""

    data: np.ndarray
    alpha: float
    dark_rate: float = 0.0

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class NanoBurst:
    """Average of n_frames binary samples, stored as integer counts.

    `counts[p]` is the number of detections at pixel p, so the frame value
    is counts / n_frames, always on the k/n lattice. For color inputs the
    counts are post-CFA (single channel) and `pattern` records the tiling.
    """

    counts: np.ndarray
    n_frames: int
    pattern: Optional[BayerPattern] = None

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")
        c = self.counts
        if c.min() < 0 or c.max() > self.n_frames:
            raise ValueError("counts outside [0, n_frames]")

    @property
    def data(self) -> np.ndarray:
        """Frame values on the k/n lattice, float64."""
        return self.counts.astype(np.float64) / self.n_frames

    @property
    def shape(self):
        return self.counts.shape


class Protocol(enum.Enum):
    """Burst sampling protocols.

    BLUR_FREE_7: one nano-burst per GT frame, all 7 binary samples drawn
        from that single frame (no intra-burst motion).
    REALISTIC_1: one binary sample per GT frame; consecutive groups of 7
        samples are averaged into one nano-burst, so scene motion blurs
        across the burst.
    """

    BLUR_FREE_7 = "BlurFree7"
    REALISTIC_1 = "Realistic1"

    @classmethod
    def from_name(cls, name: str) -> "Protocol":
        for p in cls:
            if p.value.lower() == str(name).lower() or p.name == name:
                return p
        raise ValueError(f"unknown protocol {name!r}; expected "
                         f"{[p.value for p in cls]}")


def _as_image(img, name="image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[-1] != 3):
        raise ValueError(f"{name} must be (H, W) or (H, W, 3), got {img.shape}")
    if img.size == 0:
        raise ValueError(f"{name} is empty")
    return img


def gamma_linearize(img: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Map sRGB values in [0, 1] to linear radiance via elementwise power.

    Uses the plain power law value**gamma (not the piecewise sRGB EOTF).
    """
    img = _as_image(img, "sRGB image")
    if not np.isfinite(img).all():
        bad = int(np.count_nonzero(~np.isfinite(img)))
        raise ValueError(f"sRGB image contains {bad} non-finite values")
    lo, hi = float(img.min()), float(img.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"sRGB values must lie in [0, 1], got range [{lo}, {hi}]")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return img ** gamma


def gamma_encode(lin: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Inverse of gamma_linearize, clamped into [0, 1]."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return np.clip(np.asarray(lin, dtype=np.float64), 0.0, None) ** (1.0 / gamma)


def make_rate_map(lin: np.ndarray, alpha: float,
                  dark_rate: float = 0.0) -> PhotonRateMap:
    """Scale a linear image to a Poisson rate map: rate = alpha*lin + dark."""
    lin = _as_image(lin, "linear image")
    if lin.min() < 0:
        raise ValueError("linear image must be nonnegative")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if dark_rate < 0:
        raise ValueError(f"dark_rate must be >= 0, got {dark_rate}")
    return PhotonRateMap(alpha * lin + dark_rate, alpha=float(alpha),
                         dark_rate=float(dark_rate))


def expected_ppp(rate: PhotonRateMap) -> float:
    """Expected photons per pixel: the spatial mean of the rate map."""
    if rate.data.size == 0:
        raise ValueError("rate map is empty")
    return float(rate.data.mean())


def detection_probability(rate: PhotonRateMap) -> np.ndarray:
    """Per-pixel probability of at least one detection: 1 - exp(-rate)."""
    return -np.expm1(-rate.data)


def sample_binary_frame(rate: PhotonRateMap, rng: RngSpec,
                        frame_index: int) -> np.ndarray:
    """Draw one binary frame: each pixel-channel fires with p = 1 - exp(-rate).

    Same shape as the rate map (pre-CFA for color). Reproducible: the draw
    at (frame_index, pixel, channel) depends only on (rng.seed, frame_index,
    pixel, channel).
    """
    p = detection_probability(rate)
    u = rng.frame_uniforms(frame_index, p.shape)
    return (u < p).astype(np.uint8)


def make_nano_burst(rate: PhotonRateMap, n: int,
                    pattern: Optional[BayerPattern], rng: RngSpec,
                    frame_offset: int = 0) -> NanoBurst:
    """Average n independent (mosaiced, for color) binary samples.

    `frame_offset` is the global index of the first binary frame, so burst
    sequences can keep one counter-based stream per binary frame.
    """
    if n < 1:
        raise ValueError(f"nano-burst size must be >= 1, got {n}")
    if rate.data.ndim == 3 and pattern is None:
        raise ValueError("color rate map requires a Bayer pattern")
    counts = None
    for i in range(n):
        frame = sample_binary_frame(rate, rng, frame_offset + i)
        if pattern is not None and frame.ndim == 3:
            frame = mosaic(frame, pattern)
        counts = frame.astype(np.uint16) if counts is None else counts + frame
    return NanoBurst(counts=counts, n_frames=n, pattern=pattern)


def simulate_burst_sequence(
    frames: Sequence[np.ndarray],
    protocol: Protocol,
    alpha: float,
    pattern: Optional[BayerPattern],
    rng: RngSpec,
    dark_rate: float = 0.0,
    gamma: float = DEFAULT_GAMMA,
    fps: float = 0.0,
) -> tuple[list[NanoBurst], PhotonCube]:
    """Simulate a nano-burst sequence plus the full binary photon cube.

    Args:
        frames: ground-truth sRGB frames, all the same shape.
        protocol: BLUR_FREE_7 draws 7 binary samples from every GT frame;
            REALISTIC_1 draws one sample per GT frame and averages
            non-overlapping groups of 7 consecutive samples.
        alpha: flux factor of the rate map.
        pattern: Bayer tiling for color inputs (None for monochrome).
        rng: root random spec; binary frame k uses stream (seed, k).
        fps: capture rate recorded in the cube header (binary frames/s).

    Returns:
        (nano_bursts, cube). REALISTIC_1 requires len(frames) divisible by 7.
    """
    if len(frames) == 0:
        raise ValueError("no ground-truth frames given")
    protocol = Protocol(protocol)
    n = NANO_BURST_SIZE
    if protocol is Protocol.REALISTIC_1 and len(frames) % n != 0:
        raise ValueError(
            f"{protocol.value} needs a frame count divisible by {n}, "
            f"got {len(frames)}"
        )

    rates = []
    for i, f in enumerate(frames):
        lin = gamma_linearize(f, gamma)
        if lin.shape != np.asarray(frames[0]).shape:
            raise ValueError(f"frame {i} shape {lin.shape} differs from "
                             f"frame 0 shape {np.asarray(frames[0]).shape}")
        rates.append(make_rate_map(lin, alpha, dark_rate))
    color = rates[0].data.ndim == 3
    if color and pattern is None:
        raise ValueError("color frames require a Bayer pattern")

    def one_sample(rate, k):
        b = sample_binary_frame(rate, rng, k)
        return mosaic(b, pattern) if color else b

    binary = []
    nanos = []
    if protocol is Protocol.BLUR_FREE_7:
        for i, rate in enumerate(rates):
            group = [one_sample(rate, n * i + j) for j in range(n)]
            binary.extend(group)
            counts = np.sum(np.stack(group), axis=0, dtype=np.uint16)
            nanos.append(NanoBurst(counts, n, pattern if color else None))
    else:
        binary = [one_sample(rate, k) for k, rate in enumerate(rates)]
        for b in range(len(frames) // n):
            counts = np.sum(np.stack(binary[n * b:n * (b + 1)]), axis=0,
                            dtype=np.uint16)
            nanos.append(NanoBurst(counts, n, pattern if color else None))

    cube = PhotonCube.from_frames(
        np.stack(binary),
        fps=fps,
        channels=3 if color else 1,
        pattern=pattern if color else None,
        alpha=alpha,
        seed=rng.seed,
    )
    return nanos, cube
