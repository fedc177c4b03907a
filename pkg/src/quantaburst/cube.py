"""Bit-exact on-disk format for binary quanta frame stacks (`.pcube`).

Layout (version 1): a fixed-size little-endian header followed by the
frames stored consecutively, each row-major, bit-packed 8 pixels per byte,
LSB-first within a byte, rows padded to a byte boundary. The payload is
therefore frame_count * height * ceil(width / 8) bytes. LSB-first order and
per-row padding give O(1) row addressing.

Header fields: magic "PCUB", version u32, width u32, height u32,
frame_count u32, channels u32, bayer code u32 (0=none, 1=RGGB, 2=GRBG,
3=BGGR, 4=GBRG), fps f64, alpha f64, seed u64.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

import numpy as np

from .bayer import CODE_PATTERNS, PATTERN_CODES, BayerPattern

MAGIC = b"PCUB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIddQ")
HEADER_SIZE = _HEADER.size


class PhotonCubeError(Exception):
    """Base class for photon-cube format errors."""


class CubeFormatError(PhotonCubeError):
    """Stream does not start with the expected magic bytes."""


class CubeVersionError(PhotonCubeError):
    """Unsupported format version."""


class CubeTruncatedError(PhotonCubeError):
    """Stream ended before the declared payload was read."""


class CubeHeaderError(PhotonCubeError):
    """Header inconsistent with the payload (write-side validation)."""


def _row_bytes(width: int) -> int:
    return (width + 7) // 8


@dataclass
class PhotonCube:
    """In-memory photon cube: header metadata plus bit-packed payload.

    `payload` has shape (frame_count, height, row_bytes) with dtype uint8.
    For mosaiced color captures the payload holds one bit per CFA site and
    `channels`/`bayer_pattern` record the provenance.
    """

    width: int
    height: int
    fps: float
    channels: int
    bayer_pattern: Optional[BayerPattern]
    alpha: float
    seed: int
    payload: np.ndarray

    def __post_init__(self):
        self.payload = np.ascontiguousarray(self.payload, dtype=np.uint8)
        expect = (self.frame_count, self.height, _row_bytes(self.width))
        if self.payload.ndim != 3 or self.payload.shape[1:] != expect[1:]:
            raise CubeHeaderError(
                f"payload shape {self.payload.shape} does not match "
                f"header dims {expect}"
            )

    @property
    def frame_count(self) -> int:
        return self.payload.shape[0]

    @property
    def row_bytes(self) -> int:
        return _row_bytes(self.width)

    @property
    def payload_nbytes(self) -> int:
        return self.frame_count * self.height * self.row_bytes

    @classmethod
    def from_frames(cls, frames: np.ndarray, fps: float = 0.0,
                    channels: int = 1,
                    pattern: Optional[BayerPattern] = None,
                    alpha: float = 1.0, seed: int = 0) -> "PhotonCube":
        """Pack a (T, H, W) stack of {0, 1} frames."""
        frames = np.asarray(frames)
        if frames.ndim != 3:
            raise ValueError(f"expected (T, H, W) frame stack, got {frames.shape}")
        if frames.size and not np.isin(frames, (0, 1)).all():
            raise ValueError("binary frames must contain only 0 and 1")
        payload = np.packbits(frames.astype(np.uint8), axis=-1,
                              bitorder="little")
        return cls(width=frames.shape[2], height=frames.shape[1], fps=fps,
                   channels=channels, bayer_pattern=pattern, alpha=alpha,
                   seed=seed, payload=payload)

    def frame(self, index: int) -> np.ndarray:
        """Unpack frame `index` to a (H, W) uint8 array of {0, 1}."""
        if not 0 <= index < self.frame_count:
            raise IndexError(f"frame {index} out of range "
                             f"[0, {self.frame_count})")
        return np.unpackbits(self.payload[index], axis=-1, count=self.width,
                             bitorder="little")

    def frames(self) -> np.ndarray:
        """Unpack the whole stack to (T, H, W)."""
        return np.unpackbits(self.payload, axis=-1, count=self.width,
                             bitorder="little")

    def header_bytes(self) -> bytes:
        return _HEADER.pack(
            MAGIC, VERSION, self.width, self.height, self.frame_count,
            self.channels, PATTERN_CODES[self.bayer_pattern],
            float(self.fps), float(self.alpha), self.seed & (2**64 - 1),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhotonCube):
            return NotImplemented
        return (self.header_bytes() == other.header_bytes()
                and np.array_equal(self.payload, other.payload))


def _open_sink(sink) -> tuple[BinaryIO, bool]:
    if isinstance(sink, (str, Path)):
        return open(sink, "wb"), True
    return sink, False


def _open_source(source) -> tuple[BinaryIO, bool]:
    if isinstance(source, (str, Path)):
        return open(source, "rb"), True
    return source, False


def write_cube(cube: PhotonCube, sink: Union[str, Path, BinaryIO]) -> int:
    """Serialize a cube. Returns the total number of bytes written.

    The header is validated against the payload before anything is written.
    """
    if cube.payload.shape[0] != cube.frame_count:  # defensive; dataclass keeps them in sync
        raise CubeHeaderError("frame_count disagrees with payload")
    header = cube.header_bytes()
    body = cube.payload.tobytes()
    if len(body) != cube.payload_nbytes:
        raise CubeHeaderError(
            f"payload is {len(body)} bytes, header implies "
            f"{cube.payload_nbytes}"
        )
    stream, owned = _open_sink(sink)
    try:
        stream.write(header)
        stream.write(body)
    finally:
        if owned:
            stream.close()
    return len(header) + len(body)


def _read_header(stream: BinaryIO):
    raw = stream.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise CubeTruncatedError(
            f"expected {HEADER_SIZE}-byte header, got {len(raw)} bytes"
        )
    (magic, version, width, height, frame_count, channels, bayer_code,
     fps, alpha, seed) = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise CubeFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CubeVersionError(f"unsupported version {version}, "
                               f"this reader handles {VERSION}")
    if bayer_code not in CODE_PATTERNS:
        raise CubeFormatError(f"unknown Bayer code {bayer_code}")
    return (width, height, frame_count, channels,
            CODE_PATTERNS[bayer_code], fps, alpha, seed)


def read_cube(source: Union[str, Path, BinaryIO]) -> PhotonCube:
    """Deserialize a cube written by write_cube (its exact inverse)."""
    stream, owned = _open_source(source)
    try:
        (width, height, frame_count, channels, pattern, fps, alpha,
         seed) = _read_header(stream)
        nbytes = frame_count * height * _row_bytes(width)
        body = stream.read(nbytes)
        if len(body) < nbytes:
            raise CubeTruncatedError(
                f"payload truncated: expected {nbytes} bytes, got {len(body)}"
            )
        payload = np.frombuffer(body, dtype=np.uint8).reshape(
            frame_count, height, _row_bytes(width)).copy()
    finally:
        if owned:
            stream.close()
    return PhotonCube(width=width, height=height, fps=fps, channels=channels,
                      bayer_pattern=pattern, alpha=alpha, seed=seed,
                      payload=payload)


def stream_frames(source: Union[str, Path, BinaryIO], start: int = 0,
                  stop: Optional[int] = None) -> Iterator[np.ndarray]:
    """Yield unpacked frames [start, stop) without loading the whole cube.

    `stop` defaults to the cube's frame count. The range must lie within
    [0, frame_count).
    """
    stream, owned = _open_source(source)
    try:
        (width, height, frame_count, _channels, _pattern, _fps, _alpha,
         _seed) = _read_header(stream)
        if stop is None:
            stop = frame_count
        if not (0 <= start <= stop <= frame_count):
            raise ValueError(
                f"frame range [{start}, {stop}) outside [0, {frame_count})"
            )
        frame_bytes = height * _row_bytes(width)
        if start and stream.seekable():
            stream.seek(start * frame_bytes, io.SEEK_CUR)
        else:
            for _ in range(start):
                _read_frame_bytes(stream, frame_bytes)
        for index in range(start, stop):
            raw = _read_frame_bytes(stream, frame_bytes, index)
            packed = np.frombuffer(raw, dtype=np.uint8).reshape(
                height, _row_bytes(width))
            yield np.unpackbits(packed, axis=-1, count=width,
                                bitorder="little")
    finally:
        if owned:
            stream.close()


def _read_frame_bytes(stream: BinaryIO, nbytes: int, index=None) -> bytes:
    raw = stream.read(nbytes)
    if len(raw) < nbytes:
        where = "" if index is None else f" at frame {index}"
        raise CubeTruncatedError(
            f"payload truncated{where}: expected {nbytes} bytes, "
            f"got {len(raw)}"
        )
    return raw
