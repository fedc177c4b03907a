"""Counter-based random streams for reproducible, order-independent sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSpec:
    """Root seed of a simulation run.

    Every binary frame draws from its own Philox stream keyed by
    (seed, frame_index). Within a frame, uniforms are generated in a single
    vectorized call in row-major, channel-minor order, so the draw assigned
    to a given (frame, pixel, channel) is a pure function of
    (seed, frame, pixel, channel) and never depends on thread count or
    evaluation order.
    """

    seed: int

    def frame_uniforms(self, frame_index: int, shape) -> np.ndarray:
        """Uniform [0, 1) draws for one binary frame."""
        if frame_index < 0:
            raise ValueError(f"frame_index must be >= 0, got {frame_index}")
        key = np.array([self.seed & _MASK64, frame_index & _MASK64],
                       dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        return gen.random(shape)

    def sequence_spec(self, sequence_index: int) -> "RngSpec":
        """Spec for one sequence of a multi-sequence run."""
        return RngSpec(derive_sequence_seed(self.seed, sequence_index))


def derive_sequence_seed(seed: int, sequence_index: int) -> int:
    """Stable 64-bit sub-seed for sequence `sequence_index` of a run.

    Uses SeedSequence entropy mixing so sub-seeds from different
    (seed, index) pairs do not collide in practice.
    """
    ss = np.random.SeedSequence([seed & _MASK64, sequence_index])
    return int(ss.generate_state(1, np.uint64)[0])
