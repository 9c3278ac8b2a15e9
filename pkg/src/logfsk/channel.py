"""Synchronous multiple-access channel: superposition, AWGN, flat fading."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ChannelError(ValueError):
    pass


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, a pure function of (seed, trial_index)."""
    return np.random.default_rng([int(seed), int(trial_index)])


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into one 64-bit seed."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class AwgnChannel:
    sigma2: float
    rng_seed: int = 0

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ChannelError(f"sigma2 must be non-negative, got {self.sigma2}")

    def noise(self, n_samples: int, trial_index: int) -> np.ndarray:
        if self.sigma2 == 0:
            return np.zeros(n_samples)
        return np.sqrt(self.sigma2) * trial_rng(self.rng_seed, trial_index).standard_normal(n_samples)

    def noise_block(self, n_samples: int, trial_indices: Sequence[int]) -> np.ndarray:
        """Stack of per-trial noise rows, row t identical to ``noise(n, trial_indices[t])``."""
        out = np.zeros((len(trial_indices), n_samples))
        if self.sigma2 == 0:
            return out
        for row, t in enumerate(trial_indices):
            out[row] = trial_rng(self.rng_seed, t).standard_normal(n_samples)
        out *= np.sqrt(self.sigma2)
        return out


def superpose(frames: Sequence[np.ndarray]) -> np.ndarray:
    if len(frames) == 0:
        raise ChannelError("cannot superpose an empty list of frames")
    frames = [np.asarray(f, dtype=float) for f in frames]
    n = frames[0].shape
    for f in frames[1:]:
        if f.shape != n:
            raise ChannelError(f"frame shapes differ: {n} vs {f.shape}")
    # fixed-order sum keeps results independent of caller-side grouping
    return np.sum(np.stack(frames), axis=0)


def add_awgn(frame: np.ndarray, channel: AwgnChannel, trial_index: int) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    return frame + channel.noise(frame.shape[-1], trial_index)


@dataclass(frozen=True)
class FlatFadingLink:
    """Real flat gain seen by one user."""

    gain: float
    csi_known: bool = True
    floor: float = 0.01

    def apply(self, frame: np.ndarray) -> np.ndarray:
        return self.gain * np.asarray(frame, dtype=float)


def precompensate(frame: np.ndarray, link: FlatFadingLink) -> np.ndarray:
    """Scale by 1/gain so the frame arrives at its nominal level."""
    if not link.csi_known:
        raise ChannelError("precompensation needs CSI at the transmitter; no blind mode exists")
    if link.gain == 0 or abs(link.gain) < link.floor:
        raise ChannelError(
            f"|gain|={abs(link.gain):.3g} below inversion floor {link.floor:.3g}; "
            f"would need {20 * np.log10(1 / max(abs(link.gain), 1e-300)):.1f} dB of amplification"
        )
    return np.asarray(frame, dtype=float) / link.gain
