"""Analysis filter bank and maximum-frequency detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple

import numpy as np

from .waveform import synthesis_matrix


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisOperator:
    """Exact inverse pair for the cosine family of one symbol length.

    ``matrix`` is the analysis bank Q (row i filters frequency i) and
    ``synthesis`` is C with the basis cosines as columns; Q @ C = I.
    """

    n_samples: int
    matrix: np.ndarray = field(repr=False)
    synthesis: np.ndarray = field(repr=False)
    grid: str = "integer"

    def analyze(self, frames: np.ndarray) -> np.ndarray:
        return analyze(self, frames)

    def synthesize(self, spectrum: np.ndarray) -> np.ndarray:
        spectrum = np.asarray(spectrum, dtype=float)
        return spectrum @ self.synthesis.T


@dataclass(frozen=True)
class Detection:
    index: int
    magnitude: float
    candidates: Tuple[int, ...]
    below_threshold_fallback: bool


@lru_cache(maxsize=32)
def build_analysis(n_samples: int, grid: str = "integer") -> AnalysisOperator:
    """Build (and cache) the analysis operator for ``n_samples``.

    Q is the matrix inverse of C rather than C.T: C has unequal column norms
    for m = 0 (integer grid) and is not orthogonal on the half grid.
    """
    if n_samples < 2:
        raise TransformError(f"n_samples must be >= 2, got {n_samples}")
    c = synthesis_matrix(n_samples, grid)
    if np.linalg.cond(c) > 1e8:
        raise TransformError(f"synthesis matrix for N={n_samples} is numerically singular")
    q = np.linalg.inv(c)
    q.setflags(write=False)
    c.setflags(write=False)
    return AnalysisOperator(n_samples=n_samples, matrix=q, synthesis=c, grid=grid)


def analyze(op: AnalysisOperator, frames: np.ndarray) -> np.ndarray:
    """Spectrum d = Q r. Accepts one frame or a (trials, N) stack."""
    frames = np.asarray(frames, dtype=float)
    if frames.shape[-1] != op.n_samples:
        raise TransformError(f"frame length {frames.shape[-1]} != operator size {op.n_samples}")
    return frames @ op.matrix.T


def detect_max_frequency(spectrum: np.ndarray, threshold: float) -> Detection:
    """Largest index whose magnitude reaches ``threshold``.

    If nothing qualifies the strongest bin is returned with the fallback flag.
    """
    if not threshold > 0:
        raise TransformError(f"threshold must be positive, got {threshold}")
    mag = np.abs(np.asarray(spectrum, dtype=float))
    candidates = np.flatnonzero(mag >= threshold)
    if candidates.size:
        idx = int(candidates[-1])
        fallback = False
    else:
        idx = int(np.argmax(mag))
        fallback = True
    return Detection(idx, float(mag[idx]), tuple(int(i) for i in candidates), fallback)


def detect_max_frequency_batch(spectra: np.ndarray, threshold) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised detection over rows; returns (indices, fallback flags)."""
    mag = np.abs(spectra)
    n = mag.shape[-1]
    hit = mag >= np.asarray(threshold)[..., None] if np.ndim(threshold) else mag >= threshold
    any_hit = hit.any(axis=-1)
    last = n - 1 - np.argmax(hit[..., ::-1], axis=-1)
    idx = np.where(any_hit, last, np.argmax(mag, axis=-1))
    return idx, ~any_hit
