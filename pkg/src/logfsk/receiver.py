"""Exponential postprocessing and sum-frequency demodulation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet

import numpy as np

from .theory import a_sigma
from .transform import AnalysisOperator, analyze, detect_max_frequency, detect_max_frequency_batch
from .waveform import LogFskParams, ParameterError, log_term_mean, validate

EXP_LIMIT = 700.0


class SaturationError(OverflowError):
    pass


@dataclass(frozen=True)
class ReceiverConfig:
    params: LogFskParams
    k_users: int
    threshold_fraction: float = 0.5
    dc_removal: bool = True

    def __post_init__(self):
        if self.k_users < 1:
            raise ParameterError(f"k_users must be >= 1, got {self.k_users}")
        if not 0 < self.threshold_fraction <= 1:
            raise ParameterError(f"threshold_fraction must lie in (0, 1], got {self.threshold_fraction}")
        problems = validate(self.params, detection=True)
        if problems:
            raise ParameterError("; ".join(problems))

    @property
    def a_sigma(self) -> float:
        return a_sigma(self.k_users, self.params.b_c, self.params.n_samples)

    @property
    def threshold(self) -> float:
        return self.threshold_fraction * self.a_sigma

    @property
    def dc_level(self) -> float:
        return self.params.alpha**self.k_users


@dataclass(frozen=True)
class DemodOutcome:
    sum_estimate: int
    threshold: float
    candidates: FrozenSet[int]
    peak_magnitude: float
    below_threshold_fallback: bool


def exp_postprocess(y: np.ndarray, params: LogFskParams, k_users: int = 1) -> np.ndarray:
    """r[n] = exp(y[n] / a_c).

    When transmitters removed their means, each frame is scaled back by the
    reference message's log mean; this is exact only at that message.
    """
    a_c = params.a_c
    if not a_c > 0:
        raise ParameterError(f"a_c must be positive, got {a_c}")
    scaled = np.asarray(y, dtype=float) / a_c
    if params.subtract_mean:
        scaled = scaled + k_users * log_term_mean(params.reference_m, params)
    peak = float(np.max(scaled)) if scaled.size else 0.0
    if peak > EXP_LIMIT:
        raise SaturationError(
            f"y/a_c reaches {peak:.1f} > {EXP_LIMIT:.0f}: exp would overflow "
            f"(a_c={a_c:.4g}, N={params.n_samples}); the noise power is far too high for this a_bar_c"
        )
    return np.exp(scaled)


def _spectra(y, cfg, op):
    if op.n_samples != cfg.params.n_samples or op.grid != cfg.params.grid:
        raise ParameterError(
            f"operator (N={op.n_samples}, grid={op.grid}) does not match params "
            f"(N={cfg.params.n_samples}, grid={cfg.params.grid})"
        )
    r = exp_postprocess(y, cfg.params, cfg.k_users)
    if cfg.dc_removal:
        r = r - cfg.dc_level
    return analyze(op, r)


def demodulate(y: np.ndarray, cfg: ReceiverConfig, op: AnalysisOperator) -> DemodOutcome:
    d = _spectra(y, cfg, op)
    det = detect_max_frequency(d, cfg.threshold)
    return DemodOutcome(
        sum_estimate=det.index,
        threshold=cfg.threshold,
        candidates=frozenset(det.candidates),
        peak_magnitude=det.magnitude,
        below_threshold_fallback=det.below_threshold_fallback,
    )


def demodulate_batch(y: np.ndarray, cfg: ReceiverConfig, op: AnalysisOperator):
    """Demodulate a (trials, N) stack.

    Returns (estimates, fallback flags, spectra).
    """
    d = _spectra(np.atleast_2d(y), cfg, op)
    idx, fallback = detect_max_frequency_batch(d, cfg.threshold)
    return idx, fallback, d


def measure_destination_snr(sum_bin_values: np.ndarray, a_sig: float, min_trials: int = 1000) -> float:
    """Empirical sum-bin SNR, a_sig^2 / (Var + bias^2), over per-trial d[sum]."""
    v = np.asarray(sum_bin_values, dtype=float)
    if v.size < min_trials:
        raise ValueError(f"need at least {min_trials} trials, got {v.size}")
    mean = float(np.mean(v))
    var = float(np.var(v))
    # noiseless runs differ from a_sig only by round-off
    if np.ptp(v) == 0 and abs(mean - a_sig) <= 1e-9 * abs(a_sig):
        return math.inf
    denom = var + (mean - a_sig) ** 2
    return a_sig**2 / denom
