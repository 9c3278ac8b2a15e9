"""Linear AirComp baseline: amplitude (DSB) transmission and sum estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .waveform import cosine_basis


class DsbError(ValueError):
    pass


@dataclass(frozen=True)
class DsbConfig:
    """Amplitude-modulated carrier sharing Log-FSK's symbol length.

    ``gain`` maps a measurement to carrier amplitude; use ``equal_power`` so
    the average per-user power matches a Log-FSK transmitter.
    """

    n_samples: int
    m_max: float
    gain: float
    sigma2: float = 0.0

    @classmethod
    def equal_power(cls, n_samples: int, a_bar_c: float = 1.0, m_max=None, sigma2: float = 0.0,
                    integer_messages: bool = True) -> "DsbConfig":
        """Pick the gain so E[(gain*m)^2] = a_bar_c^2 for m uniform on [0, m_max]."""
        if m_max is None:
            m_max = n_samples // 2
        if integer_messages:
            second_moment = m_max * (2 * m_max + 1) / 6.0
        else:
            second_moment = m_max**2 / 3.0
        return cls(n_samples, m_max, a_bar_c / math.sqrt(second_moment), sigma2)

    @cached_property
    def carrier(self) -> np.ndarray:
        # unit mean-square, so frame power is (gain * m)^2
        return math.sqrt(self.n_samples) * cosine_basis(self.n_samples // 4, self.n_samples)


def dsb_transmit(m: float, cfg: DsbConfig) -> np.ndarray:
    if not 0 <= m <= cfg.m_max:
        raise DsbError(f"measurement {m} outside [0, {cfg.m_max}]")
    return cfg.gain * m * cfg.carrier


def dsb_estimate_sum(y: np.ndarray, cfg: DsbConfig):
    """Matched-filter estimate of the summed measurements; accepts a (trials, N) stack."""
    c = cfg.carrier
    return (np.asarray(y, dtype=float) @ c) / (cfg.gain * float(c @ c))


def nmse(estimates: np.ndarray, truth: np.ndarray) -> float:
    """E[(est - truth)^2] / E[truth^2]."""
    truth = np.asarray(truth, dtype=float)
    err = np.asarray(estimates, dtype=float) - truth
    return float(np.mean(err**2) / np.mean(truth**2))
