"""Closed-form performance of Log-FSK over AWGN and the threshold procedure.

All SNRs are linear unless the name ends in ``_db``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from .waveform import LogFskParams, synthesis_matrix

Q_INTERPRETATIONS = ("sqrt", "linear")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LogNormalStats:
    mu_z: float
    sigma2_z: float


@dataclass(frozen=True)
class TheoryPoint:
    snr_r_db: float
    snr_sigma_db: float
    p_e: float
    mse: float
    n_samples: int
    k_users: int


def db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def undb(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def snr_r(a_bar_c: float, sigma2: float) -> float:
    """Per-user received SNR."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return a_bar_c**2 / sigma2


def lognormal_stats(sigma2: float, a_c: float) -> LogNormalStats:
    """Mean and variance of z = exp(w / a_c) for w ~ N(0, sigma2)."""
    if not a_c > 0 or sigma2 < 0:
        raise ValueError(f"need a_c > 0 and sigma2 >= 0, got a_c={a_c}, sigma2={sigma2}")
    v = sigma2 / a_c**2
    with np.errstate(over="ignore"):
        return LogNormalStats(float(np.exp(v / 2)), float(np.exp(v) * np.expm1(v)))


def a_sigma(k_users: int, b_c: float, n_samples: int) -> float:
    """Noiseless amplitude of the sum-frequency bin."""
    if k_users < 1:
        raise ValueError("k_users must be >= 1")
    return b_c**k_users * 0.5 ** (k_users - 1) * math.sqrt(2.0 / n_samples) ** (k_users - 1)


def product_signal(params: LogFskParams, messages: Sequence[int]) -> np.ndarray:
    """Noiseless exp-domain product p[n] = prod_k (b_c cos_{m_k}[n] + alpha)."""
    c = synthesis_matrix(params.n_samples, params.grid)
    cols = c[:, np.asarray(messages, dtype=int)]
    return np.prod(params.b_c * cols + params.alpha, axis=1)


def p_p(params: LogFskParams, messages: Sequence[int]) -> float:
    """Mean power of the noiseless product signal for one message tuple."""
    if len(messages) == 0:
        raise ValueError("messages must be non-empty")
    return float(np.mean(product_signal(params, messages) ** 2))


def p_p_of_frames(frames: Sequence[np.ndarray], a_c: float) -> float:
    """Same quantity from transmitted frames: mean_n exp((2/a_c) sum_k x_k[n])."""
    if len(frames) == 0:
        raise ValueError("frames must be non-empty")
    total = np.sum(np.stack([np.asarray(f, dtype=float) for f in frames]), axis=0)
    return float(np.mean(np.exp(2.0 / a_c * total)))


def mean_p_p(params: LogFskParams, k_users: int, m_max: int) -> float:
    """Expected product power when each m_k is i.i.d. uniform on {0..m_max}.

    Independence factorises the expectation per sample, so this is exact
    (the rejected tuples with sum > N-1 are not excluded).
    """
    c = synthesis_matrix(params.n_samples, params.grid)[:, : m_max + 1]
    per_user = np.mean((params.b_c * c + params.alpha) ** 2, axis=1)
    return float(np.mean(per_user**k_users))


def snr_sigma(a_sig: float, pp: float, stats: LogNormalStats) -> float:
    """SNR of the sum bin, counting the signal-correlated bias as noise."""
    denom = pp * stats.sigma2_z + a_sig**2 * (stats.mu_z - 1.0) ** 2
    if denom == 0:
        return math.inf
    return a_sig**2 / denom


def inverse_snr_sigma(snr_r_lin, pp, p, a_sigma2):
    """1/SNR_sum as a function of received SNR (vectorised, overflow-safe)."""
    snr_r_lin = np.asarray(snr_r_lin, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        u = np.where(snr_r_lin > 0, p / snr_r_lin, np.inf)
        u = np.where(np.isinf(snr_r_lin), 0.0, u)
        out = pp / a_sigma2 * np.exp(u) * np.expm1(u) + np.expm1(u / 2) ** 2
    return out


def snr_sigma_from_snr_r(snr_r_lin, pp: float, p: float, n_samples: int, a_sigma2: Optional[float] = None):
    """Sum-bin SNR in terms of received SNR.

    ``a_sigma2`` defaults to 2N, the two-user value at b_c = sqrt(2N); pass
    ``a_sigma(K, b_c, N)**2`` for other configurations.
    """
    if a_sigma2 is None:
        a_sigma2 = 2.0 * n_samples
    inv = inverse_snr_sigma(snr_r_lin, pp, p, a_sigma2)
    with np.errstate(divide="ignore"):
        out = 1.0 / inv
    return float(out) if np.ndim(out) == 0 else out


def high_snr_approx(snr_r_db, p_p_db: float, p_db: float, n_samples: int):
    """Linear-region asymptote, everything in dB."""
    return 10.0 * np.log10(2.0 * n_samples) + np.asarray(snr_r_db) - p_p_db - p_db


def q_function(x):
    return ndtr(-np.asarray(x, dtype=float))


def error_prob(n_samples: int, snr_sigma_lin, interpretation: str = "sqrt"):
    """Union-bound detection error (N-1) Q(.), clamped to [0, 1].

    ``"sqrt"`` feeds Q with sqrt(SNR); ``"linear"`` feeds it SNR itself, which
    is the reading that places the 1e-4 threshold near 7 dB at N = 256.
    """
    s = np.asarray(snr_sigma_lin, dtype=float)
    if np.any(s < 0):
        raise ValueError("snr_sigma must be non-negative")
    arg = _q_arg(s, interpretation)
    out = np.clip((n_samples - 1) * q_function(arg), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def _q_arg(s, interpretation):
    if interpretation == "sqrt":
        return np.sqrt(s)
    if interpretation == "linear":
        return s
    raise ValueError(f"interpretation must be one of {Q_INTERPRETATIONS}, got {interpretation!r}")


def snr_sigma_for_error(n_samples: int, gamma_th: float, interpretation: str = "sqrt") -> float:
    """SNR_sum (linear) at which the error bound equals ``gamma_th``."""
    if not 0 < gamma_th < 1:
        raise ValueError("gamma_th must lie in (0, 1)")
    _q_arg(0.0, interpretation)
    tail = gamma_th / (n_samples - 1)
    if tail >= 0.5:
        return 0.0
    x = float(norm.isf(tail))
    return x * x if interpretation == "sqrt" else x


def solve_snr_r_db(target_snr_sigma: float, pp: float, p: float, a_sigma2: float,
                   bracket=(-20.0, 80.0), tol_db: float = 0.01) -> float:
    """Received SNR (dB) at which the sum-bin SNR reaches ``target_snr_sigma``.

    Monotone bisection; the curve is increasing in received SNR.
    """
    lo, hi = bracket

    def gap(x_db):
        return snr_sigma_from_snr_r(undb(x_db), pp, p, 0, a_sigma2) - target_snr_sigma

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo > 0 or g_hi < 0:
        raise SolverError(
            f"no root in [{lo}, {hi}] dB: SNR_sum spans [{db(g_lo + target_snr_sigma):.2f}, "
            f"{db(g_hi + target_snr_sigma):.2f}] dB, target {db(target_snr_sigma):.2f} dB"
        )
    while hi - lo > tol_db / 4:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_snr_r(
    params: LogFskParams,
    k_users: int,
    gamma_th: float = 1e-4,
    interpretation: str = "sqrt",
    pp: Optional[float] = None,
    m_max: Optional[int] = None,
) -> Tuple[float, float]:
    """Operating threshold as (SNR_sum dB, SNR_R dB).

    ``pp`` defaults to the product power averaged over i.i.d. uniform
    messages on {0..m_max}, with m_max = N // K.
    """
    n = params.n_samples
    if pp is None:
        pp = mean_p_p(params, k_users, n // k_users if m_max is None else m_max)
    target = snr_sigma_for_error(n, gamma_th, interpretation)
    a2 = a_sigma(k_users, params.b_c, n) ** 2
    if target == 0:
        return -math.inf, -math.inf
    return float(db(target)), solve_snr_r_db(target, pp, params.log_power, a2)


def mse(n_samples: int, p_e: float, true_sum: int, literal: bool = False) -> float:
    """Detection MSE weighted by the error probability.

    Default spreads errors uniformly over the N-1 wrong bins. ``literal`` sums
    the squared distance over all N bins without normalising.
    """
    if not 0 <= p_e <= 1:
        raise ValueError(f"p_e must be a probability, got {p_e}")
    if p_e == 0:
        return 0.0
    m = np.arange(n_samples)
    total = float(np.sum((m - true_sum) ** 2))
    return p_e * (total if literal else total / (n_samples - 1))


def theory_point(params: LogFskParams, k_users: int, snr_r_db: float, pp: float,
                 interpretation: str = "sqrt", true_sum: int = 0, literal_mse: bool = False) -> TheoryPoint:
    n = params.n_samples
    a2 = a_sigma(k_users, params.b_c, n) ** 2
    s = snr_sigma_from_snr_r(undb(snr_r_db), pp, params.log_power, n, a2)
    pe = error_prob(n, s, interpretation)
    return TheoryPoint(
        snr_r_db=float(snr_r_db),
        snr_sigma_db=float(db(s)),
        p_e=pe,
        mse=mse(n, pe, true_sum, literal_mse),
        n_samples=n,
        k_users=k_users,
    )
