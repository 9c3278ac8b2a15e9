"""Log-FSK symbol synthesis and modulation parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

GRIDS = ("integer", "half")


class ParameterError(ValueError):
    """Raised when modulation parameters or message indices are invalid."""


def cosine_basis(m: int, n_samples: int, grid: str = "integer") -> np.ndarray:
    """Return the unit-energy cosine for message index ``m``.

    ``grid="integer"`` gives sqrt(2/N) cos(pi m (2n+1) / 2N), the DCT-II
    orientation under which a product of two tones lands exactly on bin
    m_k + m_l. ``grid="half"`` gives sqrt(2/N) cos(pi (2m+1) n / 2N), whose
    frequencies sit on half-integer bins and whose products fall off grid.
    """
    _check_index(m, n_samples)
    n = np.arange(n_samples)
    return _cosines(n[:, None], np.asarray([m])[None, :], n_samples, grid)[:, 0]


def synthesis_matrix(n_samples: int, grid: str = "integer") -> np.ndarray:
    """N x N matrix whose column m is ``cosine_basis(m, N, grid)``."""
    if n_samples < 2:
        raise ParameterError(f"n_samples must be >= 2, got {n_samples}")
    n = np.arange(n_samples)
    return _cosines(n[:, None], n[None, :], n_samples, grid)


def _cosines(n, m, n_samples, grid):
    if grid == "integer":
        phase = np.pi * m * (2 * n + 1) / (2 * n_samples)
    elif grid == "half":
        phase = np.pi * (2 * m + 1) * n / (2 * n_samples)
    else:
        raise ParameterError(f"unknown grid {grid!r}, expected one of {GRIDS}")
    return math.sqrt(2.0 / n_samples) * np.cos(phase)


def _check_index(m, n_samples):
    if isinstance(m, (bool, np.bool_)) or int(m) != m:
        raise ParameterError(f"message index must be an integer, got {m!r}")
    if not 0 <= m <= n_samples - 1:
        raise ParameterError(f"message index {m} outside [0, {n_samples - 1}]")


def _log_argument(m, n_samples, b_c, alpha, grid):
    return b_c * cosine_basis(m, n_samples, grid) + alpha


def _raw_log_power(m, n_samples, b_c, alpha, grid):
    arg = _log_argument(m, n_samples, b_c, alpha, grid)
    if np.any(arg <= 0):
        raise ParameterError(
            f"log argument not positive: alpha={alpha} <= b_c*sqrt(2/N)={b_c * math.sqrt(2 / n_samples)}"
        )
    return float(np.mean(np.log(arg) ** 2))


@dataclass(frozen=True)
class LogFskParams:
    """Modulation constants shared by every transmitter and the receiver.

    ``log_power`` is the mean-square of log(b_c cos_m + alpha) at a reference
    message and fixes the common amplitude ``a_c = a_bar_c / sqrt(log_power)``.
    All users must share ``a_c`` for the receiver's exponential to turn the
    channel sum into a product.
    """

    n_samples: int
    alpha: float
    b_c: float
    a_bar_c: float
    log_power: float
    subtract_mean: bool = False
    grid: str = "integer"
    reference_m: int = 0

    @classmethod
    def design(
        cls,
        n_samples: int,
        *,
        b_c: Optional[float] = None,
        delta: float = 0.1,
        alpha: Optional[float] = None,
        a_bar_c: float = 1.0,
        subtract_mean: bool = False,
        grid: str = "integer",
        reference_m: Optional[int] = None,
    ) -> "LogFskParams":
        """Build parameters from the usual design rules.

        Defaults follow b_c = sqrt(2N) and alpha = b_c sqrt(2/N) + delta.
        """
        if n_samples < 2:
            raise ParameterError(f"n_samples must be >= 2, got {n_samples}")
        if b_c is None:
            b_c = math.sqrt(2.0 * n_samples)
        if alpha is None:
            alpha = b_c * math.sqrt(2.0 / n_samples) + delta
        if reference_m is None:
            reference_m = n_samples // 4
        params = cls(
            n_samples=n_samples,
            alpha=float(alpha),
            b_c=float(b_c),
            a_bar_c=float(a_bar_c),
            log_power=float("nan"),
            subtract_mean=subtract_mean,
            grid=grid,
            reference_m=reference_m,
        )
        problems = validate(params, detection=False, check_power=False)
        if problems:
            raise ParameterError("; ".join(problems))
        power = _raw_log_power(reference_m, n_samples, params.b_c, params.alpha, grid)
        return replace(params, log_power=power)

    @property
    def a_c(self) -> float:
        return self.a_bar_c / math.sqrt(self.log_power)

    @property
    def min_alpha(self) -> float:
        return self.b_c * math.sqrt(2.0 / self.n_samples)

    def check(self, detection: bool = True) -> "LogFskParams":
        problems = validate(self, detection=detection)
        if problems:
            raise ParameterError("; ".join(problems))
        return self


def validate(params: LogFskParams, detection: bool = True, check_power: bool = True) -> List[str]:
    """Return every violated invariant as a readable message (empty if valid).

    With ``detection`` the AirComp amplitude rule b_c >= sqrt(2N) is enforced.
    """
    out = []
    n = params.n_samples
    if not isinstance(n, (int, np.integer)) or n < 2:
        out.append(f"n_samples must be an integer >= 2, got {n!r}")
        return out
    if params.grid not in GRIDS:
        out.append(f"grid must be one of {GRIDS}, got {params.grid!r}")
    if not params.b_c > 0:
        out.append(f"b_c must be positive, got {params.b_c}")
    if not params.a_bar_c > 0:
        out.append(f"a_bar_c must be positive, got {params.a_bar_c}")
    if not params.alpha > 0:
        out.append(f"alpha must be positive, got {params.alpha}")
    bound = params.b_c * math.sqrt(2.0 / n)
    if not params.alpha > bound:
        out.append(f"alpha={params.alpha:.6g} must strictly exceed b_c*sqrt(2/N)={bound:.6g}")
    if detection and params.b_c < math.sqrt(2.0 * n) * (1 - 1e-12):
        out.append(
            f"b_c={params.b_c:.6g} below sqrt(2N)={math.sqrt(2.0 * n):.6g}; the sum tone vanishes as K grows"
        )
    if not 0 <= params.reference_m <= n - 1:
        out.append(f"reference_m={params.reference_m} outside [0, {n - 1}]")
    if check_power:
        a_c = params.a_bar_c / math.sqrt(params.log_power) if params.log_power > 0 else float("nan")
        if not (math.isfinite(a_c) and a_c > 0):
            out.append(f"derived a_c must be finite and positive (log_power={params.log_power})")
    return out


def log_term_power(m: int, params: LogFskParams) -> float:
    """Mean-square of log(b_c cos_m[n] + alpha) over one symbol, for message ``m``."""
    _check_index(m, params.n_samples)
    return _raw_log_power(m, params.n_samples, params.b_c, params.alpha, params.grid)


def log_term_mean(m: int, params: LogFskParams) -> float:
    _check_index(m, params.n_samples)
    return float(np.mean(np.log(_log_argument(m, params.n_samples, params.b_c, params.alpha, params.grid))))


def modulate(m: int, params: LogFskParams, per_message_power: bool = False) -> np.ndarray:
    """Log-FSK frame x[n] = a_c log(b_c cos_m[n] + alpha).

    With ``per_message_power`` the amplitude is recomputed from this message's
    own log power so the frame's mean-square is exactly ``a_bar_c**2``; such
    frames cannot be combined at a receiver expecting a common ``a_c``.
    """
    problems = validate(params, detection=False)
    if problems:
        raise ParameterError("; ".join(problems))
    _check_index(m, params.n_samples)
    arg = _log_argument(m, params.n_samples, params.b_c, params.alpha, params.grid)
    if np.any(arg <= 0) or not np.all(np.isfinite(arg)):
        raise ParameterError(f"log argument not positive for m={m}")
    a_c = params.a_c
    if per_message_power:
        a_c = params.a_bar_c / math.sqrt(log_term_power(m, params))
    x = a_c * np.log(arg)
    if params.subtract_mean:
        x = x - x.mean()
    return x
