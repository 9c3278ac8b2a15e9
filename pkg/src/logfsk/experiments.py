"""Seeded Monte-Carlo sweeps and closed-form curves, with CSV output.

Every trial draws its noise from a stream keyed by (channel seed, trial index)
and the channel seed is keyed by (master seed, grid index); per-grid-point
messages come from a separate stream. Trials are processed in fixed-size
chunks and reassembled in order, so results do not depend on ``workers``.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import theory
from .channel import AwgnChannel, derive_seed
from .dsb import DsbConfig, dsb_estimate_sum, nmse
from .receiver import ReceiverConfig, demodulate_batch, measure_destination_snr
from .transform import build_analysis
from .waveform import LogFskParams, log_term_power, modulate, validate

LAWS = ("uniform_sum_constrained", "fixed_list")
CHUNK = 1000
FIG3_N = (64, 256, 1024)
FIG3_K = (2, 3, 4, 5)
FIG2_CASES = ((40, 60), (10, 35, 55))

THRESHOLD_COLUMNS = (
    "snr_r_db", "n", "k", "snr_sigma_theory_db", "snr_sigma_emp_db", "pe_theory", "pe_emp",
    "pe_censored", "mse_theory", "fallback_rate", "trials",
)
NMSE_COLUMNS = ("snr_r_db", "nmse_logfsk", "nmse_dsb", "trials", "seed")
THEORY_COLUMNS = (
    "snr_r_db", "n", "k", "snr_sigma_theory_db", "snr_sigma_high_snr_db", "pe_theory", "mse_theory",
)


class ConfigError(ValueError):
    pass


class AcceptanceFailure(AssertionError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    n_samples: Tuple[int, ...] = (256,)
    k_users: Tuple[int, ...] = (2,)
    b_c: Optional[float] = None
    delta: float = 0.1
    snr_r_grid_db: Tuple[float, ...] = tuple(float(x) for x in range(-10, 31, 2))
    trials: int = 10_000
    master_seed: int = 0
    gamma_th: float = 1e-4
    measurement_law: str = "uniform_sum_constrained"
    messages: Tuple[int, ...] = ()
    q_interpretation: str = "sqrt"
    literal_mse: bool = False
    threshold_fraction: float = 0.5
    workers: int = 1

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError("; ".join(problems))

    def problems(self) -> List[str]:
        out = []
        if self.trials < 1:
            out.append(f"trials must be >= 1, got {self.trials}")
        if len(self.snr_r_grid_db) == 0:
            out.append("snr_r_grid_db must not be empty")
        if not 0 <= self.master_seed < 2**64:
            out.append(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if not 0 < self.gamma_th < 1:
            out.append(f"gamma_th must lie in (0, 1), got {self.gamma_th}")
        if self.measurement_law not in LAWS:
            out.append(f"measurement_law must be one of {LAWS}, got {self.measurement_law!r}")
        if self.q_interpretation not in theory.Q_INTERPRETATIONS:
            out.append(f"q_interpretation must be one of {theory.Q_INTERPRETATIONS}")
        if self.workers < 1:
            out.append("workers must be >= 1")
        if not self.n_samples or any(n < 2 for n in self.n_samples):
            out.append(f"n_samples must be integers >= 2, got {self.n_samples}")
        if not self.k_users or any(k < 1 for k in self.k_users):
            out.append(f"k_users must be integers >= 1, got {self.k_users}")
        if self.measurement_law == "fixed_list":
            if not self.messages:
                out.append("fixed_list law needs messages")
            elif any(len(self.messages) != k for k in self.k_users):
                out.append(f"{len(self.messages)} messages given but k_users={self.k_users}")
            elif any(sum(self.messages) > n - 1 or min(self.messages) < 0 for n in self.n_samples):
                out.append(f"messages {self.messages} must be >= 0 and sum to at most N-1")
        return out

    def params(self, n: int) -> LogFskParams:
        return LogFskParams.design(n, b_c=self.b_c, delta=self.delta)

    def single(self) -> Tuple[int, int]:
        if len(self.n_samples) != 1 or len(self.k_users) != 1:
            raise ConfigError("this command takes exactly one N and one K")
        return self.n_samples[0], self.k_users[0]


_FIELD_TYPES = {
    "n_samples": "ints", "k_users": "ints", "b_c": "optfloat", "delta": "float",
    "snr_r_grid_db": "floats", "trials": "int", "master_seed": "int", "gamma_th": "float",
    "measurement_law": "str", "messages": "ints", "q_interpretation": "str",
    "literal_mse": "bool", "threshold_fraction": "float", "workers": "int",
}


def _convert(key, raw):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "optfloat":
            return None if raw.lower() in ("", "none", "auto") else float(raw)
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> Dict[str, object]:
    """Parse ``key = value`` lines (``#`` comments, comma-separated lists)."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def load_config(path: str, **overrides) -> ExperimentConfig:
    try:
        with open(path) as fh:
            values = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif v is None:
            v = "auto"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def snr_grid(lo: float, hi: float, step: float) -> Tuple[float, ...]:
    if step <= 0:
        raise ConfigError("snr step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigError(f"empty SNR grid [{lo}, {hi}] step {step}")
    return tuple(round(lo + i * step, 10) for i in range(count))


# ---------------------------------------------------------------- messages

def draw_messages(rng: np.random.Generator, trials: int, k_users: int, n_samples: int) -> np.ndarray:
    """i.i.d. uniform integers on [0, N//K]; tuples summing past N-1 are redrawn."""
    m_max = n_samples // k_users
    out = rng.integers(0, m_max + 1, size=(trials, k_users))
    bad = out.sum(axis=1) > n_samples - 1
    while bad.any():
        out[bad] = rng.integers(0, m_max + 1, size=(int(bad.sum()), k_users))
        bad = out.sum(axis=1) > n_samples - 1
    return out


def messages_for(cfg: ExperimentConfig, n: int, k: int, grid_index: int) -> np.ndarray:
    if cfg.measurement_law == "fixed_list":
        return np.tile(np.asarray(cfg.messages, dtype=int), (cfg.trials, 1))
    rng = np.random.default_rng([cfg.master_seed, grid_index, 1])
    return draw_messages(rng, cfg.trials, k, n)


# ---------------------------------------------------------------- simulation core

@lru_cache(maxsize=16)
def frame_table(params: LogFskParams) -> np.ndarray:
    """Column m holds the transmitted frame for message m."""
    return np.stack([modulate(m, params) for m in range(params.n_samples)], axis=1)


@dataclass
class TrialBlock:
    estimates: np.ndarray
    fallback: np.ndarray
    sum_bin: np.ndarray
    noiseless_sum_bin: np.ndarray
    dsb_estimates: Optional[np.ndarray] = None


def _run_chunk(params, k_users, fraction, sigma2, channel_seed, start, messages, with_dsb):
    n = params.n_samples
    op = build_analysis(n, params.grid)
    rcfg = ReceiverConfig(params, k_users, threshold_fraction=fraction)
    table = frame_table(params)
    clean = table[:, messages].sum(axis=2).T
    noise = AwgnChannel(sigma2, channel_seed).noise_block(n, range(start, start + len(messages)))
    est, fb, d = demodulate_batch(clean + noise, rcfg, op)
    sums = messages.sum(axis=1)
    rows = np.arange(len(messages))
    _, _, d0 = demodulate_batch(clean, rcfg, op)
    block = TrialBlock(est, fb, d[rows, sums], d0[rows, sums])
    if with_dsb:
        dcfg = DsbConfig.equal_power(n, params.a_bar_c, sigma2=sigma2)
        tx = (dcfg.gain * messages.sum(axis=1))[:, None] * dcfg.carrier[None, :]
        block.dsb_estimates = dsb_estimate_sum(tx + noise, dcfg)
    return block


def simulate(params: LogFskParams, k_users: int, sigma2: float, messages: np.ndarray, channel_seed: int,
             threshold_fraction: float = 0.5, workers: int = 1, with_dsb: bool = False) -> TrialBlock:
    """Run every trial (row of ``messages``) through transmitter, channel and receiver."""
    messages = np.asarray(messages, dtype=int)
    starts = range(0, len(messages), CHUNK)
    jobs = [(params, k_users, threshold_fraction, sigma2, channel_seed, s, messages[s:s + CHUNK], with_dsb)
            for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_chunk_star, jobs))
    else:
        blocks = [_run_chunk(*job) for job in jobs]
    cat = lambda name: np.concatenate([getattr(b, name) for b in blocks])
    return TrialBlock(
        cat("estimates"), cat("fallback"), cat("sum_bin"), cat("noiseless_sum_bin"),
        cat("dsb_estimates") if with_dsb else None,
    )


def _run_chunk_star(job):
    return _run_chunk(*job)


def sigma2_for(params: LogFskParams, snr_r_db: float) -> float:
    if math.isinf(snr_r_db) and snr_r_db > 0:
        return 0.0
    return params.a_bar_c**2 / float(theory.undb(snr_r_db))


def empirical_snr_sigma(block: TrialBlock, a_sig: float) -> float:
    """Sum-bin SNR with each trial rescaled to a noiseless peak of ``a_sig``."""
    scale = a_sig / block.noiseless_sum_bin
    return measure_destination_snr(block.sum_bin * scale, a_sig, min_trials=1)


# ---------------------------------------------------------------- results

@dataclass
class SweepResult:
    columns: Tuple[str, ...]
    rows: List[tuple] = field(default_factory=list)
    thresholds: List["ThresholdReport"] = field(default_factory=list)
    wall_time: Dict[str, float] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    k: int
    interpretation: str
    snr_sigma_db: float
    snr_r_db: float
    alt_interpretation: str
    alt_snr_sigma_db: float
    alt_snr_r_db: float
    p_p_db: float
    log_power_db: float
    log_power_range_db: Tuple[float, float]

    def describe(self) -> str:
        lo, hi = self.log_power_range_db
        return (
            f"N={self.n} K={self.k}: threshold SNR_sum={self.snr_sigma_db:.2f} dB -> SNR_R={self.snr_r_db:.2f} dB "
            f"[Q({self.interpretation})]; alternative Q({self.alt_interpretation}): "
            f"SNR_sum={self.alt_snr_sigma_db:.2f} dB -> SNR_R={self.alt_snr_r_db:.2f} dB; "
            f"P_p={self.p_p_db:.2f} dB, P={self.log_power_db:.2f} dB (over m: {lo:.2f}..{hi:.2f} dB)"
        )


def _theory_p_p(cfg: ExperimentConfig, params: LogFskParams, k: int) -> float:
    if cfg.measurement_law == "fixed_list":
        return theory.p_p(params, cfg.messages)
    return theory.mean_p_p(params, k, params.n_samples // k)


def _reference_sum(cfg: ExperimentConfig, n: int, k: int) -> int:
    if cfg.measurement_law == "fixed_list":
        return int(sum(cfg.messages))
    return int(round(k * (n // k) / 2))


def threshold_report(cfg: ExperimentConfig, n: int, k: int) -> ThresholdReport:
    params = cfg.params(n)
    pp = _theory_p_p(cfg, params, k)
    alt = "linear" if cfg.q_interpretation == "sqrt" else "sqrt"
    s_db, r_db = theory.threshold_snr_r(params, k, cfg.gamma_th, cfg.q_interpretation, pp=pp)
    a_s_db, a_r_db = theory.threshold_snr_r(params, k, cfg.gamma_th, alt, pp=pp)
    powers = [log_term_power(m, params) for m in range(n)]
    return ThresholdReport(
        n, k, cfg.q_interpretation, s_db, r_db, alt, a_s_db, a_r_db,
        float(theory.db(pp)), float(theory.db(params.log_power)),
        (float(theory.db(min(powers))), float(theory.db(max(powers)))),
    )


def _check_params(params: LogFskParams):
    problems = validate(params)
    if problems:
        raise ConfigError("; ".join(problems))


# ---------------------------------------------------------------- commands

@dataclass
class SpectrumTable:
    n_samples: int
    cases: Tuple[Tuple[int, ...], ...]
    spectra: np.ndarray
    peaks: Tuple[int, ...]
    peak_magnitudes: Tuple[float, ...]

    @property
    def columns(self):
        return ("index",) + tuple("d_" + "_".join(str(m) for m in c) for c in self.cases)

    @property
    def rows(self):
        return [(i, *self.spectra[:, i]) for i in range(self.n_samples)]


def run_spectrum_demo(cfg: ExperimentConfig, cases: Sequence[Sequence[int]] = FIG2_CASES,
                      check: bool = True) -> SpectrumTable:
    """Noiseless demodulated spectra; checks the sum tone is the top qualifying bin."""
    n = cfg.n_samples[0]
    params = cfg.params(n)
    _check_params(params)
    op = build_analysis(n, params.grid)
    spectra, peaks, mags = [], [], []
    for case in cases:
        rcfg = ReceiverConfig(params, len(case), threshold_fraction=cfg.threshold_fraction)
        y = frame_table(params)[:, list(case)].sum(axis=1)
        idx, _, d = demodulate_batch(y, rcfg, op)
        spectra.append(d[0])
        peaks.append(int(idx[0]))
        mags.append(float(abs(d[0, idx[0]])))
    table = SpectrumTable(n, tuple(tuple(c) for c in cases), np.array(spectra), tuple(peaks), tuple(mags))
    if check:
        for case, peak in zip(table.cases, table.peaks):
            if peak != sum(case):
                raise AcceptanceFailure(f"messages {case}: top qualifying bin {peak}, expected {sum(case)}")
        # peaks coincide only when no message is zero (a zero message doubles the tone)
        ref = [m for c, m in zip(table.cases, table.peak_magnitudes) if min(c) > 0]
        if ref and (max(ref) - min(ref)) > 1e-6 * max(ref):
            raise AcceptanceFailure(f"peak magnitudes differ: {ref}")
    return table


def run_threshold_curves(cfg: ExperimentConfig, empirical: bool = True) -> SweepResult:
    result = SweepResult(THRESHOLD_COLUMNS)
    for n in cfg.n_samples:
        params = cfg.params(n)
        _check_params(params)
        for k in cfg.k_users:
            t0 = time.perf_counter()
            result.thresholds.append(threshold_report(cfg, n, k))
            pp = _theory_p_p(cfg, params, k)
            a_sig = theory.a_sigma(k, params.b_c, n)
            ref_sum = _reference_sum(cfg, n, k)
            for gi, snr_db in enumerate(cfg.snr_r_grid_db):
                point = theory.theory_point(params, k, snr_db, pp, cfg.q_interpretation, ref_sum, cfg.literal_mse)
                sigma2 = sigma2_for(params, snr_db)
                msgs = messages_for(cfg, n, k, gi)
                block = simulate(params, k, sigma2, msgs, derive_seed(cfg.master_seed, gi),
                                 cfg.threshold_fraction, cfg.workers)
                errors = int(np.sum(block.estimates != msgs.sum(axis=1)))
                result.rows.append((
                    snr_db, n, k, point.snr_sigma_db, float(theory.db(empirical_snr_sigma(block, a_sig))),
                    point.p_e, errors / cfg.trials, int(errors < 10), point.mse,
                    float(np.mean(block.fallback)), cfg.trials,
                ))
            result.wall_time[f"N={n},K={k}"] = time.perf_counter() - t0
    return result


def run_theory_only(cfg: ExperimentConfig) -> SweepResult:
    result = SweepResult(THEORY_COLUMNS)
    for n in cfg.n_samples:
        params = cfg.params(n)
        _check_params(params)
        for k in cfg.k_users:
            result.thresholds.append(threshold_report(cfg, n, k))
            pp = _theory_p_p(cfg, params, k)
            ref_sum = _reference_sum(cfg, n, k)
            for snr_db in cfg.snr_r_grid_db:
                point = theory.theory_point(params, k, snr_db, pp, cfg.q_interpretation, ref_sum, cfg.literal_mse)
                hi = float(theory.high_snr_approx(snr_db, theory.db(pp), theory.db(params.log_power), n))
                if k != 2:
                    # the asymptote's 2N term is the two-user sum amplitude squared
                    hi += float(theory.db(theory.a_sigma(k, params.b_c, n) ** 2 / (2 * n)))
                result.rows.append((snr_db, n, k, point.snr_sigma_db, hi, point.p_e, point.mse))
    return result


def run_nmse_comparison(cfg: ExperimentConfig) -> SweepResult:
    """Log-FSK vs DSB aggregate NMSE at equal average per-user power."""
    n, k = cfg.single()
    params = cfg.params(n)
    _check_params(params)
    result = SweepResult(NMSE_COLUMNS)
    result.thresholds.append(threshold_report(cfg, n, k))
    t0 = time.perf_counter()
    for gi, snr_db in enumerate(cfg.snr_r_grid_db):
        msgs = messages_for(cfg, n, k, gi)
        sigma2 = sigma2_for(params, snr_db)
        block = simulate(params, k, sigma2, msgs, derive_seed(cfg.master_seed, gi),
                         cfg.threshold_fraction, cfg.workers, with_dsb=True)
        truth = msgs.sum(axis=1)
        result.rows.append((snr_db, nmse(block.estimates, truth), nmse(block.dsb_estimates, truth),
                            cfg.trials, cfg.master_seed))
    result.wall_time["total"] = time.perf_counter() - t0
    return result


# ---------------------------------------------------------------- CSV

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def emit_csv(result, path: str) -> str:
    """Write header + one row per grid point; numbers at 12 significant digits."""
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(result.columns)
            for row in result.rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path: str) -> Tuple[List[str], List[List[float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[float(v) for v in row] for row in reader]

