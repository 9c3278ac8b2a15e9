"""Log-FSK: frequency-domain over-the-air computation of sums."""

from .channel import AwgnChannel, FlatFadingLink, add_awgn, precompensate, superpose
from .dsb import DsbConfig, dsb_estimate_sum, dsb_transmit
from .receiver import DemodOutcome, ReceiverConfig, demodulate, exp_postprocess, measure_destination_snr
from .transform import AnalysisOperator, analyze, build_analysis, detect_max_frequency
from .waveform import LogFskParams, ParameterError, cosine_basis, log_term_power, modulate, validate

__version__ = "0.1.0"
