"""Doped spatially-coupled LDPC codes on the binary erasure channel.

Ensemble sampling, density-evolution thresholds, Monte-Carlo scaling
constants, sliding-window streaming simulation, and the doping-switch
error-rate prediction law.
"""

from .ensemble import (DopingPattern, EnsembleError, EnsembleSpec, StreamSpec,
                       TannerGraph, apply_doping, design_rate,
                       full_termination_pattern, sample_graph,
                       spec_from_config)
from .peeling import (ChannelConfig, DecodeOutcome, ResidualGraph, Trajectory,
                      classify_residual, decode, erase, filter_degree2, peel,
                      simulate_fer, stopping_sets)
from .de import (ConvergenceError, DEState, ThresholdResult, de_converge,
                 de_step, find_threshold, threshold_with_stability_check)
from .meanevol import (DipEstimate, MeanTrajectory, ScalingParams,
                       compute_delta, doped_chain_spec, estimate_gamma,
                       estimate_kappa, fit_kappa, locate_dip, mean_trajectory)
from .scaling import (DopingSwitchModel, TerminatedRateProvider, interval_pmf,
                      predict_stream, provider_fill, psi_d)
from .stream import (StreamRunStats, WindowConfig, simulate_stream,
                     simulate_terminated_sw, sw_decode)
from .cli import RateSearchResult, rate_search
from .stats import wilson_interval

__version__ = "0.1.0"
