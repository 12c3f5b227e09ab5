"""Sequential hybrid beamforming with parallel beam training for mmWave links."""

__version__ = "0.1.0"

from .array_channel import (ArrayGeometry, ChannelRealization, ClusterChannelParams, Ray,
                            channel_from_rays, generate_channel, steering_vector)
from .codebook import BeamPair, Codebook, build_codebook
from .estimator import SequentialBeamformer
from .exceptions import ConfigurationError, SingularCombinerError
from .link import (EffectiveChannel2x2, PowerConfig, baseline_gain, baseline_sinr_during_training,
                   digital_beamforming_reference, effective_channel_single_node,
                   effective_channel_two_node, g_terms_exact, sum_rate_cost)
from .scenario import ScenarioConfig, TrialRecord, aggregate_rate_curve, aggregate_sinr_cdf, run_scenario
from .search import SearchResult, backup_pair, search_secondary, select_baseline

__all__ = [
    "ArrayGeometry", "BeamPair", "ChannelRealization", "ClusterChannelParams", "Codebook",
    "ConfigurationError", "EffectiveChannel2x2", "PowerConfig", "Ray", "ScenarioConfig",
    "SearchResult", "SequentialBeamformer", "SingularCombinerError", "TrialRecord",
    "aggregate_rate_curve", "aggregate_sinr_cdf", "backup_pair", "baseline_gain",
    "baseline_sinr_during_training", "build_codebook", "channel_from_rays",
    "digital_beamforming_reference", "effective_channel_single_node",
    "effective_channel_two_node", "g_terms_exact", "generate_channel", "run_scenario",
    "search_secondary", "select_baseline", "steering_vector", "sum_rate_cost",
]
