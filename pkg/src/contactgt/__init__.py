"""Noisy non-adaptive group testing with contact-tracing side information."""

from .bp import (
    CombinedBP,
    DecoderConfig,
    TannerBP,
    bp_decode,
    bpcg_decode,
    interaction_to_item0_update,
    interaction_to_item1_update,
    signed_subset_sum,
    tanner_priors,
    test_to_item_update,
    threshold,
)
from .channel import NoiseParams, apply_noise, noiseless_outcomes
from .design import DesignParams, TestMatrix, bernoulli_design, from_rows, identity_design
from .metrics import TrialMetrics, evaluate, sweep_thresholds
from .oracle import OracleResult, exact_combined, exact_tanner
from .population import (
    GroundTruth,
    InteractionGraph,
    PopulationParams,
    expected_infected,
    sample_ground_truth,
    sample_interaction_graph,
    updated_priors,
)

__version__ = "0.1.0"
