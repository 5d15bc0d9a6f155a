"""zoomtrack: a deterministic simulation framework for tracking evolving
point distributions through a two-bit ball-membership oracle.

The hidden truth is a set of n moving centers, each carrying a bounded
spatial distribution scaled to its nearest-neighbor distance; an evolver
nudges one center per time unit by at most an alpha-fraction of that
distance. The tracker maintains one product-Cauchy hypothesis per object,
refined only through yes/no ball queries, and the metrics engine scores the
hypothesis by summed KL divergence and by an exact potential function.
"""

from .config import ExperimentConfig, load_config, parse_config
from .errors import ConfigError, ModelViolationError
from .evolver import (
    AdversaryView,
    DormantStrategy,
    EvolverStep,
    LowerBoundAdversary,
    RandomStrategy,
    ScriptedStrategy,
    apply_step,
    evolver_potential_bound,
)
from .geometry import Ball, cover_ball, min_pairwise_distance, nearest_neighbor_distance
from .harness import (
    RunResult,
    Simulation,
    detect_burn_in,
    lower_bound_experiment,
    run,
    sweep,
    verify,
)
from .metrics import (
    KLEstimate,
    kl_exact_1d,
    kl_monte_carlo,
    kl_quadrature_2d,
    kl_upper_bound,
    naive_distance_bound,
    pairwise_ratio,
    potential,
)
from .oracle import Oracle, OracleResponse, QueryLedger
from .tracker import Hypothesis, ZoomTracker, completion_potential_bound, init_hypothesis
from .truth import TruthState, make_family

__version__ = "0.1.0"
