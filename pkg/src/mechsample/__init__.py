"""Sampling-based mechanisms with bit-exact communication accounting.

Two families live here:

* facility location: the median / percentile / random-dictator mechanisms on
  lines, L1 spaces, open curves and star graphs, together with their sampling
  approximations and the exact rank distribution of a sample's median;
* auctions: an adaptive ascending single-item auction, its simultaneous
  multi-item extension, and a two-price multi-unit auction, all measured by
  the number of bits elicited from the agents.
"""

from mechsample.spaces import Instance, Line, L1Space, Curve, StarTree, social_cost, median
from mechsample.facility import (
    FacilityOutcome,
    SampleSpec,
    approx_median,
    sensitivity_bound,
    percentile_mechanism,
    sampling_percentile,
    make_counterexample,
    random_dictator,
)
from mechsample.vandermonde import (
    VandermondeDist,
    LimitDensity,
    pmf,
    norm_const,
    limit_cdf,
    abs_moment,
    expected_abs_rank,
    tv_distance,
    emit_tables,
)
from mechsample.ledger import BitLedger
from mechsample.valuations import ValuationProfile
from mechsample.kernel import sealed_bid_sim, english_sim, vcg_oracle, AuctionOutcome
from mechsample.ascending import (
    ascending_auction,
    inclusion_rate_experiment,
    simultaneous_additive,
    truthfulness_probe,
)
from mechsample.multiunit import (
    threshold_query,
    estimate_bounds,
    multi_unit_auction,
    multi_unit_constant_m,
)
from mechsample.plurality import SingleMindedProfile, plurality, approx_plurality, social_welfare

__version__ = "0.1.0"
