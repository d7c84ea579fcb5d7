"""Auction simulation with a third-party data provider.

A single item of uncertain type is sold to one bidder who receives an
outside signal about the type.  The package models the market, evaluates
simple and menu-based selling mechanisms exactly or by seeded Monte Carlo,
and computes optimal seller revenue on discrete instances by linear
programming.
"""

from .distributions import (
    DiscreteDist,
    EqualRevenueDist,
    ValuationDist,
    er_cdf,
    er_mean_tail_check,
    er_quantile,
    er_truncated_mean,
    sale_probability,
    sample,
    sample_array,
)
from .errors import (
    InputError,
    SizeGuardError,
    SolverFailureError,
    UnsupportedInstanceError,
)
from .linprog import LinearProgram, LpSolution, solve
from .market import (
    Garbling,
    MarketInstance,
    PosteriorFamily,
    SignalingScheme,
    compose,
    full_revelation_scheme,
    identity_garbling,
    load_scenario,
    parse_scenario,
    posterior_family,
    posterior_of,
    scenario_dict,
    signal_marginals,
    uninformative_scheme,
)
from .mechanisms import (
    Bundling,
    ConditionalMenu,
    MenuOption,
    PartitionMechanism,
    TypePricing,
    best_response,
    bundling_revenue,
    dyadic_menu,
    mechanism_from_dict,
    mechanism_to_dict,
    menu_revenue_exact,
    menu_revenue_mc,
    option_utility,
    partition_revenue,
    pricing_revenue,
)
from .optrev import (
    BidderType,
    OptimalResult,
    build_revenue_lp,
    enumerate_bidder_types,
    optimal_revenue,
)
from .experiments import (
    RunReport,
    best_partition,
    build_example1,
    build_example2,
    build_example3,
    er_verify,
    example3_scenario,
    garble_sweep,
    run_example1,
    run_example2,
)

__version__ = "0.1.0"
