"""Network investment games on series-parallel graphs.

Providers invest in edge capacity, users route selfishly with elastic
demand, and providers collect the resulting congestion prices.  The package
computes Wardrop flows, provider profits, closed-form equilibria and
inefficiency ratios, and ships a numerical verification harness.
"""
from .equilibria import (
    EquilibriumReport, InefficiencyReport, inefficiency, optimal_total_profit, social_optimum, spne,
    spne_homogeneous, spne_powerlaw,
)
from .errors import (
    ArityError, ClosedFormMismatch, DivergentWelfare, DuplicateEdgeId, EmptyInvestment,
    NetInvestError, NonMonotoneReservation, PreconditionViolated, TooManyPaths, TreeSyntaxError,
    UnknownEdge, UnsupportedReservation,
)
from .kernels import BACKEND
from .market import (
    InvestmentMatrix, PathStrategyProfile, ProfitReport, embed_scalar_on_shortest_paths, profit,
    reduced_profit, social_welfare,
)
from .sp_graph import (
    Edge, Parallel, Series, edge, enumerate_paths, enumerate_shortest_paths, flatten, parallel,
    parse_tree, path_tree, series, shortest_path_length, to_dict,
)
from .verify import (
    DeviationResult, beckmann_oracle, best_response_gap, check_shortest_path_theorem,
    construct_parallel_shift, construct_series_rebalance,
)
from .wardrop import (
    Homogeneous, PiecewiseLinear, PowerLaw, WardropOutcome, compose_slope, edge_flows,
    path_flow_decomposition, solve_demand, wardrop_outcome,
)

__version__ = "0.1.0"
