"""Counting and sampling of strongly connected digraphs and digraphs with
minimum-degree constraints.

The package has five layers: truncated Poisson degree laws
(``truncated_poisson``), digraph structure predicates (``digraph``),
asymptotic counting formulas (``counts``), exact small-scale oracles
(``oracles``), and random generation with Monte Carlo experiments
(``generation``).  The ``scdigraph`` command line exposes all of them.
"""

from .counts import (
    LogCount,
    asymptotic_sum_probability,
    expected_scycles,
    expected_scycles_limit,
    limiting_simple_probability,
    limiting_strong_probability,
    log_count_dicore,
    log_count_min_degree,
    log_count_strong,
    sci_notation,
)
from .digraph import (
    Digraph,
    HeartStats,
    MultiDigraph,
    SCycle,
    classify_s_set,
    cycle_components,
    degree_stats,
    enumerate_s_cycles,
    heart,
    in_degrees,
    is_strongly_connected,
    out_degrees,
    reachable_set,
    read_edge_list,
    write_edge_list,
)
from .errors import DomainError, ResourceLimitError
from .generation import (
    HeartConfiguration,
    McReport,
    Pairing,
    mc_heart_strong,
    mc_scycle_census,
    mc_simple_fraction,
    mc_strong_probability,
    random_pairing,
    sample_dicore,
    sample_heart_configuration,
)
from .oracles import (
    CensusResult,
    brute_force_census,
    enumerate_min_degree_digraphs,
    ie_dicore_count,
    ie_dicore_count_loopfree,
)
from .truncated_poisson import (
    DegreeSequence,
    TruncatedPoisson,
    exact_sum_probability,
    mean_from_rate,
    sample_conditioned_sum,
    solve_rate,
)

__version__ = "0.1.0"

__all__ = [
    "CensusResult",
    "DegreeSequence",
    "Digraph",
    "DomainError",
    "HeartConfiguration",
    "HeartStats",
    "LogCount",
    "McReport",
    "MultiDigraph",
    "Pairing",
    "ResourceLimitError",
    "SCycle",
    "TruncatedPoisson",
    "asymptotic_sum_probability",
    "brute_force_census",
    "classify_s_set",
    "cycle_components",
    "degree_stats",
    "enumerate_min_degree_digraphs",
    "enumerate_s_cycles",
    "exact_sum_probability",
    "expected_scycles",
    "expected_scycles_limit",
    "heart",
    "ie_dicore_count",
    "ie_dicore_count_loopfree",
    "in_degrees",
    "is_strongly_connected",
    "limiting_simple_probability",
    "limiting_strong_probability",
    "log_count_dicore",
    "log_count_min_degree",
    "log_count_strong",
    "mc_heart_strong",
    "mc_scycle_census",
    "mc_simple_fraction",
    "mc_strong_probability",
    "mean_from_rate",
    "out_degrees",
    "random_pairing",
    "read_edge_list",
    "reachable_set",
    "sample_conditioned_sum",
    "sample_dicore",
    "sample_heart_configuration",
    "sci_notation",
    "solve_rate",
    "write_edge_list",
]
