"""Static fast-failover routing over arc-disjoint arborescences."""

from .decompose import BudgetError, InfeasibleError, decompose_general
from .graph import (
    Arborescence,
    ArborescenceSet,
    Arc,
    GraphError,
    MultiGraph,
    edge_connectivity,
    make_set,
    to_dot,
    validate_arborescence_set,
)
from .impossibility import impossibility_suite
from .mader import MaderError, MaderOp, mader_build, random_mader_graph
from .metagraph import build_meta_graph, good_arborescences, tree_components
from .schemes import (
    BouncedRand,
    Circular,
    DFAlgo,
    Duplication,
    PlusOne,
    PortTable,
    PureResample,
    VertexCircular,
    adbed_order,
)
from .simulator import explore_randomized_branches, run_deterministic, run_duplication, run_randomized
from .topologies import TopologySpec, UnsupportedTopology, build_topology, subdivide_three
from .verifier import (
    TooLargeError,
    Verdict,
    check_resilience,
    never_bounce_report,
    shared_failure_free_audit,
    switch_bound_report,
)

__version__ = "0.1.0"

__all__ = [
    "Arborescence",
    "ArborescenceSet",
    "Arc",
    "BouncedRand",
    "BudgetError",
    "Circular",
    "DFAlgo",
    "Duplication",
    "GraphError",
    "InfeasibleError",
    "MaderError",
    "MaderOp",
    "MultiGraph",
    "PlusOne",
    "PortTable",
    "PureResample",
    "TooLargeError",
    "TopologySpec",
    "UnsupportedTopology",
    "Verdict",
    "VertexCircular",
    "adbed_order",
    "build_meta_graph",
    "build_topology",
    "check_resilience",
    "decompose_general",
    "edge_connectivity",
    "explore_randomized_branches",
    "good_arborescences",
    "impossibility_suite",
    "mader_build",
    "make_set",
    "never_bounce_report",
    "random_mader_graph",
    "run_deterministic",
    "run_duplication",
    "run_randomized",
    "shared_failure_free_audit",
    "subdivide_three",
    "switch_bound_report",
    "to_dot",
    "tree_components",
    "validate_arborescence_set",
]
