"""capnet: measurement toolkit for ownership/capital networks.

Pipeline: parse node/edge CSVs, reconcile redundantly reported links, apply a
network scope, then measure degree-distribution power laws (with bootstrap
CIs and a lognormal comparison), component structure, motif censuses, path
metrics, assortativity, and share-weighted consolidation of entity
financials.
"""

from .components import (
    ComponentLabeling,
    IndustrySubnetwork,
    connected_components,
    extract_gcc,
    industry_subnetwork,
    percent_in_gcc,
)
from .consolidation import ConsolidatedMeasure, consolidate
from .degree_stats import (
    CcdfTable,
    DegreeSample,
    SizeCorrelation,
    ccdf,
    degree_sequences,
    size_correlation_matrix,
)
from .errors import CapnetError, EstimationError, GraphNotConnectedError, InputError
from .graph import EntityGraph, build_graph, degree_of
from .ingest import (
    NetworkScope,
    dedupe_edges,
    filter_network,
    parse_edges_csv,
    parse_nodes_csv,
)
from .motifs import (
    CycleReport,
    MotifCensus,
    ShortcutStats,
    count_shortcut_edges,
    count_simple_cycles,
    four_node_census,
    triad_census,
)
from .paths import (
    PathStats,
    avg_clustering,
    degree_assortativity,
    expected_small_world_diameter,
    path_stats,
)
from .powerlaw import (
    LognormalFit,
    LrTestResult,
    PowerLawFit,
    ZetaSampler,
    bootstrap_ci,
    fit_lognormal_tail,
    fit_power_law,
    gof_pvalue,
    vuong_lr_test,
    with_bootstrap_ci,
)
from .records import (
    BUSINESS_KINDS,
    EdgeRecord,
    EdgeSource,
    NodeKind,
    NodeRecord,
    ParseStats,
)
from .report import NetworkReport, ReportConfig, run_report
from .synth import (
    ScaleFreeParams,
    attach_financials,
    gen_directed_scale_free,
    gen_discrete_power_law,
    gen_er_digraph,
    gen_random_tree,
    write_network_csv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
