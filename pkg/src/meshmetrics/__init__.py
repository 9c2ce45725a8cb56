"""Link-quality routing metrics for wireless mesh networks.

A library, simulator and harness that measures links under configurable
channel models, evaluates the full family of transmission-count metrics,
selects routes per metric, and replays traffic to compare them.
"""

from .core import (
    Direction,
    Link,
    MetricId,
    MetricValue,
    Topology,
    build_topology,
    interference_set,
    interfering_nodes,
    metric_value,
    validate_path,
)
from .harness import (
    ComparisonTable,
    FlowResult,
    FlowSpec,
    Scenario,
    ScenarioReport,
    compare_metrics,
    replay_flow,
    run_scenario,
)
from .linksim import (
    BernoulliLoss,
    FadingSnr,
    GilbertElliott,
    LinkEstimate,
    LinkTruth,
    MeasurementConfig,
    ProbeRecord,
    estimate_bit_stats,
    measure_link,
    packet_pair_bandwidth,
    sample_sinr,
    simulate_probes,
)
from .metrics import MetricConfig
from .routing import (
    DistanceTable,
    RouteRequest,
    best_path_exhaustive,
    best_path_recursive,
    etx_distance_table,
    greedy_forward,
    select_route,
    shortest_path_additive,
)
from .schemas import parse_scenario_file, scenario_from_dict, scenario_to_dict

__version__ = "0.1.0"
