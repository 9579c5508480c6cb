"""Collective-fraud detection over account graphs.

Build account graphs from activity logs (explicit invitation edges plus
time-windowed shared-resource edges), find and profile connected components,
flag coordinated account groups by threshold rules, and serve per-account
risk scores from a lookup service that recomputes in the background.
"""

from .analytics import (
    ComponentLabeling,
    ComponentProfile,
    CycleError,
    RuleOutcome,
    RuleThresholds,
    cc_depth,
    dag_cc,
    evaluate_rules,
    gini_index,
    non_self_order_ratio,
    per_account_stats,
    profile_components,
    shared_device_ratio,
    undirected_cc,
)
from .cocontext import CoContextEdge, WindowConfig, build_cocontext_edges, materialize, window_predicate
from .graph import (
    Edge,
    EdgeType,
    GraphError,
    GraphSchema,
    PropertyGraph,
    SchemaError,
    VertexRef,
    VertexType,
    invitation_schema,
    risk_graph_schema,
)
from .ingest import (
    IngestError,
    LoadingJob,
    LoadReport,
    MapStatement,
    RiskEvent,
    default_jobs,
    parse_risk_events,
    replay_lines,
    run_loading_job,
)
from .pipeline import CampaignPaths, detect_invitation_fraud, load_campaign, run_detection, sweep
from .service import RiskScoreRecord, RiskService, ScoreTable, ServiceConfig, build_score_table
from .synth import (
    CampaignSpec,
    FraudGroupSpec,
    GeneratorError,
    GroundTruth,
    claimable_bonuses,
    generate,
    precision_recall,
    standard_fraud_groups,
    strategy_referrals,
)

__version__ = "0.1.0"

__all__ = [
    "CampaignPaths",
    "CampaignSpec",
    "CoContextEdge",
    "ComponentLabeling",
    "ComponentProfile",
    "CycleError",
    "Edge",
    "EdgeType",
    "FraudGroupSpec",
    "GeneratorError",
    "GraphError",
    "GraphSchema",
    "GroundTruth",
    "IngestError",
    "LoadReport",
    "LoadingJob",
    "MapStatement",
    "PropertyGraph",
    "RiskEvent",
    "RiskScoreRecord",
    "RiskService",
    "RuleOutcome",
    "RuleThresholds",
    "SchemaError",
    "ScoreTable",
    "ServiceConfig",
    "VertexRef",
    "VertexType",
    "WindowConfig",
    "build_cocontext_edges",
    "build_score_table",
    "cc_depth",
    "claimable_bonuses",
    "dag_cc",
    "default_jobs",
    "detect_invitation_fraud",
    "evaluate_rules",
    "generate",
    "gini_index",
    "invitation_schema",
    "load_campaign",
    "materialize",
    "non_self_order_ratio",
    "parse_risk_events",
    "per_account_stats",
    "precision_recall",
    "profile_components",
    "replay_lines",
    "risk_graph_schema",
    "run_detection",
    "run_loading_job",
    "shared_device_ratio",
    "standard_fraud_groups",
    "strategy_referrals",
    "sweep",
    "undirected_cc",
    "window_predicate",
]
