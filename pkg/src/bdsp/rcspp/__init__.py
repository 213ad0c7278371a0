"""Pricing subproblem: graph, labels, dominance stores, and label setting."""
from .dominance import KDStore, naive_filter, second_pass, two_stage_filter
from .graph import SINK, SINK_NODE, SOURCE, SOURCE_NODE, Arc, PricingGraph, build_graph, extend_graph, pricing_graph
from .labels import VARIANTS, Label, Variant, dominance_key, dominates, extend_label, initial_label
from .pricing import (
    PricedColumn,
    Pricer,
    PricingConfig,
    PricingResult,
    PricingStats,
    Throttle,
    admitted_arcs,
    cost_bound,
    label_setting,
)

__all__ = [
    "Arc", "KDStore", "Label", "PricedColumn", "Pricer", "PricingConfig", "PricingGraph", "PricingResult",
    "PricingStats", "SINK", "SINK_NODE", "SOURCE", "SOURCE_NODE", "Throttle", "VARIANTS", "Variant",
    "admitted_arcs", "build_graph", "cost_bound", "dominance_key", "dominates", "extend_graph", "extend_label",
    "initial_label", "label_setting", "naive_filter", "pricing_graph", "second_pass", "two_stage_filter",
]
