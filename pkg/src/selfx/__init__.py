"""Capability knowledge base for robots.

Stores engineering knowledge as a typed hypergraph, infers which component
configurations currently work, predicts per-behavior performance from
experience, and answers whether a behavior can be done at a required
performance level.
"""

from .inference import (FixpointStats, explain, infer_to_fixpoint,
                        render_explanation, resource_ledger, trace_records)
from .kb import KbError, KnowledgeBase, UnknownFact
from .missions import (AssessmentFeatures, AssessmentResult, StaleKbError,
                       assess_behavior, behaviors_in, can_i_do_it,
                       conditions_from_kb, feasible_behaviors,
                       register_behavior, select_behavior)
from .schema import (ValidationReport, list_requirements, load_builtin_schema,
                     validate_component)
from .sxdl import SxdlError, SxdlLoadError, SxdlParseError, dump, load, parse

__version__ = "0.1.0"


def new_kb() -> KnowledgeBase:
    """Fresh knowledge base with the built-in ontology installed."""
    kb = KnowledgeBase()
    load_builtin_schema(kb)
    return kb


__all__ = [
    "AssessmentFeatures", "AssessmentResult", "FixpointStats", "KbError",
    "KnowledgeBase", "StaleKbError", "SxdlError", "SxdlLoadError",
    "SxdlParseError", "UnknownFact", "ValidationReport", "assess_behavior",
    "behaviors_in", "can_i_do_it", "conditions_from_kb", "dump", "explain",
    "feasible_behaviors", "infer_to_fixpoint", "list_requirements", "load",
    "load_builtin_schema", "new_kb", "parse", "register_behavior",
    "render_explanation", "resource_ledger", "select_behavior",
    "trace_records", "validate_component",
]
