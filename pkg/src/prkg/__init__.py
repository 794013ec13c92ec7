"""Personal research knowledge graph engine.

A small embedded engine for one researcher's knowledge graph: an
owner-centric labeled property graph whose relationships carry partial-date
validity intervals, plus role-based sharing, a pattern query language,
confidence-gated ingestion with a review inbox, canonical snapshots, and a
reified RDF export.
"""

from .errors import (
    AccessDenied,
    Conflict,
    FileParseError,
    Forbidden,
    IntegrityError,
    InvalidArgument,
    NotFound,
    PrkgError,
    UnsupportedVersion,
)
from .graph import Graph, Node, Relationship, create_graph
from .temporal import PartialDate, TemporalInterval, is_valid_at

__all__ = [
    "AccessDenied",
    "Conflict",
    "FileParseError",
    "Forbidden",
    "Graph",
    "IntegrityError",
    "InvalidArgument",
    "Node",
    "NotFound",
    "PartialDate",
    "PrkgError",
    "Relationship",
    "TemporalInterval",
    "UnsupportedVersion",
    "create_graph",
    "is_valid_at",
]

__version__ = "0.1.0"
