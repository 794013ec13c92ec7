"""One researcher's full engine state and role-gated mutation surface.

The engine bundles everything a snapshot persists: the graph, the role
table, the ingestion inbox, and the confidence thresholds. Mutating
methods take an optional acting role; when one is given it is checked
before anything changes. Embedding callers that pass no role are trusted,
per the single-user deployment model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Mapping

from . import ingest, schema
from .access import Role, RoleTable, require_write
from .graph import Graph, Node, Relationship, ValidationReport, create_graph
from .ingest import (
    CandidateTriple,
    Inbox,
    InboxEntry,
    MergeReport,
    SubmitReport,
    Thresholds,
)
from .temporal import PartialDate, TemporalInterval

if TYPE_CHECKING:
    from .schema import Registry


@dataclass(slots=True)
class Engine:
    graph: Graph
    roles: RoleTable = field(default_factory=RoleTable)
    inbox: Inbox = field(default_factory=Inbox)
    thresholds: Thresholds = field(default_factory=Thresholds)

    # -- graph mutations, gated when an acting role is given ----------

    def add_node(
        self,
        labels: Iterable[str],
        properties: Mapping[str, Any] | None = None,
        acting: Role | None = None,
    ) -> str:
        require_write(self.graph, acting, "create", labels=set(labels))
        return self.graph.add_node(labels, properties)

    def delete_node(self, node_id: str, cascade: bool = False, acting: Role | None = None) -> int:
        require_write(self.graph, acting, "delete", element_id=node_id)
        return self.graph.delete_node(node_id, cascade)

    def add_relationship(
        self,
        src: str,
        dst: str,
        rel_type: str,
        validity: TemporalInterval | None = None,
        properties: Mapping[str, Any] | None = None,
        acting: Role | None = None,
    ) -> str:
        require_write(self.graph, acting, "create", rel_type=rel_type)
        return self.graph.add_relationship(src, dst, rel_type, validity, properties)

    def end_relationship(
        self, rel_id: str, end: PartialDate | str, acting: Role | None = None
    ) -> Relationship:
        require_write(self.graph, acting, "modify", element_id=rel_id)
        return self.graph.end_relationship(rel_id, end)

    def set_properties(
        self, element_id: str, updates: Mapping[str, Any], acting: Role | None = None
    ) -> Node | Relationship:
        require_write(self.graph, acting, "modify", element_id=element_id)
        return self.graph.set_properties(element_id, updates)

    def set_external_link(
        self, node_id: str, source: str, uri: str, acting: Role | None = None
    ) -> Node:
        require_write(self.graph, acting, "modify", element_id=node_id)
        return schema.set_external_link(self.graph, node_id, source, uri)

    # -- ingestion -----------------------------------------------------

    def submit(
        self,
        candidates: Iterable[CandidateTriple],
        registry: "Registry | None" = None,
        acting: Role | None = None,
    ) -> SubmitReport:
        require_write(self.graph, acting, "create")
        return ingest.submit_candidates(self.graph, self.inbox, self.thresholds, candidates, registry)

    def import_triples(
        self, path: str | Path, registry: "Registry | None" = None, acting: Role | None = None
    ) -> SubmitReport:
        require_write(self.graph, acting, "create")
        return ingest.import_triples(self.graph, self.inbox, self.thresholds, path, registry)

    def import_bibtex(self, path: str | Path, acting: Role | None = None) -> ingest.BibImportReport:
        require_write(self.graph, acting, "create")
        owner_name = self.graph.owner_node.name or ""
        return ingest.import_bibtex(self.graph, path, owner_name)

    def accept(
        self, entry_id: str, registry: "Registry | None" = None, acting: Role | None = None
    ) -> MergeReport:
        require_write(self.graph, acting, "create")
        return ingest.inbox_accept(self.graph, self.inbox, entry_id, registry)

    def reject(self, entry_id: str, acting: Role | None = None) -> InboxEntry:
        require_write(self.graph, acting, "modify")
        return ingest.inbox_reject(self.inbox, entry_id)

    # -- reads ----------------------------------------------------------

    def validate(self, registry: "Registry | None" = None) -> ValidationReport:
        return self.graph.validate(registry)


def new_engine(owner_name: str, thresholds: Thresholds | None = None) -> Engine:
    """Fresh engine: owner node, built-in admin role, empty inbox."""
    return Engine(
        graph=create_graph(owner_name),
        thresholds=thresholds if thresholds is not None else Thresholds(),
    )
