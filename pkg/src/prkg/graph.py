"""Owner-centric labeled property graph with temporal relationships.

Every graph belongs to one researcher. The owner node is created with the
graph and can never be deleted, so the graph always has an anchor; nodes
that cannot reach it (ignoring direction) are reported as orphans by
``validate`` but are otherwise legal, transient states.

Identifiers are opaque strings minted from a single counter and are never
reused, so deterministic ordering anywhere in the engine means sorting by
id text.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping

from .errors import Conflict, Forbidden, InvalidArgument, NotFound
from .temporal import UNBOUNDED, PartialDate, TemporalInterval, as_partial_date, is_valid_at

if TYPE_CHECKING:
    from .schema import Registry

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

EXTERNAL_LINK_SOURCES = ("wikidata", "orkg", "twitter", "other")


class _Unset:
    """Marker for property removal in ``set_properties`` updates."""

    def __repr__(self) -> str:
        return "UNSET"


UNSET = _Unset()

# What a property may hold: text, 64-bit int, finite float, bool,
# a partial date, or a list of non-empty text.
PropertyValue = Any


def check_property_value(key: str, value: Any) -> PropertyValue:
    """Validate one property entry, returning a normalized copy of the value."""
    if not isinstance(key, str) or not key:
        raise InvalidArgument(f"property key must be non-empty text: {key!r}")
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise InvalidArgument(f"integer property {key!r} exceeds 64 bits")
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidArgument(f"decimal property {key!r} must be finite")
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, PartialDate):
        return value
    if isinstance(value, (list, tuple)):
        items = list(value)
        for item in items:
            if not isinstance(item, str) or not item:
                raise InvalidArgument(
                    f"list property {key!r} may only hold non-empty text, got {item!r}"
                )
        return items
    raise InvalidArgument(f"unsupported property value for {key!r}: {type(value).__name__}")


def _checked_properties(properties: Mapping[str, Any] | None) -> dict[str, PropertyValue]:
    out: dict[str, PropertyValue] = {}
    for key, value in (properties or {}).items():
        out[key] = check_property_value(key, value)
    return out


def _checked_labels(labels: Iterable[str]) -> set[str]:
    out = set(labels)
    if not out:
        raise InvalidArgument("a node needs at least one label")
    for label in out:
        if not isinstance(label, str) or not label or label.split() != [label]:
            raise InvalidArgument(f"label must be a non-empty token: {label!r}")
    return out


@dataclass(frozen=True, slots=True)
class ExternalLink:
    """A same-entity pointer into an external knowledge base."""

    source: str
    uri: str


@dataclass(slots=True)
class Node:
    id: str
    labels: set[str]
    properties: dict[str, PropertyValue] = field(default_factory=dict)
    external_links: list[ExternalLink] = field(default_factory=list)

    @property
    def name(self) -> str | None:
        value = self.properties.get("name")
        return value if isinstance(value, str) else None


@dataclass(slots=True)
class Relationship:
    id: str
    src: str
    dst: str
    rel_type: str
    validity: TemporalInterval = UNBOUNDED
    properties: dict[str, PropertyValue] = field(default_factory=dict)


@dataclass(slots=True)
class ValidationReport:
    orphans: list[str]
    schema_warnings: list[str]


@dataclass(slots=True)
class Graph:
    """Mutable graph state: nodes, relationships, owner id, id counter."""

    owner: str
    nodes: dict[str, Node] = field(default_factory=dict)
    relationships: dict[str, Relationship] = field(default_factory=dict)
    next_id: int = 1

    # -- id allocation ------------------------------------------------

    def _fresh(self, prefix: str) -> str:
        new = f"{prefix}{self.next_id}"
        self.next_id += 1
        return new

    # -- lookups ------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NotFound(f"node not found: {node_id}") from None

    def relationship(self, rel_id: str) -> Relationship:
        try:
            return self.relationships[rel_id]
        except KeyError:
            raise NotFound(f"relationship not found: {rel_id}") from None

    def element(self, element_id: str) -> Node | Relationship:
        found = self.nodes.get(element_id) or self.relationships.get(element_id)
        if found is None:
            raise NotFound(f"element not found: {element_id}")
        return found

    def nodes_named(self, name: str, label: str | None = None) -> list[Node]:
        """Nodes whose name property equals ``name`` case-insensitively."""
        wanted = name.casefold()
        hits = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.name is not None and node.name.casefold() == wanted:
                if label is None or label in node.labels:
                    hits.append(node)
        return hits

    @property
    def owner_node(self) -> Node:
        return self.nodes[self.owner]

    # -- mutations ----------------------------------------------------

    def add_node(
        self,
        labels: Iterable[str],
        properties: Mapping[str, Any] | None = None,
    ) -> str:
        checked = _checked_labels(labels)
        props = _checked_properties(properties)
        node_id = self._fresh("n")
        self.nodes[node_id] = Node(node_id, checked, props)
        return node_id

    def add_relationship(
        self,
        src: str,
        dst: str,
        rel_type: str,
        validity: TemporalInterval | None = None,
        properties: Mapping[str, Any] | None = None,
    ) -> str:
        if src not in self.nodes:
            raise NotFound(f"node not found: {src}")
        if dst not in self.nodes:
            raise NotFound(f"node not found: {dst}")
        if not isinstance(rel_type, str) or not rel_type or rel_type.split() != [rel_type]:
            raise InvalidArgument(f"relation name must be a non-empty token: {rel_type!r}")
        validity = validity if validity is not None else UNBOUNDED
        # Parallel edges of one type must differ in validity; an exact
        # duplicate would state the same fact twice.
        for rel in self.relationships.values():
            if (
                rel.src == src
                and rel.dst == dst
                and rel.rel_type == rel_type
                and rel.validity == validity
            ):
                raise Conflict(
                    f"duplicate relationship: {src} -{rel_type}-> {dst} {validity} ({rel.id})"
                )
        props = _checked_properties(properties)
        rel_id = self._fresh("r")
        self.relationships[rel_id] = Relationship(rel_id, src, dst, rel_type, validity, props)
        return rel_id

    def end_relationship(self, rel_id: str, end: PartialDate | str) -> Relationship:
        """Close an open-ended relationship at ``end``."""
        rel = self.relationship(rel_id)
        if rel.validity.end is not None:
            raise Conflict(f"relationship already ended: {rel_id} {rel.validity}")
        end = as_partial_date(end)
        # TemporalInterval enforces end >= start.
        rel.validity = TemporalInterval(rel.validity.start, end)
        return rel

    def set_properties(
        self, element_id: str, updates: Mapping[str, Any]
    ) -> Node | Relationship:
        """Apply property updates; the UNSET marker removes a key.

        Updates are validated before any of them is applied, so a bad
        value leaves the element untouched.
        """
        target = self.element(element_id)
        checked: dict[str, Any] = {}
        for key, value in updates.items():
            if isinstance(value, _Unset):
                if not isinstance(key, str) or not key:
                    raise InvalidArgument(f"property key must be non-empty text: {key!r}")
                checked[key] = UNSET
            else:
                checked[key] = check_property_value(key, value)
        for key, value in checked.items():
            if isinstance(value, _Unset):
                target.properties.pop(key, None)
            else:
                target.properties[key] = value
        return target

    def delete_node(self, node_id: str, cascade: bool = False) -> int:
        """Delete a node; with ``cascade`` also its relationships.

        Returns how many elements were removed. The owner is never
        deletable.
        """
        node = self.node(node_id)
        if node_id == self.owner:
            raise Forbidden("the owner node cannot be deleted")
        attached = [r.id for r in self.relationships.values() if node_id in (r.src, r.dst)]
        if attached and not cascade:
            raise Conflict(
                f"node {node_id} still has {len(attached)} relationship(s); use cascade"
            )
        for rel_id in attached:
            del self.relationships[rel_id]
        del self.nodes[node_id]
        return 1 + len(attached)

    # -- reads ----------------------------------------------------------

    def neighbors(
        self,
        node_id: str,
        direction: str = "both",
        rel_type: str | None = None,
        at: PartialDate | str | None = None,
    ) -> list[tuple[Relationship, Node]]:
        """Adjacent (relationship, node) pairs, sorted by relationship id."""
        if direction not in ("out", "in", "both"):
            raise InvalidArgument(f"direction must be out, in, or both: {direction!r}")
        self.node(node_id)
        hits: list[tuple[Relationship, Node]] = []
        for rel_id in sorted(self.relationships):
            rel = self.relationships[rel_id]
            if rel_type is not None and rel.rel_type != rel_type:
                continue
            if at is not None and not is_valid_at(rel.validity, at):
                continue
            if direction in ("out", "both") and rel.src == node_id:
                hits.append((rel, self.nodes[rel.dst]))
            elif direction in ("in", "both") and rel.dst == node_id:
                hits.append((rel, self.nodes[rel.src]))
        return hits

    def reachable_from_owner(self) -> set[str]:
        """Node ids connected to the owner when direction is ignored."""
        adjacency: dict[str, set[str]] = {node_id: set() for node_id in self.nodes}
        for rel in self.relationships.values():
            adjacency[rel.src].add(rel.dst)
            adjacency[rel.dst].add(rel.src)
        seen = {self.owner}
        queue = deque([self.owner])
        while queue:
            current = queue.popleft()
            for nxt in adjacency[current]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def validate(self, registry: "Registry | None" = None) -> ValidationReport:
        """Report orphans and advisory vocabulary warnings."""
        if registry is None:
            from .schema import builtin_registry

            registry = builtin_registry()
        reachable = self.reachable_from_owner()
        orphans = sorted(set(self.nodes) - reachable)
        warnings: list[str] = []
        for rel_id in sorted(self.relationships):
            rel = self.relationships[rel_id]
            src = self.nodes[rel.src]
            dst = self.nodes[rel.dst]
            for text in registry.check_relationship(
                src.labels, rel.rel_type, dst.labels, rel.validity
            ):
                warnings.append(f"{rel_id}: {text}")
        return ValidationReport(orphans, warnings)


def create_graph(owner_name: str) -> Graph:
    """New graph whose only node is the owner researcher."""
    if not isinstance(owner_name, str) or not owner_name.strip():
        raise InvalidArgument("owner name must be non-empty text")
    graph = Graph(owner="")
    owner_id = graph.add_node({"Researcher"}, {"name": owner_name})
    graph.owner = owner_id
    return graph
