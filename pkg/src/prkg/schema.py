"""Advisory vocabulary for the research domain.

The graph itself is schemaless; this registry only produces warnings, so a
user can record anything first and tidy later. Built-in labels and
relations cover the everyday entities of a researcher's work life. User
extensions may add relations but never shadow a built-in name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from urllib.parse import urlparse

from .errors import Conflict, InvalidArgument
from .graph import EXTERNAL_LINK_SOURCES, ExternalLink, Graph, Node
from .temporal import TemporalInterval

BUILTIN_LABELS = frozenset(
    {
        "Researcher",
        "Institution",
        "Topic",
        "Task",
        "Method",
        "Tool",
        "Dataset",
        "Metric",
        "Paper",
        "Lab",
        "Machine",
        "Committee",
        "Conference",
        "Course",
        "Project",
        "Talk",
        "Equipment",
    }
)


@dataclass(frozen=True, slots=True)
class RelationSpec:
    """Expected endpoints for one relation name."""

    name: str
    src_labels: frozenset[str]
    dst_labels: frozenset[str]
    temporal: bool = False


def _spec(name: str, src: set[str], dst: set[str], temporal: bool = False) -> RelationSpec:
    return RelationSpec(name, frozenset(src), frozenset(dst), temporal)


BUILTIN_RELATIONS: tuple[RelationSpec, ...] = (
    _spec("worksFor", {"Researcher"}, {"Institution"}, temporal=True),
    _spec("interest", {"Researcher"}, {"Topic"}),
    _spec("task", {"Researcher", "Paper"}, {"Task"}),
    _spec("method", {"Task"}, {"Method"}),
    _spec("tool", {"Task", "Researcher"}, {"Tool"}),
    _spec("dataset", {"Task"}, {"Dataset"}),
    _spec("metric", {"Task"}, {"Metric"}),
    _spec("writes", {"Researcher"}, {"Paper"}),
    _spec("reads", {"Researcher"}, {"Paper"}),
    _spec("reviewerOf", {"Researcher"}, {"Paper"}),
    _spec("memberOf", {"Researcher"}, {"Committee"}),
    _spec("manages", {"Researcher"}, {"Lab"}),
    _spec("hasMachine", {"Lab"}, {"Machine"}),
    _spec("attends", {"Researcher"}, {"Conference"}, temporal=True),
    _spec("teaches", {"Researcher"}, {"Course"}, temporal=True),
    _spec("participatesIn", {"Researcher"}, {"Project"}, temporal=True),
    _spec("gives", {"Researcher"}, {"Talk"}),
)

_BUILTIN_NAMES = frozenset(spec.name for spec in BUILTIN_RELATIONS)

# Relation names are stored bare ("tool", not "usesTool"); an alias with a
# uses- prefix is legal but flagged as non-canonical.
_USES_ALIAS_RE = re.compile(r"^uses([A-Z][A-Za-z0-9]*)$")


@dataclass(slots=True)
class Registry:
    """Known labels plus relation endpoint expectations."""

    labels: set[str] = field(default_factory=lambda: set(BUILTIN_LABELS))
    relations: dict[str, RelationSpec] = field(
        default_factory=lambda: {spec.name: spec for spec in BUILTIN_RELATIONS}
    )

    def check_triple(
        self,
        src_labels: set[str] | frozenset[str],
        rel_type: str,
        dst_labels: set[str] | frozenset[str],
    ) -> list[str]:
        """Advisory warnings for one (src labels, relation, dst labels) triple.

        Unknown relation names pass silently, except a uses-prefixed alias
        of a known relation, which is flagged as non-canonical.
        """
        spec = self.relations.get(rel_type)
        if spec is None:
            alias = _USES_ALIAS_RE.match(rel_type)
            if alias is not None:
                bare = alias.group(1)[0].lower() + alias.group(1)[1:]
                if bare in self.relations:
                    return [
                        f"non-canonical relation name '{rel_type}'; the vocabulary uses '{bare}'"
                    ]
            return []
        warnings = []
        if not set(src_labels) & spec.src_labels:
            warnings.append(
                f"relation '{rel_type}' expects source labels "
                f"{_label_list(spec.src_labels)}, got {_label_list(src_labels)}"
            )
        if not set(dst_labels) & spec.dst_labels:
            warnings.append(
                f"relation '{rel_type}' expects target labels "
                f"{_label_list(spec.dst_labels)}, got {_label_list(dst_labels)}"
            )
        return warnings

    def check_relationship(
        self,
        src_labels: set[str] | frozenset[str],
        rel_type: str,
        dst_labels: set[str] | frozenset[str],
        validity: TemporalInterval | None = None,
    ) -> list[str]:
        """Endpoint warnings plus a nudge when a dated relation lacks dates."""
        warnings = self.check_triple(src_labels, rel_type, dst_labels)
        spec = self.relations.get(rel_type)
        if (
            spec is not None
            and spec.temporal
            and validity is not None
            and validity.start is None
            and validity.end is None
        ):
            warnings.append(f"relation '{rel_type}' usually carries a validity interval")
        return warnings


def builtin_registry() -> Registry:
    return Registry()


def register_relation(registry: Registry, spec: RelationSpec) -> Registry:
    """Add a user relation to the registry. Built-in names stay reserved."""
    if not spec.name or spec.name.split() != [spec.name]:
        raise InvalidArgument(f"relation name must be a non-empty token: {spec.name!r}")
    if spec.name in _BUILTIN_NAMES:
        raise Conflict(f"relation name is built in: {spec.name}")
    registry.relations[spec.name] = spec
    registry.labels.update(spec.src_labels)
    registry.labels.update(spec.dst_labels)
    return registry


def check_triple(
    registry: Registry,
    src_labels: set[str] | frozenset[str],
    rel_type: str,
    dst_labels: set[str] | frozenset[str],
) -> list[str]:
    """Function form of Registry.check_triple."""
    return registry.check_triple(src_labels, rel_type, dst_labels)


def _label_list(labels: set[str] | frozenset[str]) -> str:
    return "{" + ", ".join(sorted(labels)) + "}"


def is_absolute_uri(text: str) -> bool:
    """True for scheme-qualified URIs without whitespace."""
    if not isinstance(text, str) or not text or any(c.isspace() for c in text):
        return False
    parsed = urlparse(text)
    return bool(parsed.scheme) and bool(parsed.netloc or parsed.path)


def set_external_link(graph: Graph, node_id: str, source: str, uri: str) -> Node:
    """Attach a same-entity link to a node.

    The same (source, uri) pair may appear on a node only once.
    """
    node = graph.node(node_id)
    if source not in EXTERNAL_LINK_SOURCES:
        raise InvalidArgument(
            f"link source must be one of {', '.join(EXTERNAL_LINK_SOURCES)}: {source!r}"
        )
    if not is_absolute_uri(uri):
        raise InvalidArgument(f"link target must be an absolute URI: {uri!r}")
    link = ExternalLink(source, uri)
    if link in node.external_links:
        raise Conflict(f"link already present on {node_id}: {source} {uri}")
    node.external_links.append(link)
    return node
