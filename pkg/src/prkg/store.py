"""Snapshot persistence and RDF export.

A snapshot is a single UTF-8 JSON document with a format tag and version.
Serialization is canonical: object keys appear in the order documented
below, node, relationship, role, and inbox lists are sorted by id or name,
and the file ends with one newline. Equal states therefore produce
byte-identical files, which makes snapshots diffable and safe to keep in
version control.

Top-level key order::

    format, version, owner, next_id, nodes, relationships, roles,
    inbox, thresholds

Record key orders::

    node          id, labels, properties, links
    relationship  id, src, dst, type, start, end, properties
    role          name, rules        rule: effect, privilege, scope
    inbox entry   id, state, decided_at, candidate

Property values keep their JSON type; a partial date is written as the
object ``{"date": "YYYY[-MM[-DD]]"}``.

The RDF export reifies each relationship as a resource so validity
intervals and edge properties survive the trip into triple form.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any
from urllib.parse import quote

from .access import AccessRule, Effect, Privilege, Role, RoleTable, Scope, ScopeKind, view_as
from .engine import Engine
from .errors import FileParseError, IntegrityError, UnsupportedVersion
from .graph import ExternalLink, Graph, Node, Relationship, check_property_value
from .ingest import CandidateTriple, Inbox, InboxEntry, InboxState, Thresholds
from .temporal import PartialDate, TemporalInterval

FORMAT_TAG = "prkg-snapshot"
FORMAT_VERSION = 1

DEFAULT_RDF_BASE = "urn:prkg:"


# -- canonical serialization -------------------------------------------------


def _encode_value(value: Any) -> Any:
    if isinstance(value, PartialDate):
        return {"date": str(value)}
    if isinstance(value, list):
        return list(value)
    return value


def _encode_node(node: Node) -> dict[str, Any]:
    return {
        "id": node.id,
        "labels": sorted(node.labels),
        "properties": {key: _encode_value(node.properties[key]) for key in sorted(node.properties)},
        "links": [{"source": link.source, "uri": link.uri} for link in node.external_links],
    }


def _encode_relationship(rel: Relationship) -> dict[str, Any]:
    return {
        "id": rel.id,
        "src": rel.src,
        "dst": rel.dst,
        "type": rel.rel_type,
        "start": str(rel.validity.start) if rel.validity.start else None,
        "end": str(rel.validity.end) if rel.validity.end else None,
        "properties": {key: _encode_value(rel.properties[key]) for key in sorted(rel.properties)},
    }


def _encode_scope(scope: Scope) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": scope.kind.value}
    if scope.label is not None:
        out["label"] = scope.label
    if scope.key is not None:
        out["key"] = scope.key
    if scope.node_id is not None:
        out["node_id"] = scope.node_id
    if scope.rel_type is not None:
        out["rel_type"] = scope.rel_type
    if scope.values:
        out["values"] = sorted(scope.values)
    return out


def _encode_role(role: Role) -> dict[str, Any]:
    return {
        "name": role.name,
        "rules": [
            {
                "effect": rule.effect.value,
                "privilege": rule.privilege.value,
                "scope": _encode_scope(rule.scope),
            }
            for rule in role.rules
        ],
    }


def _encode_entry(entry: InboxEntry) -> dict[str, Any]:
    c = entry.candidate
    return {
        "id": entry.id,
        "state": entry.state.value,
        "decided_at": entry.decided_at,
        "candidate": {
            "head": c.head,
            "head_label": c.head_label,
            "rel": c.rel,
            "tail": c.tail,
            "tail_label": c.tail_label,
            "confidence": c.confidence,
            "source": c.source,
            "prov": c.provenance,
        },
    }


def snapshot_bytes(engine: Engine) -> bytes:
    """Canonical snapshot encoding of the engine state."""
    graph = engine.graph
    document = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "owner": graph.owner,
        "next_id": graph.next_id,
        "nodes": [_encode_node(graph.nodes[i]) for i in sorted(graph.nodes)],
        "relationships": [
            _encode_relationship(graph.relationships[i]) for i in sorted(graph.relationships)
        ],
        "roles": [_encode_role(engine.roles.roles[name]) for name in sorted(engine.roles.roles)],
        "inbox": [_encode_entry(engine.inbox.entries[i]) for i in sorted(engine.inbox.entries)],
        "thresholds": {
            "accept": engine.thresholds.accept,
            "reject": engine.thresholds.reject,
        },
    }
    return (json.dumps(document, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _atomic_write(path: Path, data: bytes) -> None:
    # Write next to the target, then rename over it, so a crash leaves
    # either the old file or the new one, never a torn mix.
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def save_snapshot(engine: Engine, path: str | Path) -> int:
    """Atomically write the snapshot; returns bytes written."""
    data = snapshot_bytes(engine)
    _atomic_write(Path(path), data)
    return len(data)


# -- loading -------------------------------------------------------------


def _need(record: dict[str, Any], key: str, where: str) -> Any:
    if key not in record:
        raise IntegrityError(f"{where}: missing key {key!r}")
    return record[key]


def _decode_value(raw: Any, where: str) -> Any:
    if isinstance(raw, dict):
        if set(raw) != {"date"} or not isinstance(raw["date"], str):
            raise IntegrityError(f"{where}: bad value object {raw!r}")
        return PartialDate.parse(raw["date"])
    return raw


def _decode_node(record: Any, index: int) -> Node:
    where = f"node record {index}"
    if not isinstance(record, dict):
        raise IntegrityError(f"{where}: not an object")
    node_id = _need(record, "id", where)
    if not isinstance(node_id, str) or not node_id:
        raise IntegrityError(f"{where}: bad id {node_id!r}")
    where = f"node {node_id}"
    labels = _need(record, "labels", where)
    if not isinstance(labels, list) or not labels:
        raise IntegrityError(f"{where}: needs at least one label")
    raw_props = _need(record, "properties", where)
    if not isinstance(raw_props, dict):
        raise IntegrityError(f"{where}: properties must be an object")
    properties = {}
    for key, raw in raw_props.items():
        try:
            properties[key] = check_property_value(key, _decode_value(raw, where))
        except Exception as exc:
            raise IntegrityError(f"{where}: {exc}") from None
    links = []
    for raw in _need(record, "links", where):
        if not isinstance(raw, dict) or set(raw) != {"source", "uri"}:
            raise IntegrityError(f"{where}: bad link {raw!r}")
        links.append(ExternalLink(raw["source"], raw["uri"]))
    try:
        label_set = set(labels)
    except TypeError:
        raise IntegrityError(f"{where}: bad labels {labels!r}") from None
    return Node(node_id, label_set, properties, links)


def _decode_date(raw: Any, where: str) -> PartialDate | None:
    if raw is None:
        return None
    try:
        return PartialDate.parse(raw)
    except Exception as exc:
        raise IntegrityError(f"{where}: {exc}") from None


def _decode_relationship(record: Any, index: int, nodes: dict[str, Node]) -> Relationship:
    where = f"relationship record {index}"
    if not isinstance(record, dict):
        raise IntegrityError(f"{where}: not an object")
    rel_id = _need(record, "id", where)
    if not isinstance(rel_id, str) or not rel_id:
        raise IntegrityError(f"{where}: bad id {rel_id!r}")
    where = f"relationship {rel_id}"
    src = _need(record, "src", where)
    dst = _need(record, "dst", where)
    if src not in nodes:
        raise IntegrityError(f"{where}: src node not found: {src}")
    if dst not in nodes:
        raise IntegrityError(f"{where}: dst node not found: {dst}")
    rel_type = _need(record, "type", where)
    if not isinstance(rel_type, str) or not rel_type:
        raise IntegrityError(f"{where}: bad relation name {rel_type!r}")
    try:
        validity = TemporalInterval(
            _decode_date(record.get("start"), where), _decode_date(record.get("end"), where)
        )
    except Exception as exc:
        raise IntegrityError(f"{where}: {exc}") from None
    raw_props = _need(record, "properties", where)
    properties = {}
    for key, raw in raw_props.items():
        try:
            properties[key] = check_property_value(key, _decode_value(raw, where))
        except Exception as exc:
            raise IntegrityError(f"{where}: {exc}") from None
    return Relationship(rel_id, src, dst, rel_type, validity, properties)


def _decode_scope(raw: Any, where: str) -> Scope:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise IntegrityError(f"{where}: bad scope {raw!r}")
    try:
        kind = ScopeKind(raw["kind"])
        return Scope(
            kind,
            label=raw.get("label"),
            key=raw.get("key"),
            node_id=raw.get("node_id"),
            rel_type=raw.get("rel_type"),
            values=frozenset(raw.get("values", ())),
        )
    except Exception as exc:
        raise IntegrityError(f"{where}: {exc}") from None


def _decode_role(record: Any, index: int) -> Role:
    where = f"role record {index}"
    if not isinstance(record, dict):
        raise IntegrityError(f"{where}: not an object")
    name = _need(record, "name", where)
    where = f"role {name}"
    rules = []
    for raw in _need(record, "rules", where):
        try:
            effect = Effect(_need(raw, "effect", where))
            privilege = Privilege(_need(raw, "privilege", where))
        except ValueError as exc:
            raise IntegrityError(f"{where}: {exc}") from None
        rules.append(AccessRule(effect, privilege, _decode_scope(_need(raw, "scope", where), where)))
    return Role(name, rules)


def _decode_entry(record: Any, index: int) -> InboxEntry:
    where = f"inbox record {index}"
    if not isinstance(record, dict):
        raise IntegrityError(f"{where}: not an object")
    entry_id = _need(record, "id", where)
    where = f"inbox entry {entry_id}"
    try:
        state = InboxState(_need(record, "state", where))
    except ValueError as exc:
        raise IntegrityError(f"{where}: {exc}") from None
    raw = _need(record, "candidate", where)
    try:
        candidate = CandidateTriple(
            head=_need(raw, "head", where),
            head_label=_need(raw, "head_label", where),
            rel=_need(raw, "rel", where),
            tail=_need(raw, "tail", where),
            tail_label=_need(raw, "tail_label", where),
            confidence=_need(raw, "confidence", where),
            source=_need(raw, "source", where),
            provenance=raw.get("prov", ""),
        )
    except Exception as exc:
        raise IntegrityError(f"{where}: {exc}") from None
    return InboxEntry(entry_id, candidate, state, record.get("decided_at"))


def _numeric_suffix(element_id: str) -> int:
    if element_id[:1] in ("n", "r", "e") and element_id[1:].isdigit():
        return int(element_id[1:])
    return 0


def load_snapshot(path: str | Path) -> Engine:
    """Read and validate a snapshot, reconstructing the full state."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FileParseError(f"snapshot is not UTF-8: {exc}") from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileParseError(f"snapshot is not valid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(document, dict) or document.get("format") != FORMAT_TAG:
        raise FileParseError(f"not a {FORMAT_TAG} file")
    version = document.get("version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"snapshot version {version!r}; this build reads {FORMAT_VERSION}")

    nodes: dict[str, Node] = {}
    for index, record in enumerate(document.get("nodes", [])):
        node = _decode_node(record, index)
        if node.id in nodes:
            raise IntegrityError(f"duplicate node id: {node.id}")
        nodes[node.id] = node
    relationships: dict[str, Relationship] = {}
    for index, record in enumerate(document.get("relationships", [])):
        rel = _decode_relationship(record, index, nodes)
        if rel.id in relationships or rel.id in nodes:
            raise IntegrityError(f"duplicate relationship id: {rel.id}")
        relationships[rel.id] = rel

    owner = document.get("owner")
    if owner not in nodes:
        raise IntegrityError(f"owner node not found: {owner!r}")
    if "Researcher" not in nodes[owner].labels:
        raise IntegrityError(f"owner {owner} must carry the Researcher label")

    stored_next = document.get("next_id")
    if not isinstance(stored_next, int) or stored_next < 1:
        raise IntegrityError(f"bad next_id: {stored_next!r}")
    highest = max(
        (_numeric_suffix(i) for i in (*nodes, *relationships)),
        default=0,
    )
    graph = Graph(owner, nodes, relationships, max(stored_next, highest + 1))

    roles = RoleTable(roles={})
    for index, record in enumerate(document.get("roles", [])):
        role = _decode_role(record, index)
        if role.name in roles.roles:
            raise IntegrityError(f"duplicate role name: {role.name}")
        roles.roles[role.name] = role
    if "admin" not in roles.roles:
        raise IntegrityError("role table is missing admin")

    inbox = Inbox()
    for index, record in enumerate(document.get("inbox", [])):
        entry = _decode_entry(record, index)
        if entry.id in inbox.entries:
            raise IntegrityError(f"duplicate inbox id: {entry.id}")
        inbox.entries[entry.id] = entry
    # Entries are never deleted, so the counter is recoverable exactly.
    inbox.next_id = 1 + max((_numeric_suffix(i) for i in inbox.entries), default=0)

    raw_thresholds = document.get("thresholds", {})
    try:
        thresholds = Thresholds(
            accept=raw_thresholds.get("accept", Thresholds().accept),
            reject=raw_thresholds.get("reject", Thresholds().reject),
        )
    except Exception as exc:
        raise IntegrityError(f"thresholds: {exc}") from None

    return Engine(graph=graph, roles=roles, inbox=inbox, thresholds=thresholds)


# -- RDF export ---------------------------------------------------------------


def _uri(base: str, *segments: str) -> str:
    joined = "/".join(quote(segment, safe="") for segment in segments)
    if base.endswith((":", "/")):
        return f"<{base}{joined}>"
    return f"<{base}/{joined}>"


def _literal(value: Any) -> str:
    if isinstance(value, bool):
        text = "true" if value else "false"
    elif isinstance(value, (int, float, PartialDate)):
        text = str(value)
    elif isinstance(value, list):
        text = json.dumps(value, ensure_ascii=False)
    else:
        text = str(value)
    escaped = (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def rdf_lines(graph: Graph, role: Role | None = None, base: str = DEFAULT_RDF_BASE) -> list[str]:
    """Reified triples for the graph (or one role's view of it), sorted."""
    if role is None:
        node_ids = set(graph.nodes)
        rel_ids = set(graph.relationships)
        props = {node_id: graph.nodes[node_id].properties for node_id in node_ids}
    else:
        view = view_as(graph, role)
        node_ids = view.nodes
        rel_ids = view.relationships
        props = {node_id: view.node_properties(graph.nodes[node_id]) for node_id in node_ids}

    lines = []
    for node_id in node_ids:
        node = graph.nodes[node_id]
        subject = _uri(base, "node", node_id)
        for label in node.labels:
            lines.append(f"{subject} {_uri(base, 'meta', 'label')} {_uri(base, 'label', label)} .")
        for key, value in props[node_id].items():
            lines.append(f"{subject} {_uri(base, 'prop', key)} {_literal(value)} .")
        for link in node.external_links:
            lines.append(f"{subject} {_uri(base, 'meta', 'sameAs')} <{link.uri}> .")
    for rel_id in rel_ids:
        rel = graph.relationships[rel_id]
        subject = _uri(base, "rel", rel_id)
        lines.append(f"{subject} {_uri(base, 'meta', 'subject')} {_uri(base, 'node', rel.src)} .")
        lines.append(
            f"{subject} {_uri(base, 'meta', 'predicate')} {_uri(base, 'reltype', rel.rel_type)} ."
        )
        lines.append(f"{subject} {_uri(base, 'meta', 'object')} {_uri(base, 'node', rel.dst)} .")
        if rel.validity.start is not None:
            lines.append(f"{subject} {_uri(base, 'meta', 'start')} {_literal(rel.validity.start)} .")
        if rel.validity.end is not None:
            lines.append(f"{subject} {_uri(base, 'meta', 'end')} {_literal(rel.validity.end)} .")
        for key in sorted(rel.properties):
            lines.append(f"{subject} {_uri(base, 'prop', key)} {_literal(rel.properties[key])} .")
    return sorted(lines)


def export_rdf(
    graph: Graph,
    path: str | Path,
    role: Role | None = None,
    base: str = DEFAULT_RDF_BASE,
) -> int:
    """Write sorted triples to ``path``; returns the triple count."""
    lines = rdf_lines(graph, role, base)
    data = ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
    _atomic_write(Path(path), data)
    return len(lines)
