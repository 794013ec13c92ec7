"""Confidence-gated ingestion of candidate facts.

Extraction pipelines produce candidate triples with a confidence score.
Candidates at or above the accept threshold merge straight into the graph,
ones at or below the reject threshold are dropped, and the band in between
lands in a review inbox where the owner decides later. Merging resolves
entities by case-insensitive name within the stated label, so re-ingesting
the same fact is a no-op rather than a duplicate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .errors import Conflict, FileParseError, InvalidArgument, NotFound
from .graph import Graph, Node

if TYPE_CHECKING:
    from .schema import Registry

CANDIDATE_SOURCES = ("paper", "conversation", "activity", "manual")

DEFAULT_ACCEPT = 0.9
DEFAULT_REJECT = 0.25


@dataclass(frozen=True, slots=True)
class Thresholds:
    accept: float = DEFAULT_ACCEPT
    reject: float = DEFAULT_REJECT

    def __post_init__(self) -> None:
        if not 0.0 <= self.reject < self.accept <= 1.0:
            raise InvalidArgument(
                f"thresholds must satisfy 0 <= reject < accept <= 1, "
                f"got reject={self.reject} accept={self.accept}"
            )


@dataclass(frozen=True, slots=True)
class CandidateTriple:
    """One extracted fact waiting to become a relationship."""

    head: str
    head_label: str
    rel: str
    tail: str
    tail_label: str
    confidence: float
    source: str
    provenance: str = ""

    def __post_init__(self) -> None:
        for attr in ("head", "head_label", "rel", "tail", "tail_label"):
            value = getattr(self, attr)
            if not isinstance(value, str) or not value.strip():
                raise InvalidArgument(f"candidate {attr} must be non-empty text")
        if isinstance(self.confidence, bool) or not isinstance(self.confidence, (int, float)):
            raise InvalidArgument("candidate confidence must be a number")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidArgument(f"candidate confidence out of [0, 1]: {self.confidence}")
        if self.source not in CANDIDATE_SOURCES:
            raise InvalidArgument(
                f"candidate source must be one of {', '.join(CANDIDATE_SOURCES)}: {self.source!r}"
            )


class InboxState(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(slots=True)
class InboxEntry:
    id: str
    candidate: CandidateTriple
    state: InboxState = InboxState.PENDING
    decided_at: str | None = None


@dataclass(slots=True)
class Inbox:
    """Mid-confidence candidates waiting for a decision."""

    entries: dict[str, InboxEntry] = field(default_factory=dict)
    next_id: int = 1

    def add(self, candidate: CandidateTriple) -> InboxEntry:
        entry = InboxEntry(f"e{self.next_id}", candidate)
        self.next_id += 1
        self.entries[entry.id] = entry
        return entry

    def get(self, entry_id: str) -> InboxEntry:
        try:
            return self.entries[entry_id]
        except KeyError:
            raise NotFound(f"inbox entry not found: {entry_id}") from None


@dataclass(slots=True)
class MergeReport:
    """What one accepted candidate did to the graph."""

    relationship_id: str | None = None
    created_nodes: list[str] = field(default_factory=list)
    duplicate: bool = False
    warnings: list[str] = field(default_factory=list)


@dataclass(slots=True)
class SubmitReport:
    merged: int = 0
    queued: int = 0
    dropped: int = 0

    @property
    def total(self) -> int:
        return self.merged + self.queued + self.dropped


def _resolve(graph: Graph, name: str, label: str) -> Node | None:
    hits = graph.nodes_named(name, label)
    return hits[0] if hits else None


def merge_candidate(
    graph: Graph, candidate: CandidateTriple, registry: "Registry | None" = None
) -> MergeReport:
    """Merge one candidate: resolve or create endpoints, then relate them.

    An exactly duplicated fact (same resolved endpoints, relation, and an
    open validity) is reported as a duplicate and changes nothing.
    """
    if registry is None:
        from .schema import builtin_registry

        registry = builtin_registry()
    report = MergeReport()
    head = _resolve(graph, candidate.head, candidate.head_label)
    if head is None:
        head_id = graph.add_node({candidate.head_label}, {"name": candidate.head})
        report.created_nodes.append(head_id)
        head = graph.nodes[head_id]
    tail = _resolve(graph, candidate.tail, candidate.tail_label)
    if tail is None:
        tail_id = graph.add_node({candidate.tail_label}, {"name": candidate.tail})
        report.created_nodes.append(tail_id)
        tail = graph.nodes[tail_id]
    report.warnings.extend(
        f"{candidate.head} -{candidate.rel}-> {candidate.tail}: {text}"
        for text in registry.check_triple(head.labels, candidate.rel, tail.labels)
    )
    try:
        report.relationship_id = graph.add_relationship(head.id, tail.id, candidate.rel)
    except Conflict:
        report.duplicate = True
    return report


def submit_candidates(
    graph: Graph,
    inbox: Inbox,
    thresholds: Thresholds,
    candidates: Iterable[CandidateTriple],
    registry: "Registry | None" = None,
) -> SubmitReport:
    """Route a batch by confidence. The whole batch is checked up front."""
    batch = list(candidates)
    for candidate in batch:
        if not isinstance(candidate, CandidateTriple):
            raise InvalidArgument(f"not a candidate triple: {candidate!r}")
    report = SubmitReport()
    for candidate in batch:
        if candidate.confidence >= thresholds.accept:
            merge_candidate(graph, candidate, registry)
            report.merged += 1
        elif candidate.confidence <= thresholds.reject:
            report.dropped += 1
        else:
            inbox.add(candidate)
            report.queued += 1
    return report


def inbox_list(inbox: Inbox, state: InboxState | None = None) -> list[InboxEntry]:
    entries = (inbox.entries[key] for key in sorted(inbox.entries, key=lambda e: (len(e), e)))
    return [entry for entry in entries if state is None or entry.state is state]


def inbox_accept(
    graph: Graph, inbox: Inbox, entry_id: str, registry: "Registry | None" = None
) -> MergeReport:
    """Merge a pending entry into the graph and mark it accepted."""
    entry = inbox.get(entry_id)
    if entry.state is not InboxState.PENDING:
        raise Conflict(f"inbox entry already {entry.state.value}: {entry_id}")
    report = merge_candidate(graph, entry.candidate, registry)
    entry.state = InboxState.ACCEPTED
    entry.decided_at = date.today().isoformat()
    return report


def inbox_reject(inbox: Inbox, entry_id: str) -> InboxEntry:
    """Mark a pending entry rejected; the graph is untouched."""
    entry = inbox.get(entry_id)
    if entry.state is not InboxState.PENDING:
        raise Conflict(f"inbox entry already {entry.state.value}: {entry_id}")
    entry.state = InboxState.REJECTED
    entry.decided_at = date.today().isoformat()
    return entry


# -- candidate files ---------------------------------------------------------

_TRIPLE_KEYS = {"head", "head_label", "rel", "tail", "tail_label", "confidence", "source"}


def read_candidates(path: str | Path) -> list[CandidateTriple]:
    """Read a file of one JSON candidate per line.

    Any bad line rejects the whole file, naming the line, so a partial
    batch is never ingested.
    """
    candidates = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FileParseError(f"bad candidate JSON: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict):
            raise FileParseError("candidate line must be an object", line=lineno)
        missing = _TRIPLE_KEYS - set(record)
        if missing:
            raise FileParseError(
                f"candidate missing key(s): {', '.join(sorted(missing))}", line=lineno
            )
        unknown = set(record) - _TRIPLE_KEYS - {"prov"}
        if unknown:
            raise FileParseError(
                f"candidate has unknown key(s): {', '.join(sorted(unknown))}", line=lineno
            )
        try:
            candidates.append(
                CandidateTriple(
                    head=record["head"],
                    head_label=record["head_label"],
                    rel=record["rel"],
                    tail=record["tail"],
                    tail_label=record["tail_label"],
                    confidence=record["confidence"],
                    source=record["source"],
                    provenance=record.get("prov", ""),
                )
            )
        except InvalidArgument as exc:
            raise FileParseError(str(exc), line=lineno) from None
    return candidates


def import_triples(
    graph: Graph,
    inbox: Inbox,
    thresholds: Thresholds,
    path: str | Path,
    registry: "Registry | None" = None,
) -> SubmitReport:
    """Read a candidate file and submit it as one batch."""
    return submit_candidates(graph, inbox, thresholds, read_candidates(path), registry)


# -- bibliographies ----------------------------------------------------------

_BIB_SUPPORTED = ("article", "inproceedings", "book")
_BIB_FIELDS = ("title", "author", "year")


@dataclass(slots=True)
class BibImportReport:
    papers: int = 0
    writes_edges: int = 0
    warnings: list[str] = field(default_factory=list)


def _bib_entries(text: str) -> Iterable[tuple[int, str, str, dict[str, str]]]:
    """Yield (line, entry type, key, fields) per entry.

    Support is deliberately small: brace or quote delimited values with
    balanced nesting, fields separated by commas. Anything fancier belongs
    to a real bibliography manager.
    """
    i = 0
    n = len(text)
    while i < n:
        at = text.find("@", i)
        if at < 0:
            return
        lineno = text.count("\n", 0, at) + 1
        j = at + 1
        while j < n and (text[j].isalnum() or text[j] == "_"):
            j += 1
        entry_type = text[at + 1 : j].lower()
        while j < n and text[j].isspace():
            j += 1
        if j >= n or text[j] != "{":
            raise FileParseError(f"expected '{{' after @{entry_type}", line=lineno)
        depth = 0
        body_start = j + 1
        k = j
        while k < n:
            if text[k] == "{":
                depth += 1
            elif text[k] == "}":
                depth -= 1
                if depth == 0:
                    break
            k += 1
        if depth != 0:
            raise FileParseError(f"unbalanced braces in @{entry_type}", line=lineno)
        body = text[body_start:k]
        i = k + 1
        if entry_type in ("string", "comment", "preamble"):
            yield lineno, entry_type, "", {}
            continue
        comma = body.find(",")
        key = body[:comma].strip() if comma >= 0 else body.strip()
        fields = _bib_fields(body[comma + 1 :], lineno) if comma >= 0 else {}
        yield lineno, entry_type, key, fields


def _bib_fields(body: str, lineno: int) -> dict[str, str]:
    fields: dict[str, str] = {}
    i = 0
    n = len(body)
    while i < n:
        while i < n and (body[i].isspace() or body[i] == ","):
            i += 1
        if i >= n:
            break
        j = i
        while j < n and (body[j].isalnum() or body[j] in "_-"):
            j += 1
        name = body[i:j].strip().lower()
        while j < n and body[j].isspace():
            j += 1
        if j >= n or body[j] != "=":
            raise FileParseError(f"expected '=' after field {name!r}", line=lineno)
        j += 1
        while j < n and body[j].isspace():
            j += 1
        if j < n and body[j] == "{":
            depth = 0
            k = j
            while k < n:
                if body[k] == "{":
                    depth += 1
                elif body[k] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                k += 1
            if depth != 0:
                raise FileParseError(f"unbalanced braces in field {name!r}", line=lineno)
            value = body[j + 1 : k]
            i = k + 1
        elif j < n and body[j] == '"':
            k = body.find('"', j + 1)
            if k < 0:
                raise FileParseError(f"unterminated quote in field {name!r}", line=lineno)
            value = body[j + 1 : k]
            i = k + 1
        else:
            k = j
            while k < n and body[k] != ",":
                k += 1
            value = body[j:k].strip()
            i = k
        fields[name] = " ".join(value.split())
    return fields


def import_bibtex(graph: Graph, path: str | Path, owner_name: str) -> BibImportReport:
    """Create Paper nodes from a bibliography, linking the owner's own work.

    Each supported entry becomes (or reuses) a Paper named by its citation
    key; a writes edge is added when an author matches ``owner_name``
    case-insensitively. Unsupported entry types and fields only warn.
    """
    report = BibImportReport()
    text = Path(path).read_text(encoding="utf-8")
    # Parse everything before touching the graph; a parse error must not
    # leave a half-imported bibliography behind.
    entries = list(_bib_entries(text))
    for lineno, entry_type, key, fields in entries:
        if entry_type in ("string", "comment", "preamble"):
            report.warnings.append(f"line {lineno}: @{entry_type} is not expanded, skipped")
            continue
        if entry_type not in _BIB_SUPPORTED:
            report.warnings.append(f"line {lineno}: unsupported entry type @{entry_type}, skipped")
            continue
        if not key:
            report.warnings.append(f"line {lineno}: @{entry_type} without a citation key, skipped")
            continue
        ignored = sorted(set(fields) - set(_BIB_FIELDS))
        if ignored:
            report.warnings.append(f"line {lineno}: {key}: ignoring field(s) {', '.join(ignored)}")
        paper = _resolve(graph, key, "Paper")
        if paper is None:
            properties: dict[str, object] = {"name": key}
            if "title" in fields:
                properties["title"] = fields["title"]
            if "year" in fields:
                year = fields["year"]
                properties["year"] = int(year) if year.isdigit() else year
            paper = graph.nodes[graph.add_node({"Paper"}, properties)]
            report.papers += 1
        authors = [a.strip() for a in _split_authors(fields.get("author", ""))]
        if any(a.casefold() == owner_name.casefold() for a in authors if a):
            try:
                graph.add_relationship(graph.owner, paper.id, "writes")
                report.writes_edges += 1
            except Conflict:
                pass
    return report


def _split_authors(author_field: str) -> list[str]:
    parts = []
    for chunk in author_field.replace("\n", " ").split(" and "):
        parts.append(chunk)
    return parts
