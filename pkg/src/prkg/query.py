"""Pattern query language over the graph.

The surface syntax is a single linear path with optional time and role
clauses::

    query        := "MATCH" path ("AT" pdate)? ("AS" ident)? "RETURN" items
    path         := node_pattern (edge_pattern node_pattern)*
    node_pattern := "(" ident? (":" ident)? props? ")"
    edge_pattern := "-[" ident? (":" ident)? props? "]->"
                  | "<-[" ident? (":" ident)? props? "]-"
    props        := "{" ident ":" literal ("," ident ":" literal)* "}"
    literal      := quoted-string | integer | "true" | "false"
    items        := ident ("." ident)? ("," ident ("." ident)?)*

Keywords are uppercase and case-sensitive; whitespace between tokens is
free. Matching is homomorphic (a path may revisit elements), property
comparison is equality on text, integer, and boolean, and every matched
relationship must be valid at the AT date when one is given. Results are
computed on the view of the role named by AS (admin when absent), rows are
ordered by the ids of the matched elements, and duplicate rows collapse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .access import ADMIN_ROLE, RoleTable, view_as
from .errors import InvalidArgument, PrkgError
from .graph import Graph, Node, Relationship
from .temporal import PartialDate, is_valid_at


class QueryError(PrkgError):
    """Base for query text problems."""


class QuerySyntaxError(QueryError):
    def __init__(self, line: int, column: int, found: str, expected: tuple[str, ...]):
        self.line = line
        self.column = column
        self.found = found
        self.expected = expected
        wanted = " or ".join(expected)
        super().__init__(f"{line}:{column}: expected {wanted}, found {found}")


class QuerySemanticError(QueryError):
    """The query parsed but refers to something it never bound."""


# -- tokens --------------------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_DATE_RE = re.compile(r"\d{4}-\d{2}(-\d{2})?")
_INT_RE = re.compile(r"\d+")

KEYWORDS = ("MATCH", "AT", "AS", "RETURN")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)

    def err(found: str, *expected: str) -> QuerySyntaxError:
        return QuerySyntaxError(line, col, found, expected)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        start_col = col
        if c == '"':
            j = i + 1
            out = []
            while j < n:
                ch = text[j]
                if ch == "\\":
                    if j + 1 >= n or text[j + 1] not in ('"', "\\"):
                        raise err(f"escape {text[j:j+2]!r}", '\\" or \\\\')
                    out.append(text[j + 1])
                    j += 2
                    continue
                if ch == '"':
                    break
                if ch == "\n":
                    raise err("end of line", "closing quote")
                out.append(ch)
                j += 1
            else:
                raise err("end of input", "closing quote")
            tokens.append(Token("string", "".join(out), line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            m = _DATE_RE.match(text, i)
            if m is not None:
                tokens.append(Token("date", m.group(0), line, start_col))
            else:
                m = _INT_RE.match(text, i)
                tokens.append(Token("int", m.group(0), line, start_col))
            col += len(m.group(0))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(text, i)
            tokens.append(Token("ident", m.group(0), line, start_col))
            col += len(m.group(0))
            i = m.end()
            continue
        if text.startswith("<-[", i):
            tokens.append(Token("<-[", "<-[", line, start_col))
            i += 3
            col += 3
            continue
        if text.startswith("]->", i):
            tokens.append(Token("]->", "]->", line, start_col))
            i += 3
            col += 3
            continue
        if text.startswith("]-", i):
            tokens.append(Token("]-", "]-", line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("-[", i):
            tokens.append(Token("-[", "-[", line, start_col))
            i += 2
            col += 2
            continue
        if c in "(){}:,.-":
            tokens.append(Token(c, c, line, start_col))
            i += 1
            col += 1
            continue
        raise err(repr(c), "a query token")
    tokens.append(Token("end", "end of input", line, col))
    return tokens


# -- syntax tree ----------------------------------------------------------

Literal = Any  # str | int | bool


@dataclass(frozen=True, slots=True)
class NodePattern:
    var: str | None = None
    label: str | None = None
    props: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True, slots=True)
class EdgePattern:
    direction: str  # "out" or "in", read left to right
    var: str | None = None
    rel_type: str | None = None
    props: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True, slots=True)
class ReturnItem:
    var: str
    key: str | None = None


@dataclass(frozen=True, slots=True)
class Query:
    nodes: tuple[NodePattern, ...]
    edges: tuple[EdgePattern, ...]
    at: PartialDate | None = None
    as_role: str | None = None
    items: tuple[ReturnItem, ...] = ()


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, *expected: str) -> QuerySyntaxError:
        tok = self.peek()
        found = tok.text if tok.kind == "end" else repr(tok.text)
        return QuerySyntaxError(tok.line, tok.column, found, expected)

    def expect(self, kind: str, label: str | None = None) -> Token:
        if self.peek().kind != kind:
            raise self.fail(label or f"'{kind}'")
        return self.take()

    def keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            raise self.fail(f"'{word}'")
        return self.take()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    def ident(self, label: str) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.fail(label)
        return self.take().text

    # grammar productions

    def query(self) -> Query:
        self.keyword("MATCH")
        nodes = [self.node_pattern()]
        edges: list[EdgePattern] = []
        while self.peek().kind in ("-[", "<-["):
            edges.append(self.edge_pattern())
            nodes.append(self.node_pattern())
        at = None
        if self.at_keyword("AT"):
            self.take()
            at = self.pdate()
        as_role = None
        if self.at_keyword("AS"):
            self.take()
            as_role = self.ident("a role name")
        self.keyword("RETURN")
        items = [self.return_item()]
        while self.peek().kind == ",":
            self.take()
            items.append(self.return_item())
        self.expect("end", "end of query")
        q = Query(tuple(nodes), tuple(edges), at, as_role, tuple(items))
        bound = {p.var for p in q.nodes if p.var} | {e.var for e in q.edges if e.var}
        for item in q.items:
            if item.var not in bound:
                raise QuerySemanticError(f"return refers to unbound variable: {item.var}")
        return q

    def pdate(self) -> PartialDate:
        tok = self.peek()
        if tok.kind not in ("date", "int") or (tok.kind == "int" and len(tok.text) != 4):
            raise self.fail("a date (YYYY, YYYY-MM, or YYYY-MM-DD)")
        self.take()
        try:
            return PartialDate.parse(tok.text)
        except InvalidArgument:
            raise QuerySyntaxError(
                tok.line, tok.column, repr(tok.text), ("a valid calendar date",)
            ) from None

    def node_pattern(self) -> NodePattern:
        self.expect("(", "'('")
        var = None
        label = None
        if self.peek().kind == "ident":
            var = self.take().text
        if self.peek().kind == ":":
            self.take()
            label = self.ident("a label")
        props = self.props()
        if self.peek().kind != ")":
            raise self.fail("')'")
        self.take()
        return NodePattern(var, label, props)

    def edge_pattern(self) -> EdgePattern:
        opener = self.take()
        direction = "out" if opener.kind == "-[" else "in"
        var = None
        rel_type = None
        if self.peek().kind == "ident":
            var = self.take().text
        if self.peek().kind == ":":
            self.take()
            rel_type = self.ident("a relation name")
        props = self.props()
        closer = "]->" if direction == "out" else "]-"
        if self.peek().kind != closer:
            raise self.fail(f"'{closer}'")
        self.take()
        return EdgePattern(direction, var, rel_type, props)

    def props(self) -> tuple[tuple[str, Literal], ...]:
        if self.peek().kind != "{":
            return ()
        self.take()
        pairs = [self.prop()]
        while self.peek().kind == ",":
            self.take()
            pairs.append(self.prop())
        self.expect("}", "'}'")
        return tuple(pairs)

    def prop(self) -> tuple[str, Literal]:
        key = self.ident("a property key")
        self.expect(":", "':'")
        return key, self.literal()

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "string":
            self.take()
            return tok.text
        if tok.kind == "int":
            self.take()
            return int(tok.text)
        if tok.kind == "-":
            self.take()
            return -int(self.expect("int", "an integer").text)
        if tok.kind == "ident" and tok.text in ("true", "false"):
            self.take()
            return tok.text == "true"
        raise self.fail("a quoted string, integer, true, or false")

    def return_item(self) -> ReturnItem:
        var = self.ident("a variable")
        key = None
        if self.peek().kind == ".":
            self.take()
            key = self.ident("a property key")
        return ReturnItem(var, key)


def parse(text: str) -> Query:
    """Parse query text, or raise a syntax error with line and column."""
    return _Parser(tokenize(text)).query()


# -- pretty printing -------------------------------------------------------


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _literal_text(value: Literal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return _quote(value)


def _props_text(props: tuple[tuple[str, Literal], ...]) -> str:
    if not props:
        return ""
    inner = ", ".join(f"{key}: {_literal_text(value)}" for key, value in props)
    return " {" + inner + "}"


def pretty(query: Query) -> str:
    """Canonical text for a query; parsing it yields an equal tree."""
    parts = ["MATCH "]
    for i, node in enumerate(query.nodes):
        head = node.var or ""
        if node.label:
            head += f":{node.label}"
        parts.append(f"({head}{_props_text(node.props)})")
        if i < len(query.edges):
            edge = query.edges[i]
            body = edge.var or ""
            if edge.rel_type:
                body += f":{edge.rel_type}"
            body += _props_text(edge.props)
            parts.append(f"-[{body}]->" if edge.direction == "out" else f"<-[{body}]-")
    if query.at is not None:
        parts.append(f" AT {query.at}")
    if query.as_role is not None:
        parts.append(f" AS {query.as_role}")
    parts.append(" RETURN ")
    parts.append(
        ", ".join(item.var if item.key is None else f"{item.var}.{item.key}" for item in query.items)
    )
    return "".join(parts)


# -- evaluation -------------------------------------------------------------


def _value_matches(pattern_value: Literal, actual: Any) -> bool:
    # bool is an int subtype in Python; keep the two apart.
    if isinstance(pattern_value, bool) or isinstance(actual, bool):
        return isinstance(pattern_value, bool) and isinstance(actual, bool) and pattern_value == actual
    if isinstance(pattern_value, int):
        return isinstance(actual, int) and pattern_value == actual
    return isinstance(actual, str) and pattern_value == actual


def _node_ok(pattern: NodePattern, node: Node, props: dict[str, Any]) -> bool:
    if pattern.label is not None and pattern.label not in node.labels:
        return False
    return all(key in props and _value_matches(value, props[key]) for key, value in pattern.props)


def _edge_ok(pattern: EdgePattern, rel: Relationship, at: PartialDate | None) -> bool:
    if pattern.rel_type is not None and pattern.rel_type != rel.rel_type:
        return False
    if at is not None and not is_valid_at(rel.validity, at):
        return False
    return all(
        key in rel.properties and _value_matches(value, rel.properties[key])
        for key, value in pattern.props
    )


def evaluate(
    graph: Graph,
    roles: RoleTable,
    query: Query,
    default_role: str = ADMIN_ROLE,
) -> list[tuple[Any, ...]]:
    """Run a parsed query; returns projected rows in canonical order."""
    role = roles.get(query.as_role or default_role)
    view = view_as(graph, role)
    visible_props = {
        node_id: view.node_properties(graph.nodes[node_id]) for node_id in view.nodes
    }
    rels = [graph.relationships[rel_id] for rel_id in sorted(view.relationships)]

    assignments: list[tuple[str, ...]] = []

    def bind(var: str | None, element_id: str, env: dict[str, str]) -> dict[str, str] | None:
        if var is None:
            return env
        if var in env:
            return env if env[var] == element_id else None
        out = dict(env)
        out[var] = element_id
        return out

    def walk(hop: int, current: str, path: tuple[str, ...], env: dict[str, str]) -> None:
        if hop == len(query.edges):
            assignments.append(path)
            return
        pattern = query.edges[hop]
        nxt_pattern = query.nodes[hop + 1]
        for rel in rels:
            if not _edge_ok(pattern, rel, query.at):
                continue
            if pattern.direction == "out":
                if rel.src != current:
                    continue
                nxt = rel.dst
            else:
                if rel.dst != current:
                    continue
                nxt = rel.src
            if nxt not in view.nodes:
                continue
            if not _node_ok(nxt_pattern, graph.nodes[nxt], visible_props[nxt]):
                continue
            env2 = bind(pattern.var, rel.id, env)
            if env2 is None:
                continue
            env3 = bind(nxt_pattern.var, nxt, env2)
            if env3 is None:
                continue
            walk(hop + 1, nxt, path + (rel.id, nxt), env3)

    first = query.nodes[0]
    for node_id in sorted(view.nodes):
        if not _node_ok(first, graph.nodes[node_id], visible_props[node_id]):
            continue
        env = bind(first.var, node_id, {})
        if env is not None:
            walk(0, node_id, (node_id,), env)

    assignments.sort()

    # Variable slots interleave node and edge patterns in source order,
    # mirroring the shape of each assignment tuple.
    slots: list[str | None] = []
    for i, node in enumerate(query.nodes):
        slots.append(node.var)
        if i < len(query.edges):
            slots.append(query.edges[i].var)

    def project(path: tuple[str, ...]) -> tuple[Any, ...]:
        by_var: dict[str, str] = {}
        for var, element_id in zip(slots, path):
            if var is not None:
                by_var[var] = element_id
        row = []
        for item in query.items:
            element_id = by_var[item.var]
            if item.key is None:
                row.append(element_id)
                continue
            if element_id in graph.nodes:
                value = visible_props[element_id].get(item.key)
            else:
                value = graph.relationships[element_id].properties.get(item.key)
            if isinstance(value, list):
                value = tuple(value)
            row.append(value)
        return tuple(row)

    rows: list[tuple[Any, ...]] = []
    seen: set[tuple[Any, ...]] = set()
    for path in assignments:
        row = project(path)
        if row not in seen:
            seen.add(row)
            rows.append(row)
    return rows


def run(
    graph: Graph,
    roles: RoleTable,
    text: str,
    default_role: str = ADMIN_ROLE,
) -> list[tuple[Any, ...]]:
    """Parse and evaluate in one step."""
    return evaluate(graph, roles, parse(text), default_role)
