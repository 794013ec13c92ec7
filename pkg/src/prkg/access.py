"""Role-based access control over graph elements.

Rules grant or deny one privilege at one scope. Resolution is
deny-precedence with a default of deny: an element is permitted only when
some rule grants it and no rule denies it. Read and traverse are separate
privileges, so sharing nodes does not automatically share the edges
between them.

The built-in admin role grants everything and is the owner's own view.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

from .errors import AccessDenied, Conflict, InvalidArgument, NotFound
from .graph import Graph, Node, Relationship

ADMIN_ROLE = "admin"


class Privilege(str, Enum):
    READ = "read"
    TRAVERSE = "traverse"
    WRITE = "write"
    APPEND = "append"
    CONTROL = "control"


class Effect(str, Enum):
    GRANT = "grant"
    DENY = "deny"


class ScopeKind(str, Enum):
    GRAPH = "graph"
    NODE_LABEL = "node-label"
    REL_TYPE = "rel-type"
    NODE = "node"
    NODE_PROPERTY = "prop"
    PROPERTY_PREDICATE = "prop-pred"


@dataclass(frozen=True, slots=True)
class Scope:
    """What part of the graph a rule covers."""

    kind: ScopeKind
    label: str | None = None
    key: str | None = None
    node_id: str | None = None
    rel_type: str | None = None
    values: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        needs = {
            ScopeKind.GRAPH: (),
            ScopeKind.NODE_LABEL: ("label",),
            ScopeKind.REL_TYPE: ("rel_type",),
            ScopeKind.NODE: ("node_id",),
            ScopeKind.NODE_PROPERTY: ("label", "key"),
            ScopeKind.PROPERTY_PREDICATE: ("label", "key", "values"),
        }[self.kind]
        for attr in ("label", "key", "node_id", "rel_type", "values"):
            value = getattr(self, attr)
            if attr in needs:
                if not value:
                    raise InvalidArgument(f"scope {self.kind.value} needs {attr}")
            elif value not in (None, frozenset()):
                raise InvalidArgument(f"scope {self.kind.value} does not take {attr}")

    # Constructors, so call sites read like the rule they build.

    @classmethod
    def graph(cls) -> "Scope":
        return cls(ScopeKind.GRAPH)

    @classmethod
    def node_label(cls, label: str) -> "Scope":
        return cls(ScopeKind.NODE_LABEL, label=label)

    @classmethod
    def relationship_type(cls, rel_type: str) -> "Scope":
        return cls(ScopeKind.REL_TYPE, rel_type=rel_type)

    @classmethod
    def node(cls, node_id: str) -> "Scope":
        return cls(ScopeKind.NODE, node_id=node_id)

    @classmethod
    def node_property(cls, label: str, key: str) -> "Scope":
        return cls(ScopeKind.NODE_PROPERTY, label=label, key=key)

    @classmethod
    def property_values(cls, label: str, key: str, values: "frozenset[str] | set[str]") -> "Scope":
        return cls(ScopeKind.PROPERTY_PREDICATE, label=label, key=key, values=frozenset(values))


@dataclass(frozen=True, slots=True)
class AccessRule:
    effect: Effect
    privilege: Privilege
    scope: Scope


def grant(privilege: Privilege, scope: Scope) -> AccessRule:
    return AccessRule(Effect.GRANT, privilege, scope)


def deny(privilege: Privilege, scope: Scope) -> AccessRule:
    return AccessRule(Effect.DENY, privilege, scope)


@dataclass(slots=True)
class Role:
    name: str
    rules: list[AccessRule] = field(default_factory=list)


def _admin_role() -> Role:
    return Role(ADMIN_ROLE, [grant(p, Scope.graph()) for p in Privilege])


@dataclass(slots=True)
class RoleTable:
    roles: dict[str, Role] = field(default_factory=lambda: {ADMIN_ROLE: _admin_role()})

    def get(self, name: str) -> Role:
        try:
            return self.roles[name]
        except KeyError:
            raise NotFound(f"role not found: {name}") from None

    def _gate(self, acting: Role | None) -> None:
        # Editing the role table itself requires control on the whole graph.
        if acting is None:
            return
        decision = None
        for rule in acting.rules:
            if rule.privilege is Privilege.CONTROL and rule.scope.kind is ScopeKind.GRAPH:
                if rule.effect is Effect.DENY:
                    decision = False
                    break
                decision = True
        if not decision:
            raise AccessDenied(f"denied: control ({acting.name})")

    def create_role(self, name: str, acting: Role | None = None) -> Role:
        self._gate(acting)
        if not name or name.split() != [name]:
            raise InvalidArgument(f"role name must be a non-empty token: {name!r}")
        if name in self.roles:
            raise Conflict(f"role already exists: {name}")
        role = Role(name)
        self.roles[name] = role
        return role

    def copy_role(self, new_name: str, source: str, acting: Role | None = None) -> Role:
        """Create ``new_name`` with a deep copy of ``source``'s rules."""
        self._gate(acting)
        base = self.get(source)
        role = self.create_role(new_name)
        role.rules = copy.deepcopy(base.rules)
        return role

    def add_rule(self, name: str, rule: AccessRule, acting: Role | None = None) -> Role:
        self._gate(acting)
        role = self.get(name)
        role.rules.append(rule)
        return role


# -- scope matching ----------------------------------------------------


def _scope_matches_node(scope: Scope, node: Node) -> bool:
    if scope.kind is ScopeKind.GRAPH:
        return True
    if scope.kind is ScopeKind.NODE_LABEL:
        return scope.label in node.labels
    if scope.kind is ScopeKind.NODE:
        return scope.node_id == node.id
    if scope.kind is ScopeKind.PROPERTY_PREDICATE:
        if scope.label not in node.labels:
            return False
        value = node.properties.get(scope.key)
        return isinstance(value, str) and value in scope.values
    return False


def _scope_matches_relationship(scope: Scope, rel: Relationship) -> bool:
    if scope.kind is ScopeKind.GRAPH:
        return True
    if scope.kind is ScopeKind.REL_TYPE:
        return scope.rel_type == rel.rel_type
    return False


def resolve(graph: Graph, role: Role, privilege: Privilege, element_id: str) -> bool:
    """Deny-precedence decision for one privilege on one element."""
    element = graph.element(element_id)
    if isinstance(element, Node):
        matches = lambda scope: _scope_matches_node(scope, element)
    else:
        matches = lambda scope: _scope_matches_relationship(scope, element)
    allowed = False
    for rule in role.rules:
        if rule.privilege is not privilege or not matches(rule.scope):
            continue
        if rule.effect is Effect.DENY:
            return False
        allowed = True
    return allowed


def _masked_keys(role: Role, node: Node) -> frozenset[str]:
    # Only a property-scope deny masks keys; every other deny hides the
    # whole node instead.
    masked = set()
    for rule in role.rules:
        if (
            rule.effect is Effect.DENY
            and rule.privilege is Privilege.READ
            and rule.scope.kind is ScopeKind.NODE_PROPERTY
            and rule.scope.label in node.labels
            and rule.scope.key in node.properties
        ):
            masked.add(rule.scope.key)
    return frozenset(masked)


@dataclass(slots=True)
class View:
    """What one role sees: visible ids plus per-node masked keys."""

    nodes: set[str]
    relationships: set[str]
    masked: dict[str, frozenset[str]] = field(default_factory=dict)

    def node_properties(self, node: Node) -> dict[str, object]:
        hidden = self.masked.get(node.id, frozenset())
        return {k: v for k, v in node.properties.items() if k not in hidden}


def view_as(graph: Graph, role: Role) -> View:
    """Project the graph through a role.

    A relationship stays visible only while both its endpoints are, so a
    view never contains a dangling edge. Invisible elements are absent
    outright rather than anonymized.
    """
    visible_nodes = {
        node_id for node_id in graph.nodes if resolve(graph, role, Privilege.READ, node_id)
    }
    masked: dict[str, frozenset[str]] = {}
    for node_id in visible_nodes:
        keys = _masked_keys(role, graph.nodes[node_id])
        if keys:
            masked[node_id] = keys
    visible_rels = {
        rel_id
        for rel_id, rel in graph.relationships.items()
        if rel.src in visible_nodes
        and rel.dst in visible_nodes
        and resolve(graph, role, Privilege.TRAVERSE, rel_id)
    }
    return View(visible_nodes, visible_rels, masked)


def check_write(
    graph: Graph,
    role: Role,
    kind: str,
    element_id: str | None = None,
    labels: set[str] | frozenset[str] | None = None,
    rel_type: str | None = None,
) -> bool:
    """May ``role`` create, modify, or delete the described target?

    Write covers all three mutation kinds; append covers creation only.
    A deny on either privilege wins over any grant.
    """
    if kind not in ("create", "modify", "delete"):
        raise InvalidArgument(f"mutation kind must be create, modify, or delete: {kind!r}")
    if element_id is not None:
        element = graph.element(element_id)
        if isinstance(element, Node):
            matches = lambda scope: _scope_matches_node(scope, element)
        else:
            matches = lambda scope: _scope_matches_relationship(scope, element)
    else:
        # A creation target does not exist yet; match rules against the
        # prospective labels or relation name instead.
        probe_labels = set(labels or ())

        def matches(scope: Scope) -> bool:
            if scope.kind is ScopeKind.GRAPH:
                return True
            if scope.kind is ScopeKind.NODE_LABEL:
                return scope.label in probe_labels
            if scope.kind is ScopeKind.REL_TYPE:
                return scope.rel_type == rel_type
            return False

    wanted = (Privilege.WRITE, Privilege.APPEND) if kind == "create" else (Privilege.WRITE,)
    allowed = False
    for rule in role.rules:
        if rule.privilege not in wanted or not matches(rule.scope):
            continue
        if rule.effect is Effect.DENY:
            return False
        allowed = True
    return allowed


def require_write(
    graph: Graph,
    role: Role | None,
    kind: str,
    element_id: str | None = None,
    labels: set[str] | frozenset[str] | None = None,
    rel_type: str | None = None,
) -> None:
    """Raise unless the acting role may perform the mutation."""
    if role is None:
        return
    if not check_write(graph, role, kind, element_id, labels, rel_type):
        raise AccessDenied("denied: write")
