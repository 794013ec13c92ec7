"""Seeded generators for property-test instances.

Pools are deliberately small so generated graphs, rules, and patterns
collide often: shared names make entity resolution and homomorphic
matches common instead of vanishingly rare.
"""

from __future__ import annotations

import calendar
import random

from prkg.access import AccessRule, Effect, Privilege, Role, Scope
from prkg.engine import Engine
from prkg.graph import Graph
from prkg.ingest import CANDIDATE_SOURCES, CandidateTriple, Thresholds
from prkg.query import EdgePattern, NodePattern, Query, ReturnItem
from prkg.schema import set_external_link
from prkg.temporal import PartialDate, TemporalInterval

LABELS = ("Researcher", "Paper", "Task", "Method", "Topic", "Institution", "Committee", "Lab")
REL_TYPES = ("worksFor", "writes", "task", "method", "interest", "reads", "memberOf", "knows")
NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "Müller")
STATUSES = ("underReview", "inProgress", "published", "accepted")
PROP_KEYS = ("name", "status", "year", "flag", "score")


def random_pdate(rng: random.Random) -> PartialDate:
    if rng.random() < 0.1:
        year = rng.choice((1, 1999, 2000, 2100, 9999))
    else:
        year = rng.randint(2012, 2022)
    granularity = rng.random()
    if granularity < 0.34:
        return PartialDate(year)
    month = rng.randint(1, 12)
    if granularity < 0.67:
        return PartialDate(year, month)
    day = rng.randint(1, calendar.monthrange(year, month)[1])
    return PartialDate(year, month, day)


def random_interval(rng: random.Random) -> TemporalInterval:
    start = random_pdate(rng) if rng.random() < 0.8 else None
    end = random_pdate(rng) if rng.random() < 0.8 else None
    if start is not None and end is not None and start.first_day() > end.last_day():
        start, end = end, start
    return TemporalInterval(start, end)


def random_graph(rng: random.Random, max_nodes: int = 20, max_rels: int | None = None) -> Graph:
    from prkg.graph import create_graph

    graph = create_graph(rng.choice(NAMES))
    for _ in range(rng.randint(0, max_nodes - 1)):
        labels = {rng.choice(LABELS)}
        if rng.random() < 0.2:
            labels.add(rng.choice(LABELS))
        props: dict[str, object] = {}
        if rng.random() < 0.9:
            props["name"] = rng.choice(NAMES)
        if rng.random() < 0.35:
            props["status"] = rng.choice(STATUSES)
        if rng.random() < 0.3:
            props["year"] = rng.randint(2015, 2020)
        if rng.random() < 0.2:
            props["flag"] = rng.random() < 0.5
        if rng.random() < 0.15:
            props["score"] = round(rng.uniform(0, 1), 3)
        if rng.random() < 0.1:
            props["tags"] = [rng.choice(NAMES) for _ in range(rng.randint(1, 3))]
        if rng.random() < 0.1:
            props["since"] = random_pdate(rng)
        graph.add_node(labels, props)
    node_ids = list(graph.nodes)
    rel_budget = max_rels if max_rels is not None else 2 * len(node_ids)
    for _ in range(rng.randint(0, rel_budget)):
        src = rng.choice(node_ids)
        dst = rng.choice(node_ids)
        validity = random_interval(rng) if rng.random() < 0.5 else None
        props = {}
        if rng.random() < 0.15:
            props["weight"] = rng.randint(1, 5)
        if rng.random() < 0.1:
            props["note"] = rng.choice(NAMES)
        try:
            graph.add_relationship(src, dst, rng.choice(REL_TYPES), validity, props)
        except Exception:
            # Exact duplicates are rejected; just skip them.
            pass
    return graph


def random_scope(rng: random.Random, graph: Graph) -> Scope:
    roll = rng.random()
    if roll < 0.25:
        return Scope.graph()
    if roll < 0.45:
        return Scope.node_label(rng.choice(LABELS))
    if roll < 0.6:
        return Scope.relationship_type(rng.choice(REL_TYPES))
    if roll < 0.75:
        return Scope.node(rng.choice(list(graph.nodes)))
    if roll < 0.88:
        return Scope.node_property(rng.choice(LABELS), rng.choice(PROP_KEYS))
    values = set(rng.sample(STATUSES, rng.randint(1, 2)))
    return Scope.property_values(rng.choice(LABELS), "status", values)


def random_rules(rng: random.Random, graph: Graph, max_rules: int = 10) -> list[AccessRule]:
    rules = []
    # A broad read/traverse base most of the time, otherwise views are
    # almost always empty and the denies have nothing to bite on.
    if rng.random() < 0.85:
        rules.append(AccessRule(Effect.GRANT, Privilege.READ, Scope.graph()))
    if rng.random() < 0.85:
        rules.append(AccessRule(Effect.GRANT, Privilege.TRAVERSE, Scope.graph()))
    while len(rules) < rng.randint(len(rules), max_rules):
        effect = Effect.DENY if rng.random() < 0.45 else Effect.GRANT
        privilege = rng.choice(list(Privilege))
        rules.append(AccessRule(effect, privilege, random_scope(rng, graph)))
    return rules


def random_role(rng: random.Random, graph: Graph, name: str = "probe") -> Role:
    return Role(name, random_rules(rng, graph))


def random_query(rng: random.Random, role_names: tuple[str, ...] = ()) -> Query:
    hops = rng.choice((0, 1, 1, 2, 2, 3))
    variables = ("a", "b", "c", "x")

    def node_pattern() -> NodePattern:
        var = rng.choice(variables) if rng.random() < 0.75 else None
        label = rng.choice(LABELS) if rng.random() < 0.5 else None
        props = ()
        if rng.random() < 0.35:
            key, value = random_prop_literal(rng)
            props = ((key, value),)
        return NodePattern(var, label, props)

    def edge_pattern() -> EdgePattern:
        direction = "out" if rng.random() < 0.7 else "in"
        var = rng.choice(variables) if rng.random() < 0.3 else None
        rel_type = rng.choice(REL_TYPES) if rng.random() < 0.6 else None
        props = ()
        if rng.random() < 0.1:
            props = (("weight", rng.randint(1, 5)),)
        return EdgePattern(direction, var, rel_type, props)

    nodes = tuple(node_pattern() for _ in range(hops + 1))
    edges = tuple(edge_pattern() for _ in range(hops))
    bound = [p.var for p in nodes if p.var] + [e.var for e in edges if e.var]
    if not bound:
        nodes = (NodePattern("a", nodes[0].label, nodes[0].props),) + nodes[1:]
        bound = ["a"]
    at = random_pdate(rng) if rng.random() < 0.3 else None
    as_role = rng.choice(role_names) if role_names and rng.random() < 0.4 else None
    items = []
    for _ in range(rng.randint(1, 3)):
        var = rng.choice(bound)
        key = rng.choice(PROP_KEYS) if rng.random() < 0.7 else None
        items.append(ReturnItem(var, key))
    return Query(nodes, edges, at, as_role, tuple(items))


def random_prop_literal(rng: random.Random) -> tuple[str, object]:
    roll = rng.random()
    if roll < 0.4:
        return "name", rng.choice(NAMES)
    if roll < 0.65:
        return "status", rng.choice(STATUSES)
    if roll < 0.85:
        return "year", rng.randint(2015, 2020)
    return "flag", rng.random() < 0.5


def random_candidate(rng: random.Random, graph: Graph, anchored: bool = False) -> CandidateTriple:
    named = [n for n in graph.nodes.values() if n.name]
    if anchored and named:
        head_node = rng.choice(named)
        head = head_node.name
        head_label = rng.choice(sorted(head_node.labels))
    else:
        head = rng.choice(NAMES)
        head_label = rng.choice(LABELS)
    return CandidateTriple(
        head=head,
        head_label=head_label,
        rel=rng.choice(REL_TYPES),
        tail=rng.choice(NAMES) + (str(rng.randint(1, 9)) if rng.random() < 0.5 else ""),
        tail_label=rng.choice(LABELS),
        confidence=round(rng.random(), 3),
        source=rng.choice(CANDIDATE_SOURCES),
        provenance=rng.choice(("", "doc-3", "chat-7")),
    )


def random_thresholds(rng: random.Random) -> Thresholds:
    reject = round(rng.uniform(0.0, 0.4), 2)
    accept = round(rng.uniform(reject + 0.1, 1.0), 2)
    return Thresholds(accept=accept, reject=reject)


def random_engine(rng: random.Random, max_nodes: int = 15) -> Engine:
    """A full random state: graph, extra roles, inbox history, thresholds."""
    engine = Engine(graph=random_graph(rng, max_nodes))
    graph = engine.graph
    for node_id in list(graph.nodes):
        if rng.random() < 0.1:
            try:
                set_external_link(
                    graph, node_id, "wikidata", f"https://www.wikidata.org/entity/Q{rng.randint(1, 999)}"
                )
            except Exception:
                pass
    for i in range(rng.randint(0, 2)):
        role = engine.roles.create_role(f"role{i}")
        role.rules.extend(random_rules(rng, graph, max_rules=6))
    for _ in range(rng.randint(0, 5)):
        entry = engine.inbox.add(random_candidate(rng, graph))
        roll = rng.random()
        if roll < 0.3:
            entry.state = entry.state.ACCEPTED
            entry.decided_at = str(random_pdate(rng).first_day())
        elif roll < 0.5:
            entry.state = entry.state.REJECTED
            entry.decided_at = str(random_pdate(rng).first_day())
    engine.thresholds = random_thresholds(rng)
    return engine
