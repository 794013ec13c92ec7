"""Query parsing, diagnostics, pretty-printing, and evaluation."""

import random

import pytest

from oracles import query_rows_oracle
from prkg.access import Role, RoleTable, Scope, deny, grant, Privilege
from prkg.errors import NotFound
from prkg.graph import create_graph
from prkg.query import (
    EdgePattern,
    NodePattern,
    Query,
    QuerySemanticError,
    QuerySyntaxError,
    ReturnItem,
    evaluate,
    parse,
    pretty,
    run,
    tokenize,
)
from prkg.temporal import PartialDate, interval
from randgen import random_graph, random_query, random_role


# -- parsing -----------------------------------------------------------------


def test_parse_basic_shape():
    q = parse('MATCH (s:Researcher {name: "Sunita"})-[:interest]->(t:Topic) RETURN t.name')
    assert q == Query(
        nodes=(
            NodePattern("s", "Researcher", (("name", "Sunita"),)),
            NodePattern("t", "Topic"),
        ),
        edges=(EdgePattern("out", None, "interest"),),
        items=(ReturnItem("t", "name"),),
    )


def test_parse_at_and_as_clauses():
    q = parse("MATCH (a)-[:worksFor]->(i) AT 2017 AS collaborator RETURN i")
    assert q.at == PartialDate(2017)
    assert q.as_role == "collaborator"
    q = parse("MATCH (a) AT 2017-06-15 RETURN a")
    assert q.at == PartialDate(2017, 6, 15)


def test_parse_incoming_edges_and_edge_vars():
    q = parse("MATCH (a)<-[r:writes {weight: 3}]-(b) RETURN r.weight")
    assert q.edges == (EdgePattern("in", "r", "writes", (("weight", 3),)),)


def test_parse_literals():
    q = parse('MATCH (a {t: "x", n: 7, m: -7, y: true, z: false}) RETURN a')
    assert q.nodes[0].props == (("t", "x"), ("n", 7), ("m", -7), ("y", True), ("z", False))


def test_string_escapes():
    q = parse('MATCH (a {name: "say \\"hi\\" \\\\ twice"}) RETURN a')
    assert q.nodes[0].props == (("name", 'say "hi" \\ twice'),)


def test_syntax_error_positions():
    with pytest.raises(QuerySyntaxError) as err:
        parse("MATCH (a RETURN a")
    assert err.value.line == 1 and err.value.column == 10
    assert "expected ')'" in str(err.value) and "'RETURN'" in str(err.value)

    with pytest.raises(QuerySyntaxError) as err:
        parse("MATCH (a)\n-[:x]->(b RETURN b")
    assert err.value.line == 2

    with pytest.raises(QuerySyntaxError) as err:
        parse("MATCH (a)")
    assert "'RETURN'" in str(err.value) and err.value.found == "end of input"


@pytest.mark.parametrize(
    "text,needle",
    [
        ("FETCH (a) RETURN a", "'MATCH'"),
        ("MATCH (a RETURN", "')'"),
        ("MATCH (a) RETURN", "a variable"),
        ("MATCH (a {k}) RETURN a", "':'"),
        ("MATCH (a {k: }) RETURN a", "a quoted string, integer, true, or false"),
        ("MATCH (a)-[:x]-(b) RETURN a", "']->'"),
        ("MATCH (a)<-[:x]->(b) RETURN a", "']-'"),
        ("MATCH (a)-[:x](b) RETURN a", "a query token"),
        ("MATCH (a) AT 20 RETURN a", "a date"),
        ("MATCH (a) AT 2018-13 RETURN a", "a valid calendar date"),
        ("MATCH (a) RETURN a extra", "end of query"),
        ('MATCH (a {k: "unterminated}) RETURN a', "closing quote"),
        ("MATCH (a) RETURN a; DROP", "a query token"),
    ],
)
def test_syntax_error_expectations(text, needle):
    with pytest.raises(QuerySyntaxError) as err:
        parse(text)
    assert needle in str(err.value)


def test_unbound_return_variable_is_semantic():
    with pytest.raises(QuerySemanticError, match="unbound variable: y"):
        parse("MATCH (a)-[:x]->(b) RETURN y")
    # Edge variables count as bound.
    parse("MATCH (a)-[e:x]->(b) RETURN e")


def test_tokenizer_distinguishes_dates_from_ints():
    kinds = [t.kind for t in tokenize("2018 2018-06 2018-06-15 42")]
    assert kinds == ["int", "date", "date", "int", "end"]


def test_pretty_round_trips_by_hand():
    texts = [
        'MATCH (s:Researcher {name: "Sunita"})-[:task]->(t:Task) RETURN t.name',
        "MATCH (a)<-[e:writes]-(b {year: -3}) AT 2017-06 RETURN a, e, b.name",
        'MATCH ({status: "under\\"Review\\""}) AS r1 RETURN x' .replace("({", "(x {"),
    ]
    for text in texts:
        q = parse(text)
        assert parse(pretty(q)) == q


def test_pretty_round_trips_random_queries():
    rng = random.Random(405)
    for _ in range(150):
        q = random_query(rng, role_names=("admin", "aux"))
        assert parse(pretty(q)) == q, pretty(q)


# -- evaluation ----------------------------------------------------------------


@pytest.fixture
def graph():
    g = create_graph("Sunita")  # n1
    g.add_node({"Topic"}, {"name": "NLP"})  # n2
    g.add_node({"Task"}, {"name": "TM", "year": 2018, "flag": True})  # n3
    g.add_node({"Method"}, {"name": "LDA"})  # n4
    g.add_node({"Method"}, {"name": "CTM"})  # n5
    g.add_relationship("n1", "n2", "interest")  # r6
    g.add_relationship("n1", "n3", "task")  # r7
    g.add_relationship("n3", "n4", "method")  # r8
    g.add_relationship("n3", "n5", "method")  # r9
    g.add_relationship("n1", "n2", "likes", interval("2014", "2018"))  # r10
    return g


@pytest.fixture
def roles():
    return RoleTable()


def test_two_hop_path(graph, roles):
    rows = run(graph, roles, 'MATCH (s {name: "Sunita"})-[:task]->(t)-[:method]->(m) RETURN m.name')
    assert rows == [("LDA",), ("CTM",)]  # ordered by matched element ids


def test_direction_matters(graph, roles):
    assert run(graph, roles, "MATCH (m)<-[:method]-(t) RETURN m.name") == [("LDA",), ("CTM",)]
    assert run(graph, roles, "MATCH (m)-[:method]->(t) RETURN m.name") == [("TM",), ("TM",)][:1]


def test_homomorphism_allows_revisits(graph, roles):
    graph.add_relationship("n4", "n3", "method")  # a cycle back
    rows = run(graph, roles, "MATCH (a)-[:method]->(b)-[:method]->(a) RETURN a.name, b.name")
    assert ("TM", "LDA") in rows and ("LDA", "TM") in rows


def test_variable_unification(graph, roles):
    # Same variable on both ends forces a self-loop; none exists.
    assert run(graph, roles, "MATCH (a)-[:interest]->(a) RETURN a") == []
    graph.add_relationship("n2", "n2", "interest")
    assert run(graph, roles, "MATCH (a)-[:interest]->(a) RETURN a") == [("n2",)]


def test_at_filters_every_edge(graph, roles):
    assert run(graph, roles, "MATCH (a)-[:likes]->(b) AT 2016 RETURN b.name") == [("NLP",)]
    assert run(graph, roles, "MATCH (a)-[:likes]->(b) AT 2019 RETURN b.name") == []
    # Unbounded validity is valid at every date.
    assert run(graph, roles, "MATCH (a)-[:interest]->(b) AT 1999 RETURN b.name") == [("NLP",)]


def test_property_match_is_type_exact(graph, roles):
    assert run(graph, roles, "MATCH (t {flag: true}) RETURN t") == [("n3",)]
    assert run(graph, roles, "MATCH (t {flag: 1}) RETURN t") == []
    assert run(graph, roles, "MATCH (t {year: 2018}) RETURN t") == [("n3",)]
    assert run(graph, roles, 'MATCH (t {year: "2018"}) RETURN t') == []


def test_unknown_return_key_is_null(graph, roles):
    assert run(graph, roles, 'MATCH (t {name: "LDA"}) RETURN t.venue') == [(None,)]


def test_bare_variable_returns_element_id(graph, roles):
    rows = run(graph, roles, 'MATCH (s)-[e:task]->(t) RETURN s, e, t')
    assert rows == [("n1", "r7", "n3")]


def test_list_properties_project_as_tuples(graph, roles):
    graph.set_properties("n4", {"tags": ["x", "y"]})
    assert run(graph, roles, 'MATCH (m {name: "LDA"}) RETURN m.tags') == [(("x", "y"),)]


def test_duplicate_rows_collapse(graph, roles):
    rows = run(graph, roles, "MATCH (t)-[:method]->(m) RETURN t.name")
    assert rows == [("TM",)]  # two paths, one projected row


def test_rows_are_deterministic(graph, roles):
    text = "MATCH (a)-[]->(b) RETURN b"
    first = run(graph, roles, text)
    assert first == run(graph, roles, text)
    assert first == sorted(first, key=lambda row: row[0])


def test_edge_without_type_matches_any(graph, roles):
    rows = run(graph, roles, 'MATCH (s {name: "Sunita"})-[]->(x) RETURN x')
    assert rows == [("n2",), ("n3",)]


def test_as_clause_switches_role(graph, roles):
    roles.roles["blind"] = Role("blind", [grant(Privilege.READ, Scope.graph())])
    # No traverse grant: edges vanish, nodes stay.
    assert run(graph, roles, "MATCH (a)-[:interest]->(b) AS blind RETURN b") == []
    assert run(graph, roles, 'MATCH (b {name: "NLP"}) AS blind RETURN b') == [("n2",)]
    with pytest.raises(NotFound):
        run(graph, roles, "MATCH (a) AS ghost RETURN a")


def test_default_role_argument(graph, roles):
    roles.roles["blind"] = Role("blind", [])
    assert run(graph, roles, "MATCH (a) RETURN a", default_role="blind") == []


def test_masked_properties_do_not_match_or_project(graph, roles):
    roles.roles["redacted"] = Role(
        "redacted",
        [
            grant(Privilege.READ, Scope.graph()),
            grant(Privilege.TRAVERSE, Scope.graph()),
            deny(Privilege.READ, Scope.node_property("Task", "year")),
        ],
    )
    assert run(graph, roles, "MATCH (t {year: 2018}) AS redacted RETURN t") == []
    assert run(graph, roles, 'MATCH (t {name: "TM"}) AS redacted RETURN t.year') == [(None,)]
    # The same pattern under admin still works.
    assert run(graph, roles, "MATCH (t {year: 2018}) RETURN t") == [("n3",)]


def test_hidden_endpoints_break_paths(graph, roles):
    roles.roles["partial"] = Role(
        "partial",
        [
            grant(Privilege.READ, Scope.graph()),
            grant(Privilege.TRAVERSE, Scope.graph()),
            deny(Privilege.READ, Scope.node_label("Task")),
        ],
    )
    assert run(graph, roles, "MATCH (s)-[:task]->(t) AS partial RETURN t") == []


def test_evaluation_matches_enumeration_oracle():
    rng = random.Random(406)
    roles = RoleTable()
    for case in range(160):
        graph = random_graph(rng, max_nodes=12, max_rels=14)
        roles.roles["aux"] = random_role(rng, graph, name="aux")
        query = random_query(rng, role_names=("admin", "aux"))
        got = evaluate(graph, roles, query)
        want = query_rows_oracle(graph, roles, query)
        assert got == want, pretty(query)
