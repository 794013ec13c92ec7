"""Advisory vocabulary checks and external links."""

import pytest

from prkg.errors import Conflict, InvalidArgument, NotFound
from prkg.graph import create_graph
from prkg.schema import (
    BUILTIN_LABELS,
    BUILTIN_RELATIONS,
    RelationSpec,
    builtin_registry,
    check_triple,
    is_absolute_uri,
    register_relation,
    set_external_link,
)
from prkg.temporal import UNBOUNDED, interval


def test_builtin_vocabulary_shape():
    registry = builtin_registry()
    assert "Researcher" in BUILTIN_LABELS
    assert {"worksFor", "writes", "method", "memberOf"} <= set(registry.relations)
    assert registry.relations["worksFor"].temporal
    assert not registry.relations["writes"].temporal
    assert len(BUILTIN_RELATIONS) == len({s.name for s in BUILTIN_RELATIONS})


def test_conforming_triple_is_silent():
    registry = builtin_registry()
    assert registry.check_triple({"Researcher"}, "worksFor", {"Institution"}) == []
    # One matching label among several is enough.
    assert registry.check_triple({"Researcher", "Paper"}, "task", {"Task"}) == []


def test_endpoint_violations_warn():
    registry = builtin_registry()
    warnings = registry.check_triple({"Paper"}, "worksFor", {"Method"})
    assert len(warnings) == 2
    assert "source" in warnings[0] and "worksFor" in warnings[0]
    assert "target" in warnings[1]


def test_unknown_names_pass_silently():
    registry = builtin_registry()
    assert registry.check_triple({"Gadget"}, "frobnicates", {"Widget"}) == []
    assert registry.check_triple({"Researcher"}, "collaboratesWith", {"Researcher"}) == []


def test_uses_prefixed_alias_is_flagged():
    registry = builtin_registry()
    warnings = registry.check_triple({"Task"}, "usesTool", {"Tool"})
    assert warnings == ["non-canonical relation name 'usesTool'; the vocabulary uses 'tool'"]
    # No known bare form, no warning.
    assert registry.check_triple({"Task"}, "usesWidget", {"Tool"}) == []


def test_temporal_relations_nudge_for_dates():
    registry = builtin_registry()
    undated = registry.check_relationship({"Researcher"}, "worksFor", {"Institution"}, UNBOUNDED)
    assert any("validity interval" in w for w in undated)
    dated = registry.check_relationship(
        {"Researcher"}, "worksFor", {"Institution"}, interval("2018", None)
    )
    assert dated == []
    # Non-temporal relations never nudge.
    assert registry.check_relationship({"Researcher"}, "writes", {"Paper"}, UNBOUNDED) == []


def test_register_custom_relation():
    registry = builtin_registry()
    spec = RelationSpec("mentors", frozenset({"Researcher"}), frozenset({"Researcher"}))
    register_relation(registry, spec)
    assert registry.check_triple({"Researcher"}, "mentors", {"Researcher"}) == []
    assert registry.check_triple({"Paper"}, "mentors", {"Researcher"}) != []


def test_builtin_names_stay_reserved():
    registry = builtin_registry()
    with pytest.raises(Conflict):
        register_relation(
            registry, RelationSpec("worksFor", frozenset({"Paper"}), frozenset({"Paper"}))
        )
    with pytest.raises(InvalidArgument):
        register_relation(registry, RelationSpec("two words", frozenset(), frozenset()))


def test_function_form_delegates():
    registry = builtin_registry()
    assert check_triple(registry, {"Paper"}, "worksFor", {"Method"}) == registry.check_triple(
        {"Paper"}, "worksFor", {"Method"}
    )


@pytest.mark.parametrize(
    "uri,ok",
    [
        ("https://www.wikidata.org/entity/Q937", True),
        ("urn:prkg:node", True),
        ("http://a/b c", False),
        ("no scheme here", False),
        ("/relative/path", False),
        ("", False),
    ],
)
def test_absolute_uri_check(uri, ok):
    assert is_absolute_uri(uri) is ok


def test_external_links():
    graph = create_graph("Sunita")
    set_external_link(graph, graph.owner, "wikidata", "https://www.wikidata.org/entity/Q1")
    set_external_link(graph, graph.owner, "orkg", "https://orkg.org/resource/R1")
    links = graph.owner_node.external_links
    assert [link.source for link in links] == ["wikidata", "orkg"]
    with pytest.raises(Conflict):
        set_external_link(graph, graph.owner, "wikidata", "https://www.wikidata.org/entity/Q1")
    # Same target under a different source is a different link.
    set_external_link(graph, graph.owner, "other", "https://www.wikidata.org/entity/Q1")


def test_external_link_validation():
    graph = create_graph("Sunita")
    with pytest.raises(InvalidArgument):
        set_external_link(graph, graph.owner, "homepage", "https://example.org")
    with pytest.raises(InvalidArgument):
        set_external_link(graph, graph.owner, "wikidata", "not a uri")
    with pytest.raises(NotFound):
        set_external_link(graph, "n99", "wikidata", "https://example.org")
