"""Bundled example data: one NLP researcher's graph.

Used by the test suite and handy as a demo. The graph covers the usual
territory: two affiliations with dated validity, a research interest, a
task with its methods, a lab, papers in several states, committee work,
and a paper the researcher is reading, with the reading matter's own task
and method hanging off it.
"""

from __future__ import annotations

from .access import AccessRule, Privilege, Role, Scope, deny
from .engine import Engine, new_engine
from .temporal import interval

COLLABORATOR_ROLE = "collaborator"


def example_engine() -> tuple[Engine, dict[str, str]]:
    """Build the example engine; returns it plus ids keyed by short names."""
    engine = new_engine("Sunita")
    graph = engine.graph
    ids: dict[str, str] = {"sunita": graph.owner}

    def node(key: str, label: str, name: str, **props: object) -> None:
        ids[key] = graph.add_node({label}, {"name": name, **props})

    node("iacs", "Institution", "IACS")
    node("iiser", "Institution", "IISER Kolkata")
    node("nlp", "Topic", "NLP")
    node("topic_modeling", "Task", "TopicModeling")
    node("lda", "Method", "LDA")
    node("ctm", "Method", "CTM")
    node("nlp_lab", "Lab", "NLPLab")
    node("spert_pl", "Paper", "SpERT.PL", status="underReview")
    node("science_kg", "Paper", "ScienceKG")
    node("phd_sel", "Committee", "PhDSel")
    node("cclinc", "Paper", "CCLINC")
    node("translation", "Task", "translation")
    node("wsd", "Method", "WordSenseDisambiguation")

    def rel(key: str, src: str, dst: str, rel_type: str, start: str | None = None, end: str | None = None) -> None:
        validity = interval(start, end) if start or end else None
        ids[key] = graph.add_relationship(ids[src], ids[dst], rel_type, validity)

    rel("works_iiser", "sunita", "iiser", "worksFor", "2014", "2018")
    rel("works_iacs", "sunita", "iacs", "worksFor", "2018")
    rel("interest", "sunita", "nlp", "interest")
    rel("task_tm", "sunita", "topic_modeling", "task")
    rel("method_lda", "topic_modeling", "lda", "method")
    rel("method_ctm", "topic_modeling", "ctm", "method")
    rel("manages", "sunita", "nlp_lab", "manages")
    rel("writes", "sunita", "spert_pl", "writes")
    rel("reviewer_of", "sunita", "science_kg", "reviewerOf")
    rel("member_of", "sunita", "phd_sel", "memberOf")
    rel("reads", "sunita", "cclinc", "reads")
    rel("task_translation", "cclinc", "translation", "task")
    rel("method_wsd", "translation", "wsd", "method")

    return engine, ids


def collaborator_rules() -> list[AccessRule]:
    """The example sharing policy: read everything except committee work
    and unpublished papers, traverse everything except reviewing, and
    change nothing."""
    return [
        deny(Privilege.READ, Scope.node_label("Committee")),
        deny(Privilege.TRAVERSE, Scope.relationship_type("reviewerOf")),
        deny(Privilege.WRITE, Scope.graph()),
        deny(Privilege.READ, Scope.property_values("Paper", "status", {"underReview", "inProgress"})),
    ]


def add_collaborator(engine: Engine) -> Role:
    """Create the collaborator role as a restricted copy of admin."""
    role = engine.roles.copy_role(COLLABORATOR_ROLE, "admin")
    for rule in collaborator_rules():
        engine.roles.add_rule(COLLABORATOR_ROLE, rule)
    return role
