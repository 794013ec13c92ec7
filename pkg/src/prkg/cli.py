"""Command-line front door for the engine.

One snapshot file holds one researcher's graph. Every command loads it,
does its work, and mutating commands write it back atomically under an
advisory lock. Exit codes: 0 success, 1 usage error, 2 domain refusal
(conflict, not found, denied), 3 file or parse trouble.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from filelock import FileLock, Timeout

from . import query as querylang
from .access import Privilege, Role, Scope
from .engine import Engine, new_engine
from .errors import (
    AccessDenied,
    Conflict,
    FileParseError,
    Forbidden,
    IntegrityError,
    InvalidArgument,
    NotFound,
    PrkgError,
    UnsupportedVersion,
)
from .ingest import InboxState, Thresholds
from .query import QueryError
from .schema import Registry, RelationSpec, builtin_registry, register_relation
from .store import DEFAULT_RDF_BASE, export_rdf, load_snapshot, save_snapshot
from .temporal import PartialDate, interval

DEFAULT_DATA_PATH = "prkg.snapshot.json"
DEFAULT_CONFIG_PATH = "prkg.config.json"

_PROP_DATE_RE = r"^\d{4}-\d{2}(-\d{2})?$"


class _UsageError(PrkgError):
    """Bad command line; exits 1."""


@dataclass(slots=True)
class Config:
    data_path: str = DEFAULT_DATA_PATH
    default_role: str = "admin"
    thresholds: Thresholds = field(default_factory=Thresholds)
    rdf_base: str = DEFAULT_RDF_BASE
    extra_relations: list[RelationSpec] = field(default_factory=list)

    def registry(self) -> Registry:
        registry = builtin_registry()
        for spec in self.extra_relations:
            register_relation(registry, spec)
        return registry


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> Config:
    """Read the config file, apply defaults and environment overrides.

    A missing file at the default location simply means defaults; a path
    given explicitly (argument or PRKG_CONFIG) must exist.
    """
    env = env or {}
    explicit = path is not None or "PRKG_CONFIG" in env
    path = Path(path or env.get("PRKG_CONFIG") or DEFAULT_CONFIG_PATH)
    config = Config()
    if path.exists():
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FileParseError(f"config {path}: {exc.msg}", line=exc.lineno) from None
        if not isinstance(raw, dict):
            raise FileParseError(f"config {path}: expected an object")
        known = {"data_path", "default_role", "thresholds", "rdf_base", "extra_relations"}
        unknown = set(raw) - known
        if unknown:
            raise FileParseError(f"config {path}: unknown key(s) {', '.join(sorted(unknown))}")
        try:
            if "data_path" in raw:
                config.data_path = str(raw["data_path"])
            if "default_role" in raw:
                config.default_role = str(raw["default_role"])
            if "thresholds" in raw:
                config.thresholds = Thresholds(
                    accept=raw["thresholds"].get("accept", Thresholds().accept),
                    reject=raw["thresholds"].get("reject", Thresholds().reject),
                )
            if "rdf_base" in raw:
                config.rdf_base = str(raw["rdf_base"])
            for spec in raw.get("extra_relations", []):
                config.extra_relations.append(
                    RelationSpec(
                        name=spec["name"],
                        src_labels=frozenset(spec.get("src_labels", ())),
                        dst_labels=frozenset(spec.get("dst_labels", ())),
                        temporal=bool(spec.get("temporal", False)),
                    )
                )
        except (InvalidArgument, KeyError, AttributeError, TypeError) as exc:
            raise FileParseError(f"config {path}: {exc}") from None
    elif explicit:
        raise FileParseError(f"config file not found: {path}")
    if not config.data_path:
        raise FileParseError(f"config {path}: data_path must be non-empty")
    if "PRKG_DATA" in env:
        config.data_path = env["PRKG_DATA"]
    if "PRKG_ROLE" in env:
        config.default_role = env["PRKG_ROLE"]
    return config


# -- argument plumbing ---------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _global_flags(parser: argparse.ArgumentParser, top: bool) -> None:
    # Declared on the root parser and again on each subcommand (with
    # SUPPRESS defaults) so they may appear on either side of the verb.
    default = None if top else argparse.SUPPRESS
    parser.add_argument("--as", dest="role", default=default, metavar="ROLE")
    parser.add_argument("--data", dest="data", default=default, metavar="PATH")
    parser.add_argument(
        "--format", dest="format", choices=("human", "lines"), default=default
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="prkg", description="Personal research knowledge graph.")
    _global_flags(parser, top=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(parent: Any, name: str, handler: Callable[..., int], help_text: str) -> argparse.ArgumentParser:
        p = parent.add_parser(name, help=help_text)
        _global_flags(p, top=False)
        p.set_defaults(handler=handler)
        return p

    p = add(sub, "init", _cmd_init, "create a new graph file")
    p.add_argument("--owner", required=True, metavar="NAME")

    node = add(sub, "node", _cmd_usage, "node commands").add_subparsers(metavar="VERB")
    p = add(node, "add", _cmd_node_add, "create a node")
    p.add_argument("--label", action="append", required=True, metavar="L")
    p.add_argument("--prop", action="append", default=[], metavar="K=V")
    p = add(node, "delete", _cmd_node_delete, "delete a node")
    p.add_argument("id")
    p.add_argument("--cascade", action="store_true")

    rel = add(sub, "rel", _cmd_usage, "relationship commands").add_subparsers(metavar="VERB")
    p = add(rel, "add", _cmd_rel_add, "create a relationship")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("type")
    p.add_argument("--start", metavar="DATE")
    p.add_argument("--end", metavar="DATE")
    p.add_argument("--prop", action="append", default=[], metavar="K=V")
    p = add(rel, "end", _cmd_rel_end, "close an open relationship")
    p.add_argument("id")
    p.add_argument("date")

    link = add(sub, "link", _cmd_usage, "external link commands").add_subparsers(metavar="VERB")
    p = add(link, "add", _cmd_link_add, "attach an external link")
    p.add_argument("node")
    p.add_argument("source")
    p.add_argument("uri")

    imp = add(sub, "import", _cmd_usage, "bulk imports").add_subparsers(metavar="WHAT")
    p = add(imp, "triples", _cmd_import_triples, "import a candidate triple file")
    p.add_argument("file")
    p = add(imp, "bibtex", _cmd_import_bibtex, "import a bibliography")
    p.add_argument("file")

    inbox = add(sub, "inbox", _cmd_usage, "review queued candidates").add_subparsers(metavar="VERB")
    p = add(inbox, "list", _cmd_inbox_list, "list inbox entries")
    p.add_argument("--state", choices=tuple(s.value for s in InboxState))
    p = add(inbox, "accept", _cmd_inbox_accept, "merge a pending entry")
    p.add_argument("id")
    p = add(inbox, "reject", _cmd_inbox_reject, "discard a pending entry")
    p.add_argument("id")

    role = add(sub, "role", _cmd_usage, "role management").add_subparsers(metavar="VERB")
    p = add(role, "create", _cmd_role_create, "create an empty role")
    p.add_argument("name")
    p = add(role, "copy", _cmd_role_copy, "copy a role's rules into a new role")
    p.add_argument("new")
    p.add_argument("source")

    for effect in ("grant", "deny"):
        p = add(sub, effect, _cmd_rule, f"{effect} a privilege at a scope")
        p.set_defaults(effect=effect)
        p.add_argument("role_name", metavar="ROLE")
        p.add_argument("privilege", choices=tuple(pr.value for pr in Privilege))
        p.add_argument("scope", nargs="+", metavar="SCOPE")

    p = add(sub, "query", _cmd_query, "run a pattern query")
    p.add_argument("text", metavar="QUERY")

    add(sub, "validate", _cmd_validate, "report orphans and vocabulary warnings")

    export = add(sub, "export", _cmd_usage, "exports").add_subparsers(metavar="WHAT")
    p = add(export, "rdf", _cmd_export_rdf, "export reified triples")
    p.add_argument("file")

    add(sub, "save", _cmd_save, "rewrite the snapshot in canonical form")
    return parser


# -- value parsing ---------------------------------------------------------


def _parse_prop(text: str) -> tuple[str, Any]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise _UsageError(f"--prop wants K=V, got {text!r}")
    return key, _coerce(raw)


def _coerce(raw: str) -> Any:
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        if any(c in raw for c in ".eE") and not raw.strip().isalpha():
            return float(raw)
    except ValueError:
        pass
    if re.match(_PROP_DATE_RE, raw):
        return PartialDate.parse(raw)
    return raw


def _props_arg(pairs: list[str]) -> dict[str, Any]:
    return dict(_parse_prop(pair) for pair in pairs)


def _parse_scope(parts: list[str]) -> Scope:
    kind, rest = parts[0], parts[1:]
    arity = {"graph": 0, "node-label": 1, "rel-type": 1, "node": 1, "prop": 2, "prop-pred": 3}
    if kind not in arity:
        raise _UsageError(
            f"unknown scope {kind!r}; expected graph, node-label, rel-type, node, prop, or prop-pred"
        )
    if len(rest) != arity[kind]:
        raise _UsageError(f"scope {kind} takes {arity[kind]} argument(s), got {len(rest)}")
    if kind == "graph":
        return Scope.graph()
    if kind == "node-label":
        return Scope.node_label(rest[0])
    if kind == "rel-type":
        return Scope.relationship_type(rest[0])
    if kind == "node":
        return Scope.node(rest[0])
    if kind == "prop":
        return Scope.node_property(rest[0], rest[1])
    return Scope.property_values(rest[0], rest[1], set(rest[2].split(",")))


# -- command context ---------------------------------------------------------


@dataclass(slots=True)
class _Ctx:
    config: Config
    data_path: Path
    role_name: str
    fmt: str
    registry: Registry

    def acting(self, engine: Engine) -> Role:
        return engine.roles.get(self.role_name)

    def emit(self, human: str, record: dict[str, Any]) -> None:
        if self.fmt == "lines":
            print(json.dumps(record, ensure_ascii=False, default=_jsonable))
        else:
            print(human)


def _jsonable(value: Any) -> Any:
    if isinstance(value, PartialDate):
        return str(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not JSON serializable: {value!r}")


def _human_value(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, tuple):
        return json.dumps(list(value), ensure_ascii=False)
    return str(value)


def _load(ctx: _Ctx) -> Engine:
    return load_snapshot(ctx.data_path)


def _mutate(ctx: _Ctx, work: Callable[[Engine], int | None]) -> int:
    """Load, mutate, save, all under the advisory lock."""
    lock = FileLock(f"{ctx.data_path}.lock")
    try:
        lock.acquire(timeout=10)
    except Timeout:
        raise FileParseError(f"another process holds the lock on {ctx.data_path}") from None
    try:
        engine = _load(ctx)
        code = work(engine) or 0
        save_snapshot(engine, ctx.data_path)
        return code
    finally:
        lock.release()


# -- handlers ----------------------------------------------------------------


def _cmd_usage(ctx: _Ctx, args: argparse.Namespace) -> int:
    raise _UsageError("missing subcommand")


def _cmd_init(ctx: _Ctx, args: argparse.Namespace) -> int:
    if ctx.data_path.exists():
        raise Conflict(f"data file already exists: {ctx.data_path}")
    lock = FileLock(f"{ctx.data_path}.lock")
    with lock.acquire(timeout=10):
        engine = new_engine(args.owner, ctx.config.thresholds)
        save_snapshot(engine, ctx.data_path)
    ctx.emit(f"initialized {ctx.data_path} for {args.owner}", {"owner": engine.graph.owner})
    return 0


def _cmd_node_add(ctx: _Ctx, args: argparse.Namespace) -> int:
    props = _props_arg(args.prop)

    def work(engine: Engine) -> None:
        node_id = engine.add_node(args.label, props, acting=ctx.acting(engine))
        ctx.emit(node_id, {"id": node_id})

    return _mutate(ctx, work)


def _cmd_node_delete(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        removed = engine.delete_node(args.id, cascade=args.cascade, acting=ctx.acting(engine))
        ctx.emit(f"deleted {removed} element(s)", {"deleted": removed})

    return _mutate(ctx, work)


def _cmd_rel_add(ctx: _Ctx, args: argparse.Namespace) -> int:
    props = _props_arg(args.prop)
    validity = interval(args.start, args.end) if args.start or args.end else None

    def work(engine: Engine) -> None:
        rel_id = engine.add_relationship(
            args.src, args.dst, args.type, validity, props, acting=ctx.acting(engine)
        )
        ctx.emit(rel_id, {"id": rel_id})

    return _mutate(ctx, work)


def _cmd_rel_end(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        rel = engine.end_relationship(args.id, args.date, acting=ctx.acting(engine))
        ctx.emit(
            f"{rel.id} now {rel.validity}",
            {"id": rel.id, "start": _opt(rel.validity.start), "end": _opt(rel.validity.end)},
        )

    return _mutate(ctx, work)


def _opt(value: Any) -> str | None:
    return str(value) if value is not None else None


def _cmd_link_add(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        node = engine.set_external_link(args.node, args.source, args.uri, acting=ctx.acting(engine))
        ctx.emit(
            f"{node.id} linked to {args.uri}",
            {"id": node.id, "source": args.source, "uri": args.uri},
        )

    return _mutate(ctx, work)


def _cmd_import_triples(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        report = engine.import_triples(args.file, ctx.registry, acting=ctx.acting(engine))
        ctx.emit(
            f"merged={report.merged} queued={report.queued} dropped={report.dropped}",
            {"merged": report.merged, "queued": report.queued, "dropped": report.dropped},
        )

    return _mutate(ctx, work)


def _cmd_import_bibtex(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        report = engine.import_bibtex(args.file, acting=ctx.acting(engine))
        for warning in report.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        ctx.emit(
            f"papers={report.papers} writes={report.writes_edges}",
            {"papers": report.papers, "writes": report.writes_edges},
        )

    return _mutate(ctx, work)


def _cmd_inbox_list(ctx: _Ctx, args: argparse.Namespace) -> int:
    engine = _load(ctx)
    state = InboxState(args.state) if args.state else None
    from .ingest import inbox_list

    for entry in inbox_list(engine.inbox, state):
        c = entry.candidate
        ctx.emit(
            f"{entry.id}\t{entry.state.value}\t{c.confidence:g}\t"
            f"{c.head} -{c.rel}-> {c.tail}\t{c.source}",
            {
                "id": entry.id,
                "state": entry.state.value,
                "confidence": c.confidence,
                "head": c.head,
                "rel": c.rel,
                "tail": c.tail,
                "source": c.source,
            },
        )
    return 0


def _cmd_inbox_accept(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        report = engine.accept(args.id, ctx.registry, acting=ctx.acting(engine))
        for warning in report.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        if report.duplicate:
            ctx.emit("duplicate of an existing fact", {"duplicate": True})
        else:
            ctx.emit(
                report.relationship_id or "",
                {"relationship": report.relationship_id, "created": report.created_nodes},
            )

    return _mutate(ctx, work)


def _cmd_inbox_reject(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        entry = engine.reject(args.id, acting=ctx.acting(engine))
        ctx.emit(f"{entry.id} rejected", {"id": entry.id, "state": entry.state.value})

    return _mutate(ctx, work)


def _cmd_role_create(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        role = engine.roles.create_role(args.name, acting=ctx.acting(engine))
        ctx.emit(f"role {role.name}", {"name": role.name})

    return _mutate(ctx, work)


def _cmd_role_copy(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        role = engine.roles.copy_role(args.new, args.source, acting=ctx.acting(engine))
        ctx.emit(
            f"role {role.name} with {len(role.rules)} rule(s)",
            {"name": role.name, "rules": len(role.rules)},
        )

    return _mutate(ctx, work)


def _cmd_rule(ctx: _Ctx, args: argparse.Namespace) -> int:
    from .access import AccessRule, Effect

    rule = AccessRule(Effect(args.effect), Privilege(args.privilege), _parse_scope(args.scope))

    def work(engine: Engine) -> None:
        role = engine.roles.add_rule(args.role_name, rule, acting=ctx.acting(engine))
        ctx.emit(
            f"{args.effect} {args.privilege} on {' '.join(args.scope)} to {role.name}",
            {"role": role.name, "rules": len(role.rules)},
        )

    return _mutate(ctx, work)


def _cmd_query(ctx: _Ctx, args: argparse.Namespace) -> int:
    engine = _load(ctx)
    parsed = querylang.parse(args.text)
    rows = querylang.evaluate(engine.graph, engine.roles, parsed, default_role=ctx.role_name)
    items = [item.var if item.key is None else f"{item.var}.{item.key}" for item in parsed.items]
    for row in rows:
        ctx.emit(
            "\t".join(_human_value(value) for value in row),
            {item: value for item, value in zip(items, row)},
        )
    return 0


def _cmd_validate(ctx: _Ctx, args: argparse.Namespace) -> int:
    engine = _load(ctx)
    report = engine.validate(ctx.registry)
    if ctx.fmt == "lines":
        print(
            json.dumps(
                {"orphans": report.orphans, "schema_warnings": report.schema_warnings},
                ensure_ascii=False,
            )
        )
        return 0
    print(f"{len(report.orphans)} orphans")
    for orphan in report.orphans:
        print(f"orphan: {orphan}")
    print(f"{len(report.schema_warnings)} schema warnings")
    for warning in report.schema_warnings:
        print(f"warning: {warning}")
    return 0


def _cmd_export_rdf(ctx: _Ctx, args: argparse.Namespace) -> int:
    engine = _load(ctx)
    role = engine.roles.get(ctx.role_name)
    count = export_rdf(engine.graph, args.file, role=role, base=ctx.config.rdf_base)
    ctx.emit(f"{count} triples", {"triples": count})
    return 0


def _cmd_save(ctx: _Ctx, args: argparse.Namespace) -> int:
    def work(engine: Engine) -> None:
        ctx.emit(f"saved {ctx.data_path}", {"path": str(ctx.data_path)})

    return _mutate(ctx, work)


# -- entry points -------------------------------------------------------------


def run(argv: list[str], env: Mapping[str, str] | None = None) -> int:
    """Parse argv, dispatch, and map errors onto exit codes."""
    env = env or {}
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help and friends
            return int(exc.code or 0)
        if getattr(args, "handler", None) is None:
            raise _UsageError("missing command")
        config = load_config(env=env)
        data = args.data or config.data_path
        role_name = args.role or config.default_role
        ctx = _Ctx(
            config=config,
            data_path=Path(data),
            role_name=role_name,
            fmt=args.format or "human",
            registry=config.registry(),
        )
        return args.handler(ctx, args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (InvalidArgument, NotFound, Conflict, Forbidden, AccessDenied) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (FileParseError, UnsupportedVersion, IntegrityError, QueryError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:], os.environ))
