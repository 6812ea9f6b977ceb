"""Spec files: JSON documents declaring one base, its objects and tasks.

Parsing checks the structure, parses every expression and resolves every
name. Literal declarations become library objects right away; derived
ones (`"of": ...`) are built when a run asks for them, with the run's
sample plan.
"""

import json
import logging
import re
import typing as t
from dataclasses import dataclass, field

import numpy as np

from app import catalog
from app.bilinear import (
    FormField,
    IsometryWitness,
    hyperbolic_space,
    negate,
    orthogonal_sum,
    standard_positive_form,
    symmetric,
    tensor_form,
)
from app.bundle import (
    BundleRep,
    MorphismField,
    SectionRep,
    bundle_from_projector,
    complement,
    dual,
    gauss_embedding,
    hom,
    tensor,
    whitney_sum,
)
from app.errors import (
    BaseMismatch,
    CocycleError,
    DimensionMismatch,
    ParseError,
    UnresolvedReference,
)
from app.exprcore import (
    Base,
    Cover,
    ExprMap,
    ExprMatrix,
    Map,
    SemialgebraicSet,
    nonnegative,
    parse_expr,
    parse_matrix,
    positive,
    zero,
)
from app.homotopy import cylinder_base, product_cover

from .actions import ACTIONS, LITERAL_KINDS, MAP_KINDS, OBJECT_KINDS, Context

logger = logging.getLogger(__name__)

SPEC_VERSION = 1
TOP_LEVEL_KEYS = (
    "version",
    "base",
    "charts",
    "bundles",
    "forms",
    "sections",
    "witnesses",
    "tasks",
)
RELATION = re.compile(r">=|<=|>|<|=")
DEFAULT_BOX = 4.0

BUNDLE_OPERATIONS = {
    "whitney_sum": 2,
    "tensor": 2,
    "hom": 2,
    "dual": 1,
    "complement": 1,
    "range": 1,
}
FORM_OPERATIONS = {
    "negate": ("form",),
    "orthogonal_sum": ("form", "form"),
    "tensor": ("form", "form"),
    "hyperbolic": ("bundle",),
    "standard": ("bundle",),
}
EXPECTATIONS = ("pass", "fail", "unknown", "true", "false", "error")


@dataclass(frozen=True)
class Task:
    name: str
    command: str
    action: str
    args: dict
    expect: dict | None = None
    store_as: str | None = None


@dataclass(frozen=True, eq=False)
class Declaration:
    """A named object: `build(ctx, resolve)` makes it, `refs` lists the
    (kind, name) pairs it needs."""

    kind: str
    name: str
    build: t.Callable
    refs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True, eq=False)
class SpecDocument:
    source: dict
    base: Base
    cover: Cover
    declarations: dict[tuple[str, str], Declaration]
    tasks: tuple[Task, ...]
    path: str | None = field(default=None, compare=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpecDocument):
            return NotImplemented
        return self.dumps() == other.dumps()

    def __hash__(self) -> int:
        return hash(self.dumps())

    def dumps(self) -> str:
        return json.dumps(self.source, sort_keys=True, indent=2)

    def names(self, kind: str) -> list[str]:
        return [name for k, name in self.declarations if k == kind]

    def tasks_for(self, command: str | None) -> list[Task]:
        if command is None:
            return list(self.tasks)
        return [task for task in self.tasks if task.command == command]


def load_spec(path: str) -> SpecDocument:
    with open(path, encoding="utf-8") as spec_file:
        text = spec_file.read()
    return parse_spec(text, path)


def parse_spec(text: str, path: str | None = None) -> SpecDocument:
    try:
        source = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, error.lineno, error.colno, path)
    reader = _Reader(text, path)
    document = reader.read(source)
    logger.info(
        "%s: %d declarations, %d tasks",
        path or "spec",
        len(document.declarations),
        len(document.tasks),
    )
    return document


def _locate(text: str, fragment: str, offset: int = 0):
    """(line, column) of the JSON string `fragment` in `text`, shifted by
    `offset` characters into it; (None, None) when it is not found."""
    quoted = json.dumps(fragment)
    index = text.find(quoted)
    if index < 0:
        return None, None
    index += 1 + offset
    line = text.count("\n", 0, index) + 1
    column = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, column


class _Reader:
    def __init__(self, text: str, path: str | None) -> None:
        self.text = text
        self.path = path
        self.declarations: dict[tuple[str, str], Declaration] = {}

    # errors

    def fail(self, message: str, fragment: str | None = None, cls=ParseError):
        line, column = (None, None)
        if fragment is not None:
            line, column = _locate(self.text, fragment)
        located = ParseError(message, line, column, self.path)
        if issubclass(cls, ParseError):
            return cls(message, line, column, self.path)
        return cls(str(located))

    def unresolved(self, kind: str, name: str):
        return self.fail(f"unknown {kind} {name!r}", name, UnresolvedReference)

    def expression(self, text, dim: int):
        if not isinstance(text, str):
            return parse_matrix([[text]], dim)[0][0]
        try:
            return parse_expr(text, dim)
        except ParseError as error:
            line, column = _locate(self.text, text, (error.column or 1) - 1)
            raise ParseError(error.message, line, column, self.path)
        except DimensionMismatch as error:
            line, column = _locate(self.text, text)
            raise ParseError(error.message, line, column, self.path)

    def matrix(self, rows, dim: int, shape=None) -> tuple[tuple, ...]:
        if not isinstance(rows, list) or not all(
            isinstance(row, list) for row in rows
        ):
            raise self.fail(f"expected rows of expressions, got {rows!r}")
        entries = tuple(
            tuple(self.expression(v, dim) for v in row) for row in rows
        )
        if shape is not None:
            found = (len(entries), len(entries[0]) if entries else 0)
            if found != shape or any(len(r) != shape[1] for r in entries):
                raise self.fail(f"matrix of shape {found}, expected {shape}")
        return entries

    # base and charts

    def read(self, source) -> SpecDocument:
        if not isinstance(source, dict):
            raise self.fail("a spec file holds one JSON object")
        for key in source:
            if key not in TOP_LEVEL_KEYS:
                raise self.fail(f"unknown top-level key {key!r}", key)
        if source.get("version", SPEC_VERSION) != SPEC_VERSION:
            raise self.fail(f"unsupported version {source['version']!r}")
        if "base" not in source:
            raise self.fail("missing 'base'")
        base = self.base(source["base"])
        cover = self.cover(source.get("charts"), base)
        self.document_base, self.document_cover = base, cover
        for name, entry in _section(source, "bundles"):
            self.declare("bundle", name, self.bundle(name, entry))
        for name, entry in _section(source, "forms"):
            self.declare("form", name, self.form(name, entry))
        for name, entry in _section(source, "sections"):
            self.declare("section", name, self.section(name, entry))
        for name, entry in _section(source, "witnesses"):
            self.declare("witness", name, self.witness(name, entry))
        self.check_references()
        tasks = self.tasks(source.get("tasks", []))
        return SpecDocument(
            source, base, cover, self.declarations, tasks, self.path
        )

    def base(self, entry) -> Base:
        if isinstance(entry, dict) and "catalog" in entry:
            value = self.catalog_item(entry["catalog"])
            if not isinstance(value, Base):
                raise self.fail(
                    f"catalog item {entry['catalog']!r} is not a base",
                    entry["catalog"],
                )
            return value
        if isinstance(entry, dict) and "cylinder_of" in entry:
            return cylinder_base(self.base(entry["cylinder_of"]))
        if not isinstance(entry, dict) or "dim" not in entry:
            raise self.fail("a base needs 'catalog', 'cylinder_of' or 'dim'")
        dim = int(entry["dim"])
        region = SemialgebraicSet.basic(
            dim,
            *(self.condition(c, dim) for c in _texts(entry, "conditions")),
        )
        region.require_polynomial("base")
        box = entry.get("box", [[-DEFAULT_BOX, DEFAULT_BOX]] * dim)
        if len(box) != dim:
            raise self.fail(f"box has {len(box)} axes, base dimension {dim}")
        center = entry.get("star_center")
        return Base(
            entry.get("name", f"X{dim}"),
            region,
            tuple((float(lo), float(hi)) for lo, hi in box),
            connected=bool(entry.get("connected", True)),
            star_center=None if center is None else tuple(map(float, center)),
            circle=bool(entry.get("circle", False)),
        )

    def condition(self, text: str, dim: int):
        match = RELATION.search(text)
        if match is None:
            raise self.fail(f"no relation in condition {text!r}", text)
        left = self.expression_part(text, 0, match.start(), dim)
        right = self.expression_part(text, match.end(), len(text), dim)
        return _related(left, match.group(), right)

    def region(self, value, dim: int) -> SemialgebraicSet:
        pieces = _pieces(value)
        if pieces is None:
            raise self.fail(f"expected condition strings, got {value!r}")
        return _union(
            [[self.condition(c, dim) for c in piece] for piece in pieces],
            dim,
        )

    def expression_part(self, text: str, start: int, end: int, dim: int):
        try:
            return parse_expr(text[start:end], dim)
        except ParseError as error:
            shift = start + (error.column or 1) - 1
            line, column = _locate(self.text, text, shift)
            raise ParseError(error.message, line, column, self.path)

    def cover(self, entry, base: Base) -> Cover:
        if entry is None:
            return Cover.single(base)
        if isinstance(entry, dict) and "catalog" in entry:
            value = self.catalog_item(entry["catalog"])
            if not isinstance(value, Cover):
                raise self.fail(
                    f"catalog item {entry['catalog']!r} is not a cover",
                    entry["catalog"],
                )
            if value.base != base:
                raise self.fail(
                    f"cover {entry['catalog']!r} lives over "
                    f"{value.base.name}, not {base.name}",
                    entry["catalog"],
                    BaseMismatch,
                )
            return value
        if isinstance(entry, dict) and "slice" in entry:
            return self.product(entry, base)
        if not isinstance(entry, dict) or not entry:
            raise self.fail("charts must map chart names to conditions")
        charts = []
        for name, conditions in entry.items():
            texts = [conditions] if isinstance(conditions, str) else conditions
            chart = SemialgebraicSet.basic(
                base.dim, *(self.condition(c, base.dim) for c in texts)
            )
            chart.require_polynomial(f"chart {name}")
            charts.append(chart)
        try:
            return Cover(base, tuple(charts), tuple(entry))
        except CocycleError as error:
            raise self.fail(error.message)

    def product(self, entry, base: Base) -> Cover:
        if base.slice is None:
            raise self.fail(f"{base.name} is not a cylinder", "slice")
        slice_cover = self.cover(entry["slice"], base.slice)
        charts = []
        for name, lower, upper in entry.get("intervals", []):
            if name not in slice_cover.names:
                raise self.unresolved("chart", name)
            charts.append(
                (
                    slice_cover.index(name),
                    -np.inf if lower is None else float(lower),
                    np.inf if upper is None else float(upper),
                )
            )
        if not charts:
            raise self.fail("a product cover needs 'intervals'", "slice")
        return product_cover(base, charts, slice_cover)

    def catalog_item(self, name: str):
        if name not in catalog.CATALOG:
            raise self.unresolved("catalog item", name)
        return catalog.lookup(name)

    # declarations

    def declare(self, kind: str, name: str, declaration: Declaration):
        if (kind, name) in self.declarations:
            raise self.fail(f"{kind} {name!r} declared twice", name)
        self.declarations[(kind, name)] = declaration

    def catalog_declaration(self, kind: str, name: str, item: str, cls):
        value = self.catalog_item(item)
        if not isinstance(value, cls):
            raise self.fail(f"catalog item {item!r} is not a {kind}", item)
        if value.cover.base != self.document_base:
            raise self.fail(
                f"{item!r} lives over {value.cover.base.name}, not "
                f"{self.document_base.name}",
                item,
                BaseMismatch,
            )
        return Declaration(kind, name, lambda ctx, resolve: value)

    def chart_index(self, cover: Cover, name: str) -> int:
        if name not in cover.names:
            raise self.unresolved("chart", name)
        return cover.index(name)

    def bundle(self, name: str, entry) -> Declaration:
        if "catalog" in entry:
            return self.catalog_declaration(
                "bundle", name, entry["catalog"], BundleRep
            )
        if "of" in entry:
            return self.derived_bundle(name, entry)
        cover, dim = self.document_cover, self.document_base.dim
        rank = int(entry.get("rank", -1))
        if rank < 0:
            raise self.fail(f"bundle {name!r} needs a rank", name)
        transitions = {}
        for key, rows in entry.get("transitions", {}).items():
            parts = [p.strip() for p in key.split(",")]
            if len(parts) != 2:
                raise self.fail(f"transition key {key!r} is not 'A,B'", key)
            for p in parts:
                if p not in cover.names:
                    raise self.fail(
                        f"unknown chart {p!r}", key, UnresolvedReference
                    )
            i, j = (cover.index(p) for p in parts)
            entries = self.matrix(rows, dim, (rank, rank))
            transitions[(i, j)] = ExprMatrix(entries)
        try:
            value = BundleRep(cover, rank, transitions, name)
        except ValueError as error:
            raise self.fail(str(error), name)
        return Declaration("bundle", name, lambda ctx, resolve: value)

    def derived_bundle(self, name: str, entry) -> Declaration:
        op, args = entry["of"], list(entry.get("args", []))
        if op not in BUNDLE_OPERATIONS:
            raise self.unresolved("bundle operation", op)
        if len(args) != BUNDLE_OPERATIONS[op]:
            raise self.fail(
                f"{op} takes {BUNDLE_OPERATIONS[op]} bundles", op
            )

        def build(ctx: Context, resolve):
            parts = [resolve("bundle", a) for a in args]
            if op == "whitney_sum":
                value = whitney_sum(*parts, ctx.plan)
            elif op == "tensor":
                value = tensor(*parts, ctx.plan)
            elif op == "hom":
                value = hom(*parts, ctx.plan)
            elif op == "dual":
                value = dual(parts[0])
            elif op == "complement":
                value = complement(parts[0], ctx.r, ctx.plan)
            else:
                p = gauss_embedding(parts[0], ctx.r, ctx.plan)
                value = bundle_from_projector(
                    p, ctx.plan, ctx.tolerances.minor
                )
            return value.renamed(name)

        refs = tuple(("bundle", a) for a in args)
        return Declaration("bundle", name, build, refs)

    def form(self, name: str, entry) -> Declaration:
        if "catalog" in entry:
            return self.catalog_declaration(
                "form", name, entry["catalog"], FormField
            )
        if "of" in entry:
            return self.derived_form(name, entry)
        if "bundle" not in entry:
            raise self.fail(f"form {name!r} needs a bundle", name)
        bundle_name = entry["bundle"]
        dim = self.document_base.dim

        def upper(rows):
            entries = self.matrix(rows, dim)
            try:
                return symmetric(entries)
            except ValueError as error:
                raise self.fail(str(error), name)

        if "all" in entry:
            shared = upper(entry["all"])
            per_chart = None
        else:
            per_chart = {
                chart: upper(rows)
                for chart, rows in entry.get("charts", {}).items()
            }

        def build(ctx: Context, resolve):
            b = resolve("bundle", bundle_name)
            if per_chart is None:
                matrices = tuple(shared for _ in range(b.cover.size))
            else:
                missing = set(b.cover.names) - set(per_chart)
                if missing:
                    raise self.fail(
                        f"form {name!r} has no matrix on chart "
                        f"{sorted(missing)[0]!r}",
                        name,
                    )
                extra = set(per_chart) - set(b.cover.names)
                if extra:
                    raise self.unresolved("chart", sorted(extra)[0])
                matrices = tuple(per_chart[c] for c in b.cover.names)
            for s in matrices:
                if s.shape != (b.rank, b.rank):
                    raise self.fail(
                        f"form {name!r} has {s.shape} matrices on a rank "
                        f"{b.rank} bundle",
                        name,
                    )
            return FormField(b, matrices, name)

        return Declaration("form", name, build, (("bundle", bundle_name),))

    def derived_form(self, name: str, entry) -> Declaration:
        op, args = entry["of"], list(entry.get("args", []))
        if op not in FORM_OPERATIONS:
            raise self.unresolved("form operation", op)
        kinds = FORM_OPERATIONS[op]
        if len(args) != len(kinds):
            raise self.fail(f"{op} takes {len(kinds)} arguments", op)

        def build(ctx: Context, resolve):
            parts = [resolve(k, a) for k, a in zip(kinds, args)]
            if op == "negate":
                value = negate(parts[0])
            elif op == "orthogonal_sum":
                value = orthogonal_sum(*parts, ctx.plan)
            elif op == "tensor":
                value = tensor_form(*parts, ctx.plan)
            elif op == "hyperbolic":
                value = hyperbolic_space(parts[0], ctx.plan)
            else:
                value = standard_positive_form(parts[0], ctx.r, ctx.plan)
            return value.renamed(name)

        return Declaration("form", name, build, tuple(zip(kinds, args)))

    def section(self, name: str, entry) -> Declaration:
        if "bundle" not in entry:
            raise self.fail(f"section {name!r} needs a bundle", name)
        bundle_name = entry["bundle"]
        dim = self.document_base.dim
        columns = {
            chart: ExprMatrix(
                tuple((self.expression(v, dim),) for v in values)
            )
            for chart, values in entry.get("charts", {}).items()
        }

        def build(ctx: Context, resolve):
            b = resolve("bundle", bundle_name)
            for chart in columns:
                self.chart_index(b.cover, chart)
            missing = [c for c in b.cover.names if c not in columns]
            if missing:
                raise self.fail(
                    f"section {name!r} has no value on chart {missing[0]!r}",
                    name,
                )
            try:
                return SectionRep(
                    b, tuple(columns[c] for c in b.cover.names), name
                )
            except ValueError as error:
                raise self.fail(str(error), name)

        return Declaration(
            "section", name, build, (("bundle", bundle_name),)
        )

    def witness(self, name: str, entry) -> Declaration:
        if "catalog" in entry:
            item = entry["catalog"]
            value = self.catalog_item(item)
            if not isinstance(value, (MorphismField, IsometryWitness)):
                raise self.fail(f"catalog item {item!r} is not a map", item)
            return Declaration("witness", name, lambda ctx, resolve: value)
        for key in ("source", "target", "maps"):
            if key not in entry:
                raise self.fail(f"witness {name!r} needs {key!r}", name)
        dim = self.document_base.dim
        maps = {
            chart: ExprMatrix(self.matrix(rows, dim))
            for chart, rows in entry["maps"].items()
        }
        forms = (entry.get("source_form"), entry.get("target_form"))
        refs = [("bundle", entry["source"]), ("bundle", entry["target"])]
        refs.extend(("form", f) for f in forms if f is not None)

        def build(ctx: Context, resolve):
            source = resolve("bundle", entry["source"])
            target = resolve("bundle", entry["target"])
            for chart in maps:
                self.chart_index(source.cover, chart)
            missing = [c for c in source.cover.names if c not in maps]
            if missing:
                raise self.fail(
                    f"witness {name!r} has no map on chart {missing[0]!r}",
                    name,
                )
            try:
                u = MorphismField(
                    source,
                    target,
                    tuple(maps[c] for c in source.cover.names),
                    name,
                )
            except ValueError as error:
                raise self.fail(str(error), name)
            if None in forms:
                return u
            return IsometryWitness(
                u, resolve("form", forms[0]), resolve("form", forms[1])
            )

        return Declaration("witness", name, build, tuple(refs))

    def check_references(self) -> None:
        """Every reference names a declaration; no declaration needs
        itself."""
        state: dict[tuple[str, str], str] = {}

        def visit(key):
            if key not in self.declarations:
                raise self.unresolved(*key)
            if state.get(key) == "done":
                return
            if state.get(key) == "open":
                kind, name = key
                raise self.fail(f"{kind} {name!r} refers to itself", name)
            state[key] = "open"
            for ref in self.declarations[key].refs:
                visit(ref)
            state[key] = "done"

        for key in self.declarations:
            visit(key)

    # tasks

    def tasks(self, entries) -> tuple[Task, ...]:
        if not isinstance(entries, list):
            raise self.fail("'tasks' must be a list", "tasks")
        stored: set[str] = set()
        tasks = []
        for index, entry in enumerate(entries):
            task = self.task(index, entry, stored)
            if task.store_as is not None:
                stored.add(task.store_as)
            tasks.append(task)
        return tuple(tasks)

    def task(self, index: int, entry, stored: set[str]) -> Task:
        command, name = entry.get("command"), entry.get("action")
        label = entry.get("name", f"task {index + 1}")
        if (command, name) not in ACTIONS:
            raise self.fail(
                f"{label}: no action {name!r} under command {command!r}",
                name if isinstance(name, str) else None,
                UnresolvedReference,
            )
        spec = ACTIONS[(command, name)]
        args = dict(entry.get("args", {}))
        for key in args:
            if key not in spec.kinds:
                raise self.fail(f"{label}: unknown argument {key!r}", key)
        for key in spec.required:
            if key not in args:
                raise self.fail(f"{label}: missing argument {key!r}", label)
        for key, value in args.items():
            self.check_argument(label, spec.kinds[key], value, stored)
        return Task(
            label,
            command,
            name,
            args,
            _expectation(entry.get("expect"), self, label),
            entry.get("as"),
        )

    def check_argument(self, label: str, kind: str, value, stored) -> None:
        if isinstance(value, dict) and "catalog" in value:
            self.catalog_item(value["catalog"])
            return
        if kind in OBJECT_KINDS or kind == "k0":
            names = (
                list(value.values()) if isinstance(value, dict) else [value]
            )
            wanted = "bundle" if kind == "k0" else kind
            for n in names:
                if n in stored or (wanted, n) in self.declarations:
                    continue
                raise self.unresolved(wanted, n)
        elif kind in MAP_KINDS:
            if isinstance(value, str) and value in stored:
                return
            if not isinstance(value, dict) or "components" not in value:
                raise self.fail(f"{label}: a {kind} needs 'components'")
            dim = self.map_dim(kind, value)
            for component in value["components"]:
                self.expression(component, dim)
        elif kind == "field":
            self.matrix(value, self.document_base.dim)
        elif kind == "set":
            self.region(value, self.document_base.dim)
        elif kind == "expression":
            self.expression(value, self.document_base.dim)
        elif kind == "point":
            _literal_point(value, self, label)
        elif kind == "matrix":
            _literal_matrix(value, self, label)
        elif kind == "number" and not isinstance(value, (int, float)):
            raise self.fail(f"{label}: expected a number, got {value!r}")

    def map_dim(self, kind: str, value: dict) -> int:
        dim = self.document_base.dim + (1 if kind == "homotopy" else 0)
        return int(value.get("source_dim", dim))


def _section(source: dict, key: str):
    entries = source.get(key, {})
    if not isinstance(entries, dict):
        raise ParseError(f"'{key}' must map names to declarations")
    for name, entry in entries.items():
        if not isinstance(entry, dict):
            raise ParseError(f"{key[:-1]} {name!r} must be an object")
        yield name, entry


def _texts(entry: dict, key: str) -> list[str]:
    value = entry.get(key, [])
    return [value] if isinstance(value, str) else list(value)


def _related(left, relation: str, right):
    if relation == ">":
        return positive(left - right)
    if relation == "<":
        return positive(right - left)
    if relation == ">=":
        return nonnegative(left - right)
    if relation == "<=":
        return nonnegative(right - left)
    return zero(left - right)


def _pieces(value) -> list[list[str]] | None:
    """Condition strings of a set argument, one list per piece.

    A flat list is one basic set; a list of lists is their union.
    """
    if isinstance(value, str):
        return [[value]]
    if not isinstance(value, list) or not value:
        return None
    if all(isinstance(c, str) for c in value):
        return [list(value)]
    if all(
        isinstance(p, list) and all(isinstance(c, str) for c in p)
        for p in value
    ):
        return [list(p) for p in value]
    return None


def _union(pieces, dim: int) -> SemialgebraicSet:
    region = SemialgebraicSet.empty(dim)
    for piece in pieces:
        region = region.union(SemialgebraicSet.basic(dim, *piece))
    return region


def _parse_condition(text: str, dim: int):
    match = RELATION.search(text)
    if match is None:
        raise ParseError(f"no relation in condition {text!r}")
    left = parse_expr(text[: match.start()], dim)
    right = parse_expr(text[match.end() :], dim)
    return _related(left, match.group(), right)


def _literal_matrix(value, reader: _Reader, label: str) -> np.ndarray:
    try:
        matrix = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise reader.fail(f"{label}: expected a numeric matrix")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise reader.fail(f"{label}: expected a square matrix")
    return matrix


def _literal_point(value, reader: _Reader, label: str) -> np.ndarray:
    try:
        point = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise reader.fail(f"{label}: expected a list of numbers")
    if point.ndim != 1:
        raise reader.fail(f"{label}: expected a list of numbers")
    return point


def _expectation(value, reader: _Reader, label: str) -> dict | None:
    if value is None:
        return None
    if isinstance(value, str):
        value = {"outcome": value}
    if value.get("outcome") not in EXPECTATIONS:
        raise reader.fail(
            f"{label}: expected outcome is one of {', '.join(EXPECTATIONS)}"
        )
    return value


def resolve_argument(document, kind: str, value, resolve, stored):
    """Run-time value of one task argument."""
    if isinstance(value, dict) and "catalog" in value:
        return catalog.lookup(value["catalog"])
    if kind in OBJECT_KINDS:
        return stored[value] if value in stored else resolve(kind, value)
    if kind == "k0":
        if isinstance(value, dict):
            return (
                resolve("bundle", value["positive"]),
                resolve("bundle", value["negative"]),
            )
        return stored[value] if value in stored else resolve("bundle", value)
    if kind in MAP_KINDS:
        if isinstance(value, str):
            return stored[value]
        dim = document.base.dim + (1 if kind == "homotopy" else 0)
        dim = int(value.get("source_dim", dim))
        return _expression_map(value["components"], dim)
    if kind == "field":
        return ExprMatrix(parse_matrix(value, document.base.dim))
    if kind == "set":
        dim = document.base.dim
        pieces = [
            [_parse_condition(c, dim) for c in piece]
            for piece in _pieces(value)
        ]
        return _union(pieces, dim)
    if kind == "expression":
        return parse_matrix([[value]], document.base.dim)[0][0]
    if kind == "point":
        return np.asarray(value, dtype=float).reshape(-1)
    if kind == "matrix":
        return np.asarray(value, dtype=float)
    if kind == "number":
        return float(value)
    if kind in LITERAL_KINDS:
        return value
    raise ValueError(f"unknown argument kind {kind!r}")


def _expression_map(components, dim: int) -> Map:
    return ExprMap(
        [
            parse_expr(c, dim) if isinstance(c, str) else c
            for c in components
        ],
        dim,
    )
