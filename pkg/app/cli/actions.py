"""Task actions: one function per (command, action) pair.

An action takes the run context and its resolved arguments and returns
an `Outcome`. Argument kinds tell the document which arguments name
declared objects and how literal ones are read.
"""

import typing as t
from dataclasses import dataclass, field

import numpy as np

from app.bilinear import (
    FormField,
    IsometryWitness,
    blend_positive_subbundle,
    check_isometry,
    decompose,
    gram_schmidt_frame,
    hyperbolic_space,
    local_trivializing_cover,
    negate,
    orthogonal_sum,
    positive_isometry,
    signature,
    standard_positive_form,
    tensor_form,
    transversal_isometry,
    validate_decomposition,
    validate_form,
)
from app.bundle import (
    BundleRep,
    bundle_from_projector,
    check_isomorphism,
    coefficients,
    complement,
    dual,
    evaluate_section,
    gauss_embedding,
    generating_sections,
    hom,
    projector_isomorphism,
    projector_rank,
    pullback,
    reconstruct,
    s1_line_class,
    splitting_isomorphism,
    tensor,
    validate_cocycle,
    validate_projector,
    validate_section,
    whitney_sum,
)
from app.certificate import (
    CheckReport,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import (
    DEFAULT_SMOOTHNESS,
    DEFAULT_TOLERANCES,
    Tolerances,
)
from app.errors import NotCatalogBase
from app.exprcore import (
    Cover,
    SamplePlan,
    evaluate,
    sample,
    separating_function,
    shrink_cover,
    support_function,
    validate_partition,
    vertical_retraction,
    zero_function,
)
from app.homotopy import (
    clutch,
    homotopy_isometry,
    homotopy_isomorphism,
    induced_iso_from_homotopy,
    restrict,
    strip_subdivision,
    trivialize_contractible,
)
from app.rings import (
    K0Class,
    WittClass,
    cancellation_witness,
    delta,
    det_class,
    k0_add,
    k0_mul,
    k0_neg,
    nabla,
    roundtrip_check,
    witt_add,
    witt_is_zero,
    witt_mul,
    witt_neg,
)

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"

# `k0` arguments name a bundle or a {"positive", "negative"} pair.
OBJECT_KINDS = ("bundle", "form", "section", "witness")
LITERAL_KINDS = (
    "number",
    "matrix",
    "field",
    "text",
    "set",
    "expression",
    "point",
)
MAP_KINDS = ("map", "homotopy")


@dataclass(frozen=True)
class Context:
    cover: Cover
    plan: SamplePlan = SamplePlan()
    tolerances: Tolerances = DEFAULT_TOLERANCES
    r: int = DEFAULT_SMOOTHNESS

    @property
    def base(self):
        return self.cover.base


@dataclass(frozen=True)
class Outcome:
    outcome: str
    report: CheckReport | None = None
    invariants: dict = field(default_factory=dict)
    result: object = None
    message: str = ""


@dataclass(frozen=True)
class Action:
    command: str
    name: str
    run: t.Callable[[Context, dict], Outcome]
    kinds: dict[str, str]
    required: tuple[str, ...]
    defaults: dict


ACTIONS: dict[tuple[str, str], Action] = {}


def action(command: str, name: str, required=(), defaults=None, **kinds):
    def register(fn):
        ACTIONS[(command, name)] = Action(
            command, name, fn, kinds, tuple(required), defaults or {}
        )
        return fn

    return register


def commands() -> list[str]:
    return sorted({command for command, _ in ACTIONS})


def _reported(report: CheckReport, result=None, **invariants) -> Outcome:
    merged = dict(report.invariants)
    merged.update(invariants)
    return Outcome(
        PASS if report.passed else FAIL, report, merged, result
    )


def _noted(result=None, **invariants) -> Outcome:
    return Outcome(PASS, None, invariants, result)


def _bundle_result(ctx: Context, b: BundleRep) -> Outcome:
    report = validate_cocycle(b, ctx.plan, ctx.tolerances.identity)
    return _reported(report, b, rank=b.rank, charts=b.cover.size)


def _form_result(ctx: Context, f: FormField) -> Outcome:
    report = validate_form(f, ctx.plan, ctx.tolerances.identity)
    return _reported(report, f)


def _k0(ctx: Context, value) -> K0Class:
    if isinstance(value, K0Class):
        return value
    if isinstance(value, BundleRep):
        return K0Class.of(value, ctx.plan)
    positive, negative = value
    return K0Class(positive, negative, ctx.plan)


def _witt(ctx: Context, value) -> WittClass:
    if isinstance(value, WittClass):
        return value
    return WittClass(value, ctx.plan, ctx.r)


# validate


@action("validate", "cocycle", ("bundle",), bundle="bundle")
def validate_bundle(ctx, args):
    b = args["bundle"]
    report = validate_cocycle(b, ctx.plan, ctx.tolerances.identity)
    return _reported(report, rank=b.rank, charts=b.cover.size)


@action("validate", "cover", bundle="bundle")
def validate_cover(ctx, args):
    cover = args["bundle"].cover if "bundle" in args else ctx.cover
    cover.certify(ctx.plan)
    report = validate_partition(
        cover, ctx.r, ctx.plan, ctx.tolerances.identity
    )
    return _reported(report, charts=cover.size)


@action("validate", "form", ("form",), form="form")
def validate_form_task(ctx, args):
    report = validate_form(args["form"], ctx.plan, ctx.tolerances.identity)
    return _reported(report)


@action("validate", "section", ("section",), section="section")
def validate_section_task(ctx, args):
    report = validate_section(
        args["section"], ctx.plan, ctx.tolerances.identity
    )
    return _reported(report)


@action("validate", "morphism", ("witness",), witness="witness")
def validate_morphism(ctx, args):
    w = args["witness"]
    if isinstance(w, IsometryWitness):
        return _reported(check_isometry(w, ctx.plan, ctx.tolerances.witness))
    return _reported(check_isomorphism(w, ctx.plan, ctx.tolerances.witness))


@action("validate", "projector", ("bundle",), bundle="bundle")
def validate_projector_task(ctx, args):
    p = gauss_embedding(args["bundle"], ctx.r, ctx.plan)
    report = validate_projector(p, ctx.plan, ctx.tolerances.gram_schmidt)
    return _reported(report, p, ambient=p.dim)


# invariants


@action("invariants", "det-class", ("bundle",), bundle="bundle")
def det_class_task(ctx, args):
    b = args["bundle"]
    bit = det_class(b, ctx.plan)
    if bit is None:
        raise NotCatalogBase(f"{b.base.name} carries no circle")
    return _noted(**{"det-class": bit})


@action("invariants", "rank", ("bundle",), bundle="bundle")
def rank_task(ctx, args):
    b = args["bundle"]
    return _noted(rank=b.rank, charts=b.cover.size)


@action("invariants", "projector-rank", ("bundle",), bundle="bundle")
def projector_rank_task(ctx, args):
    p = gauss_embedding(args["bundle"], ctx.r, ctx.plan)
    rank = projector_rank(p, ctx.plan, ctx.tolerances.rank)
    return _noted(rank=rank, ambient=p.dim)


# operate


@action(
    "operate", "whitney_sum", ("left", "right"), left="bundle", right="bundle"
)
def whitney_sum_task(ctx, args):
    b = whitney_sum(args["left"], args["right"], ctx.plan)
    return _bundle_result(ctx, b)


@action("operate", "tensor", ("left", "right"), left="bundle", right="bundle")
def tensor_task(ctx, args):
    return _bundle_result(ctx, tensor(args["left"], args["right"], ctx.plan))


@action("operate", "dual", ("bundle",), bundle="bundle")
def dual_task(ctx, args):
    return _bundle_result(ctx, dual(args["bundle"]))


@action("operate", "hom", ("left", "right"), left="bundle", right="bundle")
def hom_task(ctx, args):
    return _bundle_result(ctx, hom(args["left"], args["right"], ctx.plan))


@action("operate", "pullback", ("bundle", "map"), bundle="bundle", map="map")
def pullback_task(ctx, args):
    b = pullback(args["bundle"], args["map"], ctx.base, ctx.plan)
    return _bundle_result(ctx, b)


@action("operate", "complement", ("bundle",), bundle="bundle")
def complement_task(ctx, args):
    return _bundle_result(ctx, complement(args["bundle"], ctx.r, ctx.plan))


@action("operate", "range", ("bundle",), bundle="bundle")
def range_task(ctx, args):
    p = gauss_embedding(args["bundle"], ctx.r, ctx.plan)
    b = bundle_from_projector(p, ctx.plan, ctx.tolerances.minor)
    return _bundle_result(ctx, b)


@action("operate", "splitting", ("bundle",), bundle="bundle")
def splitting_task(ctx, args):
    u = splitting_isomorphism(args["bundle"], ctx.r, ctx.plan)
    report = check_isomorphism(u, ctx.plan, ctx.tolerances.witness)
    return _reported(report, u)


@action("operate", "serre-swan", ("bundle",), bundle="bundle")
def serre_swan_task(ctx, args):
    u = projector_isomorphism(args["bundle"], ctx.r, ctx.plan)
    report = check_isomorphism(u, ctx.plan, ctx.tolerances.witness)
    return _reported(report, u)


@action("operate", "sections", ("bundle",), bundle="bundle", section="section")
def sections_task(ctx, args):
    b = args["bundle"]
    gens = generating_sections(b, ctx.r, ctx.plan)
    if "section" not in args:
        report = CheckReport(f"generators({b.name})", ())
        for g in gens:
            report = report.merged(
                validate_section(g, ctx.plan, ctx.tolerances.identity),
                f"{g.name} ",
            )
        return _reported(report, gens, generators=len(gens))
    s = args["section"]
    coeffs = coefficients(s, gens, ctx.r, ctx.plan)
    residuals, where = [], []
    for k in range(b.cover.size):
        points = b.cover.samples(ctx.plan, k).points
        if len(points) == 0:
            continue
        rebuilt = reconstruct(coeffs, gens, k, points)
        gap = np.abs(rebuilt - evaluate_section(s, k, points))
        residuals.append(gap.max(axis=1, initial=0.0))
        where.append(points)
    check = upper_check(
        "reconstruction",
        np.concatenate(residuals) if residuals else np.zeros(0),
        np.concatenate(where) if where else np.zeros((0, 0)),
        ctx.tolerances.witness,
    )
    report = CheckReport(f"coefficients({s.name})", (check,))
    return _reported(report, coeffs, generators=len(gens))


@action(
    "operate", "orthogonal_sum", ("left", "right"), left="form", right="form"
)
def orthogonal_sum_task(ctx, args):
    f = orthogonal_sum(args["left"], args["right"], ctx.plan)
    return _form_result(ctx, f)


@action("operate", "tensor_form", ("left", "right"), left="form", right="form")
def tensor_form_task(ctx, args):
    f = tensor_form(args["left"], args["right"], ctx.plan)
    return _form_result(ctx, f)


@action("operate", "negate", ("form",), form="form")
def negate_task(ctx, args):
    return _form_result(ctx, negate(args["form"]))


@action("operate", "hyperbolic", ("bundle",), bundle="bundle")
def hyperbolic_task(ctx, args):
    return _form_result(ctx, hyperbolic_space(args["bundle"], ctx.plan))


@action("operate", "standard", ("bundle",), bundle="bundle")
def standard_task(ctx, args):
    f = standard_positive_form(args["bundle"], ctx.r, ctx.plan)
    return _form_result(ctx, f)


@action(
    "operate",
    "positive_isometry",
    ("left", "right"),
    left="form",
    right="form",
)
def positive_isometry_task(ctx, args):
    w = positive_isometry(args["left"], args["right"], ctx.plan)
    return _reported(check_isometry(w, ctx.plan, ctx.tolerances.witness), w)


@action(
    "operate",
    "transversal_isometry",
    ("left", "right"),
    left="form",
    right="form",
)
def transversal_isometry_task(ctx, args):
    w = transversal_isometry(args["left"], args["right"], ctx.r, ctx.plan)
    report = check_isometry(w, ctx.plan, ctx.tolerances.witness)
    return _reported(report, w, type=str(signature(w.source_form, ctx.plan)))


# constructions on sets of the base


def _inside(ctx: Context, s):
    points = sample(s, ctx.plan, box=ctx.base.box).points
    if len(points) == 0:
        return points
    return points[s.contains(points, tol=0.0)]


def _outside(ctx: Context, s):
    points = ctx.cover.samples(ctx.plan).points
    if len(points) == 0:
        return points
    return points[~s.contains(points, tol=0.0)]


def _gap(ctx: Context, name: str, f, points, target):
    values = f.evaluate(points, strict=False)
    return upper_check(
        name, np.abs(values - target), points, ctx.tolerances.identity
    )


@action("operate", "zero_function", ("set",), set="set")
def zero_function_task(ctx, args):
    s = args["set"]
    f = zero_function(s, ctx.r)
    off = _outside(ctx, s)
    report = CheckReport(
        f"zero_function({s})",
        (
            _gap(ctx, "zero", f, _inside(ctx, s), 0.0),
            lower_check("positive", f.evaluate(off, strict=False), off, 0.0),
        ),
    )
    return _reported(report, f, smoothness=f.smoothness)


@action("operate", "support_function", ("set",), set="set")
def support_function_task(ctx, args):
    s = args["set"]
    g = support_function(s, ctx.r)
    on = _inside(ctx, s)
    report = CheckReport(
        f"support_function({s})",
        (
            lower_check("positive", g.evaluate(on, strict=False), on, 0.0),
            _gap(ctx, "zero", g, _outside(ctx, s), 0.0),
        ),
    )
    return _reported(report, g, smoothness=g.smoothness)


@action(
    "operate",
    "separating_function",
    ("left", "right"),
    left="set",
    right="set",
)
def separating_function_task(ctx, args):
    x, y = args["left"], args["right"]
    h = separating_function(x, y, ctx.r, ctx.plan, ctx.base.box)
    report = CheckReport(
        f"separating_function({x}; {y})",
        (
            _gap(ctx, "zero", h, _inside(ctx, x), 0.0),
            _gap(ctx, "one", h, _inside(ctx, y), 1.0),
        ),
    )
    return _reported(report, h, smoothness=h.smoothness)


@action("operate", "shrink_cover", bundle="bundle")
def shrink_cover_task(ctx, args):
    cover = args["bundle"].cover if "bundle" in args else ctx.cover
    shrunk = shrink_cover(cover, ctx.r, ctx.plan)
    report = validate_partition(
        shrunk, ctx.r, ctx.plan, ctx.tolerances.identity
    )
    for i, (v, u) in enumerate(zip(shrunk.charts, cover.charts)):
        points = _inside(ctx, v.closure())
        stray = (~u.contains(points)).astype(float)
        report = report.merged(
            CheckReport(
                f"chart {i}", (upper_check("closure", stray, points, 0.5),)
            ),
            f"chart {i} ",
        )
    return _reported(report, shrunk, charts=shrunk.size)


@action(
    "operate",
    "sample",
    ("set",),
    set="set",
    count="number",
)
def sample_task(ctx, args):
    count = int(args["count"]) if "count" in args else None
    found = sample(args["set"], ctx.plan, count, ctx.base.box)
    extra = {} if found.warning is None else {"warning": found.warning}
    return _noted(found.points, count=len(found), **extra)


@action(
    "operate",
    "evaluate",
    ("expression", "point"),
    expression="expression",
    point="point",
)
def evaluate_task(ctx, args):
    value = evaluate(args["expression"], args["point"])
    return _noted(value, value=value)


# signature


@action("signature", "signature", ("form",), form="form")
def signature_task(ctx, args):
    kind = signature(args["form"], ctx.plan)
    return _noted(
        kind, type=str(kind), signature=kind.difference, rank=kind.rank
    )


@action("signature", "matrix", ("matrix",), matrix="matrix")
def matrix_task(ctx, args):
    s = args["matrix"]
    g, kind = gram_schmidt_frame(s, ctx.tolerances)
    j = np.diag([1.0] * kind.positive + [-1.0] * kind.negative)
    residual = matrix_residuals((g.T @ s @ g)[None], j[None])
    check = upper_check(
        "frame", residual, s.reshape(1, -1), ctx.tolerances.gram_schmidt
    )
    report = CheckReport("gram_schmidt", (check,))
    return _reported(report, g, type=str(kind), signature=kind.difference)


@action("signature", "local", ("form",), form="form")
def local_task(ctx, args):
    local = local_trivializing_cover(args["form"], ctx.plan, ctx.tolerances)
    return _reported(
        local.report,
        local,
        charts=local.cover.size,
        types=[str(kind) for kind in local.types],
    )


# decompose


@action("decompose", "decompose", ("form",), form="form")
def decompose_task(ctx, args):
    dec = decompose(args["form"], ctx.r, ctx.plan)
    report = validate_decomposition(dec, ctx.plan)
    return _reported(report, dec, type=str(dec.signature))


@action(
    "decompose",
    "blend",
    ("form", "frame", "positive"),
    form="form",
    frame="field",
    positive="field",
)
def blend_task(ctx, args):
    f = args["form"]
    blended = blend_positive_subbundle(
        f, args["frame"], args["positive"], None, ctx.r, ctx.plan
    )
    dec = decompose(f, ctx.r, ctx.plan)
    points = f.cover.samples(ctx.plan).points
    gap = matrix_residuals(
        blended.field.evaluate(points, strict=False),
        dec.positive.field.evaluate(points, strict=False),
    )
    report = validate_projector(
        blended, ctx.plan, ctx.tolerances.gram_schmidt
    ).merged(
        CheckReport(
            blended.name,
            (upper_check("agreement", gap, points, ctx.tolerances.witness),),
        )
    )
    return _reported(report, blended)


# homotopy


@action(
    "homotopy",
    "isomorphism",
    ("bundle",),
    {"t0": 0.0, "t1": 1.0},
    bundle="bundle",
    t0="number",
    t1="number",
)
def isomorphism_task(ctx, args):
    u = homotopy_isomorphism(
        args["bundle"], args["t0"], args["t1"], ctx.r, ctx.plan
    )
    report = check_isomorphism(u, ctx.plan, ctx.tolerances.witness)
    extra = {}
    if u.source.base.circle:
        extra["det-classes"] = [
            s1_line_class(u.source),
            s1_line_class(u.target),
        ]
    return _reported(report, u, **extra)


@action(
    "homotopy",
    "isometry",
    ("form",),
    {"t0": 0.0, "t1": 1.0},
    form="form",
    t0="number",
    t1="number",
)
def isometry_task(ctx, args):
    w = homotopy_isometry(
        args["form"], args["t0"], args["t1"], ctx.r, ctx.plan
    )
    report = check_isometry(w, ctx.plan, ctx.tolerances.witness)
    types = [
        str(signature(w.source_form, ctx.plan)),
        str(signature(w.target_form, ctx.plan)),
    ]
    return _reported(report, w, types=types)


@action(
    "homotopy",
    "induced",
    ("bundle", "from", "to", "homotopy"),
    bundle="bundle",
    homotopy="homotopy",
    **{"from": "map", "to": "map"},
)
def induced_task(ctx, args):
    u = induced_iso_from_homotopy(
        args["bundle"],
        args["from"],
        args["to"],
        args["homotopy"],
        ctx.base,
        ctx.r,
        ctx.plan,
    )
    report = check_isomorphism(u, ctx.plan, ctx.tolerances.witness)
    return _reported(report, u)


@action("homotopy", "contractible", ("bundle",), bundle="bundle")
def contractible_task(ctx, args):
    u = trivialize_contractible(args["bundle"], ctx.r, ctx.plan)
    report = check_isomorphism(u, ctx.plan, ctx.tolerances.witness)
    return _reported(report, u)


@action("homotopy", "strips", ("bundle",), bundle="bundle")
def strips_task(ctx, args):
    b = args["bundle"]
    report = CheckReport(f"strips({b.name})", ())
    breakpoints, glued = [], []
    for strips in strip_subdivision(b, ctx.plan):
        trivialization = clutch(b, strips, None, ctx.plan)
        report = report.merged(trivialization.report)
        breakpoints.append(list(strips.breakpoints))
        glued.append(trivialization)
    return _reported(report, glued, breakpoints=breakpoints)


@action(
    "homotopy",
    "restrict",
    ("bundle",),
    {"t": 0.0},
    bundle="bundle",
    t="number",
)
def restrict_task(ctx, args):
    return _bundle_result(ctx, restrict(args["bundle"], args["t"], ctx.plan))


@action(
    "homotopy",
    "retraction",
    ("inner", "outer"),
    inner="set",
    outer="set",
)
def retraction_task(ctx, args):
    u, v = args["inner"], args["outer"]
    r = vertical_retraction(u, v, ctx.r, ctx.plan, ctx.base.box)
    heights = np.linspace(-1.0, 2.0, 7)

    def lifted(points):
        rows = np.repeat(points, len(heights), axis=0)
        t_values = np.tile(heights, len(points))
        return np.column_stack([rows, t_values])

    top, fixed = lifted(_inside(ctx, u.closure())), lifted(_outside(ctx, v))
    tau_top = r.apply(top, strict=False)[:, -1]
    tau_fixed = r.apply(fixed, strict=False)[:, -1]
    tolerance = ctx.tolerances.identity
    report = CheckReport(
        f"retraction({u}; {v})",
        (
            upper_check("top", np.abs(tau_top - 1.0), top, tolerance),
            upper_check(
                "fixed", np.abs(tau_fixed - fixed[:, -1]), fixed, tolerance
            ),
        ),
    )
    return _reported(report, r)


# rings


@action("rings", "k0", ("class",), **{"class": "k0"})
def k0_task(ctx, args):
    k = _k0(ctx, args["class"])
    return _noted(k, **k.invariants())


def _k0_pair(fn):
    def run(ctx, args):
        k = fn(_k0(ctx, args["left"]), _k0(ctx, args["right"]))
        return _noted(k, **k.invariants())

    return run


action("rings", "k0-add", ("left", "right"), left="k0", right="k0")(
    _k0_pair(k0_add)
)
action("rings", "k0-mul", ("left", "right"), left="k0", right="k0")(
    _k0_pair(k0_mul)
)


@action("rings", "k0-neg", ("class",), **{"class": "k0"})
def k0_neg_task(ctx, args):
    k = k0_neg(_k0(ctx, args["class"]))
    return _noted(k, **k.invariants())


@action("rings", "witt", ("form",), form="form")
def witt_task(ctx, args):
    w = _witt(ctx, args["form"])
    return _noted(w, **w.invariants())


def _witt_pair(fn):
    def run(ctx, args):
        w = fn(_witt(ctx, args["left"]), _witt(ctx, args["right"]))
        return _noted(w, **w.invariants())

    return run


action("rings", "witt-add", ("left", "right"), left="form", right="form")(
    _witt_pair(witt_add)
)
action("rings", "witt-mul", ("left", "right"), left="form", right="form")(
    _witt_pair(witt_mul)
)


@action("rings", "witt-neg", ("form",), form="form")
def witt_neg_task(ctx, args):
    w = witt_neg(_witt(ctx, args["form"]))
    return _noted(w, **w.invariants())


@action("rings", "delta", ("class",), **{"class": "k0"})
def delta_task(ctx, args):
    w = delta(_k0(ctx, args["class"]), ctx.r)
    return _noted(w, **w.invariants())


@action("rings", "nabla", ("form",), form="form")
def nabla_task(ctx, args):
    k = nabla(_witt(ctx, args["form"]))
    return _noted(k, **k.invariants())


@action("rings", "roundtrip", form="form", **{"class": "k0"})
def roundtrip_task(ctx, args):
    if "form" in args:
        item = _witt(ctx, args["form"])
    else:
        item = _k0(ctx, args["class"])
    return _reported(roundtrip_check(item, ctx.r))


@action("rings", "witt-zero", ("form",), form="form")
def witt_zero_task(ctx, args):
    verdict = witt_is_zero(_witt(ctx, args["form"]))
    invariants = dict(verdict.invariants)
    if verdict.witness is not None:
        invariants["witness"] = verdict.witness.name
    return Outcome(
        verdict.value.value,
        verdict.report,
        invariants,
        verdict,
        verdict.reason,
    )


@action("rings", "cancellation", ("form",), form="form")
def cancellation_task(ctx, args):
    w = cancellation_witness(_witt(ctx, args["form"]).form, ctx.plan)
    report = check_isometry(w, ctx.plan, ctx.tolerances.gram_schmidt)
    return _reported(report, w)
