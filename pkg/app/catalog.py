"""Built-in bases, covers, bundles, forms and witnesses.

Everything here is a named zero-argument builder in `CATALOG`, which is
what spec files reach through `{"catalog": "<name>"}`. Builders are
cached so that repeated references share covers and their samples.
"""

import functools
import math
import typing as t

import numpy as np

from app.bilinear import (
    FormField,
    IsometryWitness,
    constant_form,
    hyperbolic_space,
    orthogonal_sum,
    symmetric,
)
from app.bundle import BundleRep, MorphismField, trivial_bundle, whitney_sum
from app.exprcore import (
    Base,
    Cover,
    ExprMap,
    ExprMatrix,
    SemialgebraicSet,
    Sqrt,
    positive,
    var,
    zero,
)
from app.homotopy import cylinder_base, cylinder_pullback

x0, x1 = var(0), var(1)

STRIP_INTERVALS = ((-math.inf, 0.6), (0.4, math.inf))
FAMILY_SEED = 0


@functools.cache
def point() -> Base:
    return Base("point", SemialgebraicSet.whole(0), (), star_center=())


@functools.cache
def real_line() -> Base:
    return Base(
        "R", SemialgebraicSet.whole(1), ((-4.0, 4.0),), star_center=(0.0,)
    )


@functools.cache
def plane() -> Base:
    return Base(
        "R2",
        SemialgebraicSet.whole(2),
        ((-3.0, 3.0), (-3.0, 3.0)),
        star_center=(0.0, 0.0),
    )


@functools.cache
def circle() -> Base:
    return Base(
        "S1",
        SemialgebraicSet.basic(2, zero(x0**2 + x1**2 - 1)),
        ((-1.5, 1.5), (-1.5, 1.5)),
        circle=True,
    )


@functools.cache
def circle_cylinder() -> Base:
    return cylinder_base(circle())


@functools.cache
def point_cover() -> Cover:
    return Cover.single(point(), "pt")


@functools.cache
def line_cover() -> Cover:
    """{x0 < 0}, {-1 < x0 < 1}, {x0 > 0}."""
    charts = (
        SemialgebraicSet.basic(1, positive(-x0)),
        SemialgebraicSet.basic(1, positive(1 + x0), positive(1 - x0)),
        SemialgebraicSet.basic(1, positive(x0)),
    )
    return Cover(real_line(), charts, ("L", "M", "R"))


@functools.cache
def plane_cover() -> Cover:
    charts = (
        SemialgebraicSet.basic(2, positive(1 - x0)),
        SemialgebraicSet.basic(2, positive(x0 + 1)),
    )
    return Cover(plane(), charts, ("U1", "U2"))


@functools.cache
def circle_cover() -> Cover:
    """East {x0 > -1/2} and west {x0 < 1/2}; they meet in two arcs."""
    charts = (
        SemialgebraicSet.basic(2, positive(x0 + 0.5)),
        SemialgebraicSet.basic(2, positive(0.5 - x0)),
    )
    return Cover(circle(), charts, ("E", "W"))


@functools.cache
def circle_arcs(n: int) -> Cover:
    """n arcs around the circle, each reaching 3/4 of the way to the
    centers of its neighbours."""
    if n < 2:
        raise ValueError("an arc cover needs at least two arcs")
    reach = math.cos(1.5 * math.pi / n)
    charts = []
    for k in range(n):
        angle = 2 * math.pi * k / n
        direction = math.cos(angle) * x0 + math.sin(angle) * x1
        charts.append(SemialgebraicSet.basic(2, positive(direction - reach)))
    names = tuple(f"A{k}" for k in range(n))
    return Cover(circle(), tuple(charts), names)


def epsilon(cover: Cover, rank: int) -> BundleRep:
    return trivial_bundle(cover, rank, f"eps{rank}")


def _sign_x1():
    return x1 / Sqrt(x1**2, positive=True)


@functools.cache
def moebius() -> BundleRep:
    """g_EW = sign(x1): +1 on the upper arc, -1 on the lower one."""
    g = ExprMatrix.of([[_sign_x1()]])
    return BundleRep(circle_cover(), 1, {(0, 1): g}, "moebius")


@functools.cache
def corrupted_moebius() -> BundleRep:
    """Möbius with g_WE = 1 stored as well; fails g_EW g_WE = 1."""
    transitions = {
        (0, 1): ExprMatrix.of([[_sign_x1()]]),
        (1, 0): ExprMatrix.of([[1]]),
    }
    return BundleRep(circle_cover(), 1, transitions, "moebius!")


@functools.cache
def moebius_arcs(n: int) -> BundleRep:
    """The twist sits on the overlap of the last and the first arc."""
    if n < 3:
        raise ValueError("two arcs meet twice; use moebius()")
    transitions = {
        (k, (k + 1) % n): ExprMatrix.of([[-1 if k == n - 1 else 1]])
        for k in range(n)
    }
    cover = circle_arcs(n)
    return BundleRep(cover, 1, transitions, f"moebius{n}")


@functools.cache
def moebius_cylinder() -> BundleRep:
    return cylinder_pullback(moebius(), STRIP_INTERVALS).renamed(
        "moebius_cylinder"
    )


@functools.cache
def scrambled_plane_bundle() -> BundleRep:
    """g_12 = A1^-1 A2 with A1 = [[1, x1], [0, 1]], A2 = [[2, 0], [x0, 1]].

    Trivial, with trivializations A1 and A2 on the two charts.
    """
    g = ExprMatrix.of([[2 - x0 * x1, -x1], [x0, 1]])
    return BundleRep(plane_cover(), 2, {(0, 1): g}, "scrambled")


def scrambled_trivialization() -> MorphismField:
    b = scrambled_plane_bundle()
    maps = (
        ExprMatrix.of([[1, x1], [0, 1]]),
        ExprMatrix.of([[2, 0], [x0, 1]]),
    )
    return MorphismField(b, epsilon(b.cover, 2), maps, "scrambled->eps2")


def unit_form(cover: Cover, value: int = 1) -> FormField:
    return constant_form(
        epsilon(cover, 1), [[value]], "<1>" if value > 0 else "<-1>"
    )


def diagonal_form(cover: Cover, values: t.Sequence[float]) -> FormField:
    label = ",".join(f"{v:g}" for v in values)
    return constant_form(
        epsilon(cover, len(values)), np.diag(values), f"<{label}>"
    )


@functools.cache
def moebius_unit_form() -> FormField:
    """<1> on the Möbius bundle: a positive form with a twisted bundle."""
    return constant_form(moebius(), [[1]], "<1>_moebius")


def spd_pair(seed: int = FAMILY_SEED) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    pair = []
    for _ in range(2):
        a = rng.standard_normal((2, 2))
        pair.append(a @ a.T + np.eye(2))
    return pair[0], pair[1]


def _cylinder_trivial(rank: int) -> BundleRep:
    return cylinder_pullback(epsilon(circle_cover(), rank), STRIP_INTERVALS)


@functools.cache
def spd_family(seed: int = FAMILY_SEED) -> FormField:
    """(1 - t) s + t s' on eps2 over the circle cylinder."""
    start, end = spd_pair(seed)
    tvar = var(2)
    upper = [
        [
            (1 - tvar) * float(start[i, j]) + tvar * float(end[i, j])
            for j in range(i, 2)
        ]
        for i in range(2)
    ]
    b = _cylinder_trivial(2)
    field = symmetric(upper)
    return FormField(
        b, tuple(field for _ in range(b.cover.size)), "spd_family"
    )


@functools.cache
def indefinite_cylinder_form() -> FormField:
    return constant_form(
        _cylinder_trivial(2), np.diag([1.0, -1.0]), "<1,-1>_cylinder"
    )


@functools.cache
def sheared_cylinder_form() -> FormField:
    """[[1, t], [t, -1]]: type (1, 1) with moving positive line."""
    tvar = var(2)
    b = _cylinder_trivial(2)
    field = symmetric([[1, tvar], [-1]])
    return FormField(
        b, tuple(field for _ in range(b.cover.size)), "sheared_cylinder"
    )


def antipodal_homotopy() -> ExprMap:
    """S1 x R -> S1 from the identity (t = 0) to x -> -x (t = 1).

    q = (1 - 2t) x + 4t(1 - t) Jx with Jx = (-x1, x0), normalized.
    """
    tvar = var(2)
    bend = 4 * tvar * (1 - tvar)
    q0 = (1 - 2 * tvar) * x0 - bend * x1
    q1 = (1 - 2 * tvar) * x1 + bend * x0
    norm = Sqrt(q0**2 + q1**2, positive=True)
    return ExprMap([q0 / norm, q1 / norm], 3)


def antipodal_map() -> ExprMap:
    return ExprMap([-x0, -x1], 2)


def moebius_sum_witness() -> IsometryWitness:
    """M + M -> eps2 by half-angle rotations, isometric for the unit forms.

    On E, (c, s) = (1 + x0, x1) / sqrt(2 + 2 x0); on W,
    (c, s) = (x1, 1 - x0) / sqrt(2 - 2 x0).
    """
    twisted = moebius_unit_form()
    source = orthogonal_sum(twisted, twisted)
    target = constant_form(epsilon(circle_cover(), 2), np.eye(2), "<1,1>")
    east = Sqrt(2 + 2 * x0, positive=True)
    west = Sqrt(2 - 2 * x0, positive=True)
    maps = tuple(
        _rotation(c, s)
        for c, s in (
            ((1 + x0) / east, x1 / east),
            (x1 / west, (1 - x0) / west),
        )
    )
    morphism = MorphismField(
        source.bundle, target.bundle, maps, "moebius+moebius->eps2"
    )
    return IsometryWitness(morphism, source, target)


def _rotation(c, s) -> ExprMatrix:
    return ExprMatrix.of([[c, -s], [s, c]])


def moebius_sum() -> BundleRep:
    return whitney_sum(moebius(), moebius())


CATALOG: dict[str, t.Callable[[], object]] = {
    "point": point,
    "R": real_line,
    "R2": plane,
    "S1": circle,
    "S1xR": circle_cylinder,
    "point_cover": point_cover,
    "R_cover": line_cover,
    "R2_cover": plane_cover,
    "S1_cover": circle_cover,
    "S1_arcs3": lambda: circle_arcs(3),
    "S1_arcs4": lambda: circle_arcs(4),
    "eps1_point": lambda: epsilon(point_cover(), 1),
    "eps1_R": lambda: epsilon(line_cover(), 1),
    "eps2_R2": lambda: epsilon(plane_cover(), 2),
    "eps1_S1": lambda: epsilon(circle_cover(), 1),
    "eps2_S1": lambda: epsilon(circle_cover(), 2),
    "moebius": moebius,
    "moebius!": corrupted_moebius,
    "moebius3": lambda: moebius_arcs(3),
    "moebius_sum": moebius_sum,
    "moebius_cylinder": moebius_cylinder,
    "scrambled": scrambled_plane_bundle,
    "scrambled_trivialization": scrambled_trivialization,
    "unit_point": lambda: unit_form(point_cover()),
    "minus_unit_point": lambda: unit_form(point_cover(), -1),
    "unit_S1": lambda: unit_form(circle_cover()),
    "minus_unit_S1": lambda: unit_form(circle_cover(), -1),
    "diag_1_1_-1": lambda: diagonal_form(point_cover(), (1, 1, -1)),
    "hyperbolic1": lambda: hyperbolic_space(epsilon(point_cover(), 1)),
    "hyperbolic1_S1": lambda: hyperbolic_space(epsilon(circle_cover(), 1)),
    "hyperbolic_moebius": lambda: hyperbolic_space(moebius()),
    "moebius_unit": moebius_unit_form,
    "spd_family": spd_family,
    "indefinite_cylinder": indefinite_cylinder_form,
    "sheared_cylinder": sheared_cylinder_form,
    "antipodal_homotopy": antipodal_homotopy,
    "antipodal": antipodal_map,
    "moebius_sum_witness": moebius_sum_witness,
}


def lookup(name: str):
    """The catalog item called `name`; KeyError for unknown names."""
    return CATALOG[name]()
