import math

import numpy as np
import pytest

from app import catalog
from app.config import COVER_MEMO_SIZE
from app.errors import (
    CoverageFailure,
    DimensionMismatch,
    GuardViolation,
    NotDisjoint,
    NotPolynomial,
    OpenSetRejected,
    ParseError,
)
from app.exprcore import (
    Clamp,
    Cover,
    Determinant,
    SamplePlan,
    SemialgebraicSet,
    Sqrt,
    evaluate,
    identity,
    nonnegative,
    parse_expr,
    partition_of_unity,
    positive,
    sample,
    scan,
    separating_function,
    shrink_cover,
    validate_partition,
    var,
    vertical_retraction,
    zero,
    zero_function,
)
from app.exprcore.cover import Base

x0, x1 = var(0), var(1)


def test_evaluate_polynomial():
    assert evaluate(x0**2 + 1, [2.0]) == 5.0


def test_evaluate_sqrt():
    assert evaluate(Sqrt(x0), [4.0]) == 2.0


def test_guarded_quotient_raises_at_zero():
    with pytest.raises(GuardViolation) as info:
        evaluate(1 / x0, [0.0])
    assert info.value.point.tolist() == [0.0]


def test_guarded_quotient_masks_when_not_strict():
    values = (1 / x0).evaluate(np.array([[0.0], [2.0]]), strict=False)
    assert math.isnan(values[0])
    assert values[1] == 0.5


def test_evaluate_checks_dimension():
    with pytest.raises(DimensionMismatch):
        evaluate(x1, [1.0])


def test_shared_subtrees_are_computed_once():
    e = x0
    for _ in range(80):
        e = e + e
    assert evaluate(e, [1.0]) == 2.0**80
    assert e.smoothness == math.inf
    assert e.max_variable() == 0
    assert e.is_polynomial()


def test_substitution_keeps_sharing():
    e = x0
    for _ in range(80):
        e = e * e / (e + 1)
    moved = e.substitute([Clamp(x1, 2), x0])
    assert moved.max_variable() == 1
    values = moved.evaluate(np.array([[0.0, -1.0], [0.0, 2.0]]))
    assert values[0] == 0.0
    assert np.isfinite(values[1])


def test_shared_matrix_fields_are_computed_once():
    m = identity(2)
    for _ in range(80):
        m = (m + m) @ identity(2)
    det = Determinant(m.compose([x0 + 1]))
    values = det.evaluate(np.array([[0.0], [1.0]]))
    assert values.tolist() == [2.0**160, 2.0**160]


def test_smoothness_of_clamp_powers():
    assert Clamp(x0, 1).smoothness == 0
    assert Clamp(x0, 3).smoothness == 2
    assert (x0 * x1).smoothness == math.inf


@pytest.mark.parametrize(
    "text, point, expected",
    [
        ("x0^2 + 1", [2.0], 5.0),
        ("-x0 * (x1 - 3)", [2.0, 1.0], 4.0),
        ("sqrt(x0) + abs(x1)", [9.0, -2.0], 5.0),
        ("min(x0, x1) - max(x0, x1)", [1.0, 4.0], -3.0),
        ("clamp(x0, 2)", [3.0], 9.0),
        ("clamp(x0)", [-3.0], 0.0),
        ("div(1, x0)", [4.0], 0.25),
        ("1/3 + 2/3", [0.0], 1.0),
    ],
)
def test_parse_expr(text, point, expected):
    assert evaluate(parse_expr(text, len(point)), point) == pytest.approx(
        expected, abs=1e-15
    )


def test_parse_t_is_last_coordinate():
    e = parse_expr("t + x0", 3)
    assert evaluate(e, [1.0, 5.0, 2.0]) == 3.0


def test_parse_error_has_column():
    with pytest.raises(ParseError) as info:
        parse_expr("x0 ++ 1", 1)
    assert info.value.column == 5


@pytest.mark.parametrize("text", ["x0 +", "foo(x0)", "(x0", "x0 ^ -1", "y"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_expr(text, 1)


def test_parse_checks_dimension():
    with pytest.raises(DimensionMismatch):
        parse_expr("x2", 2)


def test_membership():
    disk = SemialgebraicSet.basic(2, positive(1 - x0**2 - x1**2))
    inside = disk.contains(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert inside.tolist() == [True, False]


def test_user_conditions_must_be_polynomial():
    s = SemialgebraicSet.basic(1, positive(Sqrt(x0) - 1))
    with pytest.raises(NotPolynomial):
        s.require_polynomial()


def test_sample_circle_lies_on_circle():
    s = SemialgebraicSet.basic(2, zero(x0**2 + x1**2 - 1))
    points = sample(s, SamplePlan(seed=3), 500, ((-2, 2), (-2, 2))).points
    assert len(points) == 500
    assert np.abs((points**2).sum(axis=1) - 1).max() < 1e-12


def test_sample_is_deterministic():
    s = SemialgebraicSet.basic(2, positive(x0), positive(1 - x0 - x1))
    first = sample(s, SamplePlan(seed=7), 300).points
    second = sample(s, SamplePlan(seed=7), 300).points
    assert np.array_equal(first, second)


def test_sample_empty_set_warns():
    s = SemialgebraicSet.basic(1, positive(x0), positive(-x0))
    result = sample(s, SamplePlan(), 100)
    assert len(result) == 0
    assert result.warning is not None


def test_zero_function_of_point():
    f = zero_function(SemialgebraicSet.basic(1, zero(x0)), 0)
    assert evaluate(f, [0.0]) == 0.0
    assert evaluate(f, [0.5]) == 0.25


def test_zero_function_of_half_line():
    f = zero_function(SemialgebraicSet.basic(1, nonnegative(x0 - 1)), 1)
    assert evaluate(f, [2.0]) == 0.0
    assert evaluate(f, [0.0]) == 1.0


def test_zero_function_of_union_matches_membership():
    closed = SemialgebraicSet(
        1, ((nonnegative(-1 - x0),), (nonnegative(x0 - 1),))
    )
    f = zero_function(closed, 1)
    points = scan([[-3, 3]], 1000)
    values = f.evaluate(points)
    assert np.array_equal(values == 0, closed.contains(points, tol=0.0))
    assert (values >= 0).all()


def test_zero_function_in_the_plane():
    closed = SemialgebraicSet(
        2, ((nonnegative(-1 - x0),), (nonnegative(x0 - 1),))
    )
    f = zero_function(closed, 1)
    points = scan([[-3, 3], [-2, 2]], 32)
    assert points.shape == (1024, 2)
    values = f.evaluate(points)
    assert np.array_equal(values == 0, closed.contains(points, tol=0.0))


def test_zero_function_rejects_open_sets():
    with pytest.raises(OpenSetRejected):
        zero_function(SemialgebraicSet.basic(1, positive(x0)))


def test_separating_function_is_exact():
    x = SemialgebraicSet.basic(1, nonnegative(-1 - x0))
    y = SemialgebraicSet.basic(1, nonnegative(x0 - 1))
    h = separating_function(x, y, 1, SamplePlan().with_count(100))
    assert evaluate(h, [-2.0]) == 0.0
    assert evaluate(h, [3.0]) == 1.0
    assert 0.0 < evaluate(h, [0.3]) < 1.0


def test_separating_function_detects_overlap():
    x = SemialgebraicSet.basic(1, nonnegative(-x0))
    y = SemialgebraicSet.basic(1, nonnegative(x0 + 1))
    with pytest.raises(NotDisjoint):
        separating_function(x, y, 1, SamplePlan().with_count(100))


def test_single_chart_partition_is_one(plan):
    cover = Cover.single(catalog.real_line())
    (weight,) = partition_of_unity(cover, 1, plan)
    points = cover.samples(plan).points
    assert np.array_equal(weight.evaluate(points), np.ones(len(points)))


@pytest.mark.parametrize("cover", [catalog.line_cover, catalog.circle_cover])
def test_partition_of_unity_report(cover, plan):
    report = validate_partition(cover(), 1, plan)
    assert report.passed
    assert report["sum"].max_residual < 1e-9


def test_partition_vanishes_off_its_chart(plan):
    cover = catalog.line_cover()
    weights = partition_of_unity(cover, 1, plan)
    points = np.array([[1.0], [2.5], [3.9]])
    assert np.array_equal(weights[0].evaluate(points), np.zeros(3))


def test_shrunk_cover_still_covers(plan):
    cover = catalog.line_cover()
    shrunk = shrink_cover(cover, 1, plan)
    points = cover.samples(plan).points
    assert shrunk.membership(points).any(axis=1).all()


def test_shrinking_a_non_cover_fails(plan):
    line = catalog.real_line()
    gap = Cover(
        line,
        (
            SemialgebraicSet.basic(1, positive(-x0 - 1)),
            SemialgebraicSet.basic(1, positive(x0 - 1)),
        ),
    )
    with pytest.raises(CoverageFailure):
        shrink_cover(gap, 1, plan)


def test_charts_must_be_open():
    line = catalog.real_line()
    with pytest.raises(OpenSetRejected):
        Cover(line, (SemialgebraicSet.basic(1, nonnegative(x0)),))


def test_vertical_retraction():
    u = SemialgebraicSet.basic(1, positive(1 - x0**2))
    v = SemialgebraicSet.basic(1, positive(4 - x0**2))
    r = vertical_retraction(u, v, 1, SamplePlan().with_count(100))
    points = np.array([[0.0, 0.0], [3.0, 0.3], [1.5, 0.0]])
    tau = r.apply(points)[:, 1]
    assert tau[0] == 1.0
    assert tau[1] == pytest.approx(0.3, abs=1e-15)
    assert 0.0 < tau[2] < 1.0


def test_base_sample_uses_box(plan):
    base = Base(
        "I",
        SemialgebraicSet.basic(1, positive(x0), positive(1 - x0)),
        ((0.0, 1.0),),
    )
    points = base.sample(plan).points
    assert ((points > 0) & (points < 1)).all()


def test_cover_memo_keeps_the_latest_entries():
    cover = Cover.single(catalog.real_line())
    built = []

    def builder(key):
        def build():
            built.append(key)
            return key

        return build

    for key in range(COVER_MEMO_SIZE + 5):
        cover.cached(("scratch", key), builder(key))
    last = COVER_MEMO_SIZE + 4
    assert cover.cached(("scratch", last), builder(last)) == last
    assert built.count(last) == 1
    cover.cached(("scratch", 0), builder(0))
    assert built.count(0) == 2
