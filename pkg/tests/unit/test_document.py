import json

import pytest

from app.cli import load_spec, parse_spec
from app.errors import BaseMismatch, ParseError, UnresolvedReference


def _position(text, fragment, shift=0):
    """1-based line and column of `fragment`, moved `shift` characters."""
    for number, line in enumerate(text.splitlines(), start=1):
        if fragment in line:
            return number, line.index(fragment) + 1 + shift
    raise AssertionError(f"{fragment} not in text")


def _spec(**parts):
    source = {"base": {"catalog": "S1"}}
    source.update(parts)
    return json.dumps(source, indent=2)


def test_moebius_document(fixtures_dir):
    doc = load_spec(str(fixtures_dir / "moebius.json"))
    assert doc.names("bundle") == ["moebius"]
    assert doc.cover.names == ("E", "W")
    assert doc.base.circle
    assert len(doc.tasks) == 9
    assert [t.name for t in doc.tasks_for("rings")] == [
        "hyperbolic moebius vanishes"
    ]


def test_document_survives_dumps(fixtures_dir):
    for name in ("moebius.json", "cylinder.json", "point.json"):
        doc = load_spec(str(fixtures_dir / name))
        assert parse_spec(doc.dumps()) == doc


def test_misspelled_chart_is_located(fixtures_dir):
    path = fixtures_dir / "moebius_typo.json"
    with pytest.raises(UnresolvedReference) as info:
        load_spec(str(path))
    line, column = _position(path.read_text(), '"E,Wst"', 1)
    assert (info.value.line, info.value.column) == (line, column)
    assert "Wst" in info.value.message


def test_bad_expression_is_located(fixtures_dir):
    path = fixtures_dir / "bad_expression.json"
    with pytest.raises(ParseError) as info:
        load_spec(str(path))
    line, column = _position(path.read_text(), '"x0 ++ 1"', 5)
    assert (info.value.line, info.value.column) == (line, column)
    assert str(path) in str(info.value)


def test_bad_condition_is_located():
    text = _spec(charts={"E": "x0 > -1/2", "W": "x0 < * 1/2"})
    with pytest.raises(ParseError) as info:
        parse_spec(text)
    assert info.value.line == _position(text, '"x0 < * 1/2"')[0]


def test_invalid_json():
    with pytest.raises(ParseError) as info:
        parse_spec('{"base": {"catalog": "S1"},\n  "tasks": [}')
    assert info.value.line == 2


@pytest.mark.parametrize(
    "text",
    [
        json.dumps({"base": {"catalog": "S1"}, "extra": {}}),
        json.dumps({"version": 2, "base": {"catalog": "S1"}}),
        json.dumps({"charts": {"E": "x0 > 0"}}),
        json.dumps({"base": {"catalog": "S1_cover"}}),
        _spec(charts={"E": "x0"}),
        _spec(bundles={"b": {"transitions": {}}}),
        _spec(bundles={"b": {"rank": 1, "transitions": {"E": [[1]]}}}),
    ],
)
def test_malformed_documents(text):
    with pytest.raises(ParseError):
        parse_spec(text)


def test_unknown_catalog_item():
    with pytest.raises(UnresolvedReference):
        parse_spec(json.dumps({"base": {"catalog": "torus"}}))


def test_catalog_cover_must_match_the_base():
    text = json.dumps(
        {"base": {"catalog": "point"}, "charts": {"catalog": "S1_cover"}}
    )
    with pytest.raises(BaseMismatch):
        parse_spec(text)


def test_catalog_bundle_must_match_the_base():
    text = json.dumps(
        {"base": {"catalog": "R"}, "bundles": {"m": {"catalog": "moebius"}}}
    )
    with pytest.raises(BaseMismatch):
        parse_spec(text)


def test_unknown_operand():
    text = _spec(bundles={"twice": {"of": "whitney_sum", "args": ["m", "m"]}})
    with pytest.raises(UnresolvedReference):
        parse_spec(text)


def test_self_reference():
    text = _spec(
        forms={
            "a": {"of": "negate", "args": ["b"]},
            "b": {"of": "negate", "args": ["a"]},
        }
    )
    with pytest.raises(ParseError, match="refers to itself"):
        parse_spec(text)


@pytest.mark.parametrize(
    "task",
    [
        {"command": "validate", "action": "cocylce", "args": {"bundle": "m"}},
        {"command": "validate", "action": "cocycle", "args": {"bundle": "n"}},
    ],
)
def test_unresolved_tasks(task):
    text = _spec(bundles={"m": {"catalog": "moebius"}}, tasks=[task])
    with pytest.raises(UnresolvedReference):
        parse_spec(text)


@pytest.mark.parametrize(
    "task",
    [
        {"command": "validate", "action": "cocycle"},
        {
            "command": "validate",
            "action": "cocycle",
            "args": {"bundle": "m", "form": "m"},
        },
        {
            "command": "validate",
            "action": "cocycle",
            "args": {"bundle": "m"},
            "expect": "maybe",
        },
        {
            "command": "homotopy",
            "action": "restrict",
            "args": {"bundle": "m", "t": "half"},
        },
    ],
)
def test_malformed_tasks(task):
    text = _spec(bundles={"m": {"catalog": "moebius"}}, tasks=[task])
    with pytest.raises(ParseError):
        parse_spec(text)


def test_stored_results_can_be_named():
    text = _spec(
        bundles={"m": {"catalog": "moebius"}},
        tasks=[
            {
                "command": "operate",
                "action": "dual",
                "args": {"bundle": "m"},
                "as": "m_dual",
            },
            {
                "command": "invariants",
                "action": "det-class",
                "args": {"bundle": "m_dual"},
            },
        ],
    )
    doc = parse_spec(text)
    assert doc.tasks[0].store_as == "m_dual"
    assert doc.tasks[1].name == "task 2"


def test_omitted_charts_give_one_chart():
    doc = parse_spec(json.dumps({"base": {"catalog": "point"}}))
    assert doc.cover.size == 1


def test_explicit_base():
    text = json.dumps(
        {
            "base": {
                "dim": 1,
                "conditions": ["x0 > 0", "x0 < 1"],
                "box": [[0, 1]],
                "star_center": [0.5],
                "name": "I",
            }
        }
    )
    doc = parse_spec(text)
    assert doc.base.name == "I"
    assert doc.base.dim == 1
    assert doc.base.star_center == (0.5,)


def test_product_cover(fixtures_dir):
    doc = load_spec(str(fixtures_dir / "cylinder.json"))
    assert doc.base.slice is not None
    assert doc.cover.size == 4
