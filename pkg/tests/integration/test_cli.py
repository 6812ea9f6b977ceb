import json

import pytest
from click.testing import CliRunner

from app.main import cocycle

SAMPLES = ["--samples", "100"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_spec(tmp_path):
    def write(tasks, base="S1", **parts):
        source = {"base": {"catalog": base}, "tasks": tasks}
        source.update(parts)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(source, indent=2))
        return str(path)

    return write


def _invoke(runner, *args):
    return runner.invoke(cocycle, [*args, *SAMPLES])


def test_help_lists_commands(runner):
    result = runner.invoke(cocycle, ["--help"])
    assert result.exit_code == 0
    for command in ("validate", "homotopy", "rings", "report"):
        assert command in result.output


def test_passing_spec(runner, fixtures_dir):
    result = _invoke(runner, "validate", str(fixtures_dir / "moebius.json"))
    assert result.exit_code == 0
    assert "[PASS   ] moebius is a cocycle" in result.output
    assert result.output.rstrip().endswith("exit 0")


def test_machine_report_is_byte_identical(runner, fixtures_dir):
    args = ("report", str(fixtures_dir / "moebius.json"), "--seed", "7")
    first = _invoke(runner, *args, "--format", "machine")
    second = _invoke(runner, *args, "--format", "machine")
    assert first.exit_code == 0
    assert first.output == second.output
    assert '"seed": 7' in first.output


def test_failure_exits_one(runner, write_spec):
    task = {
        "command": "validate",
        "action": "cocycle",
        "args": {"bundle": "bad"},
    }
    path = write_spec([task], bundles={"bad": {"catalog": "moebius!"}})
    result = _invoke(runner, "validate", path)
    assert result.exit_code == 1
    assert "witness for inverse" in result.output


def test_error_exits_two(runner, write_spec):
    task = {
        "command": "invariants",
        "action": "det-class",
        "args": {"bundle": "eps"},
    }
    path = write_spec(
        [task], base="R", bundles={"eps": {"catalog": "eps1_R"}}
    )
    result = _invoke(runner, "invariants", path)
    assert result.exit_code == 2
    assert "error NotCatalogBase" in result.output


def test_unknown_exits_three(runner, write_spec):
    task = {
        "command": "rings",
        "action": "witt-zero",
        "args": {"form": "plain"},
    }
    path = write_spec(
        [task],
        base="point",
        bundles={"eps2": {"rank": 2}},
        forms={"plain": {"bundle": "eps2", "all": [[1, 0], [-1]]}},
    )
    result = _invoke(runner, "rings", path)
    assert result.exit_code == 3


def test_parse_error_exits_two(runner, fixtures_dir):
    path = str(fixtures_dir / "bad_expression.json")
    result = _invoke(runner, "validate", path)
    assert result.exit_code == 2
    assert "line 10" in result.output
    assert "column" in result.output


def test_other_commands_are_skipped(runner, fixtures_dir):
    result = _invoke(runner, "decompose", str(fixtures_dir / "moebius.json"))
    assert result.exit_code == 0
    assert "0 pass, 0 fail, 0 error, 0 unknown; exit 0" in result.output


def test_sample_count_must_be_positive(runner, fixtures_dir):
    path = str(fixtures_dir / "moebius.json")
    result = runner.invoke(cocycle, ["validate", path, "--samples", "0"])
    assert result.exit_code == 2


def _task(command, action, name, **args):
    return {"command": command, "action": action, "name": name, "args": args}


def test_set_constructions_pass(runner, write_spec):
    tasks = [
        _task("operate", "zero_function", "zero", set=["x0 >= 1"]),
        _task("operate", "support_function", "support", set=["x0 > 0"]),
        _task(
            "operate",
            "separating_function",
            "separate",
            left=[["x0 <= -1"], ["x0 >= 3"]],
            right=["x0 >= 1", "x0 <= 2"],
        ),
        _task("operate", "shrink_cover", "shrink"),
    ]
    path = write_spec(tasks, base="R", charts={"catalog": "R_cover"})
    result = _invoke(runner, "operate", path)
    assert result.exit_code == 0, result.output
    for name in ("zero", "support", "separate", "shrink"):
        assert f"[PASS   ] {name} (operate" in result.output
    assert "charts: 3" in result.output


def test_overlapping_sets_do_not_separate(runner, write_spec):
    task = _task(
        "operate",
        "separating_function",
        "separate",
        left=["x0 <= 1"],
        right=["x0 >= 0"],
    )
    result = _invoke(runner, "operate", write_spec([task], base="R"))
    assert result.exit_code == 2
    assert "error NotDisjoint" in result.output


def test_sample_and_evaluate(runner, write_spec):
    tasks = [
        _task("operate", "sample", "grid", set=["x0 >= 0"], count=5),
        _task(
            "operate", "evaluate", "value", expression="x0^2 + 1", point=[2]
        ),
    ]
    result = _invoke(runner, "operate", write_spec(tasks, base="R"))
    assert result.exit_code == 0, result.output
    assert "count: 5" in result.output
    assert "value: 5" in result.output


def test_point_must_be_a_list_of_numbers(runner, write_spec):
    task = _task(
        "operate", "evaluate", "value", expression="x0", point=[[1, 2]]
    )
    result = _invoke(runner, "operate", write_spec([task], base="R"))
    assert result.exit_code == 2
    assert "expected a list of numbers" in result.output


def test_set_needs_a_relation(runner, write_spec):
    task = _task("operate", "zero_function", "zero", set=["x0 + 1"])
    result = _invoke(runner, "operate", write_spec([task], base="R"))
    assert result.exit_code == 2
    assert "no relation" in result.output


def test_isometry_actions_pass(runner, write_spec):
    tasks = [
        _task(
            "operate", "positive_isometry", "root", left="one", right="two"
        ),
        _task(
            "operate",
            "transversal_isometry",
            "transversal",
            left="split",
            right="scaled",
        ),
    ]
    path = write_spec(
        tasks,
        base="point",
        bundles={"eps2": {"rank": 2}},
        forms={
            "one": {"bundle": "eps2", "all": [[1, 0], [1]]},
            "two": {"bundle": "eps2", "all": [[2, 1], [3]]},
            "split": {"bundle": "eps2", "all": [[1, 0], [-1]]},
            "scaled": {"bundle": "eps2", "all": [[2, 0], [-3]]},
        },
    )
    result = _invoke(runner, "operate", path)
    assert result.exit_code == 0, result.output
    assert "[PASS   ] root (operate positive_isometry)" in result.output
    assert "type: (1,1)" in result.output


def test_retraction_action_passes(runner, write_spec):
    task = _task(
        "homotopy",
        "retraction",
        "lift",
        inner=["x0 > -1", "x0 < 1"],
        outer=["x0 > -2", "x0 < 2"],
    )
    result = _invoke(runner, "homotopy", write_spec([task], base="R"))
    assert result.exit_code == 0, result.output
    assert "[PASS   ] lift (homotopy retraction)" in result.output


def test_retraction_needs_room(runner, write_spec):
    task = _task(
        "homotopy",
        "retraction",
        "lift",
        inner=["x0 > -2", "x0 < 2"],
        outer=["x0 > -1", "x0 < 1"],
    )
    result = _invoke(runner, "homotopy", write_spec([task], base="R"))
    assert result.exit_code == 2
    assert "ContainmentFailure" in result.output
