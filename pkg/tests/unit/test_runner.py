import json

import numpy as np
import pytest

from app.cli import (
    ACTIONS,
    Runner,
    commands,
    load_spec,
    parse_spec,
    render_human,
    render_machine,
    run_spec,
)
from app.cli.report import Entry, Report, plain


def _spec(tasks, **parts):
    source = {"base": {"catalog": "S1"}, "tasks": tasks}
    source.update(parts)
    return parse_spec(json.dumps(source))


def _cocycle_task(bundle, **extra):
    task = {
        "command": "validate",
        "action": "cocycle",
        "args": {"bundle": bundle},
    }
    task.update(extra)
    return task


MOEBIUS = {"m": {"catalog": "moebius"}, "bad": {"catalog": "moebius!"}}


def test_every_command_has_actions():
    assert commands() == [
        "decompose",
        "homotopy",
        "invariants",
        "operate",
        "rings",
        "signature",
        "validate",
    ]
    for spec in ACTIONS.values():
        assert set(spec.required) <= set(spec.kinds)


@pytest.mark.parametrize("name", ["moebius.json", "point.json"])
def test_fixture_expectations_hold(name, fixtures_dir, plan):
    report = run_spec(load_spec(str(fixtures_dir / name)), plan=plan)
    failed = [e.name for e in report.entries if e.status != "pass"]
    assert failed == []
    assert report.exit_code == 0


def test_command_filter(fixtures_dir, plan):
    doc = load_spec(str(fixtures_dir / "moebius.json"))
    report = run_spec(doc, "invariants", plan)
    assert [e.action for e in report.entries] == ["det-class", "det-class"]
    assert report.entries[1].status == "error"


def test_stored_result_feeds_later_tasks(fixtures_dir, plan):
    doc = load_spec(str(fixtures_dir / "moebius.json"))
    runner = Runner(doc, plan)
    report = runner.run()
    entry = next(e for e in report.entries if e.name.endswith("untwisted"))
    assert entry.invariants == {"det-class": 0}


def test_outcomes_without_expectations(plan):
    doc = _spec([_cocycle_task("m"), _cocycle_task("bad")], bundles=MOEBIUS)
    report = run_spec(doc, plan=plan)
    assert [e.status for e in report.entries] == ["pass", "fail"]
    assert report.status == "fail"
    assert report.exit_code == 1
    checks = [w["check"] for w in report.entries[1].witnesses]
    assert "inverse" in checks


def test_expected_failure_passes(plan):
    doc = _spec([_cocycle_task("bad", expect="fail")], bundles=MOEBIUS)
    (entry,) = run_spec(doc, plan=plan).entries
    assert (entry.outcome, entry.expected, entry.status) == (
        "fail",
        "fail",
        "pass",
    )


def test_unmet_invariant_fails(plan):
    task = {
        "command": "invariants",
        "action": "det-class",
        "args": {"bundle": "m"},
        "expect": {"outcome": "pass", "invariants": {"det-class": 0}},
    }
    (entry,) = run_spec(_spec([task], bundles=MOEBIUS), plan=plan).entries
    assert entry.outcome == "pass"
    assert entry.status == "fail"


def test_library_errors_become_entries(plan):
    task = {
        "command": "invariants",
        "action": "det-class",
        "args": {"bundle": "eps"},
    }
    doc = parse_spec(
        json.dumps(
            {
                "base": {"catalog": "R"},
                "bundles": {"eps": {"catalog": "eps1_R"}},
                "tasks": [task],
            }
        )
    )
    report = run_spec(doc, plan=plan)
    (entry,) = report.entries
    assert entry.status == "error"
    assert entry.error == "NotCatalogBase"
    assert report.exit_code == 2


def test_error_beats_failure():
    entries = tuple(
        Entry("t", "validate", "cocycle", status, status)
        for status in ("unknown", "fail", "error", "pass")
    )
    report = Report("spec", 0, 10, entries)
    assert report.status == "error"
    assert report.counts() == {"pass": 1, "fail": 1, "error": 1, "unknown": 1}
    assert Report("spec", 0, 10, entries[:1]).exit_code == 3
    assert Report("spec", 0, 10, ()).exit_code == 0


def test_machine_rendering_is_reproducible(fixtures_dir, plan):
    doc = load_spec(str(fixtures_dir / "point.json"))
    first = render_machine(run_spec(doc, plan=plan))
    second = render_machine(run_spec(doc, plan=plan))
    assert first == second
    data = json.loads(first)
    assert data["seed"] == plan.seed
    assert data["status"] == "pass"
    assert "seconds" not in first


def test_human_rendering(plan):
    doc = _spec([_cocycle_task("bad")], bundles=MOEBIUS)
    text = render_human(run_spec(doc, plan=plan))
    assert "[FAIL   ]" in text
    assert "witness for inverse" in text
    assert text.endswith("0 pass, 1 fail, 0 error, 0 unknown; exit 1")


def test_plain_values():
    value = {
        "a": np.float64(0.5),
        "b": np.array([1, 2]),
        "c": float("inf"),
        "d": np.bool_(True),
        3: (np.int64(4), None),
    }
    assert plain(value) == {
        "a": 0.5,
        "b": [1, 2],
        "c": "inf",
        "d": True,
        "3": [4, None],
    }
