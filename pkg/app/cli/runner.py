"""Runs the tasks of a spec document one after another."""

import logging
import time

from app.config import DEFAULT_SMOOTHNESS, DEFAULT_TOLERANCES, Tolerances
from app.errors import CocycleError, UnresolvedReference
from app.exprcore import SamplePlan

from .actions import ACTIONS, Context, Outcome
from .document import SpecDocument, Task, resolve_argument
from .report import ERROR, FAIL, PASS, UNKNOWN, Entry, Report, plain

logger = logging.getLogger(__name__)

# Library outcomes and the statuses they map to when no expectation is set.
STATUS_OF = {
    "pass": PASS,
    "true": PASS,
    "fail": FAIL,
    "false": FAIL,
    "unknown": UNKNOWN,
    "error": ERROR,
}


class Runner:
    def __init__(
        self,
        document: SpecDocument,
        plan: SamplePlan = SamplePlan(),
        tolerances: Tolerances = DEFAULT_TOLERANCES,
        r: int = DEFAULT_SMOOTHNESS,
    ) -> None:
        self.document = document
        self.context = Context(document.cover, plan, tolerances, r)
        self._built: dict[tuple[str, str], object] = {}
        self._stored: dict[str, object] = {}

    def _gen_tasks(self, command: str | None):
        for task in self.document.tasks_for(command):
            yield task

    def resolve(self, kind: str, name: str):
        key = (kind, name)
        if key not in self._built:
            if key not in self.document.declarations:
                raise UnresolvedReference(
                    f"{kind} {name!r} is neither declared nor stored"
                )
            declaration = self.document.declarations[key]
            self._built[key] = declaration.build(self.context, self.resolve)
            logger.debug("built %s %s", kind, name)
        return self._built[key]

    def run(self, command: str | None = None) -> Report:
        entries = tuple(self._run_task(t) for t in self._gen_tasks(command))
        plan = self.context.plan
        return Report(
            self.document.path or "spec", plan.seed, plan.per_chart, entries
        )

    def _run_task(self, task: Task) -> Entry:
        started = time.perf_counter()
        try:
            outcome = self._outcome(task)
        except CocycleError as error:
            logger.warning("%s: %s", task.name, error)
            outcome = Outcome("error", message=error.message)
            point = None if error.point is None else tuple(error.point)
            return self._entry(
                task, outcome, started, type(error).__name__, point
            )
        if task.store_as is not None:
            self._stored[task.store_as] = outcome.result
        return self._entry(task, outcome, started)

    def _outcome(self, task: Task) -> Outcome:
        spec = ACTIONS[(task.command, task.action)]
        args = dict(spec.defaults)
        for key, value in task.args.items():
            args[key] = resolve_argument(
                self.document,
                spec.kinds[key],
                value,
                self.resolve,
                self._stored,
            )
        logger.info("running %s (%s %s)", task.name, task.command, task.action)
        return spec.run(self.context, args)

    def _entry(
        self,
        task: Task,
        outcome: Outcome,
        started: float,
        error: str | None = None,
        point=None,
    ) -> Entry:
        expected = None if task.expect is None else task.expect["outcome"]
        status = _status(task, outcome, error)
        checks = () if outcome.report is None else outcome.report.checks
        return Entry(
            name=task.name,
            command=task.command,
            action=task.action,
            status=status,
            outcome=outcome.outcome,
            expected=expected,
            message=outcome.message,
            checks=checks,
            invariants=plain(outcome.invariants),
            error=error,
            point=point,
            seconds=time.perf_counter() - started,
        )


def _status(task: Task, outcome: Outcome, error: str | None) -> str:
    if task.expect is None:
        return STATUS_OF[outcome.outcome]
    expect = task.expect
    if error is not None and expect["outcome"] != ERROR:
        return ERROR
    if outcome.outcome != expect["outcome"]:
        return FAIL
    if error is not None and expect.get("error", error) != error:
        return FAIL
    wanted = expect.get("invariants", {})
    found = plain(outcome.invariants)
    for key, value in wanted.items():
        if found.get(key) != value:
            return FAIL
    return PASS


def run_spec(
    document: SpecDocument,
    command: str | None = None,
    plan: SamplePlan = SamplePlan(),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    r: int = DEFAULT_SMOOTHNESS,
) -> Report:
    return Runner(document, plan, tolerances, r).run(command)
