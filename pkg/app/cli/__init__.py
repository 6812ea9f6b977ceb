from app.cli.actions import ACTIONS, Action, Context, Outcome, commands
from app.cli.document import SpecDocument, Task, load_spec, parse_spec
from app.cli.report import Entry, Report, render, render_human, render_machine
from app.cli.runner import Runner, run_spec

__all__ = (
    "ACTIONS",
    "Action",
    "Context",
    "Entry",
    "Outcome",
    "Report",
    "Runner",
    "SpecDocument",
    "Task",
    "commands",
    "load_spec",
    "parse_spec",
    "render",
    "render_human",
    "render_machine",
    "run_spec",
)
