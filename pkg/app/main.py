import logging
import sys

import click

from app.cli import load_spec, render, run_spec
from app.config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOLERANCES,
    IDENTITY_TOLERANCE,
    WITNESS_TOLERANCE,
)
from app.errors import CocycleError
from app.exprcore import SamplePlan

COMMANDS = (
    ("validate", "Cocycle, cover, form, section and witness checks."),
    ("invariants", "Ranks, det-classes and projector ranks."),
    ("operate", "Bundle and form constructions, validated."),
    ("signature", "Form types and Gram-Schmidt frames."),
    ("decompose", "Positive/negative decompositions."),
    ("homotopy", "Homotopy-theorem witnesses."),
    ("rings", "K0 and Witt classes, Delta, Nabla, Witt zero."),
)


def _options(fn):
    fn = click.option(
        "--format",
        "style",
        type=click.Choice(["human", "machine"]),
        default="human",
        show_default=True,
    )(fn)
    fn = click.option(
        "--samples",
        type=click.IntRange(min=1),
        default=DEFAULT_SAMPLES,
        show_default=True,
        help="Samples per chart and per overlap.",
    )(fn)
    fn = click.option(
        "--witness-tol",
        type=float,
        default=WITNESS_TOLERANCE,
        show_default=True,
        help="Threshold for witness residuals.",
    )(fn)
    fn = click.option(
        "--tol",
        type=float,
        default=IDENTITY_TOLERANCE,
        show_default=True,
        help="Threshold for identities (cocycle, form, section).",
    )(fn)
    fn = click.option(
        "--seed", type=int, default=DEFAULT_SEED, show_default=True
    )(fn)
    fn = click.argument(
        "spec", type=click.Path(exists=True, dir_okay=False)
    )(fn)
    return fn


def _execute(command, spec, seed, tol, witness_tol, samples, style):
    try:
        document = load_spec(spec)
    except CocycleError as error:
        click.echo(f"error: {error}", err=True)
        sys.exit(2)
    plan = SamplePlan(seed=seed).with_count(samples)
    tolerances = DEFAULT_TOLERANCES.replace(
        identity=tol, witness=witness_tol
    )
    report = run_spec(document, command, plan, tolerances)
    click.echo(render(report, style))
    sys.exit(report.exit_code)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v INFO, -vv DEBUG.")
def cocycle(verbose: int) -> None:
    """Vector bundles and bilinear spaces by transition cocycles."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _subcommand(name: str, summary: str):
    @_options
    def run(spec, seed, tol, witness_tol, samples, style):
        _execute(name, spec, seed, tol, witness_tol, samples, style)

    run.__doc__ = f"{summary} Runs the '{name}' tasks of SPEC."
    return cocycle.command(name)(run)


for _name, _summary in COMMANDS:
    _subcommand(_name, _summary)


@cocycle.command("report")
@_options
def report(spec, seed, tol, witness_tol, samples, style):
    """Runs every task of SPEC."""
    _execute(None, spec, seed, tol, witness_tol, samples, style)


if __name__ == "__main__":
    cocycle()
