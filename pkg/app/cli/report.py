"""Run reports and their two renderings.

The machine rendering is JSON with sorted keys and no timing, so equal
seeds give byte-identical output. The human rendering shows the same
entries plus wall time.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from app.certificate import Check

PASS, FAIL, ERROR, UNKNOWN = "pass", "fail", "error", "unknown"
STATUSES = (PASS, FAIL, ERROR, UNKNOWN)

# Exit codes; errors win over failures, failures over unknowns.
EXIT_CODES = {PASS: 0, FAIL: 1, ERROR: 2, UNKNOWN: 3}
PRIORITY = (ERROR, FAIL, UNKNOWN)


@dataclass(frozen=True)
class Entry:
    name: str
    command: str
    action: str
    status: str
    outcome: str
    expected: str | None = None
    message: str = ""
    checks: tuple[Check, ...] = ()
    invariants: dict = field(default_factory=dict)
    error: str | None = None
    point: tuple[float, ...] | None = None
    seconds: float = 0.0

    @property
    def max_residual(self) -> float:
        upper = [c.max_residual for c in self.checks if c.kind == "upper"]
        return max(upper, default=0.0)

    @property
    def mean_residual(self) -> float:
        upper = [c.mean_residual for c in self.checks if c.kind == "upper"]
        return float(np.mean(upper)) if upper else 0.0

    @property
    def witnesses(self) -> list[dict]:
        return [
            {"check": c.name, "point": [float(v) for v in c.witness]}
            for c in self.checks
            if not c.passed and c.witness is not None
        ]

    def as_dict(self) -> dict:
        entry = {
            "name": self.name,
            "command": self.command,
            "action": self.action,
            "status": self.status,
            "outcome": self.outcome,
            "residual": {
                "max": self.max_residual,
                "mean": self.mean_residual,
            },
            "checks": [c.as_dict() for c in self.checks],
            "invariants": self.invariants,
            "witnesses": self.witnesses,
        }
        if self.expected is not None:
            entry["expected"] = self.expected
        if self.message:
            entry["message"] = self.message
        if self.error is not None:
            entry["error"] = self.error
            entry["point"] = None if self.point is None else list(self.point)
        return entry


@dataclass(frozen=True)
class Report:
    subject: str
    seed: int
    samples: int
    entries: tuple[Entry, ...]

    def counts(self) -> dict[str, int]:
        return {
            status: sum(e.status == status for e in self.entries)
            for status in STATUSES
        }

    @property
    def status(self) -> str:
        seen = {e.status for e in self.entries}
        for status in PRIORITY:
            if status in seen:
                return status
        return PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "seed": self.seed,
            "samples": self.samples,
            "status": self.status,
            "counts": self.counts(),
            "entries": [e.as_dict() for e in self.entries],
        }


def plain(value):
    """JSON-ready copy: numpy scalars and arrays become Python values,
    non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if value is None or isinstance(value, str):
        return value
    return str(value)


def render_machine(report: Report) -> str:
    return json.dumps(plain(report.as_dict()), sort_keys=True, indent=2)


def _number(value: float) -> str:
    return f"{value:.3g}"


def _invariant(value) -> str:
    if isinstance(value, dict):
        return "{" + ", ".join(
            f"{k}: {_invariant(v)}" for k, v in value.items()
        ) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_invariant(v) for v in value) + "]"
    if isinstance(value, float):
        return _number(value)
    return str(value)


def render_human(report: Report) -> str:
    lines = [
        f"{report.subject}  seed {report.seed}  "
        f"samples {report.samples}"
    ]
    for e in report.entries:
        head = f"[{e.status.upper():7}] {e.name} ({e.command} {e.action})"
        if e.expected is not None:
            head += f"  {e.outcome}, expected {e.expected}"
        elif e.outcome != e.status:
            head += f"  {e.outcome}"
        lines.append(f"{head}  {e.seconds:.3f} s")
        if e.checks:
            lines.append(
                f"          residual max {_number(e.max_residual)} "
                f"mean {_number(e.mean_residual)} "
                f"over {len(e.checks)} checks"
            )
        for c in e.checks:
            if not c.passed:
                lines.append(
                    f"          {c.name}: {_number(c.max_residual)} "
                    f"vs {_number(c.threshold)}"
                )
        for w in e.witnesses:
            point = ", ".join(_number(v) for v in w["point"])
            lines.append(f"          witness for {w['check']}: ({point})")
        for key, value in e.invariants.items():
            lines.append(f"          {key}: {_invariant(value)}")
        if e.message:
            lines.append(f"          {e.message}")
        if e.error is not None:
            lines.append(f"          error {e.error}")
    counts = report.counts()
    lines.append(
        ", ".join(f"{counts[s]} {s}" for s in STATUSES)
        + f"; exit {report.exit_code}"
    )
    return "\n".join(lines)


def render(report: Report, style: str) -> str:
    if style == "machine":
        return render_machine(report)
    return render_human(report)
