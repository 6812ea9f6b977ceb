"""Sample-based certificates.

Every validation in the library reduces point-wise residuals to a
`Check` (max / mean over the samples, pass flag, worst point) and
collects the checks of one subject into a `CheckReport`.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    max_residual: float
    mean_residual: float
    samples: int
    threshold: float
    witness: np.ndarray | None = field(default=None, compare=False)
    kind: str = "upper"

    def as_dict(self) -> dict:
        entry = {
            "name": self.name,
            "passed": self.passed,
            "max": self.max_residual,
            "mean": self.mean_residual,
            "samples": self.samples,
            "threshold": self.threshold,
            "kind": self.kind,
        }
        if self.witness is not None:
            entry["witness"] = [float(v) for v in self.witness]
        return entry


@dataclass(frozen=True)
class CheckReport:
    subject: str
    checks: tuple[Check, ...]
    invariants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_residual(self) -> float:
        residuals = [
            c.max_residual
            for c in self.checks
            if c.samples and c.kind == "upper"
        ]
        return max(residuals, default=0.0)

    @property
    def mean_residual(self) -> float:
        residuals = [
            c.mean_residual
            for c in self.checks
            if c.samples and c.kind == "upper"
        ]
        return float(np.mean(residuals)) if residuals else 0.0

    @property
    def witnesses(self) -> list[np.ndarray]:
        return [
            c.witness
            for c in self.checks
            if not c.passed and c.witness is not None
        ]

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def merged(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        extra = tuple(
            Check(
                name=prefix + c.name,
                passed=c.passed,
                max_residual=c.max_residual,
                mean_residual=c.mean_residual,
                samples=c.samples,
                threshold=c.threshold,
                witness=c.witness,
                kind=c.kind,
            )
            for c in other.checks
        )
        invariants = dict(self.invariants)
        invariants.update(other.invariants)
        return CheckReport(self.subject, self.checks + extra, invariants)


def upper_check(name, residuals, points, threshold) -> Check:
    """Passes iff every residual is below `threshold`; NaN counts as inf."""
    residuals = np.asarray(residuals, dtype=float).reshape(-1)
    residuals = np.where(np.isnan(residuals), np.inf, residuals)
    if residuals.size == 0:
        return Check(name, True, 0.0, 0.0, 0, threshold)
    worst = int(np.argmax(residuals))
    passed = bool(residuals[worst] < threshold)
    return Check(
        name=name,
        passed=passed,
        max_residual=float(residuals[worst]),
        mean_residual=float(np.mean(residuals)),
        samples=int(residuals.size),
        threshold=threshold,
        witness=None if passed else np.asarray(points[worst], dtype=float),
    )


def lower_check(name, values, points, threshold) -> Check:
    """Passes iff every value exceeds `threshold`.

    `max_residual` reports the smallest value seen, which is the number
    users read for determinant and eigenvalue gates.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    values = np.where(np.isnan(values), -np.inf, values)
    if values.size == 0:
        return Check(name, True, 0.0, 0.0, 0, threshold, kind="lower")
    worst = int(np.argmin(values))
    passed = bool(values[worst] > threshold)
    return Check(
        name=name,
        passed=passed,
        max_residual=float(values[worst]),
        mean_residual=float(np.mean(values)),
        samples=int(values.size),
        threshold=threshold,
        witness=None if passed else np.asarray(points[worst], dtype=float),
        kind="lower",
    )


def matrix_residuals(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Max-abs difference per sample of two (N, r, c) stacks."""
    if a.size == 0:
        return np.zeros(a.shape[0])
    return np.abs(a - b).reshape(a.shape[0], -1).max(axis=1)


def determinants(values: np.ndarray) -> np.ndarray:
    """Determinants of an (N, d, d) stack; NaN where entries are not finite."""
    if values.shape[1] == 0:
        return np.ones(values.shape[0])
    out = np.full(values.shape[0], np.nan)
    finite = np.isfinite(values).reshape(values.shape[0], -1).all(axis=1)
    if finite.any():
        out[finite] = np.linalg.det(values[finite])
    return out
