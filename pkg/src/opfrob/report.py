"""Pass/fail check records with deterministic rendering."""

from __future__ import annotations

from dataclasses import dataclass, field

CERTIFICATE_NOTE = (
    "all passes are numerical certificates at the sampled points, "
    "not symbolic proofs"
)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    worst_point: list | None = None
    samples: int = 0
    seed: int | None = None
    detail: str = ""
    wall_ms: float | None = None

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.residual,
            "tolerance": self.tolerance,
            "samples": self.samples,
        }
        if self.worst_point is not None:
            d["worst_point"] = [float(x) for x in self.worst_point]
        if self.seed is not None:
            d["seed"] = self.seed
        if self.detail:
            d["detail"] = self.detail
        if timings and self.wall_ms is not None:
            d["wall_ms"] = self.wall_ms
        return d

    def render(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        line = (
            f"[{tag}] {self.name}: residual={_fmt(self.residual)} "
            f"tol={_fmt(self.tolerance)} samples={self.samples}"
        )
        if self.worst_point is not None and not self.passed:
            pt = ", ".join(_fmt(float(x)) for x in self.worst_point)
            line += f" worst_point=({pt})"
        if self.detail:
            line += f"  [{self.detail}]"
        return line


@dataclass
class VerificationReport:
    title: str
    checks: list = field(default_factory=list)
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "seed": self.seed,
            "note": CERTIFICATE_NOTE,
            "checks": [c.to_dict(timings) for c in self.checks],
        }

    def render(self) -> str:
        lines = [f"== {self.title} =="]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines.extend(c.render() for c in self.checks)
        n_fail = sum(1 for c in self.checks if not c.passed)
        status = "OK" if n_fail == 0 else f"{n_fail} FAILED"
        lines.append(f"-- {len(self.checks)} checks: {status}")
        lines.append(f"note: {CERTIFICATE_NOTE}")
        return "\n".join(lines)
