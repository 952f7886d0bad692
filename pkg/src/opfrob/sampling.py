"""Seeded sample-point generation with denominator guards.

Rationale for guards: rational fields have singular loci; a guard pair
(expression, floor) rejects draws where |expression| falls below the floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OpfrobError
from .exprs import eval_expr

DEFAULT_SEED = 42
DEFAULT_SAMPLES = 50
DEFAULT_GUARD = 1e-3


@dataclass(frozen=True)
class SampleConfig:
    seed: int = DEFAULT_SEED
    count: int = DEFAULT_SAMPLES
    box: float = 1.0
    guards: tuple = ()  # pairs (Expression, floor)
    max_draw_factor: int = 1000

    def with_count(self, count: int) -> "SampleConfig":
        return SampleConfig(self.seed, count, self.box, self.guards,
                            self.max_draw_factor)


def guards_ok(point, guards) -> bool:
    for expr, floor in guards:
        if abs(float(eval_expr(expr, list(point)))) < floor:
            return False
    return True


def sample_points(n: int, config: SampleConfig) -> np.ndarray:
    """Draw ``config.count`` points from [-box, box]^n, rejecting guarded
    draws.  Deterministic for a fixed config."""
    rng = np.random.default_rng(config.seed)
    points = np.empty((config.count, n))
    kept = 0
    budget = config.max_draw_factor * config.count
    for _ in range(budget):
        p = rng.uniform(-config.box, config.box, n)
        if guards_ok(p, config.guards):
            points[kept] = p
            kept += 1
            if kept == config.count:
                return points
    raise OpfrobError(
        f"guard rejection exhausted {budget} draws; guards too tight"
    )


def sample_phase_points(n: int, config: SampleConfig):
    """Draw count (u, p) pairs; u obeys the guards, p is unguarded."""
    u = sample_points(n, config)
    rng = np.random.default_rng(config.seed + 1)
    p = rng.uniform(-config.box, config.box, (config.count, n))
    return u, p
