"""Shared randomized fixture builders for the test suite."""

import numpy as np

from opfrob.exprs import parse_expr
from opfrob.fixtures import (
    diag_symmetry_field,
    jordan_symmetry_field,
    power_basis_fields,
)
from opfrob.frobalg import OperatorBasis
from opfrob.sampling import SampleConfig


def guarded_config(n, seed=42, count=20, extra=()):
    """Sample config keeping diagonal-type fixtures away from coordinate
    collisions and zeros."""
    guards = [(parse_expr(f"u{i + 1}", n), 0.15) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            guards.append((parse_expr(f"u{i + 1}-u{j + 1}", n), 0.1))
    guards.extend(extra)
    return SampleConfig(seed=seed, count=count, box=1.0, guards=tuple(guards))


def random_power_basis(kind, n, seed):
    """Random invertible recombination of the powers of the canonical
    symmetry field of an n-dimensional centraliser family; Id stays in the
    span and the fields remain mutual strong symmetries."""
    L = diag_symmetry_field(n) if kind == "diag" else jordan_symmetry_field(n)
    powers = power_basis_fields(L)
    rng = np.random.default_rng(seed)
    while True:
        T = rng.uniform(-1.0, 1.0, (n, n))
        if abs(np.linalg.det(T)) > 0.2:
            break
    fields = []
    for i in range(n):
        f = powers[0].scaled(float(T[i, 0]))
        for j in range(1, n):
            if T[i, j] != 0.0:
                f = f + powers[j].scaled(float(T[i, j]))
        fields.append(f)
    return OperatorBasis(fields, name=f"{kind}-recombined-{seed}"), rng


def admissible_covector(basis, points, rng, tries=20):
    """Covector whose induced form stays away from degeneracy: among the
    draws, the one minimizing the worst condition number of b over the
    probe points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    structures = [np.asarray(basis.point_data(u).structure, dtype=float)
                  for u in points]
    best, best_cond = None, np.inf
    for _ in range(tries):
        a = rng.uniform(-1.0, 1.0, basis.dimension)
        worst = max(np.linalg.cond(np.einsum("ijk,k->ij", s, a))
                    for s in structures)
        if worst < best_cond:
            best, best_cond = a, worst
    if best is None:
        raise AssertionError("no admissible covector found")
    return best
