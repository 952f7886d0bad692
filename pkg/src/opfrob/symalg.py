"""Symmetry algebras of flat mutually-strong-symmetric families.

A flat basis is a family of constant matrices M^1..M^n spanning a pointwise
Frobenius algebra, supplied in coordinates normalized so that the designated
generic vector xi satisfies M^i xi = e_i (the coordinate frame is d/du^i =
M^i xi).  In that frame the canonical field

    U(u) = u^1 M^1 + ... + u^n M^n

is a common strong symmetry of the family, and so is f_1(U) M^1 + ... +
f_n(U) M^n for polynomial coefficient functions f_i; membership of an
arbitrary candidate is decided by pointwise decomposition in the basis
followed by strong-symmetry checks.
"""

from __future__ import annotations

import numpy as np

from .errors import OpfrobError
from .exprs import Const, Expression, Var
from .fields import OperatorField
from .frobalg import (
    OperatorBasis,
    find_generic_covector,
    structure_constants_at,
)
from .numkit import max_abs
from .opfields import is_strong_symmetry
from .report import CheckResult, VerificationReport

__all__ = [
    "FlatBasis",
    "canonical_symmetry_U",
    "analytic_symmetry",
    "sym_membership",
]

DEFAULT_TOL = 1e-9


class FlatBasis:
    """Constant matrices M^1..M^n with a designated generic vector xi
    normalized to M^i xi = e_i.

    Validation checks pairwise commutation, the normalization, that the
    combination xi^i M^i reproduces the identity (so Id lies in the span
    with constant coefficients) and that a generic covector exists.
    """

    def __init__(self, matrices, xi, tol: float = DEFAULT_TOL):
        self.matrices = [np.asarray(M, dtype=float) for M in matrices]
        self.xi = np.asarray(xi, dtype=float)
        n = self.matrices[0].shape[0]
        if len(self.matrices) != n:
            raise OpfrobError(f"need {n} matrices in dimension {n}")
        self.dimension = n

        eye = np.eye(n)
        for i, M in enumerate(self.matrices):
            if max_abs(M @ self.xi - eye[i]) > tol:
                raise OpfrobError(
                    f"basis is not in normalized flat form: M^{i + 1} xi != "
                    f"e_{i + 1}; supply the basis in the coordinates with "
                    "d/du^i = M^i xi"
                )
        for i in range(n):
            for j in range(i + 1, n):
                comm = self.matrices[i] @ self.matrices[j] \
                    - self.matrices[j] @ self.matrices[i]
                if max_abs(comm) > tol:
                    raise OpfrobError(f"M^{i+1}, M^{j+1} do not commute")
        combo = sum(self.xi[i] * self.matrices[i] for i in range(n))
        if max_abs(combo - eye) > tol:
            raise OpfrobError("xi^i M^i does not reproduce the identity")
        if find_generic_covector(self.matrices, 32,
                                 np.random.default_rng(0), tol) is None:
            raise OpfrobError("no generic covector found for the flat basis")

        self.structure, closure = structure_constants_at(self.matrices, self.xi)
        if closure > tol:
            raise OpfrobError(
                f"flat span is not multiplicatively closed (residual {closure:.3e})"
            )

    def operator_basis(self, name: str = "flat") -> OperatorBasis:
        return OperatorBasis.from_matrices(self.matrices, name=name)


def canonical_symmetry_U(flat: FlatBasis) -> OperatorField:
    """The field U(u) = sum_i u^i M^i in the flat coordinates."""
    n = flat.dimension
    entries = []
    for r in range(n):
        row = []
        for c in range(n):
            e: Expression = Const(0)
            for i in range(n):
                coeff = float(flat.matrices[i][r, c])
                if coeff != 0.0:
                    term = Var(i + 1) if coeff == 1.0 \
                        else Const(_exact(coeff)) * Var(i + 1)
                    e = term if (isinstance(e, Const) and e.value == 0) else e + term
            row.append(e)
        entries.append(row)
    return OperatorField(entries)


def _matrix_polynomial(coeffs, U: OperatorField) -> OperatorField:
    """Horner evaluation of a scalar polynomial at the matrix field U."""
    n = U.dimension
    deg = len(coeffs) - 1
    while deg > 0 and coeffs[deg] == 0:
        deg -= 1
    acc = OperatorField.identity(n).scaled(Const(_exact(coeffs[deg])))
    for k in range(deg - 1, -1, -1):
        acc = acc @ U
        if coeffs[k] != 0:
            acc = acc + OperatorField.identity(n).scaled(Const(_exact(coeffs[k])))
    return acc


def _exact(v):
    return int(v) if isinstance(v, float) and v == int(v) else v


def analytic_symmetry(flat: FlatBasis, polynomials) -> OperatorField:
    """Assemble f_1(U) M^1 + ... + f_n(U) M^n for polynomial f_i.

    ``polynomials`` is a sequence of n coefficient lists in ascending degree
    ([c0, c1, c2] means c0 + c1 t + c2 t^2); empty or all-zero lists drop out.
    """
    n = flat.dimension
    if len(polynomials) != n:
        raise ValueError(f"need {n} polynomials, got {len(polynomials)}")
    U = canonical_symmetry_U(flat)
    out = None
    for i, coeffs in enumerate(polynomials):
        coeffs = list(coeffs)
        if not coeffs or all(c == 0 for c in coeffs):
            continue
        term = _matrix_polynomial(coeffs, U) @ OperatorField.constant(
            flat.matrices[i]
        )
        out = term if out is None else out + term
    if out is None:
        out = OperatorField.constant(np.zeros((n, n)))
    return out


def sym_membership(
    basis: OperatorBasis,
    candidate: OperatorField,
    points,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> VerificationReport:
    """Decide membership of ``candidate`` in the symmetry algebra of the
    basis: pointwise decomposition candidate = sum_i g_i M^i (through the
    generic vector, then validated as a full matrix identity), followed by
    strong-symmetry checks against every basis field."""
    report = VerificationReport(title="sym_membership", seed=seed)
    n = basis.dimension

    worst_dec, worst_pt = 0.0, None
    P = np.asarray(points, dtype=float)
    cand_vals = (candidate.batch_jet_arrays(P)[0]
                 if hasattr(candidate, "batch_jet_arrays")
                 else np.stack([candidate.eval(u) for u in P]))
    for b, u in enumerate(P):
        values = basis.eval(u)
        cand = cand_vals[b]
        data = basis.point_data(u, tol=tol, seed=seed)
        cols = np.column_stack([V @ data.xi for V in values])
        scale = 1.0 + max_abs(cand)
        try:
            g = np.linalg.solve(cols, cand @ data.xi)
        except np.linalg.LinAlgError:
            worst_dec, worst_pt = float("inf"), list(map(float, u))
            break
        recon = sum(g[i] * values[i] for i in range(n))
        r = max_abs(cand - recon) / scale
        if r > worst_dec:
            worst_dec, worst_pt = r, list(np.asarray(u, dtype=float))
    report.add(CheckResult(
        name="decomposition_in_span", passed=worst_dec <= tol,
        residual=worst_dec, tolerance=tol, worst_point=worst_pt,
        samples=len(points),
    ))

    if report.passed:
        worst, worst_pt, fail_detail = 0.0, None, ""
        for i in range(n):
            try:
                c = is_strong_symmetry(candidate, basis.fields[i], points,
                                       tol=tol)
            except OpfrobError as exc:
                worst, fail_detail = float("inf"), str(exc)
                break
            if c.residual > worst:
                worst, worst_pt = c.residual, c.worst_point
        report.add(CheckResult(
            name="strong_symmetry_vs_basis", passed=worst <= tol,
            residual=worst, tolerance=tol, worst_point=worst_pt,
            samples=len(points), detail=fail_detail,
        ))
    return report
