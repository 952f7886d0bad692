"""Differential geometry of commuting operator fields.

The central object is the bracket of two commuting operator fields L, M,

    <L, M>(xi, eta) = L M [xi, eta] + [L xi, M eta] - L [xi, M eta]
                      - M [L xi, eta],

a (1,2)-tensor precisely when L M = M L.  In coordinates,

    T^i_jk = L^s_j d_s M^i_k - M^s_k d_s L^i_j - L^i_r d_j M^r_k
             + M^i_s d_k L^s_j,

with all partials supplied exactly by jet evaluation.  L and M are
symmetries of each other when the part of T symmetric in (j,k) vanishes,
strong symmetries when all of T vanishes; with L = M the bracket is the
Nijenhuis torsion.  A closed 1-form alpha is a conservation law of M when
the pullback M^* alpha is closed again.

Dualization follows the pointwise Frobenius pipeline: given a covector with
constant components a_k, the dual fields are M^j(x) = b^{ji}(x) K_i(x) for
b_{ij} = a_{ij}^k a_k, and for a family of mutual symmetries the dual family
again consists of mutual symmetries; that conclusion is verified numerically
here rather than assumed.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    GenericityError,
    NonCommutingError,
    OneFormNotClosedError,
    OpfrobError,
)
from .fields import OneFormField
from .frobalg import (
    OperatorBasis,
    find_generic_covector,
    find_well_conditioned_vector,
    frobenius_form,
    structure_constants_at,
    structure_values,
    _value_matrix,
)
from .numkit import mat_solve, max_abs, split_jet_matrix
from .report import CheckResult, VerificationReport

__all__ = [
    "bracket",
    "bracket_from_jets",
    "is_symmetry",
    "is_strong_symmetry",
    "nijenhuis_torsion_report",
    "conservation_law_check",
    "DualFamily",
    "dualize_family",
    "symmetry_coefficient_check",
]

DEFAULT_TOL = 1e-9


def _field_scale(val, der) -> float:
    return max_abs(val) + max_abs(der)


def bracket_from_jets(Lval, Lder, Mval, Mder) -> np.ndarray:
    """Coordinate components T^i_jk of <L, M> from values and partials.

    When both arguments are literally the same arrays (the torsion case)
    the result is assembled in explicitly antisymmetrized form, so
    T^i_jk = -T^i_kj holds exactly, not just to rounding.
    """
    if Lval is Mval and Lder is Mder:
        t1 = np.einsum("sj,iks->ijk", Mval, Mder)
        t3 = np.einsum("ir,rkj->ijk", Mval, Mder)
        return (t1 - t1.transpose(0, 2, 1)) - (t3 - t3.transpose(0, 2, 1))
    t1 = np.einsum("sj,iks->ijk", Lval, Mder)
    t2 = np.einsum("sk,ijs->ijk", Mval, Lder)
    t3 = np.einsum("ir,rkj->ijk", Lval, Mder)
    t4 = np.einsum("is,sjk->ijk", Mval, Lder)
    return t1 - t2 - t3 + t4


def _commutation_check(Lval, Mval, tol):
    scale = 1.0 + max_abs(Lval) * max_abs(Mval)
    resid = max_abs(Lval @ Mval - Mval @ Lval) / scale
    if resid > tol:
        raise NonCommutingError(
            f"operators do not commute at the point (residual {resid:.3e})"
        )


def bracket(L, M, point, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Evaluate <L, M> at a point; raises NonCommutingError when the values
    fail to commute (the bracket is only a tensor for commuting pairs)."""
    Lval, Lder = L.jet_arrays(point)
    if L is M:
        return bracket_from_jets(Lval, Lder, Lval, Lder)
    Mval, Mder = M.jet_arrays(point)
    _commutation_check(Lval, Mval, tol)
    return bracket_from_jets(Lval, Lder, Mval, Mder)


def _pair_residual(L, M, point, tol, symmetric_part_only):
    Lval, Lder = L.jet_arrays(point)
    if L is M:
        Mval, Mder = Lval, Lder
    else:
        Mval, Mder = M.jet_arrays(point)
        _commutation_check(Lval, Mval, tol)
    T = bracket_from_jets(Lval, Lder, Mval, Mder)
    if symmetric_part_only:
        T = T + T.transpose(0, 2, 1)
    scale = 1.0 + _field_scale(Lval, Lder) * _field_scale(Mval, Mder)
    return float(np.max(np.abs(T))) / scale


def _batch_maxabs(X):
    B = X.shape[0]
    return np.max(np.abs(X.reshape(B, -1)), axis=1)


def _pair_residuals_batch(L, M, points, tol, symmetric_part_only):
    """Per-point residuals for expression-backed fields, computed with one
    vectorized pass over the whole sample."""
    P = np.asarray(points, dtype=float)
    Lval, Lder = L.batch_jet_arrays(P)
    torsion = L is M
    if torsion:
        Mval, Mder = Lval, Lder
    else:
        Mval, Mder = M.batch_jet_arrays(P)
        comm = np.einsum("bij,bjk->bik", Lval, Mval) \
            - np.einsum("bij,bjk->bik", Mval, Lval)
        comm_scale = 1.0 + _batch_maxabs(Lval) * _batch_maxabs(Mval)
        comm_res = _batch_maxabs(comm) / comm_scale
        b = int(np.argmax(comm_res))
        if comm_res[b] > tol:
            raise NonCommutingError(
                f"operators do not commute at {P[b].tolist()} "
                f"(residual {comm_res[b]:.3e})"
            )
    if torsion:
        t1 = np.einsum("bsj,biks->bijk", Mval, Mder)
        t3 = np.einsum("bir,brkj->bijk", Mval, Mder)
        T = (t1 - t1.transpose(0, 1, 3, 2)) - (t3 - t3.transpose(0, 1, 3, 2))
    else:
        T = (np.einsum("bsj,biks->bijk", Lval, Mder)
             - np.einsum("bsk,bijs->bijk", Mval, Lder)
             - np.einsum("bir,brkj->bijk", Lval, Mder)
             + np.einsum("bis,bsjk->bijk", Mval, Lder))
    if symmetric_part_only:
        T = T + T.transpose(0, 1, 3, 2)
    scale_L = _batch_maxabs(Lval) + _batch_maxabs(Lder)
    scale_M = scale_L if torsion else _batch_maxabs(Mval) + _batch_maxabs(Mder)
    return _batch_maxabs(T) / (1.0 + scale_L * scale_M)


def _worst_pair_residual(L, M, points, tol, symmetric_part_only):
    if hasattr(L, "batch_jet_arrays") and hasattr(M, "batch_jet_arrays"):
        res = _pair_residuals_batch(L, M, points, tol, symmetric_part_only)
        b = int(np.argmax(res))
        return float(res[b]), list(np.asarray(points[b], dtype=float))
    worst, worst_pt = 0.0, None
    for u in points:
        r = _pair_residual(L, M, u, tol, symmetric_part_only)
        if r > worst:
            worst, worst_pt = r, list(np.asarray(u, dtype=float))
    return worst, worst_pt


def is_symmetry(L, M, points, tol: float = DEFAULT_TOL,
                name: str = "symmetry") -> CheckResult:
    """Pass when the symmetric part of <L, M> vanishes at every point
    (residual scale-normalized by the field magnitudes)."""
    worst, worst_pt = _worst_pair_residual(L, M, points, tol,
                                           symmetric_part_only=True)
    return CheckResult(name=name, passed=worst <= tol, residual=worst,
                       tolerance=tol, worst_point=worst_pt, samples=len(points))


def is_strong_symmetry(L, M, points, tol: float = DEFAULT_TOL,
                       name: str = "strong_symmetry") -> CheckResult:
    """Pass when the entire bracket tensor vanishes at every point."""
    worst, worst_pt = _worst_pair_residual(L, M, points, tol,
                                           symmetric_part_only=False)
    return CheckResult(name=name, passed=worst <= tol, residual=worst,
                       tolerance=tol, worst_point=worst_pt, samples=len(points))


def nijenhuis_torsion_report(M, points, tol: float = DEFAULT_TOL,
                             name: str = "nijenhuis_torsion") -> CheckResult:
    """Torsion <M, M> as the strong-symmetry check of M with itself."""
    return is_strong_symmetry(M, M, points, tol=tol, name=name)


def _one_form_jets(alpha: OneFormField, u):
    aval, ader = alpha.jet_arrays(u)
    return aval, ader  # ader[i, j] = d alpha_i / du^j


def conservation_law_check(M, alpha: OneFormField, points,
                           tol: float = DEFAULT_TOL,
                           name: str = "conservation_law") -> CheckResult:
    """Pass when M^* alpha is closed at every point.

    Raises OneFormNotClosedError when alpha itself fails to be closed: that
    is an input defect, distinct from a failed check.
    """
    worst, worst_pt = 0.0, None
    for u in points:
        aval, ader = _one_form_jets(alpha, u)
        curl_alpha = float(np.max(np.abs(ader - ader.T)))
        if curl_alpha > tol * (1.0 + float(np.max(np.abs(ader)))):
            raise OneFormNotClosedError(
                f"alpha is not closed at {list(map(float, u))} "
                f"(curl residual {curl_alpha:.3e})"
            )
        Mval, Mder = M.jet_arrays(u)
        # beta_j = alpha_i M^i_j ; d_k beta_j from the product rule
        bder = np.einsum("ik,ij->jk", ader, Mval) + np.einsum(
            "i,ijk->jk", aval, Mder
        )
        curl = np.abs(bder - bder.T)
        scale = 1.0 + (max_abs(aval) + max_abs(ader)) * _field_scale(Mval, Mder)
        r = float(np.max(curl)) / scale
        if r > worst:
            worst, worst_pt = r, list(np.asarray(u, dtype=float))
    return CheckResult(name=name, passed=worst <= tol, residual=worst,
                       tolerance=tol, worst_point=worst_pt, samples=len(points))


# ---------------------------------------------------------------------------
# dual families
# ---------------------------------------------------------------------------


def _dual_matrices(mats, covector, xi):
    """Lean generic pipeline: structure constants -> form -> dual basis."""
    n = len(mats)
    a, _ = structure_constants_at(mats, xi)
    b = frobenius_form(a, covector)
    eye = np.eye(n)
    if np.asarray(b).dtype == object:
        eye = np.asarray(eye, dtype=object)
    binv = mat_solve(b, eye)
    out = []
    for j in range(n):
        M = binv[j, 0] * np.asarray(mats[0])
        for i in range(1, n):
            M = M + binv[j, i] * np.asarray(mats[i])
        out.append(M)
    return out


class _DualFieldView:
    """One dual field M^i as a pointwise-evaluable operator field."""

    def __init__(self, family, index):
        self.family = family
        self.index = index
        self.dimension = family.dimension

    def eval(self, u):
        return self.family.eval(u)[self.index]

    def jet_arrays(self, u):
        return self.family.jet_data(u)[self.index]

    def eval_generic(self, point):
        return self.family.eval_generic(point)[self.index]


class DualFamily:
    """Pointwise dual family M^1..M^n of an operator basis w.r.t. a fixed
    covector.  Jet evaluation routes the whole pipeline through jet
    arithmetic, so the dual fields come with exact first derivatives."""

    def __init__(self, basis: OperatorBasis, covector, tol: float = DEFAULT_TOL,
                 seed: int = 0, generic_samples: int = 32):
        self.basis = basis
        self.covector = np.asarray(covector, dtype=float)
        self.dimension = basis.dimension
        self.tol = tol
        self.seed = seed
        self.generic_samples = generic_samples
        self._constant_cache = None
        self._jet_cache = {}

    def _xi_for(self, values):
        rng = np.random.default_rng(self.seed)
        xi = find_well_conditioned_vector(values, self.generic_samples, rng,
                                          self.tol)
        if xi is None:
            raise GenericityError("no generic vector at the evaluation point")
        return xi

    def eval(self, u):
        if self.basis.is_constant and self._constant_cache is not None:
            return [M.copy() for M in self._constant_cache]
        values = self.basis.eval(u)
        duals = _dual_matrices(values, self.covector, self._xi_for(values))
        if self.basis.is_constant:
            self._constant_cache = [M.copy() for M in duals]
        return duals

    def jet_data(self, u):
        """List of (values, partials) per dual field; cached per point and
        returned read-only."""
        key = tuple(float(x) for x in u)
        hit = self._jet_cache.get(key)
        if hit is not None:
            return hit
        n = self.dimension
        if self.basis.is_constant:
            out = [(M, np.zeros((n, n, n))) for M in self.eval(u)]
        else:
            values = self.basis.eval(u)
            xi = self._xi_for(values)
            jets = self.basis.eval_jet(u)
            duals = _dual_matrices(jets, self.covector, xi)
            out = [split_jet_matrix(M, n) for M in duals]
        if len(self._jet_cache) > 1024:
            self._jet_cache.clear()
        self._jet_cache[key] = out
        return out

    def eval_generic(self, point):
        mats = self.basis.eval_generic(point)
        # genericity is decided on the value parts of the generic scalars
        values = [_value_matrix(M) for M in mats]
        xi = self._xi_for(values)
        return _dual_matrices(mats, self.covector, xi)

    def field(self, i: int) -> _DualFieldView:
        return _DualFieldView(self, i)

    @property
    def fields(self):
        return [self.field(i) for i in range(self.dimension)]


def dualize_family(
    basis: OperatorBasis,
    covector,
    points,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    check_inputs: bool = True,
):
    """Build the dual family and verify the duality conclusions.

    Returns (DualFamily, VerificationReport).  The report contains the
    mutual-symmetry check of the input basis (a precondition for the
    conclusion), and the mutual-symmetry check of the dual family, which is
    the content being certified.
    """
    report = VerificationReport(title="dualize_family", seed=seed)
    n = basis.dimension
    if check_inputs:
        worst, worst_pt = 0.0, None
        for i in range(n):
            for j in range(i + 1, n):
                c = is_symmetry(basis.fields[i], basis.fields[j], points, tol=tol)
                if c.residual > worst:
                    worst, worst_pt = c.residual, c.worst_point
        report.add(CheckResult(
            name="input_mutual_symmetries", passed=worst <= tol,
            residual=worst, tolerance=tol, worst_point=worst_pt,
            samples=len(points),
        ))
        generic_ok, generic_detail = True, ""
        for u in points:
            values = basis.eval(u)
            rng = np.random.default_rng(seed)
            if find_well_conditioned_vector(values, 32, rng, tol) is None \
                    or find_generic_covector(values, 32, rng, tol) is None:
                generic_ok = False
                generic_detail = f"at {[float(x) for x in u]}"
                break
        report.add(CheckResult(
            name="genericity_A1_A2", passed=generic_ok,
            residual=0.0 if generic_ok else float("inf"), tolerance=0.0,
            samples=len(points), detail=generic_detail,
        ))
    family = DualFamily(basis, covector, tol=tol, seed=seed)
    try:
        worst, worst_pt = 0.0, None
        for i in range(n):
            for j in range(i + 1, n):
                c = is_symmetry(family.field(i), family.field(j), points, tol=tol)
                if c.residual > worst:
                    worst, worst_pt = c.residual, c.worst_point
        report.add(CheckResult(
            name="dual_mutual_symmetries", passed=worst <= tol,
            residual=worst, tolerance=tol, worst_point=worst_pt,
            samples=len(points),
        ))
    except OpfrobError as exc:
        report.add(CheckResult(
            name="dual_mutual_symmetries", passed=False, residual=float("inf"),
            tolerance=tol, samples=len(points), detail=str(exc),
        ))
    return family, report


def symmetry_coefficient_check(
    basis: OperatorBasis,
    h,
    points,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> CheckResult:
    """Check the covector identity K_i^* dh^j = a^j_{is} dh^s at the points.

    Passing is equivalent to K = sum_i h^i K_i being a common symmetry of
    the family.  ``h`` is a list of n coefficient expressions.
    """
    n = basis.dimension
    if len(h) != n:
        raise ValueError(f"need {n} coefficient functions, got {len(h)}")
    hform = OneFormField(h)  # reuse component-wise jet evaluation
    worst, worst_pt = 0.0, None
    for u in points:
        data = basis.point_data(u, tol=tol, seed=seed)
        a_val = structure_values(data.structure)
        _, dh = hform.jet_arrays(u)          # dh[j, m] = d h^j / du^m
        Kvals = basis.eval(u)
        scale = 1.0 + max(max_abs(K) for K in Kvals) * (1.0 + max_abs(dh))
        for i in range(n):
            lhs = dh @ Kvals[i]              # row j: (K_i^* dh^j)_m
            rhs = np.einsum("sj,sm->jm", a_val[i], dh)
            r = float(np.max(np.abs(lhs - rhs))) / scale
            if r > worst:
                worst, worst_pt = r, list(np.asarray(u, dtype=float))
    return CheckResult(
        name="symmetry_coefficients", passed=worst <= tol, residual=worst,
        tolerance=tol, worst_point=worst_pt, samples=len(points),
    )
