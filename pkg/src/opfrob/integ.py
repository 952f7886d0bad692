"""Poisson-commuting quadratic Hamiltonians from operator Frobenius algebras.

Direct construction: given a basis M^1..M^n of mutual strong symmetries and
a common conservation law alpha with pointwise-independent pullbacks
M^{i*} alpha, the canonical chart coordinates are fixed by ds^i = M^{i*}
alpha and the quadratic forms

    F_s(u, p) = a^{ij}_s(u) p_i p_j,       M^i M^j = a^{ij}_s M^s,

pairwise Poisson commute, satisfy det(dF/dp) != 0 at generic momenta, and
obey the matrix identity (p_i M^i)^2 = F_s M^s.  When the leading form h_1
is nondegenerate the Killing tensors are K_s = h_s h_1^{-1} and the basis is
recovered as M^i = a^{is}_1 K_s.

Inverse direction: for user-supplied quadratic Hamiltonians the hypotheses
(pairwise commutation, momentum nondegeneracy, algebraically commuting
Killing tensors) are checked, the Frobenius data of the K_i span is
validated pointwise, and the operators rebuilt from a chosen covector a as
    Mbar^i = bbar^{is} K_s,   bbar_{ij} = a_{ij}^s a_s,
are certified to be Nijenhuis operators and pairwise strong symmetries.

The differential of Hamilton's principal function on the level set
{F_s = c_s} is dW(u, c) = sqrt(c_1 M^{1*} + ... + c_n M^{n*}) alpha, with the
principal square root taken near the identity.
"""

from __future__ import annotations

import numpy as np

from .errors import GenericityError, OpfrobError, SingularMatrixError
from .exprs import Const, Expression, Var, eval_expr, parse_expr
from .fields import OneFormField
from .frobalg import (
    OperatorBasis,
    find_generic_covector,
    find_generic_vector,
    find_well_conditioned_vector,
    frobenius_form,
    point_data,
    structure_constants_at,
    _value_matrix,
)
from .numkit import (
    Jet,
    jet_point,
    mat_rank,
    mat_solve,
    max_abs,
    split_jet_matrix,
    sqrt_near_identity,
)
from .opfields import bracket_from_jets, conservation_law_check
from .report import CheckResult, VerificationReport

__all__ = [
    "QuadraticHamiltonian",
    "poisson_bracket",
    "verify_commuting_family",
    "IntegrableSystem",
    "generate_system",
    "killing_tensors",
    "hj_differential",
    "inverse_verify",
    "ReconstructedFamily",
]

DEFAULT_TOL = 1e-9


class QuadraticHamiltonian:
    """F(u, p) = h^{ij}(u) p_i p_j with a structurally symmetric grid of
    coefficient expressions."""

    def __init__(self, grid):
        n = len(grid)
        if any(len(row) != n for row in grid):
            raise ValueError("coefficient grid must be square")
        self.grid = [[e if isinstance(e, Expression) else Const(e)
                      for e in row] for row in grid]
        self.dimension = n
        for row in self.grid:
            for e in row:
                if e.max_variable() > n:
                    raise ValueError(
                        f"entry {e} refers to u{e.max_variable()} but the "
                        f"form dimension is {n}"
                    )
        for i in range(n):
            for j in range(i + 1, n):
                if str(self.grid[i][j]) != str(self.grid[j][i]):
                    raise ValueError(
                        f"grid is not structurally symmetric at ({i+1},{j+1}): "
                        f"{self.grid[i][j]} vs {self.grid[j][i]}"
                    )

    @classmethod
    def parse(cls, grid, dimension: int) -> "QuadraticHamiltonian":
        if len(grid) != dimension or any(len(r) != dimension for r in grid):
            raise ValueError(f"expected a {dimension}x{dimension} grid")
        return cls([[parse_expr(s, dimension) for s in row] for row in grid])

    @classmethod
    def constant(cls, matrix) -> "QuadraticHamiltonian":
        matrix = np.asarray(matrix, dtype=float)
        if max_abs(matrix - matrix.T) > 0:
            raise ValueError("constant coefficient matrix must be symmetric")
        return cls([[Const(v if v != int(v) else int(v)) for v in row]
                    for row in matrix.tolist()])

    def coeff(self, u) -> np.ndarray:
        point = [float(x) for x in u]
        return np.array([[float(eval_expr(e, point)) for e in row]
                         for row in self.grid])

    def coeff_generic(self, point) -> np.ndarray:
        out = np.empty((self.dimension, self.dimension), dtype=object)
        for i, row in enumerate(self.grid):
            for j, e in enumerate(row):
                out[i, j] = eval_expr(e, point)
        return out

    def coeff_jets(self, u):
        """(A, dA) with dA[i,j,s] = d h^{ij} / du^s."""
        return split_jet_matrix(self.coeff_generic(jet_point(u)),
                                self.dimension)

    def value(self, u, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(p @ self.coeff(u) @ p)


def poisson_bracket(F, G, u, p) -> float:
    """Canonical bracket {F, G} = dF/dp_i dG/du^i - dF/du^i dG/dp_i for two
    quadratic forms sharing one canonical chart.

    Momentum derivatives are exact (2 h^{ik} p_k); position derivatives come
    from jet evaluation of the coefficient grids.
    """
    p = np.asarray(p, dtype=float)
    AF, dAF = F.coeff_jets(u)
    AG, dAG = G.coeff_jets(u)
    Fp = 2.0 * AF @ p
    Gp = 2.0 * AG @ p
    Fu = np.einsum("i,ijk,j->k", p, dAF, p)
    Gu = np.einsum("i,ijk,j->k", p, dAG, p)
    return float(Fp @ Gu - Fu @ Gp)


def verify_commuting_family(
    hams,
    u_points,
    p_points,
    tol: float = 1e-8,
    name: str = "pairwise_poisson_brackets",
) -> CheckResult:
    """Max scale-normalized |{F_i, F_j}| over the phase sample; the residual
    is divided by 1 + |F_i||F_j| so rational Hamiltonians near their
    singular loci stay comparable."""
    m = len(hams)
    worst, worst_pt = 0.0, None
    for u, p in zip(u_points, p_points):
        jets = [H.coeff_jets(u) for H in hams]
        pv = np.asarray(p, dtype=float)
        vals = [float(pv @ A @ pv) for A, _ in jets]
        for i in range(m):
            AF, dAF = jets[i]
            Fp = 2.0 * AF @ pv
            Fu = np.einsum("i,ijk,j->k", pv, dAF, pv)
            for j in range(i + 1, m):
                AG, dAG = jets[j]
                Gp = 2.0 * AG @ pv
                Gu = np.einsum("i,ijk,j->k", pv, dAG, pv)
                br = float(Fp @ Gu - Fu @ Gp)
                r = abs(br) / (1.0 + abs(vals[i]) * abs(vals[j]))
                if r > worst:
                    worst = r
                    worst_pt = list(map(float, u)) + list(map(float, p))
    return CheckResult(name=name, passed=worst <= tol, residual=worst,
                       tolerance=tol, worst_point=worst_pt,
                       samples=len(u_points))


def _momentum_nondegeneracy(coeff_grids_at, points, n, seed, draws=50,
                            threshold=1e-9,
                            name="momentum_nondegeneracy") -> CheckResult:
    """det(dF/dp) != 0 at generic p: at every base point some seeded draw
    must give a relative determinant above the threshold (relative to the
    Hadamard bound of the matrix 2 a^{ij}_s p_i)."""
    worst = np.inf
    worst_pt = None
    rng = np.random.default_rng(seed)
    for u in points:
        grids = coeff_grids_at(u)
        best = 0.0
        for _ in range(draws):
            p = rng.uniform(-1.0, 1.0, n)
            D = np.stack([2.0 * A @ p for A in grids])
            bound = float(np.prod(np.linalg.norm(D, axis=1)))
            if bound == 0.0:
                continue
            best = max(best, abs(float(np.linalg.det(D))) / bound)
        if best < worst:
            worst, worst_pt = best, list(map(float, u))
    passed = worst > threshold
    return CheckResult(
        name=name, passed=passed, residual=float(worst), tolerance=threshold,
        worst_point=worst_pt, samples=len(points), seed=seed,
        detail="pass requires residual above tolerance",
    )


class _SystemForm:
    """Quadratic form F_s of a generated system, with coefficients and
    chart-frame derivatives evaluated pointwise at original coordinates."""

    def __init__(self, system, s):
        self.system = system
        self.s = s
        self.dimension = system.dimension

    def coeff_jets(self, u):
        a_val, a_der = self.system.structure_jets_at(u)
        return a_val[:, :, self.s], a_der[:, :, self.s, :]

    def coeff(self, u):
        return self.system.structure_at(u)[:, :, self.s]

    def value(self, u, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(p @ self.coeff(u) @ p)


class IntegrableSystem:
    """A generated commuting family: basis, conservation law, chart, and the
    quadratic forms F_s in the chart's canonical coordinates."""

    def __init__(self, basis: OperatorBasis, alpha: OneFormField, chart,
                 tol: float = DEFAULT_TOL, seed: int = 0):
        self.basis = basis
        self.alpha = alpha
        self.chart = list(chart)
        self.dimension = basis.dimension
        self.tol = tol
        self.seed = seed
        self.is_constant = basis.is_constant and alpha.is_constant
        self._structure_cache = {}
        self._jets_cache = {}
        self.hamiltonians = None
        if self.is_constant:
            a = self.structure_at(np.zeros(self.dimension))
            self.hamiltonians = [
                QuadraticHamiltonian.constant(a[:, :, s])
                for s in range(self.dimension)
            ]

    # -- pointwise data ------------------------------------------------------

    def _xi_at(self, values):
        rng = np.random.default_rng(self.seed)
        xi = find_well_conditioned_vector(values, 32, rng, self.tol)
        if xi is None:
            raise GenericityError("no generic vector at the evaluation point")
        return xi

    def structure_at(self, u) -> np.ndarray:
        key = tuple(float(x) for x in u)
        hit = self._structure_cache.get(key)
        if hit is not None:
            return hit
        values = self.basis.eval(u)
        a, _ = structure_constants_at(values, self._xi_at(values))
        a = np.asarray(a, dtype=float)
        if len(self._structure_cache) > 1024:
            self._structure_cache.clear()
        self._structure_cache[key] = a
        return a

    def structure_jets_at(self, u):
        """Structure constants and their chart-frame derivatives:
        (a_val[i,j,s], a_chart[i,j,s,k]) with d/d(chart^k); cached per
        point, read-only."""
        key = tuple(float(x) for x in u)
        hit = self._jets_cache.get(key)
        if hit is not None:
            return hit
        values = self.basis.eval(u)
        xi = self._xi_at(values)
        jets = self.basis.eval_jet(u)
        a_obj, _ = structure_constants_at(jets, xi)
        n = self.dimension
        a_val = np.empty((n, n, n))
        a_du = np.empty((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for s in range(n):
                    x = a_obj[i, j, s]
                    if isinstance(x, Jet):
                        a_val[i, j, s] = x.value
                        a_du[i, j, s] = x.partials
                    else:
                        a_val[i, j, s] = float(x)
                        a_du[i, j, s] = 0.0
        J = self.chart_rows(u)
        Jinv = np.linalg.inv(J)
        a_chart = np.einsum("ijsm,mk->ijsk", a_du, Jinv)
        if len(self._jets_cache) > 1024:
            self._jets_cache.clear()
        self._jets_cache[key] = (a_val, a_chart)
        return a_val, a_chart

    def chart_rows(self, u) -> np.ndarray:
        """Chart Jacobian J[i, m] = (M^{i*} alpha)_m(u)."""
        aval = self.alpha.eval(u)
        return np.vstack([aval @ M for M in self.basis.eval(u)])

    def chart_frame_basis(self, u):
        """Basis values pushed to the chart frame: J M J^{-1}."""
        J = self.chart_rows(u)
        Jinv = np.linalg.inv(J)
        return [J @ M @ Jinv for M in self.basis.eval(u)]

    def coefficient_grids(self, u):
        a = self.structure_at(u)
        return [a[:, :, s] for s in range(self.dimension)]

    def forms(self):
        if self.hamiltonians is not None:
            return list(self.hamiltonians)
        return [_SystemForm(self, s) for s in range(self.dimension)]

    # -- derived objects -----------------------------------------------------

    def killing_at(self, u):
        """K_s = h_s h_1^{-1} at the point (chart frame)."""
        grids = self.coefficient_grids(u)
        h1_inv = np.linalg.inv(grids[0])
        return [A @ h1_inv for A in grids]

    def hj_differential(self, u, c) -> np.ndarray:
        """dW(u, c) in chart components; substituting p = dW solves
        F_s(u, p) = c_s."""
        mats = self.chart_frame_basis(u)
        J = self.chart_rows(u)
        alpha_chart = np.linalg.solve(J.T, self.alpha.eval(u))
        return hj_differential(mats, alpha_chart, c)

    def n15_residual(self, u, p) -> float:
        """Residual of the matrix identity (p_i M^i)^2 = F_s M^s in the
        chart frame."""
        mats = self.chart_frame_basis(u)
        p = np.asarray(p, dtype=float)
        grids = self.coefficient_grids(u)
        lhs = sum(p[i] * mats[i] for i in range(self.dimension))
        lhs = lhs @ lhs
        rhs = sum(float(p @ grids[s] @ p) * mats[s]
                  for s in range(self.dimension))
        return max_abs(lhs - rhs) / (1.0 + max_abs(lhs))


def generate_system(
    basis: OperatorBasis,
    alpha: OneFormField,
    points,
    chart=None,
    tol: float = DEFAULT_TOL,
    bracket_tol: float | None = None,
    seed: int = 0,
):
    """Run the direct construction and certify its conclusions.

    Returns (IntegrableSystem, VerificationReport).  For a constant basis
    with constant alpha the chart is the linear map s^i = <M^{i*} alpha, u>
    computed automatically; otherwise chart expressions must be supplied and
    are validated against ds^i = M^{i*} alpha.
    """
    n = basis.dimension
    report = VerificationReport(title="generate_system", seed=seed)
    bracket_tol = tol if bracket_tol is None else bracket_tol

    worst = 0.0
    worst_pt = None
    for i, f in enumerate(basis.fields):
        c = conservation_law_check(f, alpha, points, tol=tol)
        if c.residual > worst:
            worst, worst_pt = c.residual, c.worst_point
    report.add(CheckResult(
        name="alpha_common_conservation_law", passed=worst <= tol,
        residual=worst, tolerance=tol, worst_point=worst_pt,
        samples=len(points),
    ))

    min_rank = n
    for u in points:
        aval = alpha.eval(u)
        rows = np.vstack([aval @ M for M in basis.eval(u)])
        min_rank = min(min_rank, mat_rank(rows, tol=tol))
    report.add(CheckResult(
        name="pullback_independence", passed=min_rank == n,
        residual=float(n - min_rank), tolerance=0.0, samples=len(points),
        detail=f"min rank {min_rank} of {n}",
    ))

    if chart is None:
        if not (basis.is_constant and alpha.is_constant):
            raise OpfrobError(
                "chart expressions are required for non-constant data; only "
                "a constant basis with constant alpha admits the automatic "
                "linear chart"
            )
        aval = alpha.eval(np.zeros(n))
        C = np.vstack([aval @ M for M in basis.eval(np.zeros(n))])
        chart = []
        for i in range(n):
            e: Expression = Const(0)
            for m in range(n):
                coeff = float(C[i, m])
                if coeff != 0.0:
                    term = Var(m + 1) if coeff == 1.0 else \
                        Const(coeff if coeff != int(coeff) else int(coeff)) \
                        * Var(m + 1)
                    e = term if (isinstance(e, Const) and e.value == 0) \
                        else e + term
            chart.append(e)
    else:
        chart = [c if isinstance(c, Expression) else parse_expr(c, n)
                 for c in chart]

    worst = 0.0
    worst_pt = None
    for u in points:
        aval = alpha.eval(u)
        rows = np.vstack([aval @ M for M in basis.eval(u)])
        jets = [eval_expr(c, jet_point(u)) for c in chart]
        grads = np.vstack([
            j.partials if isinstance(j, Jet) else np.zeros(n) for j in jets
        ])
        scale = 1.0 + max_abs(rows)
        r = max_abs(grads - rows) / scale
        if r > worst:
            worst, worst_pt = r, list(map(float, u))
    report.add(CheckResult(
        name="chart_validation", passed=worst <= tol, residual=worst,
        tolerance=tol, worst_point=worst_pt, samples=len(points),
    ))

    system = IntegrableSystem(basis, alpha, chart, tol=tol, seed=seed)

    worst = 0.0
    for u in points:
        values = basis.eval(u)
        _, closure = structure_constants_at(values, system._xi_at(values))
        worst = max(worst, closure)
    report.add(CheckResult(
        name="span_closure", passed=worst <= tol, residual=worst,
        tolerance=tol, samples=len(points),
    ))

    forms = system.forms()
    rng = np.random.default_rng(seed + 1)
    p_draws = rng.uniform(-1.0, 1.0, (len(points), n))
    report.add(verify_commuting_family(forms, points, p_draws,
                                       tol=bracket_tol))
    report.add(_momentum_nondegeneracy(system.coefficient_grids, points, n,
                                       seed=seed + 2))
    return system, report


def killing_tensors(system: IntegrableSystem, points, tol: float = DEFAULT_TOL):
    """Killing tensors K_s = h_s h_1^{-1} of a generated system together
    with the algebraic certificates: pairwise commutation, self-adjointness
    of the basis w.r.t. every form h_s, and the duality M^i = a^{is}_1 K_s.
    """
    report = VerificationReport(title="killing_tensors")
    n = system.dimension
    per_point = []
    worst_comm = worst_adj = worst_dual = 0.0
    for u in points:
        grids = system.coefficient_grids(u)
        try:
            Ks = system.killing_at(u)
        except np.linalg.LinAlgError:
            report.add(CheckResult(
                name="h1_invertible", passed=False, residual=float("inf"),
                tolerance=tol, worst_point=list(map(float, u)),
                samples=len(points), detail="h_1 degenerate",
            ))
            return per_point, report
        per_point.append(Ks)
        mats = system.chart_frame_basis(u)
        a = system.structure_at(u)
        scale = 1.0 + max(max_abs(K) for K in Ks) ** 2
        for i in range(n):
            for j in range(i + 1, n):
                worst_comm = max(worst_comm,
                                 max_abs(Ks[i] @ Ks[j] - Ks[j] @ Ks[i]) / scale)
        for i in range(n):
            for s in range(n):
                P = mats[i] @ grids[s]
                worst_adj = max(worst_adj,
                                max_abs(P - P.T) / (1.0 + max_abs(P)))
            recon = sum(a[i, s, 0] * Ks[s] for s in range(n))
            worst_dual = max(worst_dual,
                             max_abs(mats[i] - recon) / (1.0 + max_abs(mats[i])))
    report.add(CheckResult(
        name="killing_pairwise_commutation", passed=worst_comm <= tol,
        residual=worst_comm, tolerance=tol, samples=len(points)))
    report.add(CheckResult(
        name="basis_self_adjointness", passed=worst_adj <= tol,
        residual=worst_adj, tolerance=tol, samples=len(points)))
    report.add(CheckResult(
        name="killing_duality", passed=worst_dual <= tol,
        residual=worst_dual, tolerance=tol, samples=len(points)))
    return per_point, report


def hj_differential(mats, alpha_value, c) -> np.ndarray:
    """dW = sqrt(c_1 M^1 + ... + c_n M^n)^* alpha at one point.

    ``mats`` are basis values in the canonical chart frame, ``alpha_value``
    the conservation-law components in the same frame.  The square root is
    the principal branch near the identity; its failure to converge signals
    an inadmissible c.
    """
    c = np.asarray(c, dtype=float)
    S = sum(c[i] * np.asarray(mats[i], dtype=float) for i in range(len(mats)))
    R = sqrt_near_identity(S)
    return R.T @ np.asarray(alpha_value, dtype=float)


class ReconstructedFamily:
    """Operators Mbar^i = bbar^{is} K_s rebuilt pointwise from quadratic
    Hamiltonians and a covector; jet evaluation threads the entire pipeline
    through jet arithmetic (h grids -> Killing tensors -> structure
    constants -> form inverse) for exact first derivatives."""

    def __init__(self, hams, covector, tol: float = DEFAULT_TOL, seed: int = 0):
        self.hams = list(hams)
        self.covector = np.asarray(covector, dtype=float)
        self.dimension = self.hams[0].dimension
        self.tol = tol
        self.seed = seed

    def _killing(self, grids):
        n = self.dimension
        h1 = grids[0]
        eye = np.eye(n)
        if np.asarray(h1).dtype == object:
            eye = np.asarray(eye, dtype=object)
        h1_inv = mat_solve(h1, eye)
        return [np.asarray(g) @ h1_inv for g in grids]

    def _mbar(self, Ks):
        values = [_value_matrix(K) for K in Ks]
        rng = np.random.default_rng(self.seed)
        xi = find_well_conditioned_vector(values, 32, rng, self.tol)
        if xi is None:
            raise GenericityError("Killing span has no generic vector here")
        a, _ = structure_constants_at(Ks, xi)
        # bbar_{ij} = a_{ij}^s a_s with the covector in the K-basis
        b = frobenius_form(a, self.covector)
        n = self.dimension
        eye = np.eye(n)
        if np.asarray(b).dtype == object:
            eye = np.asarray(eye, dtype=object)
        binv = mat_solve(b, eye)
        out = []
        for i in range(n):
            M = binv[i, 0] * np.asarray(Ks[0])
            for s in range(1, n):
                M = M + binv[i, s] * np.asarray(Ks[s])
            out.append(M)
        return out

    def killing_values(self, u):
        return [_value_matrix(K)
                for K in self._killing([H.coeff(u) for H in self.hams])]

    def eval(self, u):
        return [_value_matrix(M)
                for M in self._mbar(self._killing([H.coeff(u)
                                                   for H in self.hams]))]

    def jet_data(self, u):
        grids = [H.coeff_generic(jet_point(u)) for H in self.hams]
        duals = self._mbar(self._killing(grids))
        return [split_jet_matrix(M, self.dimension) for M in duals]

    def field(self, i):
        return _ReconstructedFieldView(self, i)

    @property
    def fields(self):
        return [self.field(i) for i in range(self.dimension)]


class _ReconstructedFieldView:
    def __init__(self, family, index):
        self.family = family
        self.index = index
        self.dimension = family.dimension

    def eval(self, u):
        return self.family.eval(u)[self.index]

    def jet_arrays(self, u):
        return self.family.jet_data(u)[self.index]


def inverse_verify(
    hams,
    covector,
    points,
    tol: float = 1e-8,
    seed: int = 0,
):
    """Verify that user-supplied quadratic Hamiltonians arise from the
    direct construction, checking every hypothesis instead of assuming any.

    Itemized checks: (i) pairwise Poisson commutation, (ii) momentum
    nondegeneracy, (iii) Killing tensors K_i = h_i h_1^{-1} commute
    algebraically; then the Frobenius certificates of the Killing span,
    self-adjointness w.r.t. h_1^{-1}, and the torsion/strong-symmetry
    certificates of the rebuilt operators Mbar^i = bbar^{is} K_s.

    Returns (VerificationReport, ReconstructedFamily | None).
    """
    n = hams[0].dimension
    report = VerificationReport(title="inverse_verify", seed=seed)
    rng = np.random.default_rng(seed + 1)
    p_draws = rng.uniform(-1.0, 1.0, (len(points), n))
    report.add(verify_commuting_family(hams, points, p_draws, tol=tol))
    report.add(_momentum_nondegeneracy(
        lambda u: [H.coeff(u) for H in hams], points, n, seed=seed + 2))

    family = ReconstructedFamily(hams, covector, tol=DEFAULT_TOL, seed=seed)
    worst_comm = worst_adj = worst_closure = worst_assoc = 0.0
    worst_form = 0.0
    a1_ok = covector_ok = True
    fail_detail = ""
    try:
        for u in points:
            grids = [H.coeff(u) for H in hams]
            Ks = [_value_matrix(K) for K in family._killing(grids)]
            scale = 1.0 + max(max_abs(K) for K in Ks) ** 2
            for i in range(n):
                for j in range(i + 1, n):
                    worst_comm = max(
                        worst_comm,
                        max_abs(Ks[i] @ Ks[j] - Ks[j] @ Ks[i]) / scale)
            ginv = np.linalg.inv(grids[0])
            for K in Ks:
                P = ginv @ K
                worst_adj = max(worst_adj,
                                max_abs(P - P.T) / (1.0 + max_abs(P)))
            rng_pt = np.random.default_rng(seed)
            xi = find_generic_vector(Ks, 32, rng_pt, DEFAULT_TOL)
            a_cov = find_generic_covector(Ks, 32, rng_pt, DEFAULT_TOL)
            if xi is None:
                a1_ok = False
                fail_detail = f"no generic vector at {list(map(float, u))}"
                break
            if a_cov is None:
                covector_ok = False
            data = point_data(Ks, covector=np.asarray(covector, dtype=float),
                              xi=xi)
            worst_closure = max(worst_closure, data.closure_residual)
            worst_assoc = max(worst_assoc, data.associativity_residual)
            worst_form = max(worst_form, data.duality_residual)
    except (SingularMatrixError, np.linalg.LinAlgError, OpfrobError) as exc:
        fail_detail = str(exc)
        a1_ok = False

    report.add(CheckResult(
        name="killing_pairwise_commutation", passed=worst_comm <= tol,
        residual=worst_comm, tolerance=tol, samples=len(points)))
    report.add(CheckResult(
        name="killing_self_adjointness", passed=worst_adj <= tol,
        residual=worst_adj, tolerance=tol, samples=len(points)))
    report.add(CheckResult(
        name="frobenius_span", passed=a1_ok and covector_ok
        and worst_closure <= tol and worst_assoc <= tol,
        residual=max(worst_closure, worst_assoc), tolerance=tol,
        samples=len(points), detail=fail_detail or
        "A1/A2 searches, closure and associativity of the Killing span",
    ))
    report.add(CheckResult(
        name="form_duality", passed=a1_ok and worst_form <= tol,
        residual=worst_form, tolerance=tol, samples=len(points),
        detail="<a ; Mbar^i K_j> = delta",
    ))

    if not report.passed:
        return report, None

    worst_tor = worst_sym = 0.0
    worst_pt = None
    for u in points:
        jets = family.jet_data(u)
        scales = [1.0 + (max_abs(v) + max_abs(d)) for v, d in jets]
        for i in range(n):
            vi, di = jets[i]
            Ti = bracket_from_jets(vi, di, vi, di)
            r = float(np.max(np.abs(Ti))) / (scales[i] ** 2)
            if r > worst_tor:
                worst_tor, worst_pt = r, list(map(float, u))
            for j in range(i + 1, n):
                vj, dj = jets[j]
                T = bracket_from_jets(vi, di, vj, dj)
                r = float(np.max(np.abs(T))) / (scales[i] * scales[j])
                worst_sym = max(worst_sym, r)
    report.add(CheckResult(
        name="reconstructed_nijenhuis_torsion", passed=worst_tor <= tol,
        residual=worst_tor, tolerance=tol, worst_point=worst_pt,
        samples=len(points)))
    report.add(CheckResult(
        name="reconstructed_strong_symmetries", passed=worst_sym <= tol,
        residual=worst_sym, tolerance=tol, samples=len(points)))
    return report, family
