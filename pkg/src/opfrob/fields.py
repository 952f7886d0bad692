"""Operator fields and 1-form fields: grids of expressions on the manifold.

An operator field is an n x n matrix of expressions in u1..un, evaluable at
a point over floats (values), jets (values plus exact first partials) or any
other scalar type the expression evaluator supports.  These are the geometric
raw data for every verification in the package.
"""

from __future__ import annotations

import numpy as np

from .exprs import Const, Expression, eval_expr, parse_expr
from .numkit import Jet, jet_point, split_jet_matrix, split_jet_vector

__all__ = ["OperatorField", "OneFormField", "expression_matmul"]


def _as_expression(x) -> Expression:
    if isinstance(x, Expression):
        return x
    if isinstance(x, (int, float)):
        return Const(x)
    raise TypeError(f"cannot use {type(x).__name__} as an expression entry")


def expression_matmul(A, B):
    """Product of two square grids of expressions (builds new trees)."""
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = A[i][0] * B[0][j]
            for k in range(1, n):
                s = s + A[i][k] * B[k][j]
            row.append(s)
        out.append(row)
    return out


class OperatorField:
    """Square grid of scalar expressions acting as a (1,1)-tensor field."""

    def __init__(self, entries):
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise ValueError("operator field grid must be square")
        self.entries = tuple(tuple(_as_expression(e) for e in row) for row in entries)
        self.dimension = n
        for row in self.entries:
            for e in row:
                if e.max_variable() > n:
                    raise ValueError(
                        f"entry {e} refers to u{e.max_variable()} but the "
                        f"field dimension is {n}"
                    )
        self._constant_value = None
        if all(e.is_constant() for row in self.entries for e in row):
            self._constant_value = np.array(
                [[float(eval_expr(e, [])) for e in row] for row in self.entries]
            )
        self._jet_cache = {}

    @classmethod
    def parse(cls, grid, dimension: int) -> "OperatorField":
        if len(grid) != dimension or any(len(r) != dimension for r in grid):
            raise ValueError(f"expected a {dimension}x{dimension} grid")
        return cls([[parse_expr(s, dimension) for s in row] for row in grid])

    @classmethod
    def constant(cls, matrix) -> "OperatorField":
        matrix = np.asarray(matrix, dtype=float)
        return cls([[Const(v if v != int(v) else int(v)) for v in row]
                    for row in matrix.tolist()])

    @property
    def is_constant(self) -> bool:
        return self._constant_value is not None

    def eval(self, u) -> np.ndarray:
        if self._constant_value is not None:
            return self._constant_value.copy()
        point = [float(x) for x in u]
        return np.array(
            [[float(eval_expr(e, point)) for e in row] for row in self.entries]
        )

    def eval_generic(self, point) -> np.ndarray:
        out = np.empty((self.dimension, self.dimension), dtype=object)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = eval_expr(e, point)
        return out

    def eval_jet(self, u) -> np.ndarray:
        return self.eval_generic(jet_point(u))

    def batch_jet_arrays(self, points):
        """Vectorized jets over a (B, n) batch of points: values (B, n, n)
        and partials (B, n, n, n) in one pass over each entry's tree."""
        points = np.asarray(points, dtype=float)
        B, n = points.shape
        if self._constant_value is not None:
            vals = np.broadcast_to(self._constant_value, (B, n, n)).copy()
            return vals, np.zeros((B, n, n, n))
        eye = np.eye(n)
        coords = [Jet(points[:, i], np.broadcast_to(eye[i], (B, n)).copy())
                  for i in range(n)]
        vals = np.empty((B, n, n))
        ders = np.zeros((B, n, n, n))
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out = eval_expr(e, coords)
                if isinstance(out, Jet):
                    vals[:, i, j] = out.value
                    ders[:, i, j, :] = out.partials
                else:
                    vals[:, i, j] = out
        return vals, ders

    def jet_arrays(self, u):
        """Values (n,n) and partials (n,n,n) with der[i,j,s] = d(entry ij)/du^s.

        Cached per point; callers treat the returned arrays as read-only.
        """
        key = tuple(float(x) for x in u)
        hit = self._jet_cache.get(key)
        if hit is not None:
            return hit
        if self._constant_value is not None:
            n = self.dimension
            out = (self._constant_value, np.zeros((n, n, n)))
        else:
            out = split_jet_matrix(self.eval_jet(u), self.dimension)
        if len(self._jet_cache) > 1024:
            self._jet_cache.clear()
        self._jet_cache[key] = out
        return out

    # --- expression-level algebra (used to assemble symmetry candidates) ----

    def __matmul__(self, other: "OperatorField") -> "OperatorField":
        if self.dimension != other.dimension:
            raise ValueError("dimension mismatch")
        return OperatorField(expression_matmul(self.entries, other.entries))

    def __add__(self, other: "OperatorField") -> "OperatorField":
        if self.dimension != other.dimension:
            raise ValueError("dimension mismatch")
        return OperatorField(
            [[a + b for a, b in zip(ra, rb)]
             for ra, rb in zip(self.entries, other.entries)]
        )

    def scaled(self, factor) -> "OperatorField":
        factor = _as_expression(factor)
        return OperatorField(
            [[factor * e for e in row] for row in self.entries]
        )

    @classmethod
    def identity(cls, dimension: int) -> "OperatorField":
        return cls.constant(np.eye(dimension))

    def __str__(self):
        rows = ["  [" + ", ".join(str(e) for e in row) + "]" for row in self.entries]
        return "[\n" + "\n".join(rows) + "\n]"


class OneFormField:
    """Covector field: n scalar expressions alpha_1..alpha_n."""

    def __init__(self, components):
        self.components = tuple(_as_expression(c) for c in components)
        self.dimension = len(self.components)
        for c in self.components:
            if c.max_variable() > self.dimension:
                raise ValueError(
                    f"component {c} refers to u{c.max_variable()} but the "
                    f"form dimension is {self.dimension}"
                )
        self.is_constant = all(c.is_constant() for c in self.components)

    @classmethod
    def parse(cls, components, dimension: int) -> "OneFormField":
        if len(components) != dimension:
            raise ValueError(f"expected {dimension} components")
        return cls([parse_expr(s, dimension) for s in components])

    @classmethod
    def constant(cls, values) -> "OneFormField":
        return cls([Const(float(v)) for v in values])

    def eval(self, u) -> np.ndarray:
        point = [float(x) for x in u]
        return np.array([float(eval_expr(c, point)) for c in self.components])

    def eval_generic(self, point):
        return [eval_expr(c, point) for c in self.components]

    def jet_arrays(self, u):
        """Values (n,) and partials (n,n) with der[i,j] = d(alpha_i)/du^j."""
        jets = self.eval_generic(jet_point(u))
        return split_jet_vector(jets, self.dimension)

    def batch_jet_arrays(self, points):
        """Vectorized jets over a (B, n) batch: values (B, n), partials
        (B, n, n)."""
        points = np.asarray(points, dtype=float)
        B, n = points.shape
        eye = np.eye(n)
        coords = [Jet(points[:, i], np.broadcast_to(eye[i], (B, n)).copy())
                  for i in range(n)]
        vals = np.empty((B, n))
        ders = np.zeros((B, n, n))
        for i, c in enumerate(self.components):
            out = eval_expr(c, coords)
            if isinstance(out, Jet):
                vals[:, i] = out.value
                ders[:, i, :] = out.partials
            else:
                vals[:, i] = out
        return vals, ders

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"
