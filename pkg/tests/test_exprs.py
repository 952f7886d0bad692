import numpy as np
import pytest

from opfrob.errors import ExprEvalError, ExprSyntaxError
from opfrob.exprs import Const, Var, eval_expr, parse_expr
from opfrob.numkit import jet_point

from oracles import central_gradient


class TestParsing:
    def test_basic_tree(self):
        e = parse_expr("u1^2 + 2*u2", 2)
        assert eval_expr(e, [3.0, 1.0]) == 11.0

    def test_variable_out_of_range(self):
        with pytest.raises(ExprSyntaxError, match="variable index out of range"):
            parse_expr("u5", 4)

    def test_zero_dimension(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1", 0)

    def test_parenthesized_entry(self):
        e = parse_expr("(u2^2+u3^2)", 4)
        assert eval_expr(e, [0.0, 3.0, 4.0, 0.0]) == 25.0

    def test_syntax_error_offset(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expr("u1 + * u2", 2)
        assert err.value.offset == 5

    def test_trailing_input(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1 u2", 2)

    def test_unbalanced_paren(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("(u1 + u2", 2)

    def test_exponent_must_be_integer(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1^2.5", 2)
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1^u2", 2)

    def test_chained_exponent_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1^2^3", 2)

    def test_power_binds_tighter_than_negation(self):
        assert eval_expr(parse_expr("-u1^2", 1), [3.0]) == -9.0

    def test_negative_exponent_is_division(self):
        e = parse_expr("u1^-2", 1)
        assert eval_expr(e, [2.0]) == 0.25

    def test_precedence(self):
        assert eval_expr(parse_expr("2+3*4^2", 1), [0.0]) == 50
        assert eval_expr(parse_expr("2*u1/4", 1), [6.0]) == 3.0
        assert eval_expr(parse_expr("2-3-4", 1), [0.0]) == -5

    def test_integer_constants_stay_exact(self):
        e = parse_expr("3", 1)
        assert isinstance(e, Const) and e.value == 3 and isinstance(e.value, int)

    def test_float_and_scientific(self):
        assert eval_expr(parse_expr("0.5 + 1e-3", 1), [0.0]) == 0.5 + 1e-3

    def test_unknown_character(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u1 $ u2", 2)


class TestEvaluation:
    def test_division_by_zero(self):
        e = parse_expr("1/u3", 4)
        with pytest.raises(ExprEvalError, match="division by zero"):
            eval_expr(e, [1.0, 1.0, 0.0, 1.0])

    def test_zero_to_negative_power(self):
        e = parse_expr("u1^-1", 1)
        with pytest.raises(ExprEvalError):
            eval_expr(e, [0.0])

    def test_point_dimension_mismatch(self):
        e = parse_expr("u3", 3)
        with pytest.raises(ExprEvalError):
            eval_expr(e, [1.0, 2.0])

    def test_jet_product_rule(self):
        e = parse_expr("u1*u2", 2)
        out = eval_expr(e, jet_point([2.0, 5.0]))
        assert out.value == 10.0
        assert np.allclose(out.partials, [5.0, 2.0])

    def test_rational_literal_binary64(self):
        assert eval_expr(parse_expr("1/3", 1), [0.0]) == 1.0 / 3.0

    def test_batch_evaluation(self):
        e = parse_expr("u1^2 - u2", 2)
        u1 = np.array([1.0, 2.0, 3.0])
        u2 = np.array([0.0, 1.0, 2.0])
        assert np.allclose(eval_expr(e, [u1, u2]), [1.0, 3.0, 7.0])


EXPR_CORPUS = [
    ("u1^2 + 2*u2", 2),
    ("(u1 - u2) * (u1 + u2) / (1 + u1^2)", 2),
    ("-u1^3 + u2/u1 - 5", 2),
    ("(u2^2+u3^2) / (u1*u3)", 3),
    ("1/2 * u1 - u2^-1", 2),
    ("2.5*u1*u2*u3 - u2^4", 3),
]


class TestJetsAgainstFiniteDifferences:
    @pytest.mark.parametrize("text,n", EXPR_CORPUS)
    def test_gradient_matches_fd(self, text, n):
        e = parse_expr(text, n)
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 25:
            u = rng.uniform(0.3, 1.3, n)  # away from the singular loci
            jet = eval_expr(e, jet_point(u))
            fd = central_gradient(lambda x: float(eval_expr(e, list(x))), u)
            assert np.all(np.abs(jet.partials - fd)
                          <= 1e-6 * (1.0 + np.abs(jet.partials)))
            checked += 1


def random_expression(rng, n, depth=0):
    roll = rng.random()
    if depth >= 4 or roll < 0.3:
        if rng.random() < 0.5:
            return Const(int(rng.integers(-4, 5)))
        return Var(int(rng.integers(1, n + 1)))
    a = random_expression(rng, n, depth + 1)
    b = random_expression(rng, n, depth + 1)
    op = rng.integers(0, 6)
    if op == 0:
        return a + b
    if op == 1:
        return a - b
    if op == 2:
        return a * b
    if op == 3:
        return a / b
    if op == 4:
        return -a
    return a ** int(rng.integers(0, 4))


class TestPrinterRoundTrip:
    def test_roundtrip_evaluates_identically(self):
        rng = np.random.default_rng(5)
        n = 3
        trees = 0
        while trees < 40:
            e = random_expression(rng, n)
            text = str(e)
            e2 = parse_expr(text, n)
            agreements = 0
            for _ in range(100):
                u = list(rng.uniform(-2.0, 2.0, n))
                try:
                    v1 = eval_expr(e, u)
                except ExprEvalError:
                    continue
                v2 = eval_expr(e2, u)
                assert v2 == v1, f"{text} differs at {u}"
                agreements += 1
            if agreements >= 50:
                trees += 1
