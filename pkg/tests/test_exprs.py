"""The whitelisted expression subset used by config files."""

import numpy as np
import pytest

from efos.exprs import ExpressionError, compile_expression


def test_arithmetic_and_functions():
    fn = compile_expression("0.5*sin(2*pi*x1) + cos(x2)/2 - 1", ["x1", "x2"])
    x1, x2 = 0.25, 0.0
    got = fn({"x1": x1, "x2": x2})
    assert got == pytest.approx(0.5 * np.sin(2 * np.pi * x1) + 0.5 - 1)


def test_vectorized_evaluation():
    fn = compile_expression("tanh(q11) + exp(-x1)", ["x1", "q11"])
    x1 = np.linspace(0, 1, 8)
    q11 = np.linspace(-1, 1, 8)
    got = fn({"x1": x1, "q11": q11})
    np.testing.assert_allclose(got, np.tanh(q11) + np.exp(-x1), atol=1e-14)


def test_unary_minus_and_precedence():
    fn = compile_expression("-x1 + 2*x1*x1", ["x1"])
    assert fn({"x1": 3.0}) == pytest.approx(15.0)


def test_unknown_name_rejected():
    with pytest.raises(ExpressionError):
        compile_expression("x1 + y", ["x1"])


def test_unsafe_constructs_rejected():
    for text in (
        "__import__('os')",
        "x1 ** 2",
        "lambda: 1",
        "[1, 2]",
        "x1 if x1 else 0",
        "sin(x1, x1)",
        "getattr(x1, 'real')",
        "'abc'",
    ):
        with pytest.raises(ExpressionError):
            compile_expression(text, ["x1"])


def test_syntax_error_rejected():
    with pytest.raises(ExpressionError):
        compile_expression("x1 +", ["x1"])
