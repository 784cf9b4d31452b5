"""A restricted expression language for config-defined fields and operators.

Supported: numeric literals, the constant ``pi``, the binary operators
+ - * /, unary +/-, and calls to sin, cos, tanh, exp.  Names are ``x1``
.. ``xn`` for coordinates and ``q11`` .. ``qNn`` for gradient entries
(component first, variable second).  Everything else is rejected at
parse time, so config files cannot run arbitrary code.
"""

from __future__ import annotations

import ast

import numpy as np

__all__ = ["ExpressionError", "compile_expression"]

_FUNCS = {"sin": np.sin, "cos": np.cos, "tanh": np.tanh, "exp": np.exp}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}
_UNARY = {ast.UAdd: lambda v: v, ast.USub: np.negative}


class ExpressionError(ValueError):
    """Raised when an expression uses anything outside the allowed subset."""


def _compile_node(node, names):
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, names)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            value = float(node.value)
            return lambda env: value
        raise ExpressionError(f"literal {node.value!r} is not a number")
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return lambda env: np.pi
        if node.id in names:
            key = node.id
            return lambda env: env[key]
        raise ExpressionError(f"unknown name {node.id!r}; allowed: pi, {', '.join(sorted(names))}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _compile_node(node.left, names)
        right = _compile_node(node.right, names)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op = _UNARY[type(node.op)]
        operand = _compile_node(node.operand, names)
        return lambda env: op(operand(env))
    if isinstance(node, ast.Call):
        if (
            isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            fn = _FUNCS[node.func.id]
            arg = _compile_node(node.args[0], names)
            return lambda env: fn(arg(env))
        raise ExpressionError("only single-argument sin/cos/tanh/exp calls are allowed")
    raise ExpressionError(f"disallowed syntax: {ast.dump(node)}")


def compile_expression(text: str, names):
    """Compile ``text`` to a callable over an environment of named arrays.

    ``names`` is the set of variable names the expression may use; the
    returned callable takes a dict mapping each used name to an array (or
    scalar) and evaluates with numpy broadcasting.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from exc
    return _compile_node(tree, frozenset(names))
