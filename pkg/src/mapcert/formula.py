"""Whitelisted arithmetic expressions for sampling maps from text.

Instance files declare map values as component expressions over named
scalars (x, p, y, z, or their indexed forms x1, x2, ...).  Only plain
arithmetic, unary sign, and min/max/abs survive parsing; anything else
is rejected before evaluation.
"""
from __future__ import annotations

import ast
from typing import Callable, Mapping, Sequence

_ALLOWED_CALLS = {"min": min, "max": max, "abs": abs}
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)
_ALLOWED_UNARY = (ast.UAdd, ast.USub)


class FormulaError(ValueError):
    """An expression failed parsing or used a disallowed construct."""


def _check(node: ast.AST, names: frozenset[str], text: str) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, names, text)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        _check(node.left, names, text)
        _check(node.right, names, text)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, _ALLOWED_UNARY):
        _check(node.operand, names, text)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) \
                or node.func.id not in _ALLOWED_CALLS or node.keywords:
            raise FormulaError(f"only min/max/abs calls are allowed: {text!r}")
        for arg in node.args:
            _check(arg, names, text)
    elif isinstance(node, ast.Name):
        if node.id not in names:
            raise FormulaError(f"unknown name {node.id!r} in {text!r}; "
                               f"available: {sorted(names)}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) \
                or isinstance(node.value, bool):
            raise FormulaError(f"only numeric literals allowed: {text!r}")
    else:
        raise FormulaError(
            f"disallowed syntax {type(node).__name__} in {text!r}")


def compile_formula(components: Sequence[str], variables: Sequence[str]
                    ) -> Callable[[Mapping[str, float]], tuple[float, ...]]:
    """Compile component expressions into a point-valued function.

    The returned callable maps a {name: value} binding to a tuple of
    floats rounded to 12 decimals, matching the grid convention.
    """
    if not components:
        raise FormulaError("at least one component expression is required")
    names = frozenset(variables)
    codes = []
    for text in components:
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise FormulaError(f"cannot parse {text!r}: {exc.msg}") from exc
        _check(tree, names, text)
        codes.append(compile(tree, "<formula>", "eval"))

    def evaluate(binding: Mapping[str, float]) -> tuple[float, ...]:
        scope = {"__builtins__": {}, **_ALLOWED_CALLS, **binding}
        return tuple(round(float(eval(code, scope)), 12) for code in codes)

    return evaluate


def scalar_names(prefix: str, dim: int) -> tuple[str, ...]:
    """Names bound for one block: the bare prefix when 1-D, plus
    indexed forms prefix1..prefixN always."""
    indexed = tuple(f"{prefix}{k + 1}" for k in range(dim))
    return ((prefix,) + indexed) if dim == 1 else indexed


def bind_point(prefix: str, point: Sequence[float]) -> dict[str, float]:
    out = {f"{prefix}{k + 1}": float(v) for k, v in enumerate(point)}
    if len(point) == 1:
        out[prefix] = float(point[0])
    return out
