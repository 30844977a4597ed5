"""Safe evaluation of small arithmetic expressions in one variable ``z``.

Only a fixed whitelist of numpy functions, constants and operators is
accepted; anything else (attribute access, subscripts, lambdas, calls to
unknown names) is rejected at parse time.
"""

import ast
import operator

import numpy as np

from .errors import SpecError

_FUNCTIONS = {
    "exp": np.exp, "log": np.log, "log1p": np.log1p, "expm1": np.expm1,
    "sqrt": np.sqrt, "abs": np.abs, "sin": np.sin, "cos": np.cos,
    "tan": np.tan, "arctan": np.arctan, "sinh": np.sinh, "cosh": np.cosh,
    "tanh": np.tanh, "sign": np.sign, "minimum": np.minimum,
    "maximum": np.maximum, "where": np.where,
}
_CONSTANTS = {"pi": np.pi, "e": np.e, "inf": np.inf}

_BINARY = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_COMPARE = {
    ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt,
    ast.GtE: operator.ge, ast.Eq: operator.eq, ast.NotEq: operator.ne,
}


def _check(node, variables):
    if isinstance(node, ast.Expression):
        return _check(node.body, variables)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise SpecError(f"unsupported literal {node.value!r}")
        return
    if isinstance(node, ast.Name):
        if node.id not in variables and node.id not in _CONSTANTS:
            raise SpecError(f"unknown name {node.id!r}")
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        _check(node.left, variables)
        _check(node.right, variables)
        return
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        _check(node.operand, variables)
        return
    if isinstance(node, ast.Compare):
        if len(node.ops) != 1 or type(node.ops[0]) not in _COMPARE:
            raise SpecError("only single comparisons are allowed")
        _check(node.left, variables)
        _check(node.comparators[0], variables)
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise SpecError(f"function not allowed: {ast.dump(node.func)}")
        if node.keywords:
            raise SpecError("keyword arguments are not allowed")
        for arg in node.args:
            _check(arg, variables)
        return
    raise SpecError(f"unsupported syntax: {type(node).__name__}")


def _evaluate(node, env):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, env)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else _CONSTANTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINARY[type(node.op)](_evaluate(node.left, env), _evaluate(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_evaluate(node.operand, env))
    if isinstance(node, ast.Compare):
        left = _evaluate(node.left, env)
        right = _evaluate(node.comparators[0], env)
        return _COMPARE[type(node.ops[0])](left, right).astype(float)
    return _FUNCTIONS[node.func.id](*[_evaluate(a, env) for a in node.args])


class Expression:
    """A compiled expression; calling it evaluates elementwise on arrays."""

    def __init__(self, source, variables=("z",)):
        self.source = str(source)
        self.variables = tuple(variables)
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise SpecError(f"cannot parse expression {self.source!r}: {exc.msg}") from None
        _check(tree, self.variables)
        self._tree = tree

    def __call__(self, *args):
        env = {name: np.asarray(a, dtype=float) for name, a in zip(self.variables, args)}
        shape = np.broadcast(*env.values()).shape if env else ()
        with np.errstate(all="ignore"):
            out = _evaluate(self._tree, env)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    def __repr__(self):
        return f"Expression({self.source!r})"
