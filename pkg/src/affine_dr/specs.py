"""Tiny text grammar for matrices, relations and grid functions.

Matrix expressions::

    dense [[0,-1],[1,0]]       a JSON literal (the keyword is optional)
    tridiag ALPHA BETA GAMMA N
    kron EXPR EXPR
    rot                        the 2x2 rotation [[0,-1],[1,0]]
    id N | zeros N

Relation expressions::

    affine MATRIX [b1,...,bn]   x -> M x + b
    normalcone [anchor] [[basis row], ...]   ([] for a single point)
    const [u1,...,un]
    zero N
    MATRIX                      the linear map x -> M x

Function expressions (``f(x, y)``, ``g(x, y)``) use ``+ - * / **``,
numbers, ``x``, ``y``, ``pi``, ``e`` and ``sin cos tan exp log sqrt abs``.
"""

from __future__ import annotations

import ast
import json
import re

import numpy as np

from .errors import ParseError
from .linalg import AffineSubspace
from .relations import AffineRelation, constant_relation, from_linear_map, normal_cone_affine, zero_relation
from .structured import TridiagToeplitz, to_dense

__all__ = [
    "MatrixSpec",
    "parse_function",
    "parse_matrix",
    "parse_relation",
    "parse_vector",
    "tokenize",
]

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def tokenize(text):
    """Split on whitespace, keeping bracketed JSON literals whole.

    Returns ``(token, position)`` pairs; positions are character offsets.
    """
    tokens = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        start = i
        if text[i] == "[":
            depth = 0
            while i < n:
                if text[i] == "[":
                    depth += 1
                elif text[i] == "]":
                    depth -= 1
                    if depth == 0:
                        i += 1
                        break
                i += 1
            if depth != 0:
                raise ParseError("unbalanced '['", start)
        else:
            while i < n and not text[i].isspace():
                if text[i] in "[]":
                    raise ParseError(f"unexpected {text[i]!r}", i)
                i += 1
        tokens.append((text[start:i], start))
    return tokens


class _Stream:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, len(self.text))

    def take(self, what):
        tok, pos = self.peek()
        if tok is None:
            raise ParseError(f"expected {what}, found end of input", pos)
        self.i += 1
        return tok, pos

    def number(self, what="number"):
        tok, pos = self.take(what)
        try:
            v = float(tok)
        except ValueError:
            raise ParseError(f"expected {what}, got {tok!r}", pos) from None
        if not np.isfinite(v):
            raise ParseError(f"{what} must be finite", pos)
        return v

    def count(self, what="dimension"):
        tok, pos = self.take(what)
        if not re.fullmatch(r"\+?\d+", tok) or int(tok) < 1:
            raise ParseError(f"expected positive integer {what}, got {tok!r}", pos)
        return int(tok)

    def literal(self, what):
        tok, pos = self.take(what)
        if not tok.startswith("["):
            raise ParseError(f"expected a bracketed {what}, got {tok!r}", pos)
        try:
            value = np.array(json.loads(tok), dtype=float)
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed {what}: {exc}", pos) from None
        if not np.all(np.isfinite(value)):
            raise ParseError(f"{what} has non-finite entries", pos)
        return value, pos

    def finish(self):
        tok, pos = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected trailing token {tok!r}", pos)


class MatrixSpec:
    """A parsed matrix with its originating tridiagonal triple, if any."""

    def __init__(self, matrix, tridiag=None):
        self.matrix = matrix
        self.tridiag = tridiag


def _matrix(stream):
    tok, pos = stream.peek()
    if tok is None:
        raise ParseError("expected a matrix expression, found end of input", pos)
    if tok.startswith("["):
        return _dense_literal(stream)
    stream.take("keyword")
    key = tok.lower()
    if key == "dense":
        return _dense_literal(stream)
    if key == "tridiag":
        a = stream.number("alpha")
        b = stream.number("beta")
        g = stream.number("gamma")
        n = stream.count("n")
        t = TridiagToeplitz(a, b, g, n)
        return MatrixSpec(to_dense(t), t)
    if key == "kron":
        left = _matrix(stream)
        right = _matrix(stream)
        return MatrixSpec(np.kron(left.matrix, right.matrix))
    if key == "rot":
        return MatrixSpec(ROTATION.copy())
    if key == "id":
        return MatrixSpec(np.eye(stream.count()))
    if key == "zeros":
        n = stream.count()
        return MatrixSpec(np.zeros((n, n)))
    raise ParseError(f"unknown matrix keyword {tok!r}", pos)


def _dense_literal(stream):
    value, pos = stream.literal("matrix")
    if value.ndim != 2 or value.shape[0] != value.shape[1] or value.size == 0:
        raise ParseError(f"matrix literal must be square, got shape {value.shape}", pos)
    return MatrixSpec(value)


def parse_matrix(text):
    """Parse a matrix expression; returns a :class:`MatrixSpec`."""
    stream = _Stream(text)
    spec = _matrix(stream)
    stream.finish()
    return spec


def _vector(stream, what, size=None):
    value, pos = stream.literal(what)
    if value.ndim != 1 or value.size == 0:
        raise ParseError(f"{what} must be a flat list, got shape {value.shape}", pos)
    if size is not None and value.size != size:
        raise ParseError(f"{what} needs {size} entries, got {value.size}", pos)
    return value


def parse_vector(text, size=None):
    stream = _Stream(text)
    v = _vector(stream, "vector", size)
    stream.finish()
    return v


def _relation(stream):
    tok, pos = stream.peek()
    key = tok.lower() if tok is not None else None
    if key == "affine":
        stream.take("keyword")
        m = _matrix(stream).matrix
        b = _vector(stream, "offset", m.shape[0])
        return from_linear_map(m, b)
    if key == "normalcone":
        stream.take("keyword")
        anchor = _vector(stream, "anchor")
        rows, rpos = stream.literal("basis rows")
        if rows.size == 0:
            rows = np.zeros((0, anchor.size))
        if rows.ndim != 2 or rows.shape[1] != anchor.size:
            raise ParseError(f"basis rows must have length {anchor.size}", rpos)
        return normal_cone_affine(AffineSubspace.make(anchor, rows.T if rows.size else None))
    if key == "const":
        stream.take("keyword")
        return constant_relation(_vector(stream, "value"))
    if key == "zero":
        stream.take("keyword")
        return zero_relation(stream.count())
    return from_linear_map(_matrix(stream).matrix)


def parse_relation(text) -> AffineRelation:
    """Parse a relation expression into an :class:`AffineRelation`."""
    stream = _Stream(text)
    rel = _relation(stream)
    stream.finish()
    return rel


_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {
    ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
    ast.Div: np.divide, ast.Pow: np.power,
}


def parse_function(text):
    """Compile an expression in ``x`` and ``y`` into a vectorised callable."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression: {exc.msg}", (exc.offset or 1) - 1) from None

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return
        if isinstance(node, ast.Name) and (node.id in ("x", "y") or node.id in _CONSTS):
            return
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
            return
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            check(node.operand)
            return
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
            check(node.args[0])
            return
        raise ParseError(f"unsupported syntax {ast.dump(node)[:40]!r}", getattr(node, "col_offset", None))

    check(tree)

    def run(node, env):
        if isinstance(node, ast.Expression):
            return run(node.body, env)
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](run(node.left, env), run(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = run(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        return _FUNCS[node.func.id](run(node.args[0], env))

    def func(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = np.broadcast_to(run(tree, {"x": x, "y": y}), np.broadcast(x, y).shape)
        return np.array(out, dtype=float)

    return func
