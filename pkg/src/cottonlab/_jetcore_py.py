"""Pure-numpy jet kernel, the fallback lane when the compiled core is absent.

Implements the same tape-machine contract as the Cython module
``cottonlab._jetcore``: evaluate a compiled expression tape at a batch of
points, producing either order-3 jets (batch, 20) or plain values (batch,).
Operations are vectorized over the batch axis, so this lane is serviceable
for large batches and noticeably slower per point; the benchmark script
quantifies the gap.
"""

from __future__ import annotations

import numpy as np

from . import _jettables as T
from ._jettables import JetDomainFailure

BACKEND = "python"


def _fail(code, bad):
    raise JetDomainFailure(code, np.argmax(bad))


def jet_mul(a, b):
    out = np.zeros(a.shape, dtype=np.float64)
    for p, q, k in zip(T.MUL_P, T.MUL_Q, T.MUL_K):
        if p == q:
            out[..., k] += a[..., p] * b[..., p]
        else:
            out[..., k] += a[..., p] * b[..., q] + a[..., q] * b[..., p]
    return out


def _compose(u, c0, c1, c2, c3):
    """Horner evaluation of c0 + w c1 + w^2 c2 + w^3 c3 with w = u - u(0)."""
    w = u.copy()
    w[..., 0] = 0.0
    r = np.zeros(u.shape, dtype=np.float64)
    r[..., 0] = c3
    r = jet_mul(r, w)
    r[..., 0] += c2
    r = jet_mul(r, w)
    r[..., 0] += c1
    r = jet_mul(r, w)
    r[..., 0] += c0
    return r


def _recip(b):
    u = b[..., 0]
    bad = u == 0.0
    if np.any(bad):
        _fail(T.ERR_DIV, bad)
    iu = 1.0 / u
    return _compose(b, iu, -iu * iu, iu * iu * iu, -(iu * iu) * (iu * iu))


def jet_div(a, b):
    return jet_mul(a, _recip(b))


def jet_pow(a, n):
    n = int(n)
    if n == 0:
        out = np.zeros(a.shape, dtype=np.float64)
        out[..., 0] = 1.0
        return out
    if n < 0:
        bad = a[..., 0] == 0.0
        if np.any(bad):
            _fail(T.ERR_POW, bad)
        return jet_pow(_recip(a), -n)
    out = a.copy()
    for _ in range(n - 1):
        out = jet_mul(out, a)
    return out


def jet_unary(op, a):
    u = a[..., 0]
    if op == T.OP_SIN:
        s, c = np.sin(u), np.cos(u)
        return _compose(a, s, c, -s / 2.0, -c / 6.0)
    if op == T.OP_COS:
        s, c = np.sin(u), np.cos(u)
        return _compose(a, c, -s, -c / 2.0, s / 6.0)
    if op == T.OP_TAN:
        t = np.tan(u)
        d = 1.0 + t * t
        return _compose(a, t, d, t * d, d * (1.0 + 3.0 * t * t) / 3.0)
    if op == T.OP_EXP:
        e = np.exp(u)
        return _compose(a, e, e, e / 2.0, e / 6.0)
    if op == T.OP_LOG:
        bad = u <= 0.0
        if np.any(bad):
            _fail(T.ERR_LOG, bad)
        iu = 1.0 / u
        return _compose(a, np.log(u), iu, -iu * iu / 2.0, iu * iu * iu / 3.0)
    if op == T.OP_SQRT:
        bad = u <= 0.0
        if np.any(bad):
            _fail(T.ERR_SQRT, bad)
        s = np.sqrt(u)
        return _compose(a, s, 0.5 / s, -1.0 / (8.0 * s * u), 1.0 / (16.0 * s * u * u))
    if op == T.OP_SINH:
        sh, ch = np.sinh(u), np.cosh(u)
        return _compose(a, sh, ch, sh / 2.0, ch / 6.0)
    if op == T.OP_COSH:
        sh, ch = np.sinh(u), np.cosh(u)
        return _compose(a, ch, sh, ch / 2.0, sh / 6.0)
    if op == T.OP_TANH:
        t = np.tanh(u)
        d = 1.0 - t * t
        return _compose(a, t, d, -t * d, d * (3.0 * t * t - 1.0) / 3.0)
    if op == T.OP_NEG:
        return -a
    raise ValueError(f"unknown unary opcode {op}")


def eval_jets(ops, iargs, consts, points, depth):
    n = points.shape[0]
    stack = np.zeros((depth, n, T.NCOEFFS), dtype=np.float64)
    top = 0
    for op, arg in zip(ops, iargs):
        if op == T.OP_CONST:
            stack[top] = 0.0
            stack[top, :, 0] = consts[arg]
            top += 1
        elif op == T.OP_VAR:
            stack[top] = 0.0
            stack[top, :, 0] = points[:, arg]
            stack[top, :, T.VAR_SLOT[arg]] = 1.0
            top += 1
        elif op == T.OP_ADD:
            stack[top - 2] += stack[top - 1]
            top -= 1
        elif op == T.OP_SUB:
            stack[top - 2] -= stack[top - 1]
            top -= 1
        elif op == T.OP_MUL:
            stack[top - 2] = jet_mul(stack[top - 2], stack[top - 1])
            top -= 1
        elif op == T.OP_DIV:
            stack[top - 2] = jet_div(stack[top - 2], stack[top - 1])
            top -= 1
        elif op == T.OP_NEG:
            stack[top - 1] = -stack[top - 1]
        elif op == T.OP_POW:
            stack[top - 1] = jet_pow(stack[top - 1], arg)
        else:
            stack[top - 1] = jet_unary(op, stack[top - 1])
    return stack[0].copy()


def eval_values(ops, iargs, consts, points, depth):
    n = points.shape[0]
    stack = np.zeros((depth, n), dtype=np.float64)
    top = 0
    for op, arg in zip(ops, iargs):
        if op == T.OP_CONST:
            stack[top] = consts[arg]
            top += 1
        elif op == T.OP_VAR:
            stack[top] = points[:, arg]
            top += 1
        elif op == T.OP_ADD:
            stack[top - 2] += stack[top - 1]
            top -= 1
        elif op == T.OP_SUB:
            stack[top - 2] -= stack[top - 1]
            top -= 1
        elif op == T.OP_MUL:
            stack[top - 2] *= stack[top - 1]
            top -= 1
        elif op == T.OP_DIV:
            b = stack[top - 1]
            bad = b == 0.0
            if np.any(bad):
                _fail(T.ERR_DIV, bad)
            stack[top - 2] /= b
            top -= 1
        elif op == T.OP_NEG:
            stack[top - 1] = -stack[top - 1]
        elif op == T.OP_POW:
            u = stack[top - 1]
            if arg < 0:
                bad = u == 0.0
                if np.any(bad):
                    _fail(T.ERR_POW, bad)
            stack[top - 1] = u ** arg
        elif op == T.OP_LOG:
            u = stack[top - 1]
            bad = u <= 0.0
            if np.any(bad):
                _fail(T.ERR_LOG, bad)
            stack[top - 1] = np.log(u)
        elif op == T.OP_SQRT:
            u = stack[top - 1]
            bad = u < 0.0
            if np.any(bad):
                _fail(T.ERR_SQRT, bad)
            stack[top - 1] = np.sqrt(u)
        elif op == T.OP_SIN:
            stack[top - 1] = np.sin(stack[top - 1])
        elif op == T.OP_COS:
            stack[top - 1] = np.cos(stack[top - 1])
        elif op == T.OP_TAN:
            stack[top - 1] = np.tan(stack[top - 1])
        elif op == T.OP_EXP:
            stack[top - 1] = np.exp(stack[top - 1])
        elif op == T.OP_SINH:
            stack[top - 1] = np.sinh(stack[top - 1])
        elif op == T.OP_COSH:
            stack[top - 1] = np.cosh(stack[top - 1])
        elif op == T.OP_TANH:
            stack[top - 1] = np.tanh(stack[top - 1])
        else:
            raise ValueError(f"unknown opcode {op}")
    return stack[0].copy()
