"""Index tables shared by the jet-arithmetic backends.

An order-3 jet in three variables packs the Taylor coefficients of a scalar
function at a point: entry ``k`` holds ``d^|a| f / (a1! a2! a3!)`` for the
multi-index ``a = MULTI_INDICES[k]``, ``|a| <= 3``.  With that normalization
jet multiplication is truncated polynomial multiplication, which is what the
pair tables below encode.  Both the compiled kernel and the pure-numpy
fallback import these tables so the two lanes run the identical recipe.
"""

from __future__ import annotations

import numpy as np

ORDER = 3
NVARS = 3
NCOEFFS = 20

def _gen_indices():
    out = []
    for deg in range(ORDER + 1):
        for a in range(deg, -1, -1):
            for b in range(deg - a, -1, -1):
                out.append((a, b, deg - a - b))
    return tuple(out)

MULTI_INDICES = _gen_indices()
INDEX_OF = {mi: k for k, mi in enumerate(MULTI_INDICES)}
assert len(MULTI_INDICES) == NCOEFFS

# coefficient -> derivative conversion factors (a1! a2! a3!)
def _fact(n):
    r = 1
    for i in range(2, n + 1):
        r *= i
    return r

FACTORIALS = np.array(
    [_fact(a) * _fact(b) * _fact(c) for (a, b, c) in MULTI_INDICES], dtype=np.float64
)

# position of the three linear monomials x1, x2, x3
VAR_SLOT = tuple(INDEX_OF[mi] for mi in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))

def _gen_mul_pairs():
    """Unordered coefficient pairs (p <= q) contributing to the product.

    Iterating unordered pairs and accumulating a[p]*b[q] + a[q]*b[p] makes
    jet multiplication exactly commutative in floating point.
    """
    pairs = []
    for p, mp in enumerate(MULTI_INDICES):
        for q in range(p, NCOEFFS):
            mq = MULTI_INDICES[q]
            tot = (mp[0] + mq[0], mp[1] + mq[1], mp[2] + mq[2])
            if sum(tot) <= ORDER:
                pairs.append((p, q, INDEX_OF[tot]))
    return pairs

_PAIRS = _gen_mul_pairs()
MUL_P = np.array([p for p, _, _ in _PAIRS], dtype=np.int32)
MUL_Q = np.array([q for _, q, _ in _PAIRS], dtype=np.int32)
MUL_K = np.array([k for _, _, k in _PAIRS], dtype=np.int32)
NPAIRS = len(_PAIRS)

def _gen_shift(axis):
    """Linear map extracting the partial derivative along ``axis``.

    The result is exact through order 2; order-3 coefficients of the output
    are zero and must not be consumed downstream.
    """
    src = np.full(NCOEFFS, -1, dtype=np.int32)
    fac = np.zeros(NCOEFFS, dtype=np.float64)
    for k, mi in enumerate(MULTI_INDICES):
        if sum(mi) >= ORDER:
            continue
        up = list(mi)
        up[axis] += 1
        src[k] = INDEX_OF[tuple(up)]
        fac[k] = up[axis]
    return src, fac

SHIFT_SRC = np.stack([_gen_shift(a)[0] for a in range(3)])
SHIFT_FAC = np.stack([_gen_shift(a)[1] for a in range(3)])

# tape opcodes (stack machine; CONST/VAR push, binary ops pop two, unary pop one)
OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7
OP_SIN = 8
OP_COS = 9
OP_TAN = 10
OP_EXP = 11
OP_LOG = 12
OP_SQRT = 13
OP_SINH = 14
OP_COSH = 15
OP_TANH = 16

FUNC_OPS = {
    "sin": OP_SIN,
    "cos": OP_COS,
    "tan": OP_TAN,
    "exp": OP_EXP,
    "log": OP_LOG,
    "sqrt": OP_SQRT,
    "sinh": OP_SINH,
    "cosh": OP_COSH,
    "tanh": OP_TANH,
}

# domain-failure codes reported by the backends
ERR_OK = 0
ERR_LOG = 1
ERR_SQRT = 2
ERR_DIV = 3
ERR_POW = 4

ERR_MESSAGES = {
    ERR_LOG: "log of a non-positive value",
    ERR_SQRT: "sqrt of a negative value (jets need a strictly positive argument)",
    ERR_DIV: "division by zero",
    ERR_POW: "zero raised to a negative power",
}


class JetDomainFailure(Exception):
    """Raised by either kernel lane on a domain violation.

    Carries the failure code and the index of the first offending point so
    the expression layer can attach coordinates to the user-facing error.
    """

    def __init__(self, code, point_index):
        self.code = code
        self.point_index = int(point_index)
        super().__init__(ERR_MESSAGES.get(code, "domain error"))
