# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled jet kernel: order-3 jet arithmetic and tape evaluation.

Mirrors ``cottonlab._jetcore_py`` operation for operation, including the
accumulation order inside jet multiplication, so the two lanes agree to the
last bit on the ring operations.
"""

from libc.math cimport sin, cos, tan, exp, log, sqrt, sinh, cosh, tanh, pow
from libc.stdlib cimport malloc, free

import numpy as np

from . import _jettables as _T
from ._jettables import JetDomainFailure

BACKEND = "cython"

DEF NC = 20
DEF MAXPAIRS = 128

cdef int NPAIRS = 0
cdef int MUL_P[MAXPAIRS]
cdef int MUL_Q[MAXPAIRS]
cdef int MUL_K[MAXPAIRS]
cdef int VAR_SLOT[3]

cdef int OP_CONST = _T.OP_CONST
cdef int OP_VAR = _T.OP_VAR
cdef int OP_ADD = _T.OP_ADD
cdef int OP_SUB = _T.OP_SUB
cdef int OP_MUL = _T.OP_MUL
cdef int OP_DIV = _T.OP_DIV
cdef int OP_NEG = _T.OP_NEG
cdef int OP_POW = _T.OP_POW
cdef int OP_SIN = _T.OP_SIN
cdef int OP_COS = _T.OP_COS
cdef int OP_TAN = _T.OP_TAN
cdef int OP_EXP = _T.OP_EXP
cdef int OP_LOG = _T.OP_LOG
cdef int OP_SQRT = _T.OP_SQRT
cdef int OP_SINH = _T.OP_SINH
cdef int OP_COSH = _T.OP_COSH
cdef int OP_TANH = _T.OP_TANH

cdef int ERR_OK = _T.ERR_OK
cdef int ERR_LOG = _T.ERR_LOG
cdef int ERR_SQRT = _T.ERR_SQRT
cdef int ERR_DIV = _T.ERR_DIV
cdef int ERR_POW = _T.ERR_POW


def _init_tables():
    global NPAIRS
    if len(_T.MUL_P) > MAXPAIRS:
        raise RuntimeError("jet pair table larger than the compiled bound")
    NPAIRS = len(_T.MUL_P)
    for i in range(NPAIRS):
        MUL_P[i] = _T.MUL_P[i]
        MUL_Q[i] = _T.MUL_Q[i]
        MUL_K[i] = _T.MUL_K[i]
    for i in range(3):
        VAR_SLOT[i] = _T.VAR_SLOT[i]


_init_tables()


cdef inline void c_zero(double* a) nogil:
    cdef int i
    for i in range(NC):
        a[i] = 0.0


cdef inline void c_copy(double* dst, double* src) nogil:
    cdef int i
    for i in range(NC):
        dst[i] = src[i]


cdef inline void c_mul(double* a, double* b, double* out) nogil:
    cdef int i, p, q
    c_zero(out)
    for i in range(NPAIRS):
        p = MUL_P[i]
        q = MUL_Q[i]
        if p == q:
            out[MUL_K[i]] += a[p] * b[p]
        else:
            out[MUL_K[i]] += a[p] * b[q] + a[q] * b[p]


cdef inline void c_compose(double* u, double c0, double c1, double c2, double c3,
                           double* out, double* w, double* tmp) nogil:
    # Horner: c0 + w*(c1 + w*(c2 + w*c3)), w = u minus its constant term
    c_copy(w, u)
    w[0] = 0.0
    c_zero(tmp)
    tmp[0] = c3
    c_mul(tmp, w, out)
    out[0] += c2
    c_mul(out, w, tmp)
    tmp[0] += c1
    c_mul(tmp, w, out)
    out[0] += c0


cdef inline int c_recip(double* b, double* out, double* w, double* tmp) nogil:
    cdef double u = b[0]
    cdef double iu
    if u == 0.0:
        return ERR_DIV
    iu = 1.0 / u
    c_compose(b, iu, -iu * iu, iu * iu * iu, -(iu * iu) * (iu * iu), out, w, tmp)
    return ERR_OK


cdef inline int c_pow(double* a, int n, double* out, double* s1, double* w, double* tmp) nogil:
    cdef int err, k
    if n == 0:
        c_zero(out)
        out[0] = 1.0
        return ERR_OK
    if n < 0:
        if a[0] == 0.0:
            return ERR_POW
        err = c_recip(a, s1, w, tmp)
        if err != ERR_OK:
            return err
        return c_pow(s1, -n, out, tmp, w, tmp)
    c_copy(out, a)
    for k in range(n - 1):
        c_copy(s1, out)
        c_mul(s1, a, out)
    return ERR_OK


cdef inline int c_unary(int op, double* a, double* out, double* w, double* tmp) nogil:
    cdef double u = a[0]
    cdef double s, c, t, d, e, iu
    if op == OP_SIN:
        s = sin(u); c = cos(u)
        c_compose(a, s, c, -s / 2.0, -c / 6.0, out, w, tmp)
    elif op == OP_COS:
        s = sin(u); c = cos(u)
        c_compose(a, c, -s, -c / 2.0, s / 6.0, out, w, tmp)
    elif op == OP_TAN:
        t = tan(u); d = 1.0 + t * t
        c_compose(a, t, d, t * d, d * (1.0 + 3.0 * t * t) / 3.0, out, w, tmp)
    elif op == OP_EXP:
        e = exp(u)
        c_compose(a, e, e, e / 2.0, e / 6.0, out, w, tmp)
    elif op == OP_LOG:
        if u <= 0.0:
            return ERR_LOG
        iu = 1.0 / u
        c_compose(a, log(u), iu, -iu * iu / 2.0, iu * iu * iu / 3.0, out, w, tmp)
    elif op == OP_SQRT:
        if u <= 0.0:
            return ERR_SQRT
        s = sqrt(u)
        c_compose(a, s, 0.5 / s, -1.0 / (8.0 * s * u), 1.0 / (16.0 * s * u * u), out, w, tmp)
    elif op == OP_SINH:
        s = sinh(u); c = cosh(u)
        c_compose(a, s, c, s / 2.0, c / 6.0, out, w, tmp)
    elif op == OP_COSH:
        s = sinh(u); c = cosh(u)
        c_compose(a, c, s, c / 2.0, s / 6.0, out, w, tmp)
    elif op == OP_TANH:
        t = tanh(u); d = 1.0 - t * t
        c_compose(a, t, d, -t * d, d * (3.0 * t * t - 1.0) / 3.0, out, w, tmp)
    return ERR_OK


def eval_jets(ops, iargs, consts, points, depth):
    cdef int[:] ops_v = np.ascontiguousarray(ops, dtype=np.int32)
    cdef int[:] iargs_v = np.ascontiguousarray(iargs, dtype=np.int32)
    cdef double[:] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef int nops = ops_v.shape[0]
    cdef int d = depth
    out_arr = np.empty((n, NC), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* stack = <double*> malloc((d + 1) * NC * sizeof(double))
    cdef double* w = <double*> malloc(3 * NC * sizeof(double))
    cdef double* tmp = w + NC
    cdef double* s1 = w + 2 * NC
    cdef Py_ssize_t i
    cdef int top, k, op, arg, err, j
    cdef double* cur
    if stack == NULL or w == NULL:
        if stack != NULL: free(stack)
        if w != NULL: free(w)
        raise MemoryError()
    err = ERR_OK
    try:
        for i in range(n):
            top = 0
            for k in range(nops):
                op = ops_v[k]
                arg = iargs_v[k]
                if op == OP_CONST:
                    cur = stack + top * NC
                    c_zero(cur)
                    cur[0] = consts_v[arg]
                    top += 1
                elif op == OP_VAR:
                    cur = stack + top * NC
                    c_zero(cur)
                    cur[0] = pts[i, arg]
                    cur[VAR_SLOT[arg]] = 1.0
                    top += 1
                elif op == OP_ADD:
                    cur = stack + (top - 2) * NC
                    for j in range(NC):
                        cur[j] += cur[NC + j]
                    top -= 1
                elif op == OP_SUB:
                    cur = stack + (top - 2) * NC
                    for j in range(NC):
                        cur[j] -= cur[NC + j]
                    top -= 1
                elif op == OP_MUL:
                    cur = stack + (top - 2) * NC
                    c_mul(cur, cur + NC, tmp)
                    c_copy(cur, tmp)
                    top -= 1
                elif op == OP_DIV:
                    cur = stack + (top - 2) * NC
                    err = c_recip(cur + NC, s1, w, tmp)
                    if err != ERR_OK:
                        break
                    c_mul(cur, s1, tmp)
                    c_copy(cur, tmp)
                    top -= 1
                elif op == OP_NEG:
                    cur = stack + (top - 1) * NC
                    for j in range(NC):
                        cur[j] = -cur[j]
                elif op == OP_POW:
                    cur = stack + (top - 1) * NC
                    err = c_pow(cur, arg, stack + top * NC, s1, w, tmp)
                    if err != ERR_OK:
                        break
                    c_copy(cur, stack + top * NC)
                else:
                    cur = stack + (top - 1) * NC
                    err = c_unary(op, cur, stack + top * NC, w, tmp)
                    if err != ERR_OK:
                        break
                    c_copy(cur, stack + top * NC)
            if err != ERR_OK:
                raise JetDomainFailure(err, i)
            for j in range(NC):
                out[i, j] = stack[j]
    finally:
        free(stack)
        free(w)
    return out_arr


def eval_values(ops, iargs, consts, points, depth):
    cdef int[:] ops_v = np.ascontiguousarray(ops, dtype=np.int32)
    cdef int[:] iargs_v = np.ascontiguousarray(iargs, dtype=np.int32)
    cdef double[:] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef int nops = ops_v.shape[0]
    cdef int d = depth
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* stack = <double*> malloc((d + 1) * sizeof(double))
    cdef Py_ssize_t i
    cdef int top, k, op, arg, err
    cdef double u
    if stack == NULL:
        raise MemoryError()
    err = ERR_OK
    try:
        for i in range(n):
            top = 0
            for k in range(nops):
                op = ops_v[k]
                arg = iargs_v[k]
                if op == OP_CONST:
                    stack[top] = consts_v[arg]
                    top += 1
                elif op == OP_VAR:
                    stack[top] = pts[i, arg]
                    top += 1
                elif op == OP_ADD:
                    stack[top - 2] += stack[top - 1]
                    top -= 1
                elif op == OP_SUB:
                    stack[top - 2] -= stack[top - 1]
                    top -= 1
                elif op == OP_MUL:
                    stack[top - 2] *= stack[top - 1]
                    top -= 1
                elif op == OP_DIV:
                    if stack[top - 1] == 0.0:
                        err = ERR_DIV
                        break
                    stack[top - 2] /= stack[top - 1]
                    top -= 1
                elif op == OP_NEG:
                    stack[top - 1] = -stack[top - 1]
                elif op == OP_POW:
                    u = stack[top - 1]
                    if arg < 0 and u == 0.0:
                        err = ERR_POW
                        break
                    stack[top - 1] = pow(u, <double> arg)
                elif op == OP_LOG:
                    u = stack[top - 1]
                    if u <= 0.0:
                        err = ERR_LOG
                        break
                    stack[top - 1] = log(u)
                elif op == OP_SQRT:
                    u = stack[top - 1]
                    if u < 0.0:
                        err = ERR_SQRT
                        break
                    stack[top - 1] = sqrt(u)
                elif op == OP_SIN:
                    stack[top - 1] = sin(stack[top - 1])
                elif op == OP_COS:
                    stack[top - 1] = cos(stack[top - 1])
                elif op == OP_TAN:
                    stack[top - 1] = tan(stack[top - 1])
                elif op == OP_EXP:
                    stack[top - 1] = exp(stack[top - 1])
                elif op == OP_SINH:
                    stack[top - 1] = sinh(stack[top - 1])
                elif op == OP_COSH:
                    stack[top - 1] = cosh(stack[top - 1])
                elif op == OP_TANH:
                    stack[top - 1] = tanh(stack[top - 1])
            if err != ERR_OK:
                raise JetDomainFailure(err, i)
            out[i] = stack[0]
    finally:
        free(stack)
    return out_arr


def _rows(a):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def jet_mul(a, b):
    cdef double[:, ::1] av = _rows(a)
    cdef double[:, ::1] bv = _rows(b)
    out_arr = np.empty((av.shape[0], NC), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(av.shape[0]):
        c_mul(&av[i, 0], &bv[i, 0], &out[i, 0])
    return out_arr


def jet_div(a, b):
    cdef double[:, ::1] av = _rows(a)
    cdef double[:, ::1] bv = _rows(b)
    out_arr = np.empty((av.shape[0], NC), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double w[NC]
    cdef double tmp[NC]
    cdef double s1[NC]
    cdef Py_ssize_t i
    cdef int err
    for i in range(av.shape[0]):
        err = c_recip(&bv[i, 0], s1, w, tmp)
        if err != ERR_OK:
            raise JetDomainFailure(err, i)
        c_mul(&av[i, 0], s1, &out[i, 0])
    return out_arr


def jet_pow(a, n):
    cdef double[:, ::1] av = _rows(a)
    out_arr = np.empty((av.shape[0], NC), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double w[NC]
    cdef double tmp[NC]
    cdef double s1[NC]
    cdef double s2[NC]
    cdef Py_ssize_t i
    cdef int err, nn = n
    for i in range(av.shape[0]):
        if nn < 0 and av[i, 0] == 0.0:
            raise JetDomainFailure(ERR_POW, i)
        err = c_pow(&av[i, 0], nn, &out[i, 0], s1, w, tmp)
        if err != ERR_OK:
            raise JetDomainFailure(err, i)
    return out_arr


def jet_unary(op, a):
    cdef double[:, ::1] av = _rows(a)
    out_arr = np.empty((av.shape[0], NC), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double w[NC]
    cdef double tmp[NC]
    cdef Py_ssize_t i
    cdef int err, opc = op
    cdef int j
    if opc == OP_NEG:
        for i in range(av.shape[0]):
            for j in range(NC):
                out[i, j] = -av[i, j]
        return out_arr
    for i in range(av.shape[0]):
        err = c_unary(opc, &av[i, 0], &out[i, 0], w, tmp)
        if err != ERR_OK:
            raise JetDomainFailure(err, i)
    return out_arr
