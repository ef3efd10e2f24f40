"""Independent oracles for the test suite.

Nothing here reuses the code paths it is meant to check: derivatives come
from Richardson-extrapolated central differences of plain evaluation,
wedges from brute-force antisymmetrization over all permutations, constant
curvature from the closed Kulkarni-Nomizu form, and the Cotton form from
finite differences of the Schouten tensor.
"""

from __future__ import annotations

from itertools import combinations_with_replacement, permutations

import numpy as np

from cottonlab.geometry import MetricData
from cottonlab.jets import eval_expr_many
from cottonlab.tensor import INCREASING_TUPLES, MVForm


def _directional_derivs(expr, point, direction, h):
    """(phi', phi'', phi''') at t=0 for phi(t) = f(p + t d), Richardson."""
    p = np.asarray(point, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)

    def phi(ts):
        pts = p[None, :] + np.asarray(ts)[:, None] * d[None, :]
        return eval_expr_many(expr, pts)

    out = []
    for step in (h, h / 2.0):
        v = phi([-2 * step, -step, 0.0, step, 2 * step])
        d1 = (v[3] - v[1]) / (2 * step)
        d2 = (v[3] - 2 * v[2] + v[1]) / step**2
        d3 = (v[4] - 2 * v[3] + 2 * v[1] - v[0]) / (2 * step**3)
        out.append((d1, d2, d3))
    (a1, a2, a3), (b1, b2, b3) = out
    return (
        (4 * b1 - a1) / 3.0,
        (4 * b2 - a2) / 3.0,
        (4 * b3 - a3) / 3.0,
    )


_DIRS = None


def _directions():
    global _DIRS
    if _DIRS is None:
        rng = np.random.default_rng(20240901)
        base = [np.eye(3)[i] for i in range(3)]
        base += [np.eye(3)[i] + np.eye(3)[j] for i in range(3) for j in range(i + 1, 3)]
        extra = rng.normal(size=(12, 3))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        _DIRS = np.array(base + list(extra))
    return _DIRS


def fd_partials(expr, point, h=8e-3):
    """All partial derivatives through order 3 by directional FD fits.

    Returns dict multi-index -> value for |alpha| in {1, 2, 3}.
    """
    dirs = _directions()
    rows1, rows2, rows3 = [], [], []
    rhs1, rhs2, rhs3 = [], [], []
    idx1 = [(0,), (1,), (2,)]
    idx2 = list(combinations_with_replacement(range(3), 2))
    idx3 = list(combinations_with_replacement(range(3), 3))

    def multiplicity(idx):
        out = 1
        seen = {}
        for v in idx:
            seen[v] = seen.get(v, 0) + 1
        from math import factorial

        total = factorial(len(idx))
        for v in seen.values():
            total //= factorial(v)
        return total

    for d in dirs:
        d1, d2, d3 = _directional_derivs(expr, point, d, h)
        rows1.append([d[i] for (i,) in idx1])
        rhs1.append(d1)
        rows2.append([multiplicity(ix) * np.prod(d[list(ix)]) for ix in idx2])
        rhs2.append(d2)
        rows3.append([multiplicity(ix) * np.prod(d[list(ix)]) for ix in idx3])
        rhs3.append(d3)
    sol1 = np.linalg.lstsq(np.array(rows1), np.array(rhs1), rcond=None)[0]
    sol2 = np.linalg.lstsq(np.array(rows2), np.array(rhs2), rcond=None)[0]
    sol3 = np.linalg.lstsq(np.array(rows3), np.array(rhs3), rcond=None)[0]
    out = {}
    for (i,), v in zip(idx1, sol1):
        alpha = [0, 0, 0]
        alpha[i] = 1
        out[tuple(alpha)] = v
    for ix, v in zip(idx2, sol2):
        alpha = [0, 0, 0]
        for s in ix:
            alpha[s] += 1
        out[tuple(alpha)] = v
    for ix, v in zip(idx3, sol3):
        alpha = [0, 0, 0]
        for s in ix:
            alpha[s] += 1
        out[tuple(alpha)] = v
    return out


def brute_wedge_on(a: MVForm, b: MVForm, vectors):
    """(a wedge b)(v_1 .. v_{k+l}) by summation over all permutations."""
    from math import factorial

    k, l = a.degree, b.degree
    n = k + l
    total = np.zeros((max(a.matrix_size, b.matrix_size),) * 2)
    for perm in permutations(range(n)):
        sign = 1.0
        p = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if p[i] > p[j]:
                    sign = -sign
        va = a(*[vectors[p] for p in perm[:k]]) if k else a.values[0]
        vb = b(*[vectors[p] for p in perm[k:]]) if l else b.values[0]
        total += sign * (va @ vb)
    return total / (factorial(k) * factorial(l))


def constant_curvature_riemann(g, kappa):
    """R[i,j,k,l] = kappa (g_ik g_jl - g_il g_jk) batch oracle."""
    return kappa * (
        np.einsum("nik,njl->nijkl", g, g) - np.einsum("nil,njk->nijkl", g, g)
    )


def fd_cotton_form(m, points, h=1e-2):
    """Cotton form by Richardson finite differences of the Schouten tensor."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[0]

    def sch(p):
        return MetricData(m, p).sch0

    dsch = np.empty((n, 3, 3, 3))
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = 1.0
        approx = []
        for step in (h, h / 2.0):
            d = (sch(pts + step * e) - sch(pts - step * e)) / (2 * step)
            approx.append(d)
        dsch[:, axis] = (4 * approx[1] - approx[0]) / 3.0
    d = MetricData(m, pts)
    nabla = dsch - np.einsum("nmij,nmk->nijk", d.gamma0, d.sch0) - np.einsum(
        "nmik,njm->nijk", d.gamma0, d.sch0
    )
    return nabla - np.einsum("njik->nijk", nabla)
