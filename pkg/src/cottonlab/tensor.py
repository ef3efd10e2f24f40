"""Dense multilinear algebra in dimension 3.

Matrix-valued differential forms are stored on strictly increasing index
tuples (1, 3, 3, 1 coefficients for degrees 0..3); antisymmetry in the form
indices is implied by the storage and every sign comes from shuffle
permutations.  The Hodge star is normatively defined on oriented orthonormal
coframes (star of the unit covector S^1 is S^2 wedge S^3 and cyclically,
with star(1) the volume form) and extended to coordinate frames through
sqrt(det g); it squares to the identity in every degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateSeedError, DegreeError, NotPositiveDefiniteError

INCREASING_TUPLES = {
    k: tuple(combinations(range(3), k)) for k in range(4)
}

# Levi-Civita symbol
EPS = np.zeros((3, 3, 3))
EPS[0, 1, 2] = EPS[1, 2, 0] = EPS[2, 0, 1] = 1.0
EPS[0, 2, 1] = EPS[2, 1, 0] = EPS[1, 0, 2] = -1.0


def check_symmetric(a, tol=1e-12):
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3) or np.max(np.abs(a - a.T)) > tol:
        raise ValueError("expected a symmetric 3x3 matrix")
    return 0.5 * (a + a.T)


def is_positive_definite(g):
    """Leading-principal-minor test for a symmetric 3x3 matrix."""
    g = np.asarray(g, dtype=np.float64)
    return (
        g[0, 0] > 0.0
        and g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0] > 0.0
        and np.linalg.det(g) > 0.0
    )


def require_spd(g, context=""):
    g = np.asarray(g, dtype=np.float64)
    if not is_positive_definite(g):
        where = f" {context}" if context else ""
        raise NotPositiveDefiniteError(f"metric is not positive definite{where}")
    return g


def _shuffles(k, total):
    """(positions_for_a, positions_for_b, sign) for all (k, total-k) splits."""
    out = []
    for ja in combinations(range(total), k):
        jb = tuple(i for i in range(total) if i not in ja)
        perm = ja + jb
        sign = 1.0
        p = list(perm)
        for i in range(total):
            for j in range(i + 1, total):
                if p[i] > p[j]:
                    sign = -sign
        out.append((ja, jb, sign))
    return out

_SHUFFLE_TABLE = {(k, l): _shuffles(k, k + l) for k in range(4) for l in range(4) if k + l <= 3}


class MVForm:
    """Degree-k differential form with square-matrix values.

    ``values[i]`` is the coefficient on ``INCREASING_TUPLES[degree][i]``.
    Scalar forms are the ``m = 1`` case.
    """

    __slots__ = ("degree", "values")

    def __init__(self, degree, values):
        if degree not in (0, 1, 2, 3):
            raise DegreeError(f"form degree {degree} outside 0..3")
        vals = [np.atleast_2d(np.asarray(v, dtype=np.float64)) for v in values]
        if len(vals) != len(INCREASING_TUPLES[degree]):
            raise ValueError(
                f"degree {degree} needs {len(INCREASING_TUPLES[degree])} coefficients"
            )
        m = vals[0].shape[0]
        for v in vals:
            if v.shape != (m, m):
                raise ValueError("coefficients must share one square shape")
        self.degree = degree
        self.values = vals

    @classmethod
    def zero(cls, degree, m=3):
        return cls(degree, [np.zeros((m, m)) for _ in INCREASING_TUPLES[degree]])

    @property
    def matrix_size(self):
        return self.values[0].shape[0]

    def coefficient(self, idx_tuple):
        """Coefficient on an arbitrary tuple, antisymmetrized from storage."""
        idx = tuple(idx_tuple)
        if len(idx) != self.degree:
            raise ValueError("index tuple length must equal the degree")
        if len(set(idx)) != len(idx):
            return np.zeros_like(self.values[0])
        order = tuple(sorted(idx))
        sign = 1.0
        p = list(idx)
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                if p[i] > p[j]:
                    sign = -sign
        return sign * self.values[INCREASING_TUPLES[self.degree].index(order)]

    def __add__(self, other):
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        return MVForm(self.degree, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other):
        if self.degree != other.degree:
            raise DegreeError("cannot subtract forms of different degree")
        return MVForm(self.degree, [a - b for a, b in zip(self.values, other.values)])

    def __mul__(self, scalar):
        return MVForm(self.degree, [v * float(scalar) for v in self.values])

    __rmul__ = __mul__

    def __call__(self, *vectors):
        """Evaluate on ``degree`` vectors (each length 3)."""
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} vectors")
        if self.degree == 0:
            return self.values[0].copy()
        V = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
        out = np.zeros_like(self.values[0])
        for pos, idx in enumerate(INCREASING_TUPLES[self.degree]):
            out += self.values[pos] * np.linalg.det(V[:, list(idx)])
        return out

    def norm_max(self):
        return max(np.max(np.abs(v)) for v in self.values)


def wedge(a: MVForm, b: MVForm) -> MVForm:
    """Wedge product; matrix multiplication on values, shuffle signs on indices."""
    k, l = a.degree, b.degree
    if k + l > 3:
        raise DegreeError(f"wedge of degrees {k} and {l} exceeds the dimension")
    tuples_out = INCREASING_TUPLES[k + l]
    m = max(a.matrix_size, b.matrix_size)
    out = [np.zeros((m, m)) for _ in tuples_out]
    for pos, idx in enumerate(tuples_out):
        idx = np.asarray(idx)
        for ja, jb, sign in _SHUFFLE_TABLE[(k, l)]:
            va = a.coefficient(tuple(idx[list(ja)])) if k else a.values[0]
            vb = b.coefficient(tuple(idx[list(jb)])) if l else b.values[0]
            out[pos] += sign * (va @ vb)
    return MVForm(k + l, out)


def trace_form(a: MVForm) -> MVForm:
    """Apply the matrix trace to each coefficient; result is scalar-valued."""
    return MVForm(a.degree, [np.atleast_2d(np.trace(v)) for v in a.values])


def _scalar_coeffs(a: MVForm):
    if a.matrix_size != 1:
        raise ValueError("hodge_star acts on scalar-valued forms")
    return np.array([v[0, 0] for v in a.values])


def hodge_star(g, orientation, a: MVForm) -> MVForm:
    """Hodge star of a scalar k-form for metric g and orientation +-1.

    Matches the orthonormal-coframe normalization exactly and satisfies
    star(star(a)) == a on every degree.
    """
    g = require_spd(check_symmetric(g), "in hodge_star")
    o = float(orientation)
    if o not in (1.0, -1.0):
        raise ValueError("orientation must be +1 or -1")
    sg = float(np.sqrt(np.linalg.det(g)))
    ginv = np.linalg.inv(g)
    c = _scalar_coeffs(a)
    k = a.degree
    if k == 0:
        return MVForm(3, [np.atleast_2d(o * sg * c[0])])
    if k == 3:
        return MVForm(0, [np.atleast_2d(o * c[0] / sg)])
    if k == 1:
        alpha_up = ginv @ c
        beta = o * sg * np.einsum("i,ijk->jk", alpha_up, EPS)
        return MVForm(2, [np.atleast_2d(beta[i, j]) for (i, j) in INCREASING_TUPLES[2]])
    # k == 2: densify, raise both indices, contract with the volume form
    B = np.zeros((3, 3))
    for pos, (i, j) in enumerate(INCREASING_TUPLES[2]):
        B[i, j] = c[pos]
        B[j, i] = -c[pos]
    B_up = ginv @ B @ ginv.T
    alpha = 0.5 * o * sg * np.einsum("ij,ijk->k", B_up, EPS)
    return MVForm(1, [np.atleast_2d(v) for v in alpha])


def form_inner(g, a: MVForm, b: MVForm) -> float:
    """Inner product induced by g on scalar k-forms."""
    if a.degree != b.degree:
        raise DegreeError("inner product needs equal degrees")
    ginv = np.linalg.inv(require_spd(check_symmetric(g)))
    ca, cb = _scalar_coeffs(a), _scalar_coeffs(b)
    k = a.degree
    if k == 0:
        return float(ca[0] * cb[0])
    if k == 3:
        d = float(np.linalg.det(g))
        return float(ca[0] * cb[0] / d)
    total = 0.0
    for pa, ia in enumerate(INCREASING_TUPLES[k]):
        for pb, ib in enumerate(INCREASING_TUPLES[k]):
            gram = ginv[np.ix_(list(ia), list(ib))]
            total += ca[pa] * cb[pb] * np.linalg.det(gram)
    return float(total)


@dataclass(frozen=True)
class Frame:
    """Three frame vectors in chart coordinates, columns of ``matrix``."""

    matrix: np.ndarray
    oriented: bool = True

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=np.float64))
        if self.matrix.shape != (3, 3):
            raise ValueError("frame needs a 3x3 column matrix")

    def vector(self, a):
        return self.matrix[:, a].copy()

    def gram_defect(self, g):
        return float(np.max(np.abs(self.matrix.T @ g @ self.matrix - np.eye(3))))


def gram_schmidt(g, seed) -> Frame:
    """g-orthonormalize three seed vectors, keeping span flags and orientation.

    The first output vector stays parallel to the first seed vector and the
    output orientation equals the seed orientation.
    """
    g = require_spd(check_symmetric(g), "in gram_schmidt")
    S = np.array(seed, dtype=np.float64)
    if S.shape != (3, 3):
        raise ValueError("seed must be three vectors as columns of a 3x3 matrix")
    if abs(np.linalg.det(S)) < 1e-12:
        raise DegenerateSeedError("seed vectors are numerically dependent")
    out = np.empty((3, 3))
    for a in range(3):
        v = S[:, a].copy()
        for b in range(a):
            v -= (out[:, b] @ g @ S[:, a]) * out[:, b]
        n2 = v @ g @ v
        if n2 <= 0.0:
            raise DegenerateSeedError("seed collapsed during orthonormalization")
        out[:, a] = v / np.sqrt(n2)
    return Frame(out, oriented=bool(np.linalg.det(out) > 0))
