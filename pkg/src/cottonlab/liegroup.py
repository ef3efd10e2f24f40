"""Closed-form geometry of left-invariant metrics on 3-dimensional Lie groups.

The data is a bracket table c[i, j, k] ([e_i, e_j] = sum_k c[i,j,k] e_k) and
an inner product on the algebra.  Everything downstream happens in an
orthonormalized oriented basis, where the Koszul formula collapses to

    2 <nabla_i e_j, e_k> = c'_{ijk} + c'_{kij} + c'_{kji}

with c' the transformed structure constants.  The built-in catalog uses the
normalization [e1, e2] = 2 e3 (cyclic) with the unit inner product, under
which the rotation group has connection coefficients nabla_I J = K, Chern-
Simons density 8, and total volume pi^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import JacobiViolationError, NotPositiveDefiniteError
from .tensor import EPS, MVForm, is_positive_definite, trace_form, wedge


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants and inner product of a 3-dimensional Lie algebra."""

    c: np.ndarray  # c[i, j, k]: [e_i, e_j] = c[i, j, k] e_k
    ip: np.ndarray = field(default_factory=lambda: np.eye(3))
    total_volume: float | None = None
    name: str = "custom"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        ip = np.asarray(self.ip, dtype=np.float64)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "ip", ip)
        if c.shape != (3, 3, 3):
            raise ValueError("structure constants need shape (3, 3, 3)")
        if np.max(np.abs(c + c.transpose(1, 0, 2))) > 1e-12:
            raise JacobiViolationError("structure constants are not antisymmetric")
        jac = np.einsum("ijm,mkl->ijkl", c, c)
        jac = jac + np.einsum("jkm,mil->ijkl", c, c) + np.einsum("kim,mjl->ijkl", c, c)
        worst = float(np.max(np.abs(jac)))
        if worst > 1e-12:
            raise JacobiViolationError(f"Jacobi identity fails by {worst:.3e}")
        if not is_positive_definite(ip):
            raise NotPositiveDefiniteError("algebra inner product must be SPD")

    def orthonormalized(self):
        """(basis matrix P, transformed constants) with f_a = P[:, a] in the
        e-basis, f orthonormal and positively oriented."""
        L = np.linalg.cholesky(self.ip)
        P = np.linalg.inv(L).T  # upper triangular, positive diagonal
        Pinv = np.linalg.inv(P)  # e_k = Pinv[c, k] f_c
        cp = np.einsum("ia,jb,ijk,ck->abc", P, P, self.c, Pinv)
        return P, cp


def _catalog_so3():
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 2.0
        c[j, i, k] = -2.0
    return c


def algebra(key: str) -> LieAlgebraData:
    """Catalog lookup: so3, su2, heisenberg, abelian, berger:t=<real>."""
    key = key.strip().lower()
    if key == "so3":
        return LieAlgebraData(_catalog_so3(), np.eye(3), math.pi**2, "so3")
    if key in ("su2", "s3"):
        return LieAlgebraData(_catalog_so3(), np.eye(3), 2 * math.pi**2, "su2")
    if key == "abelian":
        return LieAlgebraData(np.zeros((3, 3, 3)), np.eye(3), None, "abelian")
    if key == "heisenberg":
        c = np.zeros((3, 3, 3))
        c[0, 1, 2] = 1.0
        c[1, 0, 2] = -1.0
        return LieAlgebraData(c, np.eye(3), None, "heisenberg")
    if key.startswith("berger:t="):
        t = float(key.split("=", 1)[1])
        if t <= 0:
            raise ValueError("Berger parameter must be positive")
        return LieAlgebraData(
            _catalog_so3(),
            np.diag([t, 1.0, 1.0]),
            math.pi**2 * math.sqrt(t),
            f"berger:t={t:g}",
        )
    raise KeyError(f"unknown algebra key {key!r}")


def berger(t: float) -> LieAlgebraData:
    return algebra(f"berger:t={t!r}")


# --- connection and curvature ------------------------------------------------


def _onb_connection(L: LieAlgebraData):
    """Connection coefficients conn[i, j, k] = <nabla_{f_i} f_j, f_k> in the
    orthonormal basis."""
    _, cp = L.orthonormalized()
    conn = 0.5 * (cp + np.einsum("kij->ijk", cp) + np.einsum("kji->ijk", cp))
    return conn, cp


def levi_civita_leftinv(L: LieAlgebraData):
    """nabla_{e_i} e_j coefficients in the original basis: out[i, j, k]."""
    P, _ = L.orthonormalized()
    conn, _ = _onb_connection(L)
    A = np.linalg.inv(P).T  # e_i = A[i, a] f_a
    # nabla_{f_a} f_b = conn[a, b, c] f_c and f_c = P[k, c] e_k
    return np.einsum("ia,jb,abc,kc->ijk", A, A, conn, P)


def connection_matrices(L: LieAlgebraData):
    """omega(f_i) as so(3) matrices in the orthonormal frame: w[i][a, b]."""
    conn, cp = _onb_connection(L)
    # omega_{ab}(f_i) = <nabla_{f_i} f_b, f_a> = conn[i, b, a]
    w = np.einsum("iba->iab", conn)
    return w, cp


def curvature_onb(L: LieAlgebraData):
    """R[a, i, j, k]: R(f_i, f_j) f_k = R[a, i, j, k] f_a, orthonormal basis."""
    conn, cp = _onb_connection(L)
    term = np.einsum("jkm,ima->aijk", conn, conn)
    r = term - np.einsum("ajik->aijk", term)
    r -= np.einsum("ijm,mka->aijk", cp, conn)
    return r


def cs_density_parts(L: LieAlgebraData):
    """(tr(omega ^ d omega), tr(omega^3), cs) coefficients of dvol."""
    w, cp = connection_matrices(L)
    omega = MVForm(1, [w[0], w[1], w[2]])
    # Cartan: d omega (f_i, f_j) = -omega([f_i, f_j])
    dw = {}
    for i, j in ((0, 1), (0, 2), (1, 2)):
        dw[(i, j)] = -np.einsum("k,kab->ab", cp[i, j], w)
    domega = MVForm(2, [dw[(0, 1)], dw[(0, 2)], dw[(1, 2)]])
    t1 = float(trace_form(wedge(omega, domega)).values[0][0, 0])
    t3 = float(trace_form(wedge(omega, wedge(omega, omega))).values[0][0, 0])
    return t1, t3, t1 + (2.0 / 3.0) * t3


def cs_density_leftinv(L: LieAlgebraData) -> float:
    """Coefficient lambda with cs(omega) = lambda dvol (orthonormal frame)."""
    return cs_density_parts(L)[2]


def cs_invariant_group(L: LieAlgebraData, volume: float | None = None) -> float:
    """CS = -lambda * volume / (16 pi^2)."""
    vol = L.total_volume if volume is None else float(volume)
    if vol is None or vol <= 0:
        raise ValueError("a positive group volume is required")
    return -cs_density_leftinv(L) * vol / (16.0 * math.pi**2)


def mc_cube_trace(L: LieAlgebraData, representation=None) -> float:
    """Coefficient of dvol in tr(omega_MC^3).

    The Maurer-Cartan form is evaluated in the adjoint representation by
    default; pass three matrices to use another representation.  The result
    is reported against the volume form of the orthonormalized basis.
    """
    if representation is None:
        rep = [np.asarray(L.c[i].T, dtype=np.float64) for i in range(3)]
        # ad_{e_i}[k, j] = c[i, j, k]
    else:
        rep = [np.asarray(M) for M in representation]
    P, _ = L.orthonormalized()
    # omega_MC(f_a) = f_a in the representation
    m = [sum(P[i, a] * rep[i] for i in range(3)) for a in range(3)]
    t123 = np.trace(m[0] @ m[1] @ m[2])
    t132 = np.trace(m[0] @ m[2] @ m[1])
    return float(np.real(3.0 * (t123 - t132)))


def curvature_data_onb(L: LieAlgebraData):
    """(ric, scal, sch) in the orthonormal basis."""
    r = curvature_onb(L)
    # Ric(u, v) = sum_i <R(f_i, f_u) f_v, f_i> = sum_i r[i, i, u, v]
    ric = np.einsum("iiuv->uv", r)
    scal = float(np.trace(ric))
    sch = ric - 0.25 * scal * np.eye(3)
    return ric, scal, sch


def cotton_leftinv(L: LieAlgebraData):
    """Cotton tensor in the orthonormal left-invariant frame.

    Star orientation matches the chart pipeline: the Chern-Simons first
    variation pairs against this tensor with a minus sign.
    """
    conn, _ = _onb_connection(L)
    _, _, sch = curvature_data_onb(L)
    # (nabla_i Sch)(j, k) = -conn[i,j,m] Sch[m,k] - conn[i,k,m] Sch[j,m]
    nab = -np.einsum("ijm,mk->ijk", conn, sch) - np.einsum("ikm,jm->ijk", conn, sch)
    cform = nab - np.einsum("jik->ijk", nab)
    return -0.5 * np.einsum("ija,ijk->ak", EPS, cform)


# --- Berger variational data --------------------------------------------------


def berger_cs(t: float) -> float:
    """Chern-Simons invariant of the Berger metric diag(t, 1, 1)."""
    L = berger(t)
    return cs_invariant_group(L)


def berger_variational_check(t: float, eps: float = 1e-4):
    """(finite difference of CS, Cotton pairing) at Berger parameter t.

    The pairing side is -1/(8 pi^2) <gdot, Cott>_g vol(g) with gdot the
    coframe-diagonal (1, 0, 0) variation.
    """
    fd = (berger_cs(t + eps) - berger_cs(t - eps)) / (2.0 * eps)
    L = berger(t)
    P, _ = L.orthonormalized()
    A = np.linalg.inv(P).T  # e_i = A[i, a] f_a
    cott_f = cotton_leftinv(L)
    cott_e = np.einsum("ia,jb,ab->ij", A, A, cott_f)
    gdot = np.diag([1.0, 0.0, 0.0])
    ipinv = np.linalg.inv(L.ip)
    pairing = float(np.einsum("ik,jl,ij,kl->", ipinv, ipinv, gdot, cott_e))
    vol = L.total_volume
    return fd, -pairing * vol / (8.0 * math.pi**2)
