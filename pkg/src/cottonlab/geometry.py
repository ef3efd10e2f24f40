"""Coordinate-chart curvature pipeline.

Starting from exact order-3 jets of the metric entries, every quantity
through the Cotton tensor is assembled with closed product-rule formulas, so
the only rounding in the chain is floating-point arithmetic; there is no
truncation error in any derivative that the pipeline consumes.

Index conventions (batch axis first everywhere):

* ``g1[n, k, i, j]`` is the partial derivative of ``g_ij`` along ``x_k``;
  higher derivative axes stack on the left the same way.
* ``gamma0[n, k, i, j]`` is the Christoffel symbol with upper index ``k``.
* ``riem[n, i, j, k, l]`` is the covariant curvature with the 2-form slot
  first: antisymmetric in (i, j) and in (k, l), symmetric under pair swap,
  and on the unit round sphere ``riem[i, j, i, j] = g_ii g_jj - g_ij^2``.
* ``cotton_form[n, i, j, k]`` is antisymmetric in (i, j) with the tangent
  leg lowered; the Cotton tensor stars out the (i, j) slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import NotPositiveDefiniteError
from .jets import Expr, derivatives_from_jets, eval_jet_many, parse
from .tensor import EPS


@dataclass(frozen=True)
class Box:
    """Axis-aligned chart domain."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3 or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi on all three axes")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self):
        return np.array([(a + b) / 2 for a, b in zip(self.lo, self.hi)])

    def contains(self, points, slack=0.0):
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo = np.asarray(self.lo) - slack
        hi = np.asarray(self.hi) + slack
        return bool(np.all(p >= lo) and np.all(p <= hi))

    def sample(self, rng, n, margin=0.0):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        pad = margin * (hi - lo)
        return rng.uniform(lo + pad, hi - pad, size=(n, 3))


def _as_expr(e):
    return parse(e) if isinstance(e, str) else e


@dataclass(frozen=True)
class MetricSpec:
    """Symmetric metric entries as expression ASTs on a chart box."""

    name: str
    entries: tuple  # 3x3 nested tuple of Expr, symmetric
    domain: Box
    orientation: int = 1

    @classmethod
    def from_components(cls, name, comps, domain, orientation=1):
        """Build from {"g11": expr_or_str, ...} with all six keys."""
        e = {}
        for i in range(3):
            for j in range(i, 3):
                key = f"g{i + 1}{j + 1}"
                if key not in comps:
                    raise KeyError(key)
                e[(i, j)] = _as_expr(comps[key])
        rows = tuple(
            tuple(e[(min(i, j), max(i, j))] for j in range(3)) for i in range(3)
        )
        return cls(name, rows, domain, int(orientation))

    def entry(self, i, j):
        return self.entries[i][j]


class MetricData:
    """Lazy bundle of pipeline arrays for one metric at one point batch."""

    def __init__(self, spec: MetricSpec, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        self.spec = spec
        self.points = pts
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    # -- metric jets --------------------------------------------------------

    def _build_metric(self):
        n = self.points.shape[0]
        g0 = np.empty((n, 3, 3))
        g1 = np.empty((n, 3, 3, 3))
        g2 = np.empty((n, 3, 3, 3, 3))
        g3 = np.empty((n, 3, 3, 3, 3, 3))
        for i in range(3):
            for j in range(i, 3):
                coeffs = eval_jet_many(self.spec.entry(i, j), self.points)
                v, d1, d2, d3 = derivatives_from_jets(coeffs)
                g0[:, i, j] = g0[:, j, i] = v
                g1[:, :, i, j] = g1[:, :, j, i] = d1
                g2[:, :, :, i, j] = g2[:, :, :, j, i] = d2
                g3[:, :, :, :, i, j] = g3[:, :, :, :, j, i] = d3
        m1 = g0[:, 0, 0]
        m2 = g0[:, 0, 0] * g0[:, 1, 1] - g0[:, 0, 1] ** 2
        m3 = np.linalg.det(g0)
        bad = (m1 <= 0) | (m2 <= 0) | (m3 <= 0)
        if np.any(bad):
            p = self.points[int(np.argmax(bad))]
            raise NotPositiveDefiniteError(
                f"metric {self.spec.name!r} is not positive definite at "
                f"({p[0]:g}, {p[1]:g}, {p[2]:g})"
            )
        return g0, g1, g2, g3

    @property
    def g0(self):
        return self._get("metric", self._build_metric)[0]

    @property
    def g1(self):
        return self._get("metric", self._build_metric)[1]

    @property
    def g2(self):
        return self._get("metric", self._build_metric)[2]

    @property
    def g3(self):
        return self._get("metric", self._build_metric)[3]

    @property
    def sqrt_det(self):
        return self._get("sqrt_det", lambda: np.sqrt(np.linalg.det(self.g0)))

    @property
    def ginv0(self):
        return self._get("ginv0", lambda: np.linalg.inv(self.g0))

    @property
    def ginv1(self):
        def build():
            return -np.einsum("nab,nkbc,ncd->nkad", self.ginv0, self.g1, self.ginv0)

        return self._get("ginv1", build)

    @property
    def ginv2(self):
        def build():
            G, G1, g1, g2 = self.ginv0, self.ginv1, self.g1, self.g2
            t1 = np.einsum("nkab,nlbc,ncd->nklad", G1, g1, G)
            t2 = np.einsum("nab,nklbc,ncd->nklad", G, g2, G)
            t3 = np.einsum("nab,nlbc,nkcd->nklad", G, g1, G1)
            return -(t1 + t2 + t3)

        return self._get("ginv2", build)

    # -- Christoffel symbols and derivatives ---------------------------------

    @property
    def T0(self):
        def build():
            g1 = self.g1
            # T0[n, l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
            di_gjl = np.einsum("nijl->nlij", g1)
            dj_gil = np.einsum("njil->nlij", g1)
            dl_gij = g1
            return 0.5 * (di_gjl + dj_gil - dl_gij)

        return self._get("T0", build)

    @property
    def T1(self):
        def build():
            g2 = self.g2
            di_gjl = np.einsum("nmijl->nmlij", g2)
            dj_gil = np.einsum("nmjil->nmlij", g2)
            dl_gij = g2
            return 0.5 * (di_gjl + dj_gil - dl_gij)

        return self._get("T1", build)

    @property
    def T2(self):
        def build():
            g3 = self.g3
            di_gjl = np.einsum("npmijl->npmlij", g3)
            dj_gil = np.einsum("npmjil->npmlij", g3)
            dl_gij = g3
            return 0.5 * (di_gjl + dj_gil - dl_gij)

        return self._get("T2", build)

    @property
    def gamma0(self):
        return self._get(
            "gamma0", lambda: np.einsum("nkl,nlij->nkij", self.ginv0, self.T0)
        )

    @property
    def gamma1(self):
        def build():
            return np.einsum("nmkl,nlij->nmkij", self.ginv1, self.T0) + np.einsum(
                "nkl,nmlij->nmkij", self.ginv0, self.T1
            )

        return self._get("gamma1", build)

    @property
    def gamma2(self):
        def build():
            t1 = np.einsum("npmkl,nlij->npmkij", self.ginv2, self.T0)
            t2 = np.einsum("nmkl,nplij->npmkij", self.ginv1, self.T1)
            t3 = np.einsum("npkl,nmlij->npmkij", self.ginv1, self.T1)
            t4 = np.einsum("nkl,npmlij->npmkij", self.ginv0, self.T2)
            return t1 + t2 + t3 + t4

        return self._get("gamma2", build)

    # -- curvature ------------------------------------------------------------

    @property
    def riem_up(self):
        def build():
            G0, G1 = self.gamma0, self.gamma1
            r = np.einsum("niljk->nlijk", G1) - np.einsum("njlik->nlijk", G1)
            r += np.einsum("nlim,nmjk->nlijk", G0, G0)
            r -= np.einsum("nljm,nmik->nlijk", G0, G0)
            return r

        return self._get("riem_up", build)

    @property
    def riem_up1(self):
        def build():
            G0, G1, G2 = self.gamma0, self.gamma1, self.gamma2
            r = np.einsum("npiljk->nplijk", G2) - np.einsum("npjlik->nplijk", G2)
            r += np.einsum("nplim,nmjk->nplijk", G1, G0)
            r += np.einsum("nlim,npmjk->nplijk", G0, G1)
            r -= np.einsum("npljm,nmik->nplijk", G1, G0)
            r -= np.einsum("nljm,npmik->nplijk", G0, G1)
            return r

        return self._get("riem_up1", build)

    @property
    def riem(self):
        return self._get(
            "riem", lambda: np.einsum("nkm,nmijl->nijkl", self.g0, self.riem_up)
        )

    @property
    def riem1(self):
        def build():
            return np.einsum("npkm,nmijl->npijkl", self.g1, self.riem_up) + np.einsum(
                "nkm,npmijl->npijkl", self.g0, self.riem_up1
            )

        return self._get("riem1", build)

    @property
    def nabla_riem(self):
        def build():
            R, G = self.riem, self.gamma0
            out = self.riem1.copy()
            out -= np.einsum("nami,najkl->nmijkl", G, R)
            out -= np.einsum("namj,niakl->nmijkl", G, R)
            out -= np.einsum("namk,nijal->nmijkl", G, R)
            out -= np.einsum("naml,nijka->nmijkl", G, R)
            return out

        return self._get("nabla_riem", build)

    @property
    def ric0(self):
        return self._get(
            "ric0", lambda: np.einsum("nik,niukv->nuv", self.ginv0, self.riem)
        )

    @property
    def ric1(self):
        def build():
            return np.einsum("npik,niukv->npuv", self.ginv1, self.riem) + np.einsum(
                "nik,npiukv->npuv", self.ginv0, self.riem1
            )

        return self._get("ric1", build)

    @property
    def scal0(self):
        return self._get(
            "scal0", lambda: np.einsum("nuv,nuv->n", self.ginv0, self.ric0)
        )

    @property
    def scal1(self):
        def build():
            return np.einsum("npuv,nuv->np", self.ginv1, self.ric0) + np.einsum(
                "nuv,npuv->np", self.ginv0, self.ric1
            )

        return self._get("scal1", build)

    @property
    def sch0(self):
        def build():
            return self.ric0 - 0.25 * self.scal0[:, None, None] * self.g0

        return self._get("sch0", build)

    @property
    def sch1(self):
        def build():
            return self.ric1 - 0.25 * (
                self.scal1[:, :, None, None] * self.g0[:, None]
                + self.scal0[:, None, None, None] * self.g1
            )

        return self._get("sch1", build)

    @property
    def nabla_sch(self):
        def build():
            out = self.sch1.copy()
            out -= np.einsum("nmij,nmk->nijk", self.gamma0, self.sch0)
            out -= np.einsum("nmik,njm->nijk", self.gamma0, self.sch0)
            return out

        return self._get("nabla_sch", build)

    @property
    def cotton(self):
        def build():
            ns = self.nabla_sch
            return ns - np.einsum("njik->nijk", ns)

        return self._get("cotton", build)

    @property
    def cotton_tensor(self):
        # The star orientation on the 2-form slot is fixed so that the
        # first variation of the Chern-Simons invariant is exactly
        # -1/(8 pi^2) <gdot, Cott>; see the module docstring.
        def build():
            up = np.einsum("nip,njq,npqk->nijk", self.ginv0, self.ginv0, self.cotton)
            ct = -0.5 * np.einsum("ija,nijk->nak", EPS, up)
            return self.spec.orientation * self.sqrt_det[:, None, None] * ct

        return self._get("cotton_tensor", build)


# --- public per-point operations -------------------------------------------


def _single(spec, p):
    return MetricData(spec, np.asarray(p, dtype=np.float64).reshape(1, 3))


def christoffels(m: MetricSpec, p):
    """Christoffel symbols Gamma[k, i, j] at a point."""
    return _single(m, p).gamma0[0]


def riemann(m: MetricSpec, p):
    """Covariant curvature R[i, j, k, l] at a point."""
    return _single(m, p).riem[0]


def ricci_scalar(R, g):
    """Contract a covariant curvature tensor to (Ricci, scalar)."""
    ginv = np.linalg.inv(g)
    ric = np.einsum("ik,iukv->uv", ginv, R)
    return ric, float(np.einsum("uv,uv->", ginv, ric))


def schouten(ric, scal, g):
    """Schouten tensor: Ricci minus a quarter of the scalar curvature times g."""
    return ric - 0.25 * scal * g


def cotton_form(m: MetricSpec, p):
    """Cotton form C[i, j, k], antisymmetric in (i, j), tangent leg lowered."""
    return _single(m, p).cotton[0]


def cotton_tensor(C, g, orientation=1):
    """Star the 2-form slot of a Cotton form; symmetric and trace-free.

    The star orientation is the one under which the Chern-Simons first
    variation pairs against the Cotton tensor with a minus sign.
    """
    ginv = np.linalg.inv(g)
    sg = float(np.sqrt(np.linalg.det(g)))
    up = np.einsum("ip,jq,pqk->ijk", ginv, ginv, C)
    return -0.5 * orientation * sg * np.einsum("ija,ijk->ak", EPS, up)


def curvature_packet(m: MetricSpec, p):
    """Full pipeline output at one point, as a CurvaturePacket."""
    d = _single(m, p)
    ric = d.ric0[0]
    return CurvaturePacket(
        point=tuple(float(v) for v in np.asarray(p, dtype=np.float64)),
        gamma=d.gamma0[0],
        riem=d.riem[0],
        ric=ric,
        scal=float(d.scal0[0]),
        sch=d.sch0[0],
        cotton_form_=d.cotton[0],
        cotton_tensor_=d.cotton_tensor[0],
    )


@dataclass(frozen=True)
class CurvaturePacket:
    point: tuple
    gamma: np.ndarray
    riem: np.ndarray
    ric: np.ndarray
    scal: float
    sch: np.ndarray
    cotton_form_: np.ndarray
    cotton_tensor_: np.ndarray

    def to_json_dict(self):
        return {
            "point": list(self.point),
            "gamma": self.gamma.tolist(),
            "riemann": self.riem.tolist(),
            "ricci": self.ric.tolist(),
            "scal": self.scal,
            "schouten": self.sch.tolist(),
            "cotton_form": self.cotton_form_.tolist(),
            "cotton_tensor": self.cotton_tensor_.tolist(),
        }


def conformal_rescale(m: MetricSpec, f) -> MetricSpec:
    """Metric spec for exp(2 f) g, built symbolically at the AST level."""
    f = _as_expr(f)
    factor = jets.Func("exp", jets.Mul(jets.Const(2.0), f))
    rows = tuple(
        tuple(jets.Mul(factor, m.entries[i][j]) for j in range(3)) for i in range(3)
    )
    return MetricSpec(f"{m.name}*conformal", rows, m.domain, m.orientation)


def curvature_from_schouten(sch, g, U, V, X):
    """Dimension-3 reconstruction of R(U, V)X from the Schouten tensor."""
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    ginv = np.linalg.inv(g)
    sch_end = ginv @ sch  # endomorphism: sch_end[k, u] X^u
    gXV = X @ g @ V
    gXU = X @ g @ U
    schX = sch_end @ X
    return gXV * (sch_end @ U) + (schX @ g @ V) * U - (schX @ g @ U) * V - gXU * (
        sch_end @ V
    )


def riemann_apply(R, g, U, V, X):
    """Vector R(U, V)X from the stored covariant curvature."""
    ginv = np.linalg.inv(g)
    return np.einsum("mk,ijkl,i,j,l->m", ginv, R, U, V, X)


# --- symmetric-2-tensor fields and divergence -------------------------------


def metric_field(m: MetricSpec):
    """Field supplier for g itself (exact jets)."""

    def supply(points):
        d = MetricData(m, points)
        return d.g0, d.g1

    return supply


def einstein_field(m: MetricSpec):
    """Field supplier for Ric - (scal/2) g with exact derivatives."""

    def supply(points):
        d = MetricData(m, points)
        h0 = d.ric0 - 0.5 * d.scal0[:, None, None] * d.g0
        h1 = d.ric1 - 0.5 * (
            d.scal1[:, :, None, None] * d.g0[:, None]
            + d.scal0[:, None, None, None] * d.g1
        )
        return h0, h1

    return supply


def schouten_field(m: MetricSpec):
    def supply(points):
        d = MetricData(m, points)
        return d.sch0, d.sch1

    return supply


def cotton_tensor_field(m: MetricSpec, step=1e-2):
    """Field supplier for the Cotton tensor.

    Values are exact; first derivatives use fourth-order central differences
    of the exact pointwise pipeline, since they would need fourth metric
    derivatives and the jets stop at order 3.
    """

    def values(points):
        return MetricData(m, points).cotton_tensor

    def supply(points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        h0 = values(pts)
        n = pts.shape[0]
        h1 = np.empty((n, 3, 3, 3))
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = step
            fp1 = values(pts + e)
            fm1 = values(pts - e)
            fp2 = values(pts + 2 * e)
            fm2 = values(pts - 2 * e)
            h1[:, axis] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * step)
        return h0, h1

    return supply


def divergence_sym2(m: MetricSpec, field, p):
    """Divergence of a symmetric 2-tensor field, sign fixed so that the
    contracted-Bianchi combination Ric - (scal/2) g is divergence-free."""
    pts = np.asarray(p, dtype=np.float64).reshape(1, 3)
    d = MetricData(m, pts)
    h0, h1 = field(pts)
    nabla = h1 - np.einsum("nmik,nmj->nikj", d.gamma0, h0) - np.einsum(
        "nmij,nkm->nikj", d.gamma0, h0
    )
    # nabla[n, i, k, j] = (grad_i h)_{kj}
    div = -np.einsum("nik,nikj->nj", d.ginv0, nabla)
    return div[0]


# --- norms and residual helpers ---------------------------------------------


def tensor_norm_02(g, a):
    """g-invariant norm of a (0,2) tensor batch (n,3,3)."""
    ginv = np.linalg.inv(g)
    return np.sqrt(
        np.abs(np.einsum("nip,njq,nij,npq->n", ginv, ginv, a, a))
    )


def tensor_norm_03(g, a):
    """g-invariant norm of a (0,3) tensor batch (n,3,3,3)."""
    ginv = np.linalg.inv(g)
    return np.sqrt(
        np.abs(np.einsum("nip,njq,nkr,nijk,npqr->n", ginv, ginv, ginv, a, a))
    )


def tensor_norm_04(g, a):
    ginv = np.linalg.inv(g)
    return np.sqrt(
        np.abs(
            np.einsum(
                "nip,njq,nkr,nls,nijkl,npqrs->n", ginv, ginv, ginv, ginv, a, a
            )
        )
    )


def bianchi_residuals(m: MetricSpec, points):
    """(first, second) Bianchi residuals, normalized by curvature scale."""
    d = MetricData(m, points)
    R = d.riem
    cyc1 = R + np.einsum("njkil->nijkl", R) + np.einsum("nkijl->nijkl", R)
    nR = d.nabla_riem
    cyc2 = (
        nR
        + np.einsum("nijmkl->nmijkl", nR)
        + np.einsum("njmikl->nmijkl", nR)
    )
    scale1 = 1.0 + tensor_norm_04(d.g0, R)
    r1 = np.max(np.abs(cyc1), axis=(1, 2, 3, 4)) / scale1
    scale2 = 1.0 + np.max(np.abs(nR), axis=(1, 2, 3, 4, 5))
    r2 = np.max(np.abs(cyc2), axis=(1, 2, 3, 4, 5)) / scale2
    return float(np.max(r1)), float(np.max(r2))
