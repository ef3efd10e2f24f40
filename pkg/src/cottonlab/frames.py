"""Frame fields, connection 1-forms and the Chern-Simons 3-form.

A frame field supplies the components of three vector fields together with
their first and second coordinate derivatives; the Levi-Civita connection
form in that frame is then

    omega[i, a, b] = < nabla_i S_b, S_a >

assembled from exact metric jets.  The Chern-Simons density needs omega and
its first derivatives, which every frame source here provides exactly:
expression frames and Gram-Schmidt frames carry order-3 jets, the quaternion
sphere frame carries order-2 jets (one derivative was spent on the chart
Jacobian), still enough for d(omega).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import FrameNotOrthonormalError, NotSpecialOrthogonalError
from .geometry import MetricData, MetricSpec
from .jets import derivatives_from_jets, eval_jet_many, jet_partial, tape_of
from .tensor import MVForm

_CORE = jets._CORE


def _jet3(expr, pts):
    return eval_jet_many(expr, pts)


def _jmul(a, b):
    return _CORE.jet_mul(a, b)


def _jdiv(a, b):
    return _CORE.jet_div(a, b)


def _jsqrt(a):
    import cottonlab._jettables as T

    return _CORE.jet_unary(T.OP_SQRT, a)


@dataclass
class FrameBatch:
    """Frame components and derivatives at a batch of points.

    ``S0[n, i, a]`` is coordinate component i of frame vector a;
    ``S1[n, k, i, a]`` its derivative along x_k, ``S2`` the second derivatives.
    """

    S0: np.ndarray
    S1: np.ndarray
    S2: np.ndarray


class ExprFrame:
    """Frame given by nine component expressions, vectors[a][i]."""

    def __init__(self, vectors):
        if len(vectors) != 3 or any(len(v) != 3 for v in vectors):
            raise ValueError("need three vectors of three component expressions")
        self.vectors = [
            [jets.parse(c) if isinstance(c, str) else c for c in vec] for vec in vectors
        ]

    def evaluate(self, pts) -> FrameBatch:
        n = pts.shape[0]
        S0 = np.empty((n, 3, 3))
        S1 = np.empty((n, 3, 3, 3))
        S2 = np.empty((n, 3, 3, 3, 3))
        for a in range(3):
            for i in range(3):
                v, d1, d2, _ = derivatives_from_jets(_jet3(self.vectors[a][i], pts))
                S0[:, i, a] = v
                S1[:, :, i, a] = d1
                S2[:, :, :, i, a] = d2
        return FrameBatch(S0, S1, S2)


class GramSchmidtFrame:
    """Frame obtained by g-orthonormalizing constant seed vectors.

    The orthonormalization runs in jet arithmetic on the metric jets, so the
    frame derivatives are exact through order 3.
    """

    def __init__(self, metric: MetricSpec, seed=None):
        self.metric = metric
        self.seed = np.eye(3) if seed is None else np.asarray(seed, dtype=np.float64)
        if abs(np.linalg.det(self.seed)) < 1e-12:
            from .errors import DegenerateSeedError

            raise DegenerateSeedError("Gram-Schmidt frame seed is degenerate")

    def evaluate(self, pts) -> FrameBatch:
        n = pts.shape[0]
        gj = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                gj[i][j] = gj[j][i] = _jet3(self.metric.entry(i, j), pts)

        def const_jet(value):
            c = np.zeros((n, 20))
            c[:, 0] = value
            return c

        def ip(u, v):
            total = np.zeros((n, 20))
            for i in range(3):
                for j in range(3):
                    total += _jmul(gj[i][j], _jmul(u[i], v[j]))
            return total

        frame = []
        for a in range(3):
            v = [const_jet(self.seed[i, a]) for i in range(3)]
            for b in range(a):
                proj = ip(frame[b], v)
                for i in range(3):
                    v[i] = v[i] - _jmul(proj, frame[b][i])
            norm = _jsqrt(ip(v, v))
            frame.append([_jdiv(v[i], norm) for i in range(3)])

        S0 = np.empty((n, 3, 3))
        S1 = np.empty((n, 3, 3, 3))
        S2 = np.empty((n, 3, 3, 3, 3))
        for a in range(3):
            for i in range(3):
                val, d1, d2, _ = derivatives_from_jets(frame[a][i])
                S0[:, i, a] = val
                S1[:, :, i, a] = d1
                S2[:, :, :, i, a] = d2
        return FrameBatch(S0, S1, S2)


class QuaternionSphereFrame:
    """The frame i.eta, j.eta, k.eta on the hyperspherical chart of the
    unit 3-sphere, computed through jets of the embedding map.

    Derivatives are exact through order 2, which feeds omega and d(omega).
    """

    _ETA = (
        "cos(x1)",
        "sin(x1)*cos(x2)",
        "sin(x1)*sin(x2)*cos(x3)",
        "sin(x1)*sin(x2)*sin(x3)",
    )
    # left multiplication by i, j, k on (eta0, eta1, eta2, eta3)
    _LMUL = (
        np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float),
        np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float),
        np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float),
    )

    def evaluate(self, pts) -> FrameBatch:
        n = pts.shape[0]
        eta = [_jet3(jets.parse(e), pts) for e in self._ETA]
        tangent = [[jet_partial(eta[c], m) for c in range(4)] for m in range(3)]
        norms = []
        for m in range(3):
            n2 = np.zeros((n, 20))
            for c in range(4):
                n2 += _jmul(tangent[m][c], tangent[m][c])
            norms.append(n2)
        S0 = np.empty((n, 3, 3))
        S1 = np.empty((n, 3, 3, 3))
        S2 = np.empty((n, 3, 3, 3, 3))
        for a in range(3):
            L = self._LMUL[a]
            u = [np.zeros((n, 20)) for _ in range(4)]
            for r in range(4):
                for c in range(4):
                    if L[r, c]:
                        u[r] += L[r, c] * eta[c]
            for m in range(3):
                dot = np.zeros((n, 20))
                for c in range(4):
                    dot += _jmul(u[c], tangent[m][c])
                comp = _jdiv(dot, norms[m])
                val, d1, d2, _ = derivatives_from_jets(comp)
                S0[:, m, a] = val
                S1[:, :, m, a] = d1
                S2[:, :, :, m, a] = d2
        return FrameBatch(S0, S1, S2)


# --- connection fields -------------------------------------------------------


@dataclass
class ConnectionBatch:
    """omega0[n, i, a, b] and omega1[n, m, i, a, b] = d_m omega_{i, a, b}."""

    omega0: np.ndarray
    omega1: np.ndarray
    asym_defect: float = 0.0


class LeviCivitaConnection:
    """Connection 1-form of a metric in a supplied orthonormal frame."""

    def __init__(self, metric: MetricSpec, frame, orthonormal_tol=1e-10):
        self.metric = metric
        self.frame = frame
        self.orthonormal_tol = orthonormal_tol

    def frame_batch(self, pts) -> FrameBatch:
        return self.frame.evaluate(np.atleast_2d(np.asarray(pts, dtype=np.float64)))

    def evaluate(self, pts) -> ConnectionBatch:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        d = MetricData(self.metric, pts)
        F = self.frame.evaluate(pts)
        gram = np.einsum("nia,nij,njb->nab", F.S0, d.g0, F.S0)
        defect = float(np.max(np.abs(gram - np.eye(3))))
        if defect > self.orthonormal_tol:
            raise FrameNotOrthonormalError(
                f"frame fails orthonormality by {defect:.3e} "
                f"(tolerance {self.orthonormal_tol:.1e})"
            )
        # V[n, i, l, b] = d_i S_b^l + Gamma^l_{i m} S_b^m
        V = F.S1 + np.einsum("nlim,nmb->nilb", d.gamma0, F.S0)
        omega0 = np.einsum("nlk,nka,nilb->niab", d.g0, F.S0, V)
        dV = F.S2 + np.einsum("nmlia,nab->nmilb", d.gamma1, F.S0) + np.einsum(
            "nlia,nmab->nmilb", d.gamma0, F.S1
        )
        omega1 = (
            np.einsum("nmlk,nka,nilb->nmiab", d.g1, F.S0, V)
            + np.einsum("nlk,nmka,nilb->nmiab", d.g0, F.S1, V)
            + np.einsum("nlk,nka,nmilb->nmiab", d.g0, F.S0, dV)
        )
        asym = float(np.max(np.abs(omega0 + omega0.transpose(0, 1, 3, 2))))
        omega0 = 0.5 * (omega0 - omega0.transpose(0, 1, 3, 2))
        omega1 = 0.5 * (omega1 - omega1.transpose(0, 1, 2, 4, 3))
        return ConnectionBatch(omega0, omega1, asym)


class ExprConnection:
    """Matrix-valued 1-form field from expressions comps[i][a][b]."""

    def __init__(self, comps):
        self.comps = [
            [[jets.parse(c) if isinstance(c, str) else c for c in row] for row in mat]
            for mat in comps
        ]

    def evaluate(self, pts) -> ConnectionBatch:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        n = pts.shape[0]
        omega0 = np.empty((n, 3, 3, 3))
        omega1 = np.empty((n, 3, 3, 3, 3))
        for i in range(3):
            for a in range(3):
                for b in range(3):
                    v, d1, _, _ = derivatives_from_jets(
                        _jet3(self.comps[i][a][b], pts)
                    )
                    omega0[:, i, a, b] = v
                    omega1[:, :, i, a, b] = d1
        return ConnectionBatch(omega0, omega1)


class SO3Map:
    """SO(3)-valued map given by nine entry expressions rows[r][c]."""

    def __init__(self, rows, tol=1e-8):
        self.rows = [
            [jets.parse(c) if isinstance(c, str) else c for c in row] for row in rows
        ]
        self.tol = tol

    def evaluate(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        n = pts.shape[0]
        a0 = np.empty((n, 3, 3))
        a1 = np.empty((n, 3, 3, 3))
        a2 = np.empty((n, 3, 3, 3, 3))
        for r in range(3):
            for c in range(3):
                v, d1, d2, _ = derivatives_from_jets(_jet3(self.rows[r][c], pts))
                a0[:, r, c] = v
                a1[:, :, r, c] = d1
                a2[:, :, :, r, c] = d2
        defect = np.max(
            np.abs(np.einsum("nri,nrj->nij", a0, a0) - np.eye(3)), axis=(1, 2)
        )
        dets = np.linalg.det(a0)
        bad = (defect > self.tol) | (dets < 0.0)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NotSpecialOrthogonalError(
                f"gauge map is not special orthogonal at point {pts[k]}: "
                f"orthogonality defect {defect[k]:.3e}, det {dets[k]:.6f}"
            )
        return a0, a1, a2


class GaugeTransformedConnection:
    """omega' = a^-1 omega a + a^-1 da for an SO(3)-valued map a."""

    def __init__(self, base, gauge: SO3Map):
        self.base = base
        self.gauge = gauge

    def evaluate(self, pts) -> ConnectionBatch:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        cb = self.base.evaluate(pts)
        a0, a1, a2 = self.gauge.evaluate(pts)
        ainv = np.linalg.inv(a0)
        dainv = -np.einsum("nab,nmbc,ncd->nmad", ainv, a1, ainv)
        w0 = np.einsum("nab,nibc,ncd->niad", ainv, cb.omega0, a0) + np.einsum(
            "nab,nibd->niad", ainv, a1
        )
        w1 = (
            np.einsum("nmab,nibc,ncd->nmiad", dainv, cb.omega0, a0)
            + np.einsum("nab,nmibc,ncd->nmiad", ainv, cb.omega1, a0)
            + np.einsum("nab,nibc,nmcd->nmiad", ainv, cb.omega0, a1)
            + np.einsum("nmab,nibd->nmiad", dainv, a1)
            + np.einsum("nab,nmibd->nmiad", ainv, a2)
        )
        return ConnectionBatch(w0, w1, cb.asym_defect)


# --- derived form fields -----------------------------------------------------


def curvature_batch(cb: ConnectionBatch):
    """Omega[n, i, j, a, b] = (d omega + omega wedge omega)_{ij}."""
    dom = cb.omega1 - cb.omega1.transpose(0, 2, 1, 3, 4)
    ww = np.einsum("niab,njbc->nijac", cb.omega0, cb.omega0)
    return dom + ww - ww.transpose(0, 2, 1, 3, 4)


def cs_batch(cb: ConnectionBatch):
    """Coefficient of dx1^dx2^dx3 in tr(omega ^ d omega + 2/3 omega^3)."""
    w = cb.omega0
    dom = cb.omega1 - cb.omega1.transpose(0, 2, 1, 3, 4)
    term1 = (
        np.einsum("nab,nba->n", w[:, 0], dom[:, 1, 2])
        - np.einsum("nab,nba->n", w[:, 1], dom[:, 0, 2])
        + np.einsum("nab,nba->n", w[:, 2], dom[:, 0, 1])
    )
    t123 = np.einsum("nab,nbc,nca->n", w[:, 0], w[:, 1], w[:, 2])
    t132 = np.einsum("nab,nbc,nca->n", w[:, 0], w[:, 2], w[:, 1])
    return term1 + 2.0 * (t123 - t132)


def mc_cube_batch(a_field: SO3Map, pts):
    """Coefficient of dx1^dx2^dx3 in tr((a^-1 da)^3)."""
    a0, a1, _ = a_field.evaluate(pts)
    ainv = np.linalg.inv(a0)
    m = np.einsum("nab,nmbc->nmac", ainv, a1)
    t123 = np.einsum("nab,nbc,nca->n", m[:, 0], m[:, 1], m[:, 2])
    t132 = np.einsum("nab,nbc,nca->n", m[:, 0], m[:, 2], m[:, 1])
    return 3.0 * (t123 - t132)


def gauge_boundary_term_batch(base, a_field: SO3Map, pts):
    """Coefficient of dx1^dx2^dx3 in d tr(a^-1 omega ^ da)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    cb = base.evaluate(pts)
    a0, a1, a2 = a_field.evaluate(pts)
    ainv = np.linalg.inv(a0)
    dainv = -np.einsum("nab,nmbc,ncd->nmad", ainv, a1, ainv)
    alpha = np.einsum("nab,nibc->niac", ainv, cb.omega0)
    dalpha = np.einsum("nmab,nibc->nmiac", dainv, cb.omega0) + np.einsum(
        "nab,nmibc->nmiac", ainv, cb.omega1
    )
    # t_{ij} = tr(alpha_i beta_j - alpha_j beta_i), beta = da
    def dt(m, i, j):
        return (
            np.einsum("nab,nba->n", dalpha[:, m, i], a1[:, j])
            + np.einsum("nab,nba->n", alpha[:, i], a2[:, m, j])
            - np.einsum("nab,nba->n", dalpha[:, m, j], a1[:, i])
            - np.einsum("nab,nba->n", alpha[:, j], a2[:, m, i])
        )

    return dt(0, 1, 2) - dt(1, 0, 2) + dt(2, 0, 1)


# --- per-point spec operations ----------------------------------------------


@dataclass(frozen=True)
class ConnectionForm:
    """so(3)-valued connection 1-form at a point, plus the projection defect."""

    form: MVForm
    asym_defect: float


def connection_one_form(m: MetricSpec, frame, p) -> ConnectionForm:
    conn = LeviCivitaConnection(m, frame)
    cb = conn.evaluate(np.asarray(p, dtype=np.float64).reshape(1, 3))
    return ConnectionForm(
        MVForm(1, [cb.omega0[0, i] for i in range(3)]), cb.asym_defect
    )


def curvature_two_form(omega_field, p) -> MVForm:
    cb = omega_field.evaluate(np.asarray(p, dtype=np.float64).reshape(1, 3))
    om = curvature_batch(cb)[0]
    return MVForm(2, [om[0, 1], om[0, 2], om[1, 2]])


def cs_three_form(omega_field, p) -> MVForm:
    cb = omega_field.evaluate(np.asarray(p, dtype=np.float64).reshape(1, 3))
    return MVForm(3, [np.atleast_2d(cs_batch(cb)[0])])


def gauge_transform(omega_field, a: SO3Map) -> GaugeTransformedConnection:
    return GaugeTransformedConnection(omega_field, a)
