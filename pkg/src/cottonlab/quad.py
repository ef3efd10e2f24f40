"""Quadrature over boxes and parametrized compact domains.

Tensor-product Gauss-Legendre rules per axis, replaced by the composite
trapezoid rule on axes flagged periodic (spectrally accurate for smooth
periodic integrands).  Reductions use numpy's pairwise summation over a
fixed node ordering, so results are deterministic for a given order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteSampleError
from .frames import LeviCivitaConnection, cs_batch
from .geometry import Box, MetricSpec
from .jets import derivatives_from_jets, eval_jet_many, parse


def axis_rule(lo, hi, order, periodic=False):
    """Nodes and weights on one axis; trapezoid without the right endpoint
    when periodic, Gauss-Legendre otherwise."""
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    if periodic:
        h = (hi - lo) / order
        return lo + h * np.arange(order), np.full(order, h)
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * x, half * w


def grid_rule(box: Box, order, periodic=(False, False, False)):
    """Tensor-product nodes (n, 3) and weights (n,) over a box."""
    orders = (order, order, order) if np.isscalar(order) else tuple(order)
    axes = [
        axis_rule(box.lo[i], box.hi[i], orders[i], periodic[i]) for i in range(3)
    ]
    X, Y, Z = np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij")
    W = (
        axes[0][1][:, None, None]
        * axes[1][1][None, :, None]
        * axes[2][1][None, None, :]
    )
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    return pts, W.ravel()


def quadrature(f, box: Box, order=32, periodic=(False, False, False)):
    """Integrate a scalar function (vectorized over (n, 3) points)."""
    pts, w = grid_rule(box, order, periodic)
    vals = np.asarray(f(pts), dtype=np.float64)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NonFiniteSampleError(
            f"integrand is not finite at node ({pts[k][0]:g}, {pts[k][1]:g}, "
            f"{pts[k][2]:g})",
            node=tuple(pts[k]),
        )
    return float(np.sum(w * vals))


@dataclass(frozen=True)
class Parametrization:
    """Embedding of a box into R^3 or R^4 by component expressions."""

    domain: Box
    components: tuple
    periodic: tuple = (False, False, False)

    @classmethod
    def from_strings(cls, domain, comps, periodic=(False, False, False)):
        return cls(domain, tuple(parse(c) for c in comps), tuple(periodic))

    def jacobian_density(self, points):
        """sqrt(det J^T J) of the embedding at an (n, 3) batch."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n = pts.shape[0]
        k = len(self.components)
        J = np.empty((n, 3, k))
        for c, expr in enumerate(self.components):
            _, d1, _, _ = derivatives_from_jets(eval_jet_many(expr, pts))
            J[:, :, c] = d1
        gram = np.einsum("nmc,nlc->nml", J, J)
        det = np.linalg.det(gram)
        return np.sqrt(np.maximum(det, 0.0))

    def volume(self, order=32):
        return quadrature(self.jacobian_density, self.domain, order, self.periodic)


def s3_parametrization() -> Parametrization:
    """Unit 3-sphere in R^4, hyperspherical coordinates."""
    return Parametrization.from_strings(
        Box((0.0, 0.0, 0.0), (math.pi, math.pi, 2 * math.pi)),
        (
            "cos(x1)",
            "sin(x1)*cos(x2)",
            "sin(x1)*sin(x2)*cos(x3)",
            "sin(x1)*sin(x2)*sin(x3)",
        ),
        (False, False, True),
    )


def metric_volume(m: MetricSpec, order=32, periodic=(False, False, False)):
    """Riemannian volume of the chart box."""
    from .geometry import MetricData

    def density(pts):
        return MetricData(m, pts).sqrt_det

    return quadrature(density, m.domain, order, periodic)


def integrate_3form(coefficient, box: Box, order=32, periodic=(False, False, False),
                    orientation=1):
    """Integral of a 3-form given its dx1^dx2^dx3 coefficient function."""
    return orientation * quadrature(coefficient, box, order, periodic)


def cs_integral(m: MetricSpec, frame, order=32, periodic=(False, False, False)):
    """Integral of the Chern-Simons 3-form of the metric in the frame."""
    conn = LeviCivitaConnection(m, frame)

    def coefficient(pts):
        return cs_batch(conn.evaluate(pts))

    return integrate_3form(coefficient, m.domain, order, periodic, m.orientation)


def cs_invariant(m: MetricSpec, frame, order=32, periodic=(False, False, False)):
    """Chern-Simons invariant: -1/(16 pi^2) times the cs integral."""
    return -cs_integral(m, frame, order, periodic) / (16.0 * math.pi**2)


def cs_invariant_chart(chart, order=32):
    return cs_invariant(chart.metric, chart.frame, order, chart.periodic)
