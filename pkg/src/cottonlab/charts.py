"""Built-in charts and metric catalog.

The rotation group carries ZXZ Euler coordinates (x1, x2, x3) = (theta, phi,
psi) on [0, pi] x [0, 2 pi] x [0, 2 pi]; the bi-invariant metric induced by
the double cover of the unit sphere is (t = 1 below)

    g = [ t s1.s1 + s2.s2 + s3.s3 ] / 4

with s1 = cos(psi) dtheta + sin(psi) sin(theta) dphi,
     s2 = -sin(psi) dtheta + cos(psi) sin(theta) dphi,
     s3 = dpsi + cos(theta) dphi,

and the scaled family (Berger) stretches the first left-invariant direction
by t.  The orthonormal left-invariant frame is 2/sqrt(t) E1, 2 E2, 2 E3 with
E_a dual to s_a.  The 3-sphere uses the hyperspherical chart with the
quaternion frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .frames import ExprFrame, QuaternionSphereFrame, SO3Map
from .geometry import Box, MetricSpec


@dataclass(frozen=True)
class GroupChart:
    """A chart covering a compact group (minus a measure-zero set)."""

    name: str
    metric: MetricSpec
    frame: object
    periodic: tuple
    volume: float


def euclidean_metric(box=None) -> MetricSpec:
    box = box or Box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))
    return MetricSpec.from_components(
        "flat",
        {"g11": "1", "g12": "0", "g13": "0", "g22": "1", "g23": "0", "g33": "1"},
        box,
    )


def hyperbolic_metric() -> MetricSpec:
    return MetricSpec.from_components(
        "hyperbolic",
        {
            "g11": "1/(x3*x3)",
            "g12": "0",
            "g13": "0",
            "g22": "1/(x3*x3)",
            "g23": "0",
            "g33": "1/(x3*x3)",
        },
        Box((-1.0, -1.0, 0.5), (1.0, 1.0, 2.0)),
    )


def round_s3_metric(box=None, orientation=1) -> MetricSpec:
    """Unit round 3-sphere in hyperspherical coordinates."""
    box = box or Box((0.0, 0.0, 0.0), (math.pi, math.pi, 2.0 * math.pi))
    return MetricSpec.from_components(
        "round-s3-chart",
        {
            "g11": "1",
            "g12": "0",
            "g13": "0",
            "g22": "sin(x1)^2",
            "g23": "0",
            "g33": "sin(x1)^2*sin(x2)^2",
        },
        box,
        orientation,
    )


def round_s3_patch() -> MetricSpec:
    """Interior patch of the round sphere, safe for curvature sweeps."""
    h = math.pi / 2
    return round_s3_metric(Box((h - 0.7, h - 0.7, h - 0.7), (h + 0.7, h + 0.7, h + 0.7)))


def conformally_flat_metric(f, box=None, name="conformal-flat") -> MetricSpec:
    from .geometry import conformal_rescale

    m = euclidean_metric(box)
    out = conformal_rescale(m, f)
    return MetricSpec(name, out.entries, out.domain, out.orientation)


def perturbed_metric(eps=0.1) -> MetricSpec:
    """Generic analytic metric with nonzero Cotton tensor."""
    e = repr(float(eps))
    return MetricSpec.from_components(
        "perturbed",
        {
            "g11": f"1 + {e}*sin(x2)*cos(x3)",
            "g12": f"{e}*0.5*x1*x3",
            "g13": f"{e}*0.5*sin(x1 + x2)",
            "g22": f"1 + {e}*(exp(0.3*x1) - 1)",
            "g23": f"{e}*0.5*cos(x1)*x2",
            "g33": f"1 + {e}*x1*x1*x2",
        },
        Box((-0.8, -0.8, -0.8), (0.8, 0.8, 0.8)),
    )


def _berger_components(t):
    tt = repr(float(t))
    return {
        "g11": f"({tt}*cos(x3)^2 + sin(x3)^2)/4",
        "g12": f"({tt} - 1)*sin(x1)*sin(x3)*cos(x3)/4",
        "g13": "0",
        "g22": f"(({tt}*sin(x3)^2 + cos(x3)^2)*sin(x1)^2 + cos(x1)^2)/4",
        "g23": "cos(x1)/4",
        "g33": "1/4",
    }


def _berger_frame(t):
    s = repr(float(math.sqrt(t)))
    return ExprFrame(
        [
            [f"2*cos(x3)/{s}", f"2*sin(x3)/(sin(x1)*{s})", f"-2*sin(x3)*cos(x1)/(sin(x1)*{s})"],
            ["-2*sin(x3)", "2*cos(x3)/sin(x1)", "-2*cos(x3)*cos(x1)/sin(x1)"],
            ["0", "0", "2"],
        ]
    )


def berger_euler_chart(t=1.0) -> GroupChart:
    """Left-invariant Berger metric diag(t, 1, 1) on the Euler chart of SO(3)."""
    if t <= 0:
        raise ValueError("Berger parameter must be positive")
    box = Box((0.0, 0.0, 0.0), (math.pi, 2.0 * math.pi, 2.0 * math.pi))
    name = "so3-euler" if t == 1.0 else f"berger-euler:t={t:g}"
    metric = MetricSpec.from_components(name, _berger_components(t), box)
    return GroupChart(
        name,
        metric,
        _berger_frame(t),
        (False, True, True),
        volume=math.pi**2 * math.sqrt(t),
    )


def so3_euler_chart() -> GroupChart:
    return berger_euler_chart(1.0)


def s3_quaternion_chart() -> GroupChart:
    """Round 3-sphere with the quaternion frame on the hyperspherical chart.

    The chart orientation is the one in which the quaternion frame computes
    the Chern-Simons integral to -1.
    """
    metric = round_s3_metric(orientation=-1)
    return GroupChart(
        "s3-hyperspherical",
        metric,
        QuaternionSphereFrame(),
        (False, False, True),
        volume=2.0 * math.pi**2,
    )


def so3_identity_gauge() -> SO3Map:
    """The identity map of SO(3) in Euler coordinates, as a gauge field."""
    return SO3Map(
        [
            [
                "cos(x2)*cos(x3) - sin(x2)*cos(x1)*sin(x3)",
                "-cos(x2)*sin(x3) - sin(x2)*cos(x1)*cos(x3)",
                "sin(x2)*sin(x1)",
            ],
            [
                "sin(x2)*cos(x3) + cos(x2)*cos(x1)*sin(x3)",
                "-sin(x2)*sin(x3) + cos(x2)*cos(x1)*cos(x3)",
                "-cos(x2)*sin(x1)",
            ],
            ["sin(x1)*sin(x3)", "sin(x1)*cos(x3)", "cos(x1)"],
        ]
    )
