"""cottonlab: numerical curvature, Cotton tensors and Chern-Simons invariants
for Riemannian 3-manifolds given by coordinate metrics or left-invariant data.
"""

from . import charts, errors, frames, geometry, lcf, liegroup, quad, tensor
from .geometry import Box, CurvaturePacket, MetricSpec
from .jets import Jet3, backend_name, eval_expr, eval_jet, parse, to_string
from .liegroup import LieAlgebraData, algebra
from .tensor import Frame, MVForm, gram_schmidt, hodge_star, trace_form, wedge

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CurvaturePacket",
    "Frame",
    "Jet3",
    "LieAlgebraData",
    "MVForm",
    "MetricSpec",
    "algebra",
    "backend_name",
    "charts",
    "errors",
    "eval_expr",
    "eval_jet",
    "frames",
    "geometry",
    "gram_schmidt",
    "hodge_star",
    "lcf",
    "liegroup",
    "parse",
    "quad",
    "tensor",
    "to_string",
    "trace_form",
    "wedge",
    "__version__",
]
