"""Exact coefficient ring and exterior algebra."""
from .scalars import (ChartPolynomial, DegreeOverflowError, GaussianRational, PolyRing,
                      TwistorScalar, as_gaussian)
from .forms import (ExteriorForm, FormEvaluator, Frame, FrameMismatchError, evaluate,
                    exterior_derivative, indices_of, mask_of, wedge)

__all__ = [
    "ChartPolynomial", "DegreeOverflowError", "GaussianRational", "PolyRing", "TwistorScalar",
    "as_gaussian", "ExteriorForm", "FormEvaluator", "Frame", "FrameMismatchError", "evaluate",
    "exterior_derivative", "indices_of", "mask_of", "wedge",
]
