"""Complex structures, bigrading, Hodge star, torsion and balancedness."""
from .structures import (BigradedForm, ComplexStructureField, MetricField, NotHermitianError,
                         StructureError, induced_action)
from .pointwise import (DegenerateMetricError, evaluate_form, evaluate_matrix, exact_inverse,
                        hodge_star_at_point, hodge_star_numeric, pfaffian, positive_definite,
                        volume_density)
from .balanced import (BalancedReport, HermitianJet, HermitianPair, balanced_report,
                       bismut_torsion, chern_torsion, codifferential_omega, jet_from_callable,
                       orthonormal_frame, torsion_trace_bismut, torsion_trace_chern)


def project_pq(form, J: ComplexStructureField, p: int, q: int):
    """The (p, q) component of a homogeneous form."""
    degs = form.degrees()
    if degs and degs != {p + q}:
        raise ValueError(f"degree mismatch: form has degrees {sorted(degs)}, asked for ({p},{q})")
    return J.project(form, p, q)


def dc(form, J: ComplexStructureField):
    return J.dc(form)


def partial(form, J: ComplexStructureField):
    return J.partial(form)


def dbar(form, J: ComplexStructureField):
    return J.dbar(form)


__all__ = [
    "BigradedForm", "ComplexStructureField", "MetricField", "NotHermitianError", "StructureError",
    "induced_action", "DegenerateMetricError", "evaluate_form", "evaluate_matrix", "exact_inverse",
    "hodge_star_at_point", "hodge_star_numeric", "pfaffian", "positive_definite", "volume_density",
    "BalancedReport", "HermitianJet", "HermitianPair", "balanced_report", "bismut_torsion",
    "chern_torsion", "codifferential_omega", "jet_from_callable", "orthonormal_frame",
    "torsion_trace_bismut", "torsion_trace_chern", "project_pq", "dc", "partial", "dbar",
]
